//! Saint-Venant equations for a horizontal canal,
//! `A_t + (AV)_x = 0`, `V_t + S_x = 0`, `S = V²/2 + g H(A)`,
//! in Riemann invariants around a subcritical equilibrium `(Ã, Ṽ)`.
//!
//! With `G(A) = ∫_Ã^A sqrt(g H'(a) / a) da` the invariants are
//! `r = (V - Ṽ - G(A)) / 2` (speed `V - c`) and `s = (V - Ṽ + G(A)) / 2`
//! (speed `V + c`), where `c = sqrt(g A H'(A))`; both are transported without
//! source. The boundary conditions couple the two canal ends,
//! `S(t,0) - S(t,L) = h(t)` (or the water level `H(A(t,0)) - H(A(t,L)) = h`)
//! and `Q(t,0) - Q(t,L) = h̄(t)` with `Q = AV`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::quadrature::adaptive_simpson;
use super::Application;
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::newton::{self, NewtonOptions};
use crate::signal::Signal;
use crate::system::{BoundaryMap, ChartMap, ControlFn, DiagonalSystem, NonlocalBC, PhysicalChart};

const SIMPSON_TOL: f64 = 1e-12;
const INVERSE_MAX_ITER: usize = 100;

/// Depth as a function of wetted area, with its derivative.
#[derive(Clone)]
pub struct DepthLaw {
    depth: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    slope: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
}

impl fmt::Debug for DepthLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DepthLaw({})", self.label)
    }
}

impl DepthLaw {
    /// Rectangular channel of the given width: `H(A) = A / width`.
    pub fn rectangular(width: f64) -> Self {
        Self {
            depth: Arc::new(move |a| a / width),
            slope: Arc::new(move |_| 1.0 / width),
            label: format!("rectangular(width={width})"),
        }
    }

    /// `H(A) = coef * A^exponent`.
    pub fn power(coef: f64, exponent: f64) -> Self {
        Self {
            depth: Arc::new(move |a: f64| coef * a.powf(exponent)),
            slope: Arc::new(move |a: f64| coef * exponent * a.powf(exponent - 1.0)),
            label: format!("power(coef={coef}, exponent={exponent})"),
        }
    }

    pub fn custom(
        depth: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        slope: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        label: &str,
    ) -> Self {
        Self {
            depth,
            slope,
            label: label.to_string(),
        }
    }

    pub fn depth(&self, area: f64) -> f64 {
        (self.depth)(area)
    }

    pub fn slope(&self, area: f64) -> f64 {
        (self.slope)(area)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Canal geometry and equilibrium.
#[derive(Debug, Clone)]
pub struct CanalSpec {
    pub gravity: f64,
    pub depth: DepthLaw,
    /// Equilibrium wetted area `Ã`.
    pub area: f64,
    /// Equilibrium velocity `Ṽ`.
    pub velocity: f64,
    pub length: f64,
}

impl Default for CanalSpec {
    /// Unit-width rectangular channel, `g = 9.81`, `Ã = 2`, `Ṽ = 0.5`, `L = 1`.
    fn default() -> Self {
        Self {
            gravity: 9.81,
            depth: DepthLaw::rectangular(1.0),
            area: 2.0,
            velocity: 0.5,
            length: 1.0,
        }
    }
}

impl CanalSpec {
    /// Check `Ã > 0`, `H' > 0` on `[Ã/2, 2Ã]` and subcriticality.
    pub fn validate(&self) -> Result<()> {
        if !(self.area > 0.0) || !(self.gravity > 0.0) || !(self.length > 0.0) {
            return Err(Error::InvalidInput(
                "equilibrium area, gravity and length must be positive".into(),
            ));
        }
        for k in 0..=64 {
            let a = self.area * (0.5 + 1.5 * k as f64 / 64.0);
            let d = self.depth.slope(a);
            if !(d > 0.0) {
                return Err(Error::ConstraintViolated(format!(
                    "H'(A) = {d} is not positive at A = {a}"
                )));
            }
        }
        let v2 = self.velocity * self.velocity;
        let c2 = self.gravity * self.area * self.depth.slope(self.area);
        if v2 >= c2 {
            return Err(Error::SupercriticalEquilibrium { v2, c2 });
        }
        Ok(())
    }

    /// `c = sqrt(g A H'(A))`.
    pub fn celerity(&self, area: f64) -> f64 {
        (self.gravity * area * self.depth.slope(area)).sqrt()
    }

    /// `G'(A) = sqrt(g H'(A) / A)`.
    pub fn riemann_density(&self, area: f64) -> f64 {
        (self.gravity * self.depth.slope(area) / area).sqrt()
    }

    fn integrate_density(&self, from: f64, to: f64) -> f64 {
        adaptive_simpson(&|a| self.riemann_density(a), from, to, SIMPSON_TOL)
    }

    /// `G(A) = ∫_Ã^A G'(a) da`.
    pub fn riemann_integral(&self, area: f64) -> Result<f64> {
        if !(area > 0.0) {
            return Err(Error::ChartDomainExceeded(format!(
                "wetted area must be positive, got {area}"
            )));
        }
        let v = self.integrate_density(self.area, area);
        if !v.is_finite() {
            return Err(Error::NonFiniteEvaluation {
                what: format!("Riemann integral at A = {area}"),
            });
        }
        Ok(v)
    }

    /// `G⁻¹(y)` by Newton's method with step halving to keep `A > 0`.
    pub fn riemann_integral_inverse(&self, y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(self.area);
        }
        let mut a = self.area + y / self.riemann_density(self.area);
        if !(a > 0.0) {
            a = 0.5 * self.area;
        }
        let mut g = self.riemann_integral(a)?;
        for _ in 0..INVERSE_MAX_ITER {
            let res = g - y;
            if res.abs() <= 1e-15 * y.abs().max(1.0) {
                return Ok(a);
            }
            let mut step = res / self.riemann_density(a);
            if !step.is_finite() {
                break;
            }
            let mut next = a - step;
            while !(next > 0.0) {
                step *= 0.5;
                next = a - step;
            }
            g += self.integrate_density(a, next);
            a = next;
            if step.abs() <= 1e-15 * a {
                return Ok(a);
            }
        }
        Err(Error::ChartDomainExceeded(format!(
            "inverse Riemann integral did not converge for y = {y}"
        )))
    }

    /// Equilibrium speeds `(Ṽ - c̃, Ṽ + c̃)`.
    pub fn equilibrium_speeds(&self) -> (f64, f64) {
        sv_eigen(self.area, self.velocity, self)
    }

    /// `L * max(1/|λ̃₁|, 1/λ̃₂)`.
    pub fn min_control_time(&self) -> f64 {
        let (l1, l2) = self.equilibrium_speeds();
        self.length * (1.0 / l1.abs()).max(1.0 / l2)
    }

    /// Sup-norm radius in `(r, s)` inside which the chart is defined, the
    /// state stays subcritical and `A ∈ [Ã/2, 2Ã]`.
    pub fn admissible_radius(&self) -> Result<f64> {
        let lo = self.riemann_integral(0.5 * self.area)?.abs();
        let hi = self.riemann_integral(2.0 * self.area)?;
        let mut rho = 0.25 * lo.min(hi);
        'shrink: for _ in 0..60 {
            for k in 0..=16 {
                let y = 2.0 * rho * (2.0 * k as f64 / 16.0 - 1.0);
                let a = self.riemann_integral_inverse(y)?;
                let vmax = self.velocity.abs() + 2.0 * rho;
                if vmax >= self.celerity(a) {
                    rho *= 0.5;
                    continue 'shrink;
                }
            }
            return Ok(rho);
        }
        Err(Error::SupercriticalEquilibrium {
            v2: self.velocity * self.velocity,
            c2: self.celerity(self.area).powi(2),
        })
    }

    pub fn energy(&self, area: f64, velocity: f64) -> f64 {
        0.5 * velocity * velocity + self.gravity * self.depth.depth(area)
    }
}

/// `(A, V) -> (r, s)`.
pub fn sv_riemann(area: f64, velocity: f64, spec: &CanalSpec) -> Result<(f64, f64)> {
    let g = spec.riemann_integral(area)?;
    let dv = velocity - spec.velocity;
    Ok((0.5 * (dv - g), 0.5 * (dv + g)))
}

/// `(r, s) -> (A, V)`.
pub fn sv_physical(r: f64, s: f64, spec: &CanalSpec) -> Result<(f64, f64)> {
    let area = spec.riemann_integral_inverse(s - r)?;
    Ok((area, r + s + spec.velocity))
}

/// `(V - c, V + c)` with `c = sqrt(g A H'(A))`.
pub fn sv_eigen(area: f64, velocity: f64, spec: &CanalSpec) -> (f64, f64) {
    let c = spec.celerity(area);
    (velocity - c, velocity + c)
}

/// Which quantity the first boundary condition prescribes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvBoundaryKind {
    /// `S(t,0) - S(t,L) = h(t)`.
    Energy,
    /// `H(A(t,0)) - H(A(t,L)) = h(t)`.
    WaterLevel,
}

/// The pair of boundary relations `P₁ = P₂ = 0` and their solution for the
/// incoming invariants `(s(t,0), r(t,L))`.
#[derive(Debug, Clone)]
pub struct SvBoundary {
    spec: CanalSpec,
    kind: SvBoundaryKind,
}

impl SvBoundary {
    pub fn new(spec: CanalSpec, kind: SvBoundaryKind) -> Self {
        Self { spec, kind }
    }

    pub fn kind(&self) -> SvBoundaryKind {
        self.kind
    }

    /// `(P₁, P₂)` from physical end states.
    pub fn residuals_physical(&self, left: (f64, f64), right: (f64, f64), h: f64, hbar: f64) -> [f64; 2] {
        let sp = &self.spec;
        let (a1, v1) = left;
        let (a2, v2) = right;
        let p1 = match self.kind {
            SvBoundaryKind::Energy => {
                0.5 * (v1 * v1 - v2 * v2) + sp.gravity * (sp.depth.depth(a1) - sp.depth.depth(a2)) - h
            }
            SvBoundaryKind::WaterLevel => sp.depth.depth(a1) - sp.depth.depth(a2) - h,
        };
        [p1, a1 * v1 - a2 * v2 - hbar]
    }

    /// `(P₁, P₂)` from the invariants at both ends.
    pub fn residuals(&self, left: (f64, f64), right: (f64, f64), h: f64, hbar: f64) -> Result<[f64; 2]> {
        let l = sv_physical(left.0, left.1, &self.spec)?;
        let r = sv_physical(right.0, right.1, &self.spec)?;
        Ok(self.residuals_physical(l, r, h, hbar))
    }

    /// `∂(P₁, P₂)/∂(s₁, r₂)` at the given end states.
    pub fn jacobian(&self, left: (f64, f64), right: (f64, f64)) -> Result<DMatrix<f64>> {
        let sp = &self.spec;
        let (a1, v1) = sv_physical(left.0, left.1, sp)?;
        let (a2, v2) = sv_physical(right.0, right.1, sp)?;
        let (d1, d2) = (sp.riemann_density(a1), sp.riemann_density(a2));
        let (hp1, hp2) = (sp.depth.slope(a1), sp.depth.slope(a2));
        let (p1s, p1r) = match self.kind {
            SvBoundaryKind::Energy => (v1 + sp.gravity * hp1 / d1, -v2 + sp.gravity * hp2 / d2),
            SvBoundaryKind::WaterLevel => (hp1 / d1, hp2 / d2),
        };
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[p1s, p1r, v1 / d1 + a1, v2 / d2 - a2],
        ))
    }

    /// Determinant of the boundary Jacobian at the equilibrium.
    pub fn equilibrium_determinant(&self) -> Result<f64> {
        Ok(self.jacobian((0.0, 0.0), (0.0, 0.0))?.determinant())
    }

    /// Solve `P = 0` for `(s(t,0), r(t,L))` given `(r(t,0), s(t,L))`.
    pub fn solve(&self, r1: f64, s2: f64, h: f64, hbar: f64) -> Result<newton::NewtonOutcome> {
        newton::solve_with_jacobian(
            |x, out| {
                let p = self.residuals((r1, x[0]), (x[1], s2), h, hbar)?;
                out.copy_from_slice(&p);
                Ok(())
            },
            |x| self.jacobian((r1, x[0]), (x[1], s2)),
            &[0.0, 0.0],
            NewtonOptions::default(),
            "Saint-Venant boundary relations",
        )
    }
}

/// Diagonal system, nonlocal boundary conditions and chart.
///
/// With `h`, `hbar` absent the conditions are homogeneous (`H ≡ 0`).
/// Otherwise `G_in(t, w) = z*(t, w) - z*(t, 0)` and `H(t) = z*(t, 0)`, where
/// `z*(t, w)` solves the boundary relations with the given signals.
pub fn sv_build(
    spec: &CanalSpec,
    kind: SvBoundaryKind,
    h: Option<Signal>,
    hbar: Option<Signal>,
) -> Result<Application> {
    spec.validate()?;
    let boundary = SvBoundary::new(spec.clone(), kind);
    let det = boundary.equilibrium_determinant()?;
    if det.abs() <= 1e-12 || !det.is_finite() {
        return Err(Error::SingularBoundaryJacobian { det });
    }
    let radius = spec.admissible_radius()?;

    let sp = spec.clone();
    let speeds = Arc::new(move |v: &[f64], out: &mut [f64]| match sv_physical(v[0], v[1], &sp) {
        Ok((a, vel)) => {
            let (l1, l2) = sv_eigen(a, vel, &sp);
            out[0] = l1;
            out[1] = l2;
        }
        Err(_) => out.fill(f64::NAN),
    });
    let system = DiagonalSystem::new(
        2,
        1,
        1,
        spec.length,
        radius,
        speeds,
        Arc::new(|_, out| out.fill(0.0)),
    )?;

    let signals = match (h, hbar) {
        (None, None) => None,
        (h, hbar) => {
            let hz = h.clone().or_else(|| hbar.as_ref().map(|s| Signal::zero(s.horizon(), 2)));
            let hz = hz.expect("one signal present");
            let hb = hbar.unwrap_or_else(|| Signal::zero(hz.horizon(), 2));
            let h = h.unwrap_or_else(|| Signal::zero(hb.horizon(), 2));
            Some((h, hb))
        }
    };

    let bc = match signals {
        None => {
            let b = boundary.clone();
            let map: BoundaryMap = Arc::new(move |_, w, out| {
                let sol = b.solve(w[0], w[1], 0.0, 0.0)?;
                out.copy_from_slice(&sol.x);
                Ok(())
            });
            NonlocalBC::for_system(&system, map)
        }
        Some((h, hb)) => {
            let (b1, h1, hb1) = (boundary.clone(), h.clone(), hb.clone());
            let map: BoundaryMap = Arc::new(move |t, w, out| {
                let (ht, hbt) = (h1.eval(t), hb1.eval(t));
                let sol = b1.solve(w[0], w[1], ht, hbt)?;
                let base = b1.solve(0.0, 0.0, ht, hbt)?;
                out[0] = sol.x[0] - base.x[0];
                out[1] = sol.x[1] - base.x[1];
                Ok(())
            });
            let b2 = boundary.clone();
            let control: ControlFn = Arc::new(move |t, out| {
                let base = b2.solve(0.0, 0.0, h.eval(t), hb.eval(t))?;
                out.copy_from_slice(&base.x);
                Ok(())
            });
            NonlocalBC::for_system(&system, map).with_control_fn(control)
        }
    };

    Ok(Application {
        system,
        bc,
        chart: sv_chart(spec)?,
    })
}

/// Chart between `(A, V)` and `(r, s)`.
pub fn sv_chart(spec: &CanalSpec) -> Result<PhysicalChart> {
    let (s1, s2) = (spec.clone(), spec.clone());
    let to: ChartMap = Arc::new(move |u, v| {
        let (r, s) = sv_riemann(u[0], u[1], &s1)?;
        v[0] = r;
        v[1] = s;
        Ok(())
    });
    let from: ChartMap = Arc::new(move |v, u| {
        let (a, vel) = sv_physical(v[0], v[1], &s2)?;
        u[0] = a;
        u[1] = vel;
        Ok(())
    });
    PhysicalChart::new(
        to,
        from,
        vec![spec.area, spec.velocity],
        vec!["A".into(), "V".into()],
    )
}

/// Largest `|P₁|, |P₂|` over all time rows of a solved field, with the
/// boundary signals evaluated at the row times.
pub fn boundary_residuals(
    spec: &CanalSpec,
    kind: SvBoundaryKind,
    field: &GridField,
    h: &Signal,
    hbar: &Signal,
) -> Result<[f64; 2]> {
    let b = SvBoundary::new(spec.clone(), kind);
    let nx = field.nx();
    let mut worst = [0.0_f64; 2];
    for k in 0..=field.nt() {
        let t = field.t(k);
        let (l, r) = (field.point(k, 0), field.point(k, nx));
        let p = b.residuals((l[0], l[1]), (r[0], r[1]), h.eval(t), hbar.eval(t))?;
        worst[0] = worst[0].max(p[0].abs());
        worst[1] = worst[1].max(p[1].abs());
    }
    Ok(worst)
}

/// Physical control signals `(h, h̄)` read off the end traces of a field.
pub fn physical_controls(spec: &CanalSpec, kind: SvBoundaryKind, field: &GridField) -> Result<(Signal, Signal)> {
    let b = SvBoundary::new(spec.clone(), kind);
    let nx = field.nx();
    let mut h = Vec::with_capacity(field.nt() + 1);
    let mut hb = Vec::with_capacity(field.nt() + 1);
    for k in 0..=field.nt() {
        let (l, r) = (field.point(k, 0), field.point(k, nx));
        let p = b.residuals((l[0], l[1]), (r[0], r[1]), 0.0, 0.0)?;
        h.push(p[0]);
        hb.push(p[1]);
    }
    Ok((Signal::new(field.horizon(), h)?, Signal::new(field.horizon(), hb)?))
}

/// Physical state `(A, V)` from energy and discharge `(S, Q)` near the
/// equilibrium.
pub fn state_from_energy_discharge(spec: &CanalSpec, energy: f64, discharge: f64) -> Result<(f64, f64)> {
    let out = newton::solve(
        |x, r| {
            r[0] = spec.energy(x[0], x[1]) - energy;
            r[1] = x[0] * x[1] - discharge;
            Ok(())
        },
        &[spec.area, spec.velocity],
        NewtonOptions::default(),
        "energy/discharge inversion",
    )?;
    Ok((out.x[0], out.x[1]))
}

/// Invariants at `x = L` from those at `x = 0` through the boundary
/// relations with signals `(h, h̄)`.
pub fn far_end_invariants(b: &SvBoundary, left: (f64, f64), h: f64, hbar: f64) -> Result<(f64, f64)> {
    let out = newton::solve(
        |x, r| {
            let p = b.residuals(left, (x[0], x[1]), h, hbar)?;
            r.copy_from_slice(&p);
            Ok(())
        },
        &[left.0, left.1],
        NewtonOptions::default(),
        "far-end invariants",
    )?;
    Ok((out.x[0], out.x[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{validate_system, BoundaryRule};
    use rand::{Rng, SeedableRng};

    fn unit_canal() -> CanalSpec {
        CanalSpec {
            gravity: 1.0,
            depth: DepthLaw::rectangular(1.0),
            area: 1.0,
            velocity: 0.0,
            length: 1.0,
        }
    }

    #[test]
    fn equilibrium_maps_to_origin() {
        let sp = CanalSpec::default();
        assert_eq!(sv_riemann(sp.area, sp.velocity, &sp).unwrap(), (0.0, 0.0));
        assert_eq!(sv_physical(0.0, 0.0, &sp).unwrap(), (sp.area, sp.velocity));
    }

    #[test]
    fn closed_form_riemann_integral() {
        // g = 1, H = A, Ã = 1: G(A) = 2 (sqrt(A) - 1)
        let sp = unit_canal();
        for a in [0.5, 0.9, 1.3, 2.0] {
            let g = sp.riemann_integral(a).unwrap();
            assert!((g - 2.0 * (a.sqrt() - 1.0)).abs() < 1e-11);
        }
        // (A, V) = (1, Ṽ + 2) -> (1, 1)
        let (r, s) = sv_riemann(1.0, 2.0, &sp).unwrap();
        assert!((r - 1.0).abs() < 1e-14 && (s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chart_round_trip() {
        let sp = CanalSpec::default();
        for i in 0..20 {
            for j in 0..5 {
                let a = sp.area * (0.6 + 0.05 * i as f64);
                let v = sp.velocity + 0.2 * (j as f64 - 2.0);
                let (r, s) = sv_riemann(a, v, &sp).unwrap();
                let (a2, v2) = sv_physical(r, s, &sp).unwrap();
                assert!((a - a2).abs() < 1e-10 && (v - v2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn non_positive_area_is_outside_the_chart() {
        let sp = CanalSpec::default();
        assert_eq!(sv_riemann(-1.0, 0.0, &sp).unwrap_err().name(), "ChartDomainExceeded");
    }

    #[test]
    fn eigenvalues() {
        let sp = unit_canal();
        assert_eq!(sv_eigen(1.0, 0.0, &sp), (-1.0, 1.0));
        assert_eq!(sv_eigen(1.0, 0.5, &sp), (-0.5, 1.5));
        let (l1, _) = sv_eigen(1.0, 2.0, &sp);
        assert!(l1 > 0.0);
        let bad = CanalSpec {
            velocity: 2.0,
            ..unit_canal()
        };
        assert_eq!(bad.validate().unwrap_err().name(), "SupercriticalEquilibrium");
    }

    #[test]
    fn unit_canal_system_is_valid() {
        let app = sv_build(&unit_canal(), SvBoundaryKind::Energy, None, None).unwrap();
        assert_eq!(app.system.speeds_at_zero(), vec![-1.0, 1.0]);
        assert!(validate_system(&app.system, 100).unwrap().is_valid());
    }

    #[test]
    fn equilibrium_determinant_formula() {
        let sp = CanalSpec::default();
        let det = SvBoundary::new(sp.clone(), SvBoundaryKind::Energy)
            .equilibrium_determinant()
            .unwrap();
        let hp = sp.depth.slope(sp.area);
        let expected = 2.0 * (sp.area / (sp.gravity * hp)).sqrt()
            * (sp.velocity.powi(2) - sp.gravity * sp.area * hp);
        assert!(det < 0.0);
        assert!((det - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let sp = CanalSpec::default();
        for kind in [SvBoundaryKind::Energy, SvBoundaryKind::WaterLevel] {
            let b = SvBoundary::new(sp.clone(), kind);
            let (r1, s2) = (0.01, -0.02);
            let x = [0.015, 0.005];
            let jac = b.jacobian((r1, x[0]), (x[1], s2)).unwrap();
            let mut f = |y: &[f64], out: &mut [f64]| {
                out.copy_from_slice(&b.residuals((r1, y[0]), (y[1], s2), 0.0, 0.0)?);
                Ok(())
            };
            let fd = newton::fd_jacobian(&mut f, &x, 2).unwrap();
            assert!((jac - fd).abs().max() < 1e-7);
        }
    }

    #[test]
    fn equilibrium_traces_solve_in_zero_steps() {
        let b = SvBoundary::new(CanalSpec::default(), SvBoundaryKind::Energy);
        let out = b.solve(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(out.x, vec![0.0, 0.0]);
        assert!(out.iterations <= 1);
    }

    #[test]
    fn random_small_traces_satisfy_relations() {
        let sp = CanalSpec::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for kind in [SvBoundaryKind::Energy, SvBoundaryKind::WaterLevel] {
            let b = SvBoundary::new(sp.clone(), kind);
            for _ in 0..50 {
                let (r1, s2): (f64, f64) = (rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3));
                let (h, hb): (f64, f64) = (rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3));
                let sol = b.solve(r1, s2, h, hb).unwrap();
                let p = b.residuals((r1, sol.x[0]), (sol.x[1], s2), h, hb).unwrap();
                assert!(p[0].abs() <= 1e-12 && p[1].abs() <= 1e-12, "{p:?}");
            }
        }
    }

    #[test]
    fn boundary_map_vanishes_at_zero_with_controls() {
        let sp = CanalSpec::default();
        let h = Signal::from_fn(1.0, 11, |t| 1e-3 * t);
        let hb = Signal::from_fn(1.0, 11, |t| -2e-3 * t);
        let app = sv_build(&sp, SvBoundaryKind::Energy, Some(h), Some(hb)).unwrap();
        let mut out = [1.0, 1.0];
        app.bc.map(0.37, &[0.0, 0.0], &mut out).unwrap();
        assert_eq!(out, [0.0, 0.0]);
        app.bc.incoming(0.37, &[0.0, 0.0], &mut out).unwrap();
        assert!(out.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn energy_discharge_inversion() {
        let sp = CanalSpec::default();
        let (a, v) = (2.1, 0.45);
        let (a2, v2) = state_from_energy_discharge(&sp, sp.energy(a, v), a * v).unwrap();
        assert!((a - a2).abs() < 1e-10 && (v - v2).abs() < 1e-10);
    }
}
