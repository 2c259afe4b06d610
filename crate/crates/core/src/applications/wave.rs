//! Quasilinear wave equation `u_tt - K(u, u_x)_x = F(u, u_x, u_t)` on
//! `[0, L]` with the nonlocal conditions `u(t,0) - u(t,L) = h(t)` and
//! `u_x(t,0) - u_x(t,L) = h̄(t)`.
//!
//! With `v = u_x`, `w = u_t` and `Φ(u, v) = ∫_0^v sqrt(K_v(u, s)) ds` the
//! diagonal variables are
//!
//! ```text
//! V1 = w + Φ(u, v)   speed -sqrt(K_v)
//! V2 = u             speed 0
//! V3 = w - Φ(u, v)   speed +sqrt(K_v)
//! ```
//!
//! which reduce to `w ± sqrt(K_v) v` when `K_v` is constant. The boundary
//! condition on `u` is imposed in its differentiated form
//! `w(t,0) - w(t,L) = h'(t)`.

use std::fmt;
use std::sync::Arc;

use super::quadrature::adaptive_simpson;
use super::Application;
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::newton::{self, NewtonOptions};
use crate::signal::{Profile, Signal};
use crate::system::{BoundaryMap, ChartMap, ControlFn, DiagonalSystem, NonlocalBC, PhysicalChart};

pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Fn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

const POTENTIAL_TOL: f64 = 1e-13;
const INVERSE_MAX_ITER: usize = 60;

/// Flux, source and interval of a wave equation.
#[derive(Clone)]
pub struct WaveSpec {
    /// `K(u, v)`.
    pub flux: Fn2,
    /// `∂K/∂u`.
    pub flux_u: Fn2,
    /// `∂K/∂v`.
    pub flux_v: Fn2,
    /// `F(u, v, w)`.
    pub source: Fn3,
    /// `Φ(u, v)` in closed form, if known; otherwise computed by quadrature.
    pub potential: Option<Fn2>,
    pub length: f64,
    /// Sup-norm radius of the admissible ball in diagonal variables.
    pub radius: f64,
    pub label: String,
}

impl fmt::Debug for WaveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveSpec")
            .field("label", &self.label)
            .field("length", &self.length)
            .field("radius", &self.radius)
            .finish()
    }
}

impl WaveSpec {
    /// `K = c² v`, `F = 0`.
    pub fn linear(speed: f64, length: f64) -> Self {
        let c2 = speed * speed;
        Self {
            flux: Arc::new(move |_, v| c2 * v),
            flux_u: Arc::new(|_, _| 0.0),
            flux_v: Arc::new(move |_, _| c2),
            source: Arc::new(|_, _, _| 0.0),
            potential: Some(Arc::new(move |_, v| speed * v)),
            length,
            radius: 1.0,
            label: format!("linear(c={speed})"),
        }
    }

    /// `K = c² v + κ v³ / 3`, `F = 0`, so `K_v = c² + κ v²`.
    pub fn cubic(speed: f64, kappa: f64, length: f64) -> Self {
        let c2 = speed * speed;
        let potential: Fn2 = if kappa > 0.0 {
            let k = kappa.sqrt();
            Arc::new(move |_, v| {
                0.5 * v * (c2 + kappa * v * v).sqrt() + 0.5 * c2 / k * (k * v / speed).asinh()
            })
        } else if kappa < 0.0 {
            let k = (-kappa).sqrt();
            Arc::new(move |_, v| {
                0.5 * v * (c2 + kappa * v * v).sqrt() + 0.5 * c2 / k * (k * v / speed).asin()
            })
        } else {
            Arc::new(move |_, v| speed * v)
        };
        Self {
            flux: Arc::new(move |_, v| c2 * v + kappa * v * v * v / 3.0),
            flux_u: Arc::new(|_, _| 0.0),
            flux_v: Arc::new(move |_, v| c2 + kappa * v * v),
            source: Arc::new(|_, _, _| 0.0),
            potential: Some(potential),
            length,
            radius: 0.5,
            label: format!("cubic(c={speed}, kappa={kappa})"),
        }
    }

    /// Linear Klein-Gordon equation `u_tt - c² u_xx = -μ² u`.
    pub fn klein_gordon(speed: f64, mass: f64, length: f64) -> Self {
        let m2 = mass * mass;
        Self {
            source: Arc::new(move |u, _, _| -m2 * u),
            label: format!("klein-gordon(c={speed}, mass={mass})"),
            ..Self::linear(speed, length)
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// `K_v(0,0) > 0` and `F(0,0,0) = 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !(self.radius > 0.0) {
            return Err(Error::InvalidInput("length and radius must be positive".into()));
        }
        let kv = (self.flux_v)(0.0, 0.0);
        if !(kv > 0.0) {
            return Err(Error::DegenerateFlux { value: kv });
        }
        let f0 = (self.source)(0.0, 0.0, 0.0);
        if f0 != 0.0 {
            return Err(Error::ConstraintViolated(format!("F(0,0,0) = {f0} is not zero")));
        }
        Ok(())
    }

    /// `sqrt(K_v(u, v))`.
    pub fn speed(&self, u: f64, v: f64) -> Result<f64> {
        let kv = (self.flux_v)(u, v);
        if !(kv > 0.0) {
            return Err(Error::DegenerateFlux { value: kv });
        }
        Ok(kv.sqrt())
    }

    /// `Φ(u, v) = ∫_0^v sqrt(K_v(u, s)) ds`.
    pub fn potential(&self, u: f64, v: f64) -> f64 {
        match &self.potential {
            Some(p) => p(u, v),
            None => adaptive_simpson(
                &|s| (self.flux_v)(u, s).max(0.0).sqrt(),
                0.0,
                v,
                POTENTIAL_TOL,
            ),
        }
    }

    /// `∂Φ/∂u` by central differences (exactly zero when `K` ignores `u`).
    pub fn potential_u(&self, u: f64, v: f64) -> f64 {
        let h = 1e-6 * u.abs().max(1.0);
        (self.potential(u + h, v) - self.potential(u - h, v)) / (2.0 * h)
    }

    /// Solve `Φ(u, v) = q` for `v`.
    pub fn invert_potential(&self, u: f64, q: f64) -> Result<f64> {
        if q == 0.0 {
            return Ok(0.0);
        }
        let mut v = q / self.speed(u, 0.0)?;
        for _ in 0..INVERSE_MAX_ITER {
            let res = self.potential(u, v) - q;
            let step = res / self.speed(u, v)?;
            v -= step;
            if step.abs() <= 1e-15 * v.abs().max(1e-300) || res == 0.0 {
                return Ok(v);
            }
        }
        Err(Error::ChartDomainExceeded(format!(
            "could not recover u_x from the diagonal variables at q = {q}"
        )))
    }

    /// `L / sqrt(K_v(0,0))`.
    pub fn min_control_time(&self) -> f64 {
        self.length / (self.flux_v)(0.0, 0.0).sqrt()
    }

    /// Whether `K` or `F` visibly depend on `u` at sampled points.
    pub fn depends_on_u(&self) -> bool {
        let r = self.radius;
        (0..9).any(|k| {
            let v = r * (k as f64 / 4.0 - 1.0);
            let w = 0.5 * v;
            [-r, -0.3 * r, 0.7 * r].iter().any(|&u| {
                (self.flux)(u, v) - (self.flux)(0.0, v) != 0.0
                    || (self.flux_v)(u, v) != (self.flux_v)(0.0, v)
                    || (self.source)(u, v, w) != (self.source)(0.0, v, w)
            })
        })
    }

    /// Physical `(u, v, w)` to diagonal `(V1, V2, V3)`.
    pub fn to_diag(&self, u: f64, v: f64, w: f64) -> [f64; 3] {
        let p = self.potential(u, v);
        [w + p, u, w - p]
    }

    /// Diagonal `(V1, V2, V3)` to physical `(u, v, w)`.
    pub fn from_diag(&self, d: &[f64]) -> Result<[f64; 3]> {
        let u = d[1];
        let v = self.invert_potential(u, 0.5 * (d[0] - d[2]))?;
        Ok([u, v, 0.5 * (d[0] + d[2])])
    }

    /// Diagonal sources at a physical state.
    fn diag_sources(&self, u: f64, v: f64, w: f64) -> Result<[f64; 3]> {
        let c = self.speed(u, v)?;
        let forcing = (self.source)(u, v, w) + (self.flux_u)(u, v) * v;
        let pu = self.potential_u(u, v);
        Ok([forcing + pu * (w - c * v), w, forcing - pu * (w + c * v)])
    }
}

/// Chart between `(u, u_x, u_t)` and `(V1, V2, V3)`.
pub fn wave_chart(spec: &WaveSpec) -> PhysicalChart {
    let (s1, s2) = (spec.clone(), spec.clone());
    let to: ChartMap = Arc::new(move |p, d| {
        d.copy_from_slice(&s1.to_diag(p[0], p[1], p[2]));
        Ok(())
    });
    let from: ChartMap = Arc::new(move |d, p| {
        p.copy_from_slice(&s2.from_diag(d)?);
        Ok(())
    });
    PhysicalChart::new(
        to,
        from,
        vec![0.0; 3],
        vec!["u".into(), "u_x".into(), "u_t".into()],
    )
    .expect("wave chart maps the origin to the origin")
}

fn wave_system(spec: &WaveSpec) -> Result<DiagonalSystem> {
    spec.validate()?;
    let (s1, s2) = (spec.clone(), spec.clone());
    let speeds = Arc::new(move |d: &[f64], out: &mut [f64]| {
        match s1.from_diag(d).and_then(|p| s1.speed(p[0], p[1])) {
            Ok(c) => {
                out[0] = -c;
                out[1] = 0.0;
                out[2] = c;
            }
            Err(_) => out.fill(f64::NAN),
        }
    });
    let source = Arc::new(move |d: &[f64], out: &mut [f64]| {
        match s2.from_diag(d).and_then(|p| s2.diag_sources(p[0], p[1], p[2])) {
            Ok(f) => out.copy_from_slice(&f),
            Err(_) => out.fill(f64::NAN),
        }
    });
    DiagonalSystem::new(3, 1, 2, spec.length, spec.radius, speeds, source)
}

/// The relations `w(0) - w(L) = h'` and `v(0) - v(L) = h̄`, solved for the
/// incoming `(V3(t,0), V1(t,L))`.
#[derive(Debug, Clone)]
pub struct WaveBoundary {
    spec: WaveSpec,
}

impl WaveBoundary {
    pub fn new(spec: WaveSpec) -> Self {
        Self { spec }
    }

    /// Residuals for full diagonal states at both ends.
    pub fn residuals(&self, left: &[f64], right: &[f64], dh: f64, hbar: f64) -> Result<[f64; 2]> {
        let a = self.spec.from_diag(left)?;
        let b = self.spec.from_diag(right)?;
        Ok([a[2] - b[2] - dh, a[1] - b[1] - hbar])
    }

    /// `det ∂(P1, P2)/∂(V3(0), V1(L))` at the origin, `-1 / (2 sqrt(K_v(0,0)))`.
    pub fn equilibrium_determinant(&self) -> Result<f64> {
        Ok(-0.5 / self.spec.speed(0.0, 0.0)?)
    }

    /// Incoming `(V3(0), V1(L))` from outgoing `(V1(0), V2(0), V2(L), V3(L))`.
    pub fn solve(&self, w: &[f64], dh: f64, hbar: f64) -> Result<[f64; 2]> {
        let c = self.spec.speed(0.0, 0.0)?;
        let guess = [w[3] + dh - c * hbar, w[0] - dh - c * hbar];
        let out = newton::solve(
            |z, r| {
                let left = [w[0], w[1], z[0]];
                let right = [z[1], w[2], w[3]];
                r.copy_from_slice(&self.residuals(&left, &right, dh, hbar)?);
                Ok(())
            },
            &guess,
            NewtonOptions::default(),
            "wave boundary relations",
        )?;
        Ok([out.x[0], out.x[1]])
    }
}

/// Diagonal system with periodic conditions (`h = h̄ = 0`).
pub fn wave_build(spec: &WaveSpec) -> Result<Application> {
    let system = wave_system(spec)?;
    let boundary = WaveBoundary::new(spec.clone());
    check_determinant(&boundary)?;
    let map: BoundaryMap = Arc::new(move |_, w, out| {
        out.copy_from_slice(&boundary.solve(w, 0.0, 0.0)?);
        Ok(())
    });
    Ok(Application {
        bc: NonlocalBC::for_system(&system, map),
        system,
        chart: wave_chart(spec),
    })
}

fn check_determinant(b: &WaveBoundary) -> Result<()> {
    let det = b.equilibrium_determinant()?;
    if !(det.abs() > 1e-12) {
        return Err(Error::SingularBoundaryJacobian { det });
    }
    Ok(())
}

/// Boundary conditions with signals `h` (through `h'`) and `h̄`.
///
/// `phi` is the initial displacement; `φ(0) - φ(L) = h(0)` must hold to
/// `1e-10`. As for Saint-Venant, `G_in(t, w) = z*(t, w) - z*(t, 0)` and
/// `H(t) = z*(t, 0)`.
pub fn wave_bc(spec: &WaveSpec, h: &Signal, hbar: &Signal, phi: &Profile) -> Result<NonlocalBC> {
    let gap = phi.value(0, 0) - phi.value(0, phi.nx()) - h.eval(0.0);
    if gap.abs() > 1e-10 {
        return Err(Error::IncompatibleData {
            residual: gap.abs(),
            tolerance: 1e-10,
        });
    }
    let boundary = WaveBoundary::new(spec.clone());
    check_determinant(&boundary)?;
    let (b1, h1, hb1) = (boundary.clone(), h.clone(), hbar.clone());
    let map: BoundaryMap = Arc::new(move |t, w, out| {
        let (dh, hb) = (h1.derivative_at(t), hb1.eval(t));
        let z = b1.solve(w, dh, hb)?;
        let z0 = b1.solve(&[0.0; 4], dh, hb)?;
        out[0] = z[0] - z0[0];
        out[1] = z[1] - z0[1];
        Ok(())
    });
    let (h2, hb2) = (h.clone(), hbar.clone());
    let control: ControlFn = Arc::new(move |t, out| {
        out.copy_from_slice(&boundary.solve(&[0.0; 4], h2.derivative_at(t), hb2.eval(t))?);
        Ok(())
    });
    Ok(NonlocalBC::new(4, 2, map).with_control_fn(control))
}

/// Largest `|u(t,0) - u(t,L) - h(t)|` over the rows of a solved field.
pub fn displacement_gap(field: &GridField, h: &Signal) -> f64 {
    let nx = field.nx();
    (0..=field.nt())
        .map(|k| (field.value(1, k, 0) - field.value(1, k, nx) - h.eval(field.t(k))).abs())
        .fold(0.0, f64::max)
}

/// Diagonal initial data from displacement `phi` and velocity `psi`
/// (single-component profiles on a common grid); `u_x` by differences.
pub fn wave_initial(spec: &WaveSpec, phi: &Profile, psi: &Profile) -> Result<Profile> {
    let ux = gradient(&phi.component(0), phi.dx());
    let mut out = Profile::zeros(phi.length(), 3, phi.nx());
    for j in 0..=phi.nx() {
        out.point_mut(j)
            .copy_from_slice(&spec.to_diag(phi.value(0, j), ux[j], psi.value(0, j)));
    }
    Ok(out)
}

/// Second-order differences: centred inside, one-sided at the ends.
pub fn gradient(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        return vec![if n == 2 { (values[1] - values[0]) / step } else { 0.0 }; n];
    }
    let mut g = vec![0.0; n];
    g[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * step);
    g[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * step);
    for j in 1..n - 1 {
        g[j] = (values[j + 1] - values[j - 1]) / (2.0 * step);
    }
    g
}

/// Cumulative trapezoid integral starting from `start`.
pub fn cumulative_trapezoid(values: &[f64], step: f64, start: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = start;
    out.push(acc);
    for w in values.windows(2) {
        acc += 0.5 * step * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Discrete residual of the diagonal system evaluated on a given smooth
/// `(u, u_x, u_t)`: forward differences in `t` and `x`, sup over the grid.
pub fn manufactured_residual(
    spec: &WaveSpec,
    exact: &dyn Fn(f64, f64) -> [f64; 3],
    horizon: f64,
    nt: usize,
    nx: usize,
) -> Result<f64> {
    let sys = wave_system(spec)?;
    let (dt, dx) = (horizon / nt as f64, spec.length / nx as f64);
    let diag = |t: f64, x: f64| {
        let p = exact(t, x);
        spec.to_diag(p[0], p[1], p[2])
    };
    let (mut lam, mut f) = ([0.0; 3], [0.0; 3]);
    let mut worst = 0.0_f64;
    for k in 0..nt {
        let t = k as f64 * dt;
        for j in 0..nx {
            let x = j as f64 * dx;
            let v = diag(t, x);
            let (vt, vx) = (diag(t + dt, x), diag(t, x + dx));
            sys.speeds(&v, &mut lam);
            sys.source(&v, &mut f);
            for i in 0..3 {
                let r = (vt[i] - v[i]) / dt + lam[i] * (vx[i] - v[i]) / dx - f[i];
                if !r.is_finite() {
                    return Err(Error::NonFiniteEvaluation {
                        what: "manufactured residual".into(),
                    });
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::forward::{solve_forward, SolverOptions};
    use crate::system::validate_system;

    #[test]
    fn linear_eigenvalues_and_chart() {
        let spec = WaveSpec::linear(1.0, 1.0);
        let app = wave_build(&spec).unwrap();
        assert_eq!(app.system.speeds_at_zero(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(spec.to_diag(0.2, 0.3, 0.5), [0.8, 0.2, 0.2]);
        let p = spec.from_diag(&[0.8, 0.2, 0.2]).unwrap();
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
        assert!(validate_system(&app.system, 100).unwrap().is_valid());
    }

    #[test]
    fn inverse_jacobian_at_origin() {
        // ∂(u, v, w)/∂(V1, V2, V3) = [[0,1,0],[1/2c,0,-1/2c],[1/2,0,1/2]]
        let c = 1.7;
        let spec = WaveSpec::cubic(c, 0.4, 1.0);
        let eps = 1e-6;
        let expected = [[0.0, 1.0, 0.0], [0.5 / c, 0.0, -0.5 / c], [0.5, 0.0, 0.5]];
        for col in 0..3 {
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            a[col] = eps;
            b[col] = -eps;
            let (pa, pb) = (spec.from_diag(&a).unwrap(), spec.from_diag(&b).unwrap());
            for row in 0..3 {
                let d = (pa[row] - pb[row]) / (2.0 * eps);
                assert!((d - expected[row][col]).abs() < 1e-8, "{row} {col}: {d}");
            }
        }
    }

    #[test]
    fn cubic_potential_matches_quadrature() {
        let spec = WaveSpec::cubic(1.3, 0.8, 1.0);
        let generic = WaveSpec {
            potential: None,
            ..spec.clone()
        };
        for v in [-0.4, -0.05, 0.1, 0.45] {
            assert!((spec.potential(0.0, v) - generic.potential(0.0, v)).abs() < 1e-12);
        }
        let soft = WaveSpec::cubic(1.3, -0.8, 1.0);
        let generic = WaveSpec {
            potential: None,
            ..soft.clone()
        };
        assert!((soft.potential(0.0, 0.3) - generic.potential(0.0, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn chart_round_trip_cubic() {
        let spec = WaveSpec::cubic(1.0, 1.0, 1.0);
        for k in 0..100 {
            let s = k as f64 / 99.0 - 0.5;
            let p = [0.3 * s, 0.4 * (3.0 * s).sin(), -0.2 * s];
            let back = spec.from_diag(&spec.to_diag(p[0], p[1], p[2])).unwrap();
            for i in 0..3 {
                assert!((back[i] - p[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn periodic_closed_form() {
        let spec = WaveSpec::linear(2.0, 1.0);
        let b = WaveBoundary::new(spec);
        let w = [0.1, -0.3, 0.2, 0.05];
        let (dh, hb) = (0.02, -0.01);
        let z = b.solve(&w, dh, hb).unwrap();
        assert!((z[0] - (w[3] + dh - 2.0 * hb)).abs() < 1e-14);
        assert!((z[1] - (w[0] - dh - 2.0 * hb)).abs() < 1e-14);
        assert_eq!(b.solve(&[0.0; 4], 0.0, 0.0).unwrap(), [0.0, 0.0]);
        assert_eq!(b.equilibrium_determinant().unwrap(), -0.25);
    }

    #[test]
    fn displacement_condition_is_checked() {
        let spec = WaveSpec::linear(1.0, 1.0);
        let phi = Profile::from_fn(1.0, 1, 20, |x, o| o[0] = 0.01 * x);
        let zero = Signal::zero(1.0, 11);
        assert_eq!(wave_bc(&spec, &zero, &zero, &phi).unwrap_err().name(), "IncompatibleData");
        let h = Signal::from_fn(1.0, 11, |t| -0.01 + 0.001 * t);
        assert!(wave_bc(&spec, &h, &zero, &phi).is_ok());
    }

    #[test]
    fn zero_state_stays_zero() {
        let spec = WaveSpec::cubic(1.0, 0.5, 1.0);
        let app = wave_build(&spec).unwrap();
        let f = solve_forward(
            &app.system,
            &app.bc,
            &Profile::zeros(1.0, 3, 40),
            1.0,
            40,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn klein_gordon_residual_is_first_order() {
        let spec = WaveSpec::klein_gordon(1.0, 1.0, 1.0);
        let (k, om) = (2.0 * std::f64::consts::PI, (4.0 * std::f64::consts::PI.powi(2) + 1.0).sqrt());
        let exact = move |t: f64, x: f64| {
            let a = 0.01;
            let ph = k * x - om * t;
            [a * ph.sin(), a * k * ph.cos(), -a * om * ph.cos()]
        };
        let r1 = manufactured_residual(&spec, &exact, 0.5, 100, 100).unwrap();
        let r2 = manufactured_residual(&spec, &exact, 0.5, 200, 200).unwrap();
        let ratio = r1 / r2;
        assert!((1.8..2.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn gradient_and_trapezoid() {
        let xs: Vec<f64> = (0..=10).map(|j| j as f64 * 0.1).collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let g = gradient(&sq, 0.1);
        for (gi, x) in g.iter().zip(&xs) {
            assert!((gi - 2.0 * x).abs() < 1e-12);
        }
        let c = cumulative_trapezoid(&vec![1.0; 11], 0.1, 2.0);
        assert!((c[10] - 3.0).abs() < 1e-14);
    }
}
