//! Explicit first-order upwind integration of the mixed initial-boundary
//! value problem.

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::signal::Profile;
use crate::system::{BoundaryRule, DiagonalSystem};

/// Fraction of the stability limit used for the time step.
pub const CFL_FACTOR: f64 = 0.9;
/// Floor on the maximal speed in the step-size rule.
pub const SPEED_FLOOR: f64 = 1e-12;
/// Largest accepted C⁰ corner residual.
pub const COMPAT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub cfl: f64,
    /// Force the number of time steps instead of deriving it from `cfl`.
    pub steps: Option<usize>,
    /// Abort when the C⁰ corner residual exceeds this value; `None` skips
    /// the check.
    pub compat_tol: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cfl: CFL_FACTOR,
            steps: None,
            compat_tol: Some(COMPAT_TOL),
        }
    }
}

impl SolverOptions {
    pub fn unchecked() -> Self {
        Self {
            compat_tol: None,
            ..Self::default()
        }
    }
}

/// Largest `|λ_i|` over all points of a profile.
pub fn max_speed(sys: &DiagonalSystem, slice: &Profile) -> f64 {
    let mut lam = vec![0.0; sys.n()];
    let mut s = 0.0_f64;
    for j in 0..=slice.nx() {
        sys.speeds(slice.point(j), &mut lam);
        s = lam.iter().fold(s, |a, v| a.max(v.abs()));
    }
    s
}

/// `CFL_FACTOR * dx / max(ε, max |λ|)` evaluated on `slice`.
pub fn cfl_dt(sys: &DiagonalSystem, slice: &Profile, dx: f64) -> f64 {
    CFL_FACTOR * dx / max_speed(sys, slice).max(SPEED_FLOOR)
}

/// Number of uniform steps covering `[0, horizon]`.
pub fn time_steps(
    sys: &DiagonalSystem,
    phi: &Profile,
    horizon: f64,
    dx: f64,
    opts: &SolverOptions,
) -> usize {
    if let Some(s) = opts.steps {
        return s.max(1);
    }
    let dt = opts.cfl * dx / max_speed(sys, phi).max(SPEED_FLOOR);
    ((horizon / dt).ceil() as usize).max(1)
}

/// One explicit step of the interior scheme on a full row.
///
/// Nodes whose upwind neighbour lies outside the grid are left to the
/// caller (boundary update); every value also receives `dt * f(v)`.
pub(crate) struct Stepper<'a> {
    sys: &'a DiagonalSystem,
    nx: usize,
    dt: f64,
    dx: f64,
    lam: Vec<f64>,
    src: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(sys: &'a DiagonalSystem, nx: usize, dt: f64, dx: f64) -> Self {
        let len = sys.n() * (nx + 1);
        Self {
            sys,
            nx,
            dt,
            dx,
            lam: vec![0.0; len],
            src: vec![0.0; len],
        }
    }

    pub(crate) fn advance(&mut self, old: &[f64], new: &mut [f64]) -> Result<()> {
        let n = self.sys.n();
        let nx = self.nx;
        for j in 0..=nx {
            let r = j * n..(j + 1) * n;
            self.sys.speeds(&old[r.clone()], &mut self.lam[r.clone()]);
            self.sys.source(&old[r.clone()], &mut self.src[r]);
        }
        if self.lam.iter().chain(&self.src).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation {
                what: "speeds or source on the current row".into(),
            });
        }
        let ratio = self.dt / self.dx;
        let mut courant = 0.0_f64;
        for j in 0..=nx {
            for i in 0..n {
                let p = j * n + i;
                let s = self.lam[p];
                let v = old[p];
                let c = s.abs() * ratio;
                courant = courant.max(c);
                let moved = if s > 0.0 && j > 0 {
                    v - c * (v - old[p - n])
                } else if s < 0.0 && j < nx {
                    v - c * (v - old[p + n])
                } else {
                    v
                };
                new[p] = moved + self.dt * self.src[p];
            }
        }
        if courant > 1.0 + 1e-12 {
            return Err(Error::CflViolation { courant });
        }
        Ok(())
    }
}

pub(crate) fn check_row(row: &[f64], radius: f64, t: f64) -> Result<()> {
    let mut norm = 0.0_f64;
    for v in row {
        if !v.is_finite() {
            return Err(Error::NonFiniteEvaluation {
                what: format!("solution at t = {t}"),
            });
        }
        norm = norm.max(v.abs());
    }
    if norm > radius {
        return Err(Error::AdmissibleBallExceeded { norm, radius, t });
    }
    Ok(())
}

fn apply_boundary(
    sys: &DiagonalSystem,
    rule: &dyn BoundaryRule,
    t: f64,
    row: &mut [f64],
    w: &mut [f64],
    z: &mut [f64],
) -> Result<()> {
    let n = sys.n();
    let len = row.len();
    let (left, rest) = row.split_at_mut(n);
    let right = &mut rest[len - 2 * n..];
    sys.outgoing(left, right, w);
    rule.incoming(t, w, z)?;
    sys.scatter_incoming(z, left, right);
    Ok(())
}

/// C⁰ residual of `phi` against `rule` at `t = 0`.
pub fn corner_residual(sys: &DiagonalSystem, rule: &dyn BoundaryRule, phi: &Profile) -> Result<f64> {
    let nx = phi.nx();
    let mut w = vec![0.0; sys.n_outgoing()];
    let mut z = vec![0.0; sys.n_incoming()];
    let mut zphi = vec![0.0; sys.n_incoming()];
    sys.outgoing(phi.point(0), phi.point(nx), &mut w);
    sys.incoming(phi.point(0), phi.point(nx), &mut zphi);
    rule.incoming(0.0, &w, &mut z)?;
    Ok(z.iter().zip(&zphi).fold(0.0, |a, (p, q)| a.max((p - q).abs())))
}

fn prepare(sys: &DiagonalSystem, phi: &Profile, horizon: f64, nx: usize) -> Result<Profile> {
    if nx < 2 {
        return Err(Error::GridTooCoarse {
            points: nx + 1,
            required: 3,
        });
    }
    if phi.n() != sys.n() {
        return Err(Error::InvalidInput(format!(
            "initial profile has {} components, system has {}",
            phi.n(),
            sys.n()
        )));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let phi = phi.resample(nx);
    Profile::new(sys.length(), sys.n(), phi.values().to_vec())
}

/// March the mixed problem, handing every computed row to `record`.
pub(crate) fn march(
    sys: &DiagonalSystem,
    rule: &dyn BoundaryRule,
    phi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &SolverOptions,
    mut record: impl FnMut(usize, &[f64]),
) -> Result<usize> {
    let phi = prepare(sys, phi, horizon, nx)?;
    if let Some(tol) = opts.compat_tol {
        let residual = corner_residual(sys, rule, &phi)?;
        if residual > tol {
            return Err(Error::IncompatibleData {
                residual,
                tolerance: tol,
            });
        }
    }
    check_row(phi.values(), sys.radius(), 0.0)?;
    let dx = sys.length() / nx as f64;
    let nt = time_steps(sys, &phi, horizon, dx, opts);
    let dt = horizon / nt as f64;
    let mut stepper = Stepper::new(sys, nx, dt, dx);
    let mut old = phi.values().to_vec();
    let mut new = old.clone();
    let mut w = vec![0.0; sys.n_outgoing()];
    let mut z = vec![0.0; sys.n_incoming()];
    record(0, &old);
    for k in 0..nt {
        let t = (k + 1) as f64 * dt;
        stepper.advance(&old, &mut new)?;
        apply_boundary(sys, rule, t, &mut new, &mut w, &mut z)?;
        check_row(&new, sys.radius(), t)?;
        record(k + 1, &new);
        std::mem::swap(&mut old, &mut new);
    }
    Ok(nt)
}

/// Solve `∂_t v + λ(v) ∂_x v = f(v)` on `[0, horizon] x [0, L]` with initial
/// data `phi` (resampled to `nx` cells) and boundary rule `rule`.
pub fn solve_forward(
    sys: &DiagonalSystem,
    rule: &dyn BoundaryRule,
    phi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &SolverOptions,
) -> Result<GridField> {
    let mut data = Vec::new();
    let nt = march(sys, rule, phi, horizon, nx, opts, |_, row| {
        data.extend_from_slice(row)
    })?;
    GridField::from_data(sys.n(), horizon, sys.length(), nt, nx, data)
}

/// Like [`solve_forward`] but keeps only the final slice.
pub fn solve_forward_final(
    sys: &DiagonalSystem,
    rule: &dyn BoundaryRule,
    phi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &SolverOptions,
) -> Result<Profile> {
    let mut last = Vec::new();
    march(sys, rule, phi, horizon, nx, opts, |_, row| {
        last.clear();
        last.extend_from_slice(row);
    })?;
    Profile::new(sys.length(), sys.n(), last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::NonlocalBC;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn advection(length: f64) -> (DiagonalSystem, NonlocalBC) {
        let sys = DiagonalSystem::constant(length, 10.0, &[1.0]).unwrap();
        // v(t, 0) = v(t, L)
        let bc = NonlocalBC::linear(1, 1, vec![1.0]).unwrap();
        (sys, bc)
    }

    #[test]
    fn cfl_rule_arithmetic() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-2.0, 1.0]).unwrap();
        let phi = Profile::zeros(1.0, 2, 10);
        assert!((cfl_dt(&sys, &phi, 0.01) - 0.0045).abs() < 1e-15);
        let sys = DiagonalSystem::constant(2.0 * PI, 1.0, &[-1.0, 1.0]).unwrap();
        let dt = cfl_dt(&sys, &Profile::zeros(2.0 * PI, 2, 400), 2.0 * PI / 400.0);
        assert!((dt - 0.01414).abs() < 1e-5);
    }

    #[test]
    fn all_zero_speeds_use_the_floor() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[0.0, 0.0]).unwrap();
        let dt = cfl_dt(&sys, &Profile::zeros(1.0, 2, 4), 0.25);
        assert_eq!(dt, 0.9 * 0.25 / 1e-12);
        let opts = SolverOptions::default();
        assert_eq!(time_steps(&sys, &Profile::zeros(1.0, 2, 4), 3.0, 0.25, &opts), 1);
    }

    #[test]
    fn zero_data_stays_exactly_zero() {
        let (sys, bc) = advection(1.0);
        let f = solve_forward(&sys, &bc, &Profile::zeros(1.0, 1, 50), 2.0, 50, &Default::default())
            .unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn periodic_translation_is_first_order() {
        let (sys, bc) = advection(1.0);
        let exact = |t: f64, x: f64| (2.0 * PI * (x - t)).sin();
        let err = |nx: usize| {
            let phi = Profile::from_fn(1.0, 1, nx, |x, o| o[0] = exact(0.0, x));
            let last = solve_forward_final(&sys, &bc, &phi, 0.5, nx, &Default::default()).unwrap();
            (0..=nx)
                .map(|j| (last.value(0, j) - exact(0.5, last.x(j))).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(200), err(400));
        let order = (e1 / e2).log2();
        assert!(e1 < 0.2, "{e1}");
        assert!((0.8..=1.2).contains(&order), "order {order}");
    }

    #[test]
    fn zero_speed_component_decays_like_the_ode() {
        let sys = DiagonalSystem::new(
            1,
            0,
            1,
            1.0,
            2.0,
            Arc::new(|_, o| o[0] = 0.0),
            Arc::new(|v, o| o[0] = -v[0]),
        )
        .unwrap();
        let bc = NonlocalBC::new(1, 0, Arc::new(|_, _, _| Ok(())));
        let g = |x: f64| 1.0 + 0.5 * (3.0 * x).cos();
        let phi = Profile::from_fn(1.0, 1, 20, |x, o| o[0] = g(x));
        let opts = SolverOptions {
            steps: Some(1000),
            ..Default::default()
        };
        let f = solve_forward(&sys, &bc, &phi, 1.0, 20, &opts).unwrap();
        for j in 0..=20 {
            let exact = g(f.x(j)) * (-1.0f64).exp();
            assert!((f.value(0, 1000, j) - exact).abs() < 1e-3);
        }
    }

    #[test]
    fn incompatible_data_is_rejected() {
        let (sys, bc) = advection(1.0);
        let phi = Profile::from_fn(1.0, 1, 10, |x, o| o[0] = x);
        let err = solve_forward(&sys, &bc, &phi, 1.0, 10, &Default::default()).unwrap_err();
        assert_eq!(err.name(), "IncompatibleData");
    }

    #[test]
    fn leaving_the_ball_aborts() {
        let sys = DiagonalSystem::new(
            1,
            0,
            0,
            1.0,
            1.0,
            Arc::new(|_, o| o[0] = 1.0),
            Arc::new(|v, o| o[0] = 5.0 * v[0]),
        )
        .unwrap();
        let bc = NonlocalBC::linear(1, 1, vec![1.0]).unwrap();
        let phi = Profile::from_fn(1.0, 1, 10, |_, o| o[0] = 0.5);
        let err = solve_forward(&sys, &bc, &phi, 1.0, 10, &Default::default()).unwrap_err();
        assert_eq!(err.name(), "AdmissibleBallExceeded");
    }
}
