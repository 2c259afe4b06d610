//! Reconstruction of the initial state from boundary observations.
//!
//! The outgoing traces are observed; the boundary conditions give the
//! incoming ones, so both ends carry the full state over `[0, T]`. Sidewise
//! solves from `x = 0` and from `x = L` then determine the state at
//! `t1 = T/2` on `[0, L/2 + δ]` and `[L/2 - δ, L]` respectively, where
//! `δ = (T min|λ| - L)/2 > 0` once `T` exceeds the minimal time. The two
//! halves must agree on the overlap. A backward solve from `t1` with the
//! observed traces as boundary data finally yields the state at `t = 0`.

use rayon::join;

use super::synthesis::min_control_time;
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::signal::{Profile, Signal, Trace};
use crate::solver::backward::{solve_backward_with_rule, PrescribedTraceRule};
use crate::solver::forward::SolverOptions;
use crate::solver::sidewise::{
    data_min_speed, sidewise_time_cells, solve_sidewise_problem, SidewiseOptions, SidewiseProblem,
};
use crate::system::{BoundaryRule, DiagonalSystem, NonlocalBC};

/// Factor between the overlap disagreement and the scheme error estimate
/// tolerated before observations are declared inconsistent.
pub const OVERLAP_FACTOR: f64 = 10.0;
const OVERLAP_FLOOR: f64 = 1e-12;

/// Observed outgoing traces and the known controls.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    /// `v_0..v_{m-1}` at `x = 0`.
    pub left: Trace,
    /// `v_l..v_{n-1}` at `x = L`.
    pub right: Trace,
    /// `H`, possibly empty for `H ≡ 0`.
    pub controls: Vec<Signal>,
}

impl ObservationSet {
    /// Outgoing traces of a solved field.
    pub fn from_field(sys: &DiagonalSystem, field: &GridField, controls: Vec<Signal>) -> Result<Self> {
        let (m, n) = (sys.m(), sys.n());
        let nx = field.nx();
        let pick = |j: usize, range: std::ops::Range<usize>| -> Result<Trace> {
            Trace::new(range.map(|i| field.signal_at(i, j)).collect())
        };
        Ok(Self {
            left: pick(0, 0..m)?,
            right: pick(nx, sys.l()..n)?,
            controls,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.left.horizon()
    }

    /// `Σ ‖v̄_r‖_C¹ + Σ ‖v̿_s‖_C¹ + Σ ‖H_i‖_C¹`.
    pub fn c1_norm_sum(&self) -> f64 {
        self.left
            .components()
            .iter()
            .chain(self.right.components())
            .chain(&self.controls)
            .map(Signal::c1_norm)
            .sum()
    }
}

/// `‖phi‖_C¹ / (Σ‖observations‖_C¹ + Σ‖H‖_C¹)`, with `0/0 = 0`.
pub fn observability_ratio(phi_true: &Profile, obs: &ObservationSet) -> Result<f64> {
    let num = phi_true.c1_norm();
    let den = obs.c1_norm_sum();
    if den == 0.0 {
        return if num == 0.0 { Ok(0.0) } else { Err(Error::DivisionByZero) };
    }
    Ok(num / den)
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub initial: Profile,
    /// Backward solution on `[0, t1]`.
    pub field: GridField,
    pub t_mid: f64,
    pub overlap_disagreement: f64,
    pub overlap_tolerance: f64,
}

/// Full-state traces at both ends from the observations and the boundary
/// conditions.
pub fn complete_traces(sys: &DiagonalSystem, bc: &NonlocalBC, obs: &ObservationSet) -> Result<(Trace, Trace)> {
    let (l, m, n) = (sys.l(), sys.m(), sys.n());
    if obs.left.n() != m || obs.right.n() != n - l {
        return Err(Error::InvalidInput(format!(
            "expected {m} observed traces at x = 0 and {} at x = L",
            n - l
        )));
    }
    if obs.left.len() != obs.right.len() {
        return Err(Error::InvalidInput("observations must share one time grid".into()));
    }
    let bc = if obs.controls.is_empty() {
        bc.without_controls()
    } else {
        bc.with_controls(obs.controls.clone())?
    };
    let samples = obs.left.len();
    let horizon = obs.horizon();
    let (nw, nz) = (sys.n_outgoing(), sys.n_incoming());
    let mut w = vec![0.0; nw];
    let mut z = vec![0.0; nz];
    let mut left = Vec::with_capacity(samples * n);
    let mut right = Vec::with_capacity(samples * n);
    for k in 0..samples {
        let t = obs.left.component(0).time(k);
        obs.left.sample(k, &mut w[..m]);
        obs.right.sample(k, &mut w[m..]);
        bc.incoming(t, &w, &mut z)?;
        left.extend_from_slice(&w[..m]);
        left.extend_from_slice(&z[..n - m]);
        right.extend_from_slice(&z[n - m..]);
        right.extend_from_slice(&w[m..]);
    }
    Ok((
        Trace::from_samples(horizon, n, &left)?,
        Trace::from_samples(horizon, n, &right)?,
    ))
}

fn corner_profile(trace: &Trace, t: f64, length: f64) -> Profile {
    let mut v = vec![0.0; trace.n()];
    trace.eval(t, &mut v);
    Profile::from_fn(length, trace.n(), 2, |_, o| o.copy_from_slice(&v))
}

struct MidSlices {
    left: GridField,
    right: GridField,
    k_mid: usize,
    reach: f64,
}

fn mid_slices(
    sys: &DiagonalSystem,
    left: &Trace,
    right: &Trace,
    nx: usize,
    opts: &SidewiseOptions,
) -> Result<MidSlices> {
    let length = sys.length();
    let horizon = left.horizon();
    let (b0, t0) = (corner_profile(left, 0.0, length), corner_profile(left, horizon, length));
    let (bl, tl) = (corner_profile(right, 0.0, length), corner_profile(right, horizon, length));
    let from_left = SidewiseProblem {
        trace: left,
        x_start: 0.0,
        x_end: length,
        bottom: &b0,
        top: &t0,
    };
    let from_right = SidewiseProblem {
        trace: right,
        x_start: length,
        x_end: 0.0,
        bottom: &bl,
        top: &tl,
    };
    let mu = data_min_speed(sys, &from_left)?.min(data_min_speed(sys, &from_right)?);
    if mu < opts.speed_threshold {
        return Err(Error::DegenerateSpeed {
            speed: mu,
            threshold: opts.speed_threshold,
        });
    }
    let mut nt = opts
        .nt
        .unwrap_or_else(|| sidewise_time_cells(horizon, length / nx as f64, mu, opts.cfl));
    nt -= nt % 2;
    let side = SidewiseOptions { nt: Some(nt), ..*opts };
    let (a, b) = join(
        || solve_sidewise_problem(sys, &from_left, nx, &side),
        || solve_sidewise_problem(sys, &from_right, nx, &side),
    );
    let (a, b) = (a?, b?);
    let k_mid = nt / 2;
    let t_mid = a.t(k_mid);
    let mut lam = vec![0.0; sys.n()];
    let mut mu_sol = mu;
    for f in [&a, &b] {
        for j in 0..=nx {
            sys.speeds(f.point(k_mid, j), &mut lam);
            mu_sol = lam.iter().fold(mu_sol, |m, s| m.min(s.abs()));
        }
    }
    let reach = t_mid.min(horizon - t_mid) * mu_sol;
    Ok(MidSlices {
        left: a,
        right: b,
        k_mid,
        reach,
    })
}

/// Reconstruct the state at `t = 0` from full-state traces at both ends.
pub fn reconstruct_from_traces(
    sys: &DiagonalSystem,
    left: &Trace,
    right: &Trace,
    nx: usize,
    opts: &SidewiseOptions,
    solver: &SolverOptions,
) -> Result<Reconstruction> {
    if sys.l() != sys.m() {
        return Err(Error::ZeroEigenvalueUnsupported { l: sys.l(), m: sys.m() });
    }
    if nx < 16 || nx % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "reconstruction grids need an even number of at least 16 cells, got {nx}"
        )));
    }
    let (n, l) = (sys.n(), sys.l());
    let length = sys.length();
    let fine = mid_slices(sys, left, right, nx, opts)?;
    if 2.0 * fine.reach <= length {
        return Err(Error::CoverageFailure(format!(
            "boundary data determine only [0, {:.6}] and [{:.6}, {length}] at the middle time",
            fine.reach,
            length - fine.reach
        )));
    }
    let coarse = mid_slices(sys, left, right, nx / 2, opts)?;

    // Overlap [L - reach, reach], trimmed by a quarter of its width per side.
    let width = 2.0 * fine.reach - length;
    let (lo, hi) = (length - fine.reach + 0.25 * width, fine.reach - 0.25 * width);
    let (mut disagreement, mut estimate) = (0.0_f64, 0.0_f64);
    let mut coarse_v = vec![0.0; n];
    for j in 0..=nx {
        let x = j as f64 * length / nx as f64;
        let (a, b) = (fine.left.point(fine.k_mid, j), fine.right.point(fine.k_mid, j));
        let jc = j / 2;
        let in_overlap = x >= lo && x <= hi;
        for i in 0..n {
            if in_overlap {
                disagreement = disagreement.max((a[i] - b[i]).abs());
            }
        }
        if j % 2 == 0 && x <= fine.reach.min(coarse.reach) {
            coarse_v.copy_from_slice(coarse.left.point(coarse.k_mid, jc));
            estimate = a.iter().zip(&coarse_v).fold(estimate, |m, (p, q)| m.max((p - q).abs()));
        }
        if j % 2 == 0 && x >= length - fine.reach.min(coarse.reach) {
            coarse_v.copy_from_slice(coarse.right.point(coarse.k_mid, jc));
            estimate = b.iter().zip(&coarse_v).fold(estimate, |m, (p, q)| m.max((p - q).abs()));
        }
    }
    let tolerance = OVERLAP_FACTOR * estimate + OVERLAP_FLOOR;
    if disagreement > tolerance {
        return Err(Error::InconsistentObservations {
            disagreement,
            tolerance,
        });
    }

    let t_mid = fine.left.t(fine.k_mid);
    let half = nx / 2;
    let mut vals = Vec::with_capacity((nx + 1) * n);
    for j in 0..=nx {
        let src = if j <= half { &fine.left } else { &fine.right };
        vals.extend_from_slice(src.point(fine.k_mid, j));
    }
    // Outgoing end values are observed exactly.
    let mut end = vec![0.0; n];
    left.eval(t_mid, &mut end);
    vals[..l].copy_from_slice(&end[..l]);
    right.eval(t_mid, &mut end);
    vals[nx * n + l..].copy_from_slice(&end[l..]);
    let slice = Profile::new(length, n, vals)?;

    let signals: Vec<Signal> = (0..l)
        .map(|i| left.component(i).clone())
        .chain((l..n).map(|i| right.component(i).clone()))
        .collect();
    let rule = PrescribedTraceRule::new(signals, t_mid);
    let field = solve_backward_with_rule(sys, &rule, &slice, t_mid, nx, solver)?;
    Ok(Reconstruction {
        initial: field.initial(),
        field,
        t_mid,
        overlap_disagreement: disagreement,
        overlap_tolerance: tolerance,
    })
}

/// Reconstruct the initial state from outgoing-trace observations.
pub fn reconstruct_initial(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    obs: &ObservationSet,
    nx: usize,
    opts: &SidewiseOptions,
    solver: &SolverOptions,
) -> Result<Reconstruction> {
    let t_star = min_control_time(sys)?;
    let horizon = obs.horizon();
    if horizon <= t_star {
        return Err(Error::TimeTooShort { t: horizon, t_star });
    }
    let (left, right) = complete_traces(sys, bc, obs)?;
    reconstruct_from_traces(sys, &left, &right, nx, opts, solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::forward::solve_forward;
    use std::f64::consts::PI;

    fn loop_system() -> (DiagonalSystem, NonlocalBC) {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 2.0]).unwrap();
        let bc = NonlocalBC::linear(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        (sys, bc)
    }

    fn data(nx: usize) -> Profile {
        Profile::from_fn(1.0, 2, nx, |x, o| {
            o[0] = 0.01 * (2.0 * PI * x).sin();
            o[1] = 0.01 * ((2.0 * PI * x).cos() - 1.0);
        })
    }

    #[test]
    fn ratio_conventions() {
        let z = Profile::zeros(1.0, 2, 10);
        let zero = Trace::new(vec![Signal::zero(1.0, 5)]).unwrap();
        let obs = ObservationSet {
            left: zero.clone(),
            right: zero,
            controls: vec![],
        };
        assert_eq!(observability_ratio(&z, &obs).unwrap(), 0.0);
        assert_eq!(observability_ratio(&data(10), &obs).unwrap_err(), Error::DivisionByZero);
    }

    #[test]
    fn zero_observations_give_zero() {
        let (sys, bc) = loop_system();
        let f = solve_forward(&sys, &bc, &Profile::zeros(1.0, 2, 40), 1.5, 40, &Default::default()).unwrap();
        let obs = ObservationSet::from_field(&sys, &f, vec![]).unwrap();
        let rec = reconstruct_initial(&sys, &bc, &obs, 40, &Default::default(), &Default::default()).unwrap();
        assert!(rec.initial.sup_norm() == 0.0);
    }

    #[test]
    fn round_trip_converges() {
        let (sys, bc) = loop_system();
        let err = |nx: usize| {
            let phi = data(nx);
            let f = solve_forward(&sys, &bc, &phi, 1.5, nx, &Default::default()).unwrap();
            let obs = ObservationSet::from_field(&sys, &f, vec![]).unwrap();
            let rec = reconstruct_initial(&sys, &bc, &obs, nx, &Default::default(), &Default::default()).unwrap();
            rec.initial.sup_distance(&phi)
        };
        let (e1, e2) = (err(200), err(400));
        assert!(e1 < 5e-3, "{e1}");
        assert!((1.5..3.0).contains(&(e1 / e2)), "{e1} {e2}");
    }

    #[test]
    fn short_observation_window_is_rejected() {
        let (sys, bc) = loop_system();
        let f = solve_forward(&sys, &bc, &data(40), 0.6, 40, &Default::default()).unwrap();
        let obs = ObservationSet::from_field(&sys, &f, vec![]).unwrap();
        let err = reconstruct_initial(&sys, &bc, &obs, 40, &Default::default(), &Default::default()).unwrap_err();
        assert_eq!(err.name(), "TimeTooShort");
    }
}
