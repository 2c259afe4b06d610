//! Reconstruction of the canal state from measurements at `x = 0` only.
//!
//! The boundary relations determine the state at `x = L` from the state at
//! `x = 0` and the signals `(h, h̄)`, so either `(A, V)` or `(S, Q)` at the
//! upstream end is enough.

use super::saint_venant::{
    far_end_invariants, state_from_energy_discharge, sv_build, sv_physical, sv_riemann, CanalSpec,
    SvBoundary, SvBoundaryKind,
};
use crate::control::observe::{reconstruct_from_traces, Reconstruction};
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::signal::{Profile, Signal, Trace};
use crate::solver::forward::SolverOptions;
use crate::solver::sidewise::SidewiseOptions;

/// What is measured at the upstream end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpstreamQuantity {
    /// Cross-section area and velocity `(A, V)`.
    AreaVelocity,
    /// Energy `S = V²/2 + g H(A)` and discharge `Q = A V`.
    EnergyDischarge,
}

#[derive(Debug, Clone)]
pub struct CanalObservation {
    pub quantity: UpstreamQuantity,
    pub first: Signal,
    pub second: Signal,
    pub h: Signal,
    pub hbar: Signal,
}

impl CanalObservation {
    /// Upstream measurements of a solved `(r, s)` field.
    pub fn from_field(
        spec: &CanalSpec,
        field: &GridField,
        quantity: UpstreamQuantity,
        h: Signal,
        hbar: Signal,
    ) -> Result<Self> {
        let mut first = Vec::with_capacity(field.nt() + 1);
        let mut second = Vec::with_capacity(field.nt() + 1);
        for k in 0..=field.nt() {
            let p = field.point(k, 0);
            let (a, v) = sv_physical(p[0], p[1], spec)?;
            let (x, y) = match quantity {
                UpstreamQuantity::AreaVelocity => (a, v),
                UpstreamQuantity::EnergyDischarge => (spec.energy(a, v), a * v),
            };
            first.push(x);
            second.push(y);
        }
        Ok(Self {
            quantity,
            first: Signal::new(field.horizon(), first)?,
            second: Signal::new(field.horizon(), second)?,
            h,
            hbar,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.first.horizon()
    }
}

#[derive(Debug, Clone)]
pub struct CanalReconstruction {
    /// Initial invariants `(r, s)`.
    pub initial: Profile,
    /// Initial physical state `(A, V)`.
    pub physical: Profile,
    pub inner: Reconstruction,
}

/// Initial state of the canal from upstream measurements.
pub fn sv_observe(
    spec: &CanalSpec,
    kind: SvBoundaryKind,
    obs: &CanalObservation,
    nx: usize,
    sopts: &SidewiseOptions,
    solver: &SolverOptions,
) -> Result<CanalReconstruction> {
    let app = sv_build(spec, kind, None, None)?;
    let horizon = obs.horizon();
    let t_star = spec.min_control_time();
    if horizon <= t_star {
        return Err(Error::TimeTooShort { t: horizon, t_star });
    }
    if obs.first.len() != obs.second.len() {
        return Err(Error::InvalidInput("measurements must share one time grid".into()));
    }
    let b = SvBoundary::new(spec.clone(), kind);
    let samples = obs.first.len();
    let (mut left, mut right) = (Vec::with_capacity(2 * samples), Vec::with_capacity(2 * samples));
    for k in 0..samples {
        let t = obs.first.time(k);
        let (x, y) = (obs.first.values()[k], obs.second.values()[k]);
        let (a, v) = match obs.quantity {
            UpstreamQuantity::AreaVelocity => (x, y),
            UpstreamQuantity::EnergyDischarge => state_from_energy_discharge(spec, x, y)?,
        };
        let near = sv_riemann(a, v, spec)?;
        let far = far_end_invariants(&b, near, obs.h.eval(t), obs.hbar.eval(t))?;
        left.extend_from_slice(&[near.0, near.1]);
        right.extend_from_slice(&[far.0, far.1]);
    }
    let left = Trace::from_samples(horizon, 2, &left)?;
    let right = Trace::from_samples(horizon, 2, &right)?;
    let inner = reconstruct_from_traces(&app.system, &left, &right, nx, sopts, solver)?;
    let mut physical = Profile::zeros(spec.length, 2, nx);
    for j in 0..=nx {
        let p = inner.initial.point(j);
        let (a, v) = sv_physical(p[0], p[1], spec)?;
        physical.point_mut(j).copy_from_slice(&[a, v]);
    }
    Ok(CanalReconstruction {
        initial: inner.initial.clone(),
        physical,
        inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::forward::solve_forward;
    use std::f64::consts::PI;

    #[test]
    fn upstream_variants_agree() {
        let spec = CanalSpec::default();
        let kind = SvBoundaryKind::Energy;
        let app = sv_build(&spec, kind, None, None).unwrap();
        let nx = 200;
        let horizon = 1.2 * spec.min_control_time();
        // Data vanishing near both ends is compatible with the homogeneous relations.
        let phi = Profile::from_fn(spec.length, 2, nx, |x, o| {
            let b = (PI * x / spec.length).sin().powi(4);
            o[0] = 1e-3 * b;
            o[1] = -5e-4 * b;
        });
        let f = solve_forward(&app.system, &app.bc, &phi, horizon, nx, &SolverOptions::default()).unwrap();
        let zero = Signal::zero(horizon, 2);
        let rec = |q| {
            let obs = CanalObservation::from_field(&spec, &f, q, zero.clone(), zero.clone()).unwrap();
            sv_observe(&spec, kind, &obs, nx, &SidewiseOptions::default(), &SolverOptions::default()).unwrap()
        };
        let av = rec(UpstreamQuantity::AreaVelocity);
        let sq = rec(UpstreamQuantity::EnergyDischarge);
        assert!(av.initial.sup_distance(&phi) < 1e-4, "{}", av.initial.sup_distance(&phi));
        assert!(av.initial.sup_distance(&sq.initial) < 1e-9, "{}", av.initial.sup_distance(&sq.initial));
    }

    #[test]
    fn short_horizon_is_rejected() {
        let spec = CanalSpec::default();
        let t = 0.5 * spec.min_control_time();
        let obs = CanalObservation {
            quantity: UpstreamQuantity::AreaVelocity,
            first: Signal::from_fn(t, 50, |_| spec.area),
            second: Signal::from_fn(t, 50, |_| spec.velocity),
            h: Signal::zero(t, 2),
            hbar: Signal::zero(t, 2),
        };
        let e = sv_observe(&spec, SvBoundaryKind::WaterLevel, &obs, 64, &SidewiseOptions::default(), &SolverOptions::default());
        assert_eq!(e.unwrap_err().name(), "TimeTooShort");
    }
}
