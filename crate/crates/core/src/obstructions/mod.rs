//! Conserved functionals and duality pairings that rule out exact
//! controllability with a single loop control, and eigenmodes that rule out
//! observability from a single boundary measurement.

pub mod loop_coupling;
pub mod wave;

pub use loop_coupling::{loop_contradiction, loop_invariant, InvariantSeries, LoopScenario};
pub use wave::{
    dirichlet_variant_obstruction, duality_pairing, duality_residual, duality_residual_fn, wave_eigenmode, EigenmodeWitness,
    WitnessKind,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::GridField;
use crate::signal::Signal;

/// JSON summary of an obstruction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub scenario: String,
    pub invariant_drift: f64,
    pub obstruction_value: f64,
    /// Only meaningful for the loop.
    pub lower_bound_final_norm: Option<f64>,
}

/// Loop obstruction runs for `(r₀, s₀) = (α λ₂, λ₁)` with `λ = (-1, 1)`,
/// `Ã = 1`, `L = 1`.
#[derive(Debug, Clone)]
pub struct LoopStudy {
    pub report: ObstructionReport,
    /// Final sup norm of `(r, s)` under each random control.
    pub final_norms: Vec<f64>,
    /// Solution under the first control.
    pub first_field: GridField,
}

/// Random C¹ control `Σ a_k sin(k π t / T)`, `k = 1..4`, with `h(0) = 0`.
pub fn random_loop_control(rng: &mut impl Rng, horizon: f64, scale: f64) -> Signal {
    let a: Vec<f64> = (0..4).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
    let w = std::f64::consts::PI / horizon;
    let a2 = a.clone();
    Signal::from_fn_with_derivative(
        horizon,
        2001,
        move |t| a.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * w * t).sin()).sum(),
        move |t| {
            a2.iter()
                .enumerate()
                .map(|(k, c)| c * (k + 1) as f64 * w * ((k + 1) as f64 * w * t).cos())
                .sum()
        },
    )
}

pub fn loop_study(alpha: f64, nx: usize, trials: usize, seed: u64) -> Result<LoopStudy> {
    let (l1, l2) = (-1.0, 1.0);
    let value = loop_contradiction(alpha, l1, l2)?;
    let horizon = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drift = 0.0_f64;
    let mut bound = 0.0;
    let mut final_norms = Vec::with_capacity(trials);
    let mut first_field = None;
    for _ in 0..trials.max(1) {
        let h = random_loop_control(&mut rng, horizon, 0.5);
        let scn = LoopScenario::constant((l1, l2), 1.0, alpha * l2, l1, h, 1.0, nx);
        let field = scn.solve(nx, &scn.aligned_options(nx)?)?;
        drift = drift.max(loop_invariant(&field, &scn).drift);
        bound = scn.final_norm_lower_bound();
        final_norms.push(field.last().sup_norm());
        first_field.get_or_insert(field);
    }
    Ok(LoopStudy {
        report: ObstructionReport {
            scenario: "loop".into(),
            invariant_drift: drift,
            obstruction_value: value,
            lower_bound_final_norm: Some(bound),
        },
        final_norms,
        first_field: first_field.expect("at least one trial"),
    })
}

/// Sine-mode pairing `nπ` for `y₀ = sin(nx)`, with the identity residual
/// on the exact free solution `sin(n(x - t))` as the drift figure.
pub fn wave_obstruction(n: u32, horizon: f64) -> Result<ObstructionReport> {
    let w = wave_eigenmode(n, WitnessKind::Sine)?;
    let k = n as f64;
    let pairing = duality_pairing(|x| (k * x).sin(), |_| 0.0, &w);
    let residual = wave::duality_residual_fn(
        &|t, x| (k * (x - t)).sin(),
        &|t, x| -k * (k * (x - t)).cos(),
        &|_| 0.0,
        &w,
        horizon,
    );
    Ok(ObstructionReport {
        scenario: "wave".into(),
        invariant_drift: residual,
        obstruction_value: pairing,
        lower_bound_final_norm: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_study_respects_the_bound() {
        let s = loop_study(2.0, 100, 3, 7).unwrap();
        assert_eq!(s.report.obstruction_value, 3.0);
        assert!(s.report.invariant_drift <= 1e-10);
        let bound = s.report.lower_bound_final_norm.unwrap();
        assert!((bound - 1.5).abs() < 1e-12);
        assert!(s.final_norms.iter().all(|n| *n >= bound - 1e-10), "{:?}", s.final_norms);
    }

    #[test]
    fn wave_report_values() {
        let r = wave_obstruction(2, 3.0).unwrap();
        assert!((r.obstruction_value - 2.0 * std::f64::consts::PI).abs() < 1e-6);
        assert!(r.invariant_drift < 1e-6);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["lower_bound_final_norm"].is_null());
    }
}
