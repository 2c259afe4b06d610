//! Linearized Saint-Venant loop with one control `h`:
//! `r(t,L) - r(t,0) = -Ã h(t)`, `s(t,L) - s(t,0) = Ã h(t)`.
//!
//! Integrating the transport equations over the interval shows that
//! `I(t) = λ₂ ∫ r dx + λ₁ ∫ s dx` does not depend on `t`, whatever `h` is.
//! Any reachable final state therefore carries the initial value of `I`.

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::signal::{Profile, Signal};
use crate::solver::forward::{solve_forward, SolverOptions};
use crate::system::{DiagonalSystem, NonlocalBC};

#[derive(Debug, Clone)]
pub struct LoopScenario {
    /// `(λ₁, λ₂)` with `λ₁ < 0 < λ₂`.
    pub speeds: (f64, f64),
    pub area: f64,
    pub control: Signal,
    /// Initial `(r, s)`.
    pub initial: Profile,
    pub length: f64,
    pub horizon: f64,
    /// Admissible radius of the linear system.
    pub radius: f64,
}

impl LoopScenario {
    /// Constant initial data `(r₀, s₀)`.
    pub fn constant(speeds: (f64, f64), area: f64, r0: f64, s0: f64, control: Signal, length: f64, nx: usize) -> Self {
        Self {
            speeds,
            area,
            horizon: control.horizon(),
            control,
            initial: Profile::from_fn(length, 2, nx, |_, o| {
                o[0] = r0;
                o[1] = s0;
            }),
            length,
            radius: 100.0,
        }
    }

    pub fn system(&self) -> Result<DiagonalSystem> {
        let (l1, l2) = self.speeds;
        if !(l1 < 0.0 && l2 > 0.0) {
            return Err(Error::ConstraintViolated(format!(
                "loop speeds must satisfy λ₁ < 0 < λ₂, got ({l1}, {l2})"
            )));
        }
        DiagonalSystem::constant(self.length, self.radius, &[l1, l2])
    }

    /// `s(0) = s(L) - Ã h`, `r(L) = r(0) - Ã h`.
    pub fn boundary(&self) -> Result<NonlocalBC> {
        let h = self.control.scaled(-self.area);
        NonlocalBC::linear(2, 2, vec![0.0, 1.0, 1.0, 0.0])?.with_controls(vec![h.clone(), h])
    }

    pub fn solve(&self, nx: usize, opts: &SolverOptions) -> Result<GridField> {
        solve_forward(&self.system()?, &self.boundary()?, &self.initial.resample(nx), self.horizon, nx, opts)
    }

    /// Options for the grid-aligned run: `λ = (-c, c)` and `Δt = Δx / c`,
    /// so that every characteristic foot is a grid node.
    pub fn aligned_options(&self, nx: usize) -> Result<SolverOptions> {
        let (l1, l2) = self.speeds;
        if l1 != -l2 {
            return Err(Error::ConstraintViolated(
                "grid alignment needs speeds of equal magnitude".into(),
            ));
        }
        let dt = self.length / nx as f64 / l2;
        let steps = (self.horizon / dt).round();
        if ((steps * dt - self.horizon) / self.horizon).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "horizon {} is not a multiple of Δx/λ = {dt}",
                self.horizon
            )));
        }
        Ok(SolverOptions {
            cfl: 1.0,
            steps: Some(steps as usize),
            compat_tol: SolverOptions::default().compat_tol,
        })
    }

    /// `|I(0)| / ((|λ₁| + |λ₂|) L)`: no final state reachable from this data
    /// has a smaller sup norm.
    pub fn final_norm_lower_bound(&self) -> f64 {
        let (l1, l2) = self.speeds;
        invariant_of(&self.initial, self.speeds).abs() / ((l1.abs() + l2.abs()) * self.length)
    }
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1]))
}

fn invariant_of(p: &Profile, speeds: (f64, f64)) -> f64 {
    let (l1, l2) = speeds;
    l2 * trapezoid(&p.component(0), p.dx()) + l1 * trapezoid(&p.component(1), p.dx())
}

/// `I(t_k)` and its largest deviation from `I(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSeries {
    pub values: Vec<f64>,
    pub drift: f64,
}

/// `I(t) = λ₂ ∫ r + λ₁ ∫ s` on every row, by the composite trapezoid rule.
pub fn loop_invariant(field: &GridField, scn: &LoopScenario) -> InvariantSeries {
    let values: Vec<f64> = (0..=field.nt())
        .map(|k| invariant_of(&field.slice(k), scn.speeds))
        .collect();
    let drift = values.iter().fold(0.0_f64, |m, v| m.max((v - values[0]).abs()));
    InvariantSeries { values, drift }
}

/// For `(r₀, s₀) = (α λ₂, λ₁)`, steering to zero would force
/// `λ₁² + α λ₂² = 0`; returns that value.
pub fn loop_contradiction(alpha: f64, l1: f64, l2: f64) -> Result<f64> {
    if alpha * l2 + l1 <= 0.0 {
        return Err(Error::ConstraintViolated(format!(
            "need α λ₂ + λ₁ > 0, got {}",
            alpha * l2 + l1
        )));
    }
    Ok(l1 * l1 + alpha * l2 * l2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contradiction_values() {
        assert_eq!(loop_contradiction(2.0, -1.0, 1.0).unwrap(), 3.0);
        assert_eq!(loop_contradiction(1.0, -1.0, 1.0).unwrap_err().name(), "ConstraintViolated");
    }

    #[test]
    fn constant_data_invariant() {
        let c = 0.3;
        let scn = LoopScenario::constant((-1.0, 2.0), 1.5, c, c, Signal::zero(1.0, 11), 1.0, 50);
        let f = scn.solve(50, &SolverOptions::default()).unwrap();
        let inv = loop_invariant(&f, &scn);
        assert!((inv.values[0] - c * (2.0 - 1.0)).abs() < 1e-14);
        assert!(inv.drift < 1e-14);
    }

    #[test]
    fn zero_data_zero_invariant() {
        let scn = LoopScenario::constant((-1.0, 1.0), 1.0, 0.0, 0.0, Signal::zero(1.0, 11), 1.0, 20);
        let f = scn.solve(20, &SolverOptions::default()).unwrap();
        assert!(loop_invariant(&f, &scn).values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn aligned_run_conserves_to_rounding() {
        let h = Signal::from_fn(1.5, 301, |t| 0.2 * (3.0 * t).sin() + 0.1 * t * t);
        let scn = LoopScenario::constant((-1.0, 1.0), 2.0, 0.4, -0.1, h, 1.0, 200);
        let f = scn.solve(200, &scn.aligned_options(200).unwrap()).unwrap();
        let inv = loop_invariant(&f, &scn);
        assert!(inv.drift <= 1e-10 * (inv.values[0].abs() + 1.0), "{}", inv.drift);
    }
}
