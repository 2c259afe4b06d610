//! Backward-in-time solves through the substitution `τ = T - t`.
//!
//! Reversing time negates every speed, so components entering the strip
//! become outgoing and vice versa. For `l = m` the reversed system keeps a
//! clean sign pattern after reordering the components as
//! `(v_l..v_{n-1}, v_0..v_{l-1})`, and its outgoing traces are exactly the
//! original incoming ones (same ordering), its incoming traces the original
//! outgoing ones.

use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::newton::{self, NewtonOptions};
use crate::signal::{Profile, Signal};
use crate::solver::forward::{solve_forward, SolverOptions};
use crate::system::{BoundaryRule, DiagonalSystem, NonlocalBC};

/// Component order of the reversed system, as indices into the original.
pub fn reversal_order(sys: &DiagonalSystem) -> Vec<usize> {
    (sys.l()..sys.n()).chain(0..sys.l()).collect()
}

fn inverse(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (c, &i) in order.iter().enumerate() {
        inv[i] = c;
    }
    inv
}

/// The time-reversed system in reordered components.
pub fn reversed_system(sys: &DiagonalSystem) -> Result<DiagonalSystem> {
    if sys.l() != sys.m() {
        return Err(Error::ZeroEigenvalueUnsupported {
            l: sys.l(),
            m: sys.m(),
        });
    }
    let n = sys.n();
    let order = Arc::new(reversal_order(sys));
    let inv = Arc::new(inverse(&order));
    let (s1, s2) = (sys.clone(), sys.clone());
    let (o1, o2) = (order.clone(), order);
    let (i1, i2) = (inv.clone(), inv);
    let speeds = Arc::new(move |u: &[f64], out: &mut [f64]| {
        let v: Vec<f64> = i1.iter().map(|&c| u[c]).collect();
        let mut lam = vec![0.0; v.len()];
        s1.speeds(&v, &mut lam);
        for (o, &i) in out.iter_mut().zip(o1.iter()) {
            *o = -lam[i];
        }
    });
    let source = Arc::new(move |u: &[f64], out: &mut [f64]| {
        let v: Vec<f64> = i2.iter().map(|&c| u[c]).collect();
        let mut f = vec![0.0; v.len()];
        s2.source(&v, &mut f);
        for (o, &i) in out.iter_mut().zip(o2.iter()) {
            *o = -f[i];
        }
    });
    let l = n - sys.l();
    DiagonalSystem::new(n, l, l, sys.length(), sys.radius(), speeds, source)
}

/// Boundary rule of the reversed problem derived from nonlocal conditions:
/// given the original incoming traces `z` at `t = T - τ`, solve
/// `G_in(t, w) + H(t) = z` for the original outgoing traces `w`.
pub struct ReversedRule<'a> {
    bc: &'a NonlocalBC,
    horizon: f64,
    opts: NewtonOptions,
    last: Mutex<Vec<f64>>,
}

impl<'a> ReversedRule<'a> {
    pub fn new(bc: &'a NonlocalBC, horizon: f64) -> Self {
        Self {
            bc,
            horizon,
            opts: NewtonOptions::default(),
            last: Mutex::new(vec![0.0; bc.n_out()]),
        }
    }
}

impl BoundaryRule for ReversedRule<'_> {
    fn incoming(&self, tau: f64, outgoing: &[f64], incoming: &mut [f64]) -> Result<()> {
        let t = self.horizon - tau;
        let bc = self.bc;
        let guess = self.last.lock().expect("rule state").clone();
        let mut g = vec![0.0; bc.n_in()];
        let out = newton::solve(
            |w, r| {
                bc.incoming(t, w, &mut g)?;
                for ((ri, gi), zi) in r.iter_mut().zip(&g).zip(outgoing) {
                    *ri = gi - zi;
                }
                Ok(())
            },
            &guess,
            self.opts,
            "reversed boundary relations",
        )?;
        incoming.copy_from_slice(&out.x);
        *self.last.lock().expect("rule state") = out.x;
        Ok(())
    }
}

/// Reversed-time rule prescribing the original outgoing traces directly:
/// incoming value `i` at `τ` is `signals[i](t_end - τ)`.
pub struct PrescribedTraceRule {
    signals: Vec<Signal>,
    t_end: f64,
}

impl PrescribedTraceRule {
    pub fn new(signals: Vec<Signal>, t_end: f64) -> Self {
        Self { signals, t_end }
    }
}

impl BoundaryRule for PrescribedTraceRule {
    fn incoming(&self, tau: f64, _outgoing: &[f64], incoming: &mut [f64]) -> Result<()> {
        for (z, s) in incoming.iter_mut().zip(&self.signals) {
            *z = s.eval(self.t_end - tau);
        }
        Ok(())
    }
}

/// Solve backward from `psi` at `t = horizon` with a rule already expressed
/// for the reversed system. The result is in original time and component
/// order.
pub fn solve_backward_with_rule(
    sys: &DiagonalSystem,
    rule: &dyn BoundaryRule,
    psi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &SolverOptions,
) -> Result<GridField> {
    let rev = reversed_system(sys)?;
    let order = reversal_order(sys);
    let psi = psi.resample(nx);
    let psi_rev = Profile::new(
        psi.length(),
        psi.n(),
        (0..=nx)
            .flat_map(|j| order.iter().map(move |&i| (j, i)))
            .map(|(j, i)| psi.value(i, j))
            .collect(),
    )?;
    let field = solve_forward(&rev, rule, &psi_rev, horizon, nx, opts)?;
    Ok(field.reverse_time().select(&inverse(&order)))
}

/// Solve the nonlocal problem backward in time from final data `psi`.
pub fn solve_backward(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    psi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &SolverOptions,
) -> Result<GridField> {
    if sys.l() != sys.m() {
        return Err(Error::ZeroEigenvalueUnsupported {
            l: sys.l(),
            m: sys.m(),
        });
    }
    let rule = ReversedRule::new(bc, horizon);
    solve_backward_with_rule(sys, &rule, psi, horizon, nx, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::forward::solve_forward;
    use std::f64::consts::PI;

    fn loop_system() -> (DiagonalSystem, NonlocalBC) {
        let sys = DiagonalSystem::constant(2.0 * PI, 1.0, &[-1.0, 1.0]).unwrap();
        // v_1(0) = v_1(L), v_0(L) = v_0(0)
        let bc = NonlocalBC::linear(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        (sys, bc)
    }

    #[test]
    fn reversal_reorders_and_negates() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 2.0, 3.0]).unwrap();
        let rev = reversed_system(&sys).unwrap();
        assert_eq!((rev.l(), rev.m()), (2, 2));
        assert_eq!(rev.speeds_at_zero(), vec![-2.0, -3.0, 1.0]);
    }

    #[test]
    fn zero_speeds_are_rejected() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 0.0, 1.0]).unwrap();
        let bc = NonlocalBC::linear(3, 2, vec![0.0; 6]).unwrap();
        let err = solve_backward(&sys, &bc, &Profile::zeros(1.0, 3, 8), 1.0, 8, &Default::default())
            .unwrap_err();
        assert_eq!(err, Error::ZeroEigenvalueUnsupported { l: 1, m: 2 });
    }

    #[test]
    fn zero_final_data_gives_zero_field() {
        let (sys, bc) = loop_system();
        let f = solve_backward(&sys, &bc, &Profile::zeros(2.0 * PI, 2, 40), 3.0, 40, &Default::default())
            .unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn final_row_is_the_data_and_round_trip_is_first_order() {
        let (sys, bc) = loop_system();
        let l = 2.0 * PI;
        let phi = Profile::from_fn(l, 2, 400, |x, o| {
            o[0] = 1e-2 * x.sin();
            o[1] = 1e-2 * (2.0 * x).cos();
        });
        let err = |nx: usize| {
            let fwd = solve_forward(&sys, &bc, &phi, 2.0, nx, &Default::default()).unwrap();
            let back = solve_backward(&sys, &bc, &fwd.last(), 2.0, nx, &Default::default()).unwrap();
            assert_eq!(back.last(), fwd.last());
            back.initial().sup_distance(&phi)
        };
        let (e1, e2) = (err(200), err(400));
        assert!(e1 < 2e-3, "{e1}");
        let ratio = e1 / e2;
        assert!((1.5..=3.0).contains(&ratio), "{ratio}");
    }
}
