//! Exact boundary control by a two-sided construction.
//!
//! A forward solve from `phi` on `[0, T_a]` and a backward solve from `psi`
//! on `[T_b, T]` give the full state at the middle point `x0 = L/2` near
//! both ends of the horizon. The two pieces are joined by a quintic Hermite
//! blend, and sidewise solves from `x0` towards both ends of the interval
//! produce a solution on `[0, T] × [0, L]` that starts at `phi` and ends at
//! `psi`. The controls are read off its boundary traces.
//!
//! The positive components at `(0, x)` for `x > x0` are bottom data, the
//! negative ones arrive from the middle trace at time `(x - x0)/|λ|`, which
//! the forward solve determines from `phi` alone as long as
//! `T_a ≥ (L/2) / min|λ|`. The same argument at `t = T` fixes
//! `T - T_b`. Both fit inside `[0, T]` exactly when `T > L / min|λ|`.

use rayon::join;

use super::blend::QuinticBlend;
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::signal::{Profile, Signal, Trace};
use crate::solver::backward::solve_backward;
use crate::solver::forward::{solve_forward, SolverOptions};
use crate::solver::sidewise::{
    data_min_speed, sidewise_time_cells, solve_sidewise_problem, SidewiseOptions, SidewiseProblem,
};
use crate::system::{DiagonalSystem, NonlocalBC};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlOptions {
    pub solver: SolverOptions,
    pub sidewise: SidewiseOptions,
}

/// `L * max_i 1/|λ_i(0)|`.
pub fn min_control_time(sys: &DiagonalSystem) -> Result<f64> {
    let lam = sys.speeds_at_zero();
    if let Some(index) = lam.iter().position(|s| *s == 0.0) {
        return Err(Error::ZeroEigenvalue { index });
    }
    let slowest = lam.iter().fold(f64::INFINITY, |m, s| m.min(s.abs()));
    Ok(sys.length() / slowest)
}

/// Junction times `T_a = T*/2 + (T - T*)/10` and `T_b = T - T_a`.
pub fn junction_times(horizon: f64, t_star: f64) -> (f64, f64) {
    let t_a = 0.5 * t_star + 0.1 * (horizon - t_star);
    (t_a, horizon - t_a)
}

/// The full state at `x0` over `[0, T]`.
#[derive(Debug, Clone)]
pub struct MiddleTrace {
    pub x0: f64,
    pub t_a: f64,
    pub t_b: f64,
    horizon: f64,
    early: Trace,
    late: Trace,
    blends: Vec<QuinticBlend>,
    bumps: Vec<f64>,
    /// Smallest `|λ_i|` seen in the two auxiliary solves.
    pub aux_min_speed: f64,
    samples: usize,
}

impl MiddleTrace {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.blends.len()
    }

    pub fn blends(&self) -> &[QuinticBlend] {
        &self.blends
    }

    /// Add `amplitude[i] * s³(1-s)³` to component `i` inside the blend
    /// interval. Values and first two derivatives at the junctions are kept.
    pub fn set_bumps(&mut self, amplitude: Vec<f64>) {
        self.bumps = amplitude;
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        if t <= self.t_a {
            self.early.eval(t, out);
        } else if t >= self.t_b {
            self.late.eval(t - self.t_b, out);
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.blends[i].eval(t) + self.bumps[i] * super::blend::bump(self.t_a, self.t_b, t);
            }
        }
    }

    /// Uniformly sampled trace on `[0, T]`.
    pub fn to_trace(&self) -> Result<Trace> {
        let n = self.n();
        let m = self.samples;
        let mut vals = vec![0.0; m * n];
        for k in 0..m {
            let t = self.horizon * k as f64 / (m - 1) as f64;
            self.eval(t, &mut vals[k * n..(k + 1) * n]);
        }
        Trace::from_samples(self.horizon, n, &vals)
    }

    /// Largest relative value/slope mismatch over all junctions.
    pub fn junction_jump(&self) -> f64 {
        self.blends.iter().fold(0.0, |m, b| m.max(b.junction_jump()))
    }
}

/// Constant controls cancelling the C⁰ corner residual of `data` at time
/// `t`, or the template itself when the data is already compatible.
fn compatible_bc(sys: &DiagonalSystem, bc: &NonlocalBC, data: &Profile, t: f64, horizon: f64) -> Result<NonlocalBC> {
    let (left, right) = (data.point(0), data.point(data.nx()));
    let mut w = vec![0.0; sys.n_outgoing()];
    let mut z = vec![0.0; sys.n_incoming()];
    let mut g = vec![0.0; sys.n_incoming()];
    sys.outgoing(left, right, &mut w);
    sys.incoming(left, right, &mut z);
    bc.map(t, &w, &mut g)?;
    if z == g {
        return Ok(bc.without_controls());
    }
    let signals = z
        .iter()
        .zip(&g)
        .map(|(zi, gi)| Signal::from_fn(horizon, 2, |_| zi - gi))
        .collect();
    bc.with_controls(signals)
}

fn end_slope(sig: &Signal, at_end: bool) -> f64 {
    let v = sig.values();
    let dt = sig.dt();
    let n = v.len();
    if n < 3 {
        return if at_end { (v[n - 1] - v[n - 2]) / dt } else { (v[1] - v[0]) / dt };
    }
    if at_end {
        (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt)
    } else {
        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt)
    }
}

fn field_min_speed(sys: &DiagonalSystem, f: &GridField) -> f64 {
    let mut lam = vec![0.0; sys.n()];
    let mut mu = f64::INFINITY;
    for k in 0..=f.nt() {
        for j in 0..=f.nx() {
            sys.speeds(f.point(k, j), &mut lam);
            mu = lam.iter().fold(mu, |a, s| a.min(s.abs()));
        }
    }
    mu
}

fn check_grid(sys: &DiagonalSystem, nx: usize) -> Result<()> {
    if sys.l() != sys.m() {
        return Err(Error::ZeroEigenvalueUnsupported { l: sys.l(), m: sys.m() });
    }
    if nx < 8 || nx % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "control grids need an even number of at least 8 cells, got {nx}"
        )));
    }
    Ok(())
}

/// Stages (a)-(c): auxiliary solves and the blended middle trace.
pub fn middle_trace(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    phi: &Profile,
    psi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &ControlOptions,
) -> Result<MiddleTrace> {
    check_grid(sys, nx)?;
    let t_star = min_control_time(sys)?;
    if horizon <= t_star {
        return Err(Error::TimeTooShort { t: horizon, t_star });
    }
    let (t_a, t_b) = junction_times(horizon, t_star);
    let (phi, psi) = (phi.resample(nx), psi.resample(nx));
    let bc_a = compatible_bc(sys, bc, &phi, 0.0, t_a)?;
    let bc_b = compatible_bc(sys, bc, &psi, horizon - t_b, horizon - t_b)?;
    let (fwd, bwd) = join(
        || solve_forward(sys, &bc_a, &phi, t_a, nx, &opts.solver),
        || solve_backward(sys, &bc_b, &psi, horizon - t_b, nx, &opts.solver),
    );
    let (fwd, bwd) = (fwd?, bwd?);
    let mid = nx / 2;
    let early = fwd.trace_at(mid);
    let late = bwd.trace_at(mid);
    let blends = (0..sys.n())
        .map(|i| {
            let (e, l) = (early.component(i), late.component(i));
            QuinticBlend {
                a: t_a,
                b: t_b,
                y0: *e.values().last().expect("non-empty trace"),
                d0: end_slope(e, true),
                y1: l.values()[0],
                d1: end_slope(l, false),
            }
        })
        .collect();
    let dt = fwd.dt().min(bwd.dt());
    let samples = ((horizon / dt).ceil() as usize).max(2) + 1;
    Ok(MiddleTrace {
        x0: 0.5 * sys.length(),
        t_a,
        t_b,
        horizon,
        early,
        late,
        blends,
        bumps: vec![0.0; sys.n()],
        aux_min_speed: field_min_speed(sys, &fwd).min(field_min_speed(sys, &bwd)),
        samples,
    })
}

/// Synthesized controls and the solution they were read from.
#[derive(Debug, Clone)]
pub struct ControlResult {
    /// `H_i`, one per incoming trace, sampled on the witness time grid.
    pub controls: Vec<Signal>,
    pub witness: GridField,
    pub horizon: f64,
    pub min_time: f64,
    pub junctions: (f64, f64),
    pub coverage_ok: bool,
    /// Relative value/slope mismatch of the blend at the junctions.
    pub junction_jump: f64,
    /// Sup distance of the computed end rows from `phi` and `psi` before
    /// they were replaced by the exact data.
    pub endpoint_mismatch: (f64, f64),
}

/// Stages (d)-(e): sidewise solves from the middle trace and extraction of
/// the controls.
pub fn synthesize_from_middle(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    phi: &Profile,
    psi: &Profile,
    middle: &MiddleTrace,
    nx: usize,
    opts: &ControlOptions,
) -> Result<ControlResult> {
    check_grid(sys, nx)?;
    let horizon = middle.horizon();
    let length = sys.length();
    let (phi, psi) = (phi.resample(nx), psi.resample(nx));
    let trace = middle.to_trace()?;
    let right = SidewiseProblem {
        trace: &trace,
        x_start: middle.x0,
        x_end: length,
        bottom: &phi,
        top: &psi,
    };
    let left = SidewiseProblem {
        x_end: 0.0,
        ..right
    };
    let half = nx / 2;
    let h = middle.x0 / half as f64;
    let mu = data_min_speed(sys, &right)?.min(data_min_speed(sys, &left)?);
    if mu < opts.sidewise.speed_threshold {
        return Err(Error::DegenerateSpeed {
            speed: mu,
            threshold: opts.sidewise.speed_threshold,
        });
    }
    let side_opts = SidewiseOptions {
        nt: Some(
            opts.sidewise
                .nt
                .unwrap_or_else(|| sidewise_time_cells(horizon, h, mu, opts.sidewise.cfl)),
        ),
        ..opts.sidewise
    };
    let (r, l) = join(
        || solve_sidewise_problem(sys, &right, half, &side_opts),
        || solve_sidewise_problem(sys, &left, half, &side_opts),
    );
    let (r, l) = (r?, l?);
    let (n, nt) = (sys.n(), r.nt());
    let mut data = Vec::with_capacity((nt + 1) * (nx + 1) * n);
    for k in 0..=nt {
        data.extend_from_slice(l.row(k));
        data.extend_from_slice(&r.row(k)[n..]);
    }
    let mut witness = GridField::from_data(n, horizon, length, nt, nx, data)?;

    let mu_all = middle
        .aux_min_speed
        .min(field_min_speed(sys, &witness));
    let reach = 0.5 * length / mu_all;
    let coverage_ok = middle.t_a >= reach && horizon - middle.t_b >= reach;
    if !coverage_ok {
        return Err(Error::CoverageFailure(format!(
            "junction times ({:.6}, {:.6}) leave less than {reach:.6} at the ends of [0, {horizon:.6}]",
            middle.t_a, middle.t_b
        )));
    }

    let mismatch = (
        witness.slice(0).sup_distance(&phi),
        witness.slice(nt).sup_distance(&psi),
    );
    witness.row_mut(0).copy_from_slice(phi.values());
    witness.row_mut(nt).copy_from_slice(psi.values());

    let controls = extract_controls(sys, bc, &witness)?;
    Ok(ControlResult {
        controls,
        witness,
        horizon,
        min_time: min_control_time(sys)?,
        junctions: (middle.t_a, middle.t_b),
        coverage_ok,
        junction_jump: middle.junction_jump(),
        endpoint_mismatch: mismatch,
    })
}

/// `H(t_k) = z(t_k) - G_in(t_k, w(t_k))` on every row of a field.
pub fn extract_controls(sys: &DiagonalSystem, bc: &NonlocalBC, field: &GridField) -> Result<Vec<Signal>> {
    let (nw, nz) = (sys.n_outgoing(), sys.n_incoming());
    let nx = field.nx();
    let mut w = vec![0.0; nw];
    let mut z = vec![0.0; nz];
    let mut g = vec![0.0; nz];
    let mut cols = vec![Vec::with_capacity(field.nt() + 1); nz];
    for k in 0..=field.nt() {
        let (left, right) = (field.point(k, 0), field.point(k, nx));
        sys.outgoing(left, right, &mut w);
        sys.incoming(left, right, &mut z);
        bc.map(field.t(k), &w, &mut g)?;
        for i in 0..nz {
            cols[i].push(z[i] - g[i]);
        }
    }
    cols.into_iter()
        .map(|c| Signal::new(field.horizon(), c))
        .collect()
}

/// Largest `|z - G_in(t, w) - H(t)|` over the rows of a field.
pub fn boundary_identity_residual(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    field: &GridField,
    controls: &[Signal],
) -> Result<f64> {
    let (nw, nz) = (sys.n_outgoing(), sys.n_incoming());
    let nx = field.nx();
    let mut w = vec![0.0; nw];
    let mut z = vec![0.0; nz];
    let mut g = vec![0.0; nz];
    let mut worst = 0.0_f64;
    for k in 0..=field.nt() {
        let t = field.t(k);
        let (left, right) = (field.point(k, 0), field.point(k, nx));
        sys.outgoing(left, right, &mut w);
        sys.incoming(left, right, &mut z);
        bc.map(t, &w, &mut g)?;
        for i in 0..nz {
            worst = worst.max((z[i] - g[i] - controls[i].eval(t)).abs());
        }
    }
    Ok(worst)
}

/// Controls steering `phi` at `t = 0` to `psi` at `t = horizon`.
pub fn synthesize_controls(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    phi: &Profile,
    psi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &ControlOptions,
) -> Result<ControlResult> {
    let middle = middle_trace(sys, bc, phi, psi, horizon, nx, opts)?;
    synthesize_from_middle(sys, bc, phi, psi, &middle, nx, opts)
}

/// Outcome of re-simulating with synthesized controls.
#[derive(Debug, Clone)]
pub struct Verification {
    pub sup_error: f64,
    pub c1_error: f64,
    pub final_state: Profile,
}

/// Forward solve from `phi` with controls `H` and compare with `psi`.
#[allow(clippy::too_many_arguments)]
pub fn verify_control(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    phi: &Profile,
    controls: &[Signal],
    psi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &SolverOptions,
) -> Result<Verification> {
    let final_state = simulate_with_controls(sys, bc, phi, controls, horizon, nx, opts)?;
    let diff = final_state.difference(&psi.resample(nx));
    Ok(Verification {
        sup_error: diff.sup_norm(),
        c1_error: diff.c1_norm(),
        final_state,
    })
}

/// Final state of a forward solve with sampled controls.
pub fn simulate_with_controls(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    phi: &Profile,
    controls: &[Signal],
    horizon: f64,
    nx: usize,
    opts: &SolverOptions,
) -> Result<Profile> {
    let bc = bc.with_controls(controls.to_vec())?;
    Ok(solve_forward(sys, &bc, &phi.resample(nx), horizon, nx, opts)?.last())
}
