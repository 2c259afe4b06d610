//! Control and observation of the wave equation through its two moving
//! components `(V1, V3)`.
//!
//! When `K` and `F` do not depend on `u`, the pair `(V1, V3)` is closed, and
//! `u` follows from `u_t = w` at each fixed `x`. Synthesis runs on the pair;
//! the displacement at the final time is matched at one point by adding a
//! bump to the middle trace, which fixes the constant left free by
//! `u_x(T) = Φ'`.

use std::sync::Arc;

use super::wave::{cumulative_trapezoid, displacement_gap, gradient, wave_bc, wave_initial, WaveSpec};
use crate::control::blend::bump_integral;
use crate::control::observe::{reconstruct_from_traces, Reconstruction};
use crate::control::synthesis::{middle_trace, synthesize_from_middle, ControlOptions, ControlResult};
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::signal::{Profile, Signal, Trace};
use crate::solver::forward::{solve_forward, SolverOptions};
use crate::solver::sidewise::SidewiseOptions;
use crate::system::{DiagonalSystem, NonlocalBC};

/// The closed `(V1, V3)` system with speeds `(-sqrt K_v, sqrt K_v)`.
pub fn moving_subsystem(spec: &WaveSpec) -> Result<DiagonalSystem> {
    spec.validate()?;
    if spec.depends_on_u() {
        return Err(Error::ConstraintViolated(
            "the (V1, V3) pair is closed only when K and F ignore u".into(),
        ));
    }
    let (s1, s2) = (spec.clone(), spec.clone());
    let speeds = Arc::new(move |d: &[f64], out: &mut [f64]| {
        match s1.invert_potential(0.0, 0.5 * (d[0] - d[1])).and_then(|v| s1.speed(0.0, v)) {
            Ok(c) => {
                out[0] = -c;
                out[1] = c;
            }
            Err(_) => out.fill(f64::NAN),
        }
    });
    let source = Arc::new(move |d: &[f64], out: &mut [f64]| {
        match s2.invert_potential(0.0, 0.5 * (d[0] - d[1])) {
            Ok(v) => {
                let w = 0.5 * (d[0] + d[1]);
                out.fill((s2.source)(0.0, v, w) + (s2.flux_u)(0.0, v) * v);
            }
            Err(_) => out.fill(f64::NAN),
        }
    });
    DiagonalSystem::new(2, 1, 1, spec.length, spec.radius, speeds, source)
}

/// `V3(t,0) = V3(t,L) + H_1`, `V1(t,L) = V1(t,0) + H_2`.
pub fn moving_periodic_bc() -> NonlocalBC {
    NonlocalBC::linear(2, 2, vec![0.0, 1.0, 1.0, 0.0]).expect("2x2 matrix")
}

/// `(V1, V3)` profile from displacement and velocity profiles.
pub fn moving_profile(spec: &WaveSpec, phi: &Profile, psi: &Profile) -> Result<Profile> {
    let full = wave_initial(spec, phi, psi)?;
    let mut out = Profile::zeros(phi.length(), 2, phi.nx());
    for j in 0..=phi.nx() {
        let p = full.point(j);
        out.point_mut(j).copy_from_slice(&[p[0], p[2]]);
    }
    Ok(out)
}

fn physical(spec: &WaveSpec, d: &[f64]) -> Result<(f64, f64)> {
    Ok((spec.invert_potential(0.0, 0.5 * (d[0] - d[1]))?, 0.5 * (d[0] + d[1])))
}

#[derive(Debug, Clone)]
pub struct WaveControl {
    /// Synthesis on the `(V1, V3)` pair.
    pub result: ControlResult,
    /// Displacement control `u(t,0) - u(t,L)`, with `h'` attached.
    pub h: Signal,
    /// Gradient control `u_x(t,0) - u_x(t,L)`.
    pub hbar: Signal,
    /// Amplitude of the bump added to `w` at the middle point.
    pub bump: f64,
}

fn interpolate(p: &Profile, x: f64) -> f64 {
    let mut out = vec![0.0; p.n()];
    p.eval(x, &mut out);
    out[0]
}

/// Controls `(h, h̄)` steering `(φ, ψ)` to `(Φ, Ψ)` at time `T`; all four
/// profiles are single-component on `[0, L]`.
#[allow(clippy::too_many_arguments)]
pub fn wave_control(
    spec: &WaveSpec,
    phi: &Profile,
    psi: &Profile,
    target_phi: &Profile,
    target_psi: &Profile,
    horizon: f64,
    nx: usize,
    opts: &ControlOptions,
) -> Result<WaveControl> {
    let sys = moving_subsystem(spec)?;
    let bc = moving_periodic_bc();
    let (phi, psi) = (phi.resample(nx), psi.resample(nx));
    let (target_phi, target_psi) = (target_phi.resample(nx), target_psi.resample(nx));
    let start = moving_profile(spec, &phi, &psi)?;
    let end = moving_profile(spec, &target_phi, &target_psi)?;

    let mut middle = middle_trace(&sys, &bc, &start, &end, horizon, nx, opts)?;
    let trace = middle.to_trace()?;
    let w_mid: Vec<f64> = trace.component(0).values().iter().zip(trace.component(1).values())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let travelled = cumulative_trapezoid(&w_mid, trace.dt(), 0.0);
    let x0 = middle.x0;
    let wanted = interpolate(&target_phi, x0) - interpolate(&phi, x0);
    let bump = (wanted - travelled[travelled.len() - 1]) / bump_integral(middle.t_a, middle.t_b);
    middle.set_bumps(vec![bump, bump]);

    let result = synthesize_from_middle(&sys, &bc, &start, &end, &middle, nx, opts)?;
    let field = &result.witness;
    let mut dh = Vec::with_capacity(field.nt() + 1);
    let mut hbar = Vec::with_capacity(field.nt() + 1);
    for k in 0..=field.nt() {
        let (v0, w0) = physical(spec, field.point(k, 0))?;
        let (v1, w1) = physical(spec, field.point(k, nx))?;
        dh.push(w0 - w1);
        hbar.push(v0 - v1);
    }
    let h0 = phi.value(0, 0) - phi.value(0, nx);
    let h = Signal::new(horizon, cumulative_trapezoid(&dh, field.dt(), h0))?.with_derivative(dh)?;
    Ok(WaveControl {
        result,
        h,
        hbar: Signal::new(horizon, hbar)?,
        bump,
    })
}

#[derive(Debug, Clone)]
pub struct WaveVerification {
    /// Sup distance of the final `(V1, V2, V3)` from the target.
    pub sup_error: f64,
    /// Sup distance of `u(T)` from `Φ`.
    pub displacement_error: f64,
    /// Largest `|u(t,0) - u(t,L) - h(t)|`.
    pub displacement_gap: f64,
    pub field: GridField,
}

/// Full three-component forward solve with the physical controls.
#[allow(clippy::too_many_arguments)]
pub fn verify_wave_control(
    spec: &WaveSpec,
    phi: &Profile,
    psi: &Profile,
    target_phi: &Profile,
    target_psi: &Profile,
    control: &WaveControl,
    nx: usize,
    opts: &SolverOptions,
) -> Result<WaveVerification> {
    let app = super::wave::wave_build(spec)?;
    let (phi, psi) = (phi.resample(nx), psi.resample(nx));
    let bc = wave_bc(spec, &control.h, &control.hbar, &phi)?;
    let initial = wave_initial(spec, &phi, &psi)?;
    let field = solve_forward(&app.system, &bc, &initial, control.h.horizon(), nx, opts)?;
    let target = wave_initial(spec, &target_phi.resample(nx), &target_psi.resample(nx))?;
    let last = field.last();
    let displacement_error = (0..=nx)
        .map(|j| (last.value(1, j) - target.value(1, j)).abs())
        .fold(0.0, f64::max);
    Ok(WaveVerification {
        sup_error: last.sup_distance(&target),
        displacement_error,
        displacement_gap: displacement_gap(&field, &control.h),
        field,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Left,
    Right,
}

/// Displacement measured at one end, gradient at one end, and the known
/// controls.
#[derive(Debug, Clone)]
pub struct WaveObservation {
    pub displacement_end: End,
    pub displacement: Signal,
    pub gradient_end: End,
    pub gradient: Signal,
    pub h: Signal,
    pub hbar: Signal,
}

impl WaveObservation {
    /// Measurements of a solved `(V1, V2, V3)` field.
    pub fn from_field(
        spec: &WaveSpec,
        field: &GridField,
        h: Signal,
        hbar: Signal,
        displacement_end: End,
        gradient_end: End,
    ) -> Result<Self> {
        let col = |e: End| if e == End::Left { 0 } else { field.nx() };
        let u = field.signal_at(1, col(displacement_end));
        let j = col(gradient_end);
        let ux = (0..=field.nt())
            .map(|k| {
                let d = field.point(k, j);
                spec.invert_potential(d[1], 0.5 * (d[0] - d[2]))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            displacement_end,
            displacement: u,
            gradient_end,
            gradient: Signal::new(field.horizon(), ux)?,
            h,
            hbar,
        })
    }
}

#[derive(Debug, Clone)]
pub struct WaveReconstruction {
    pub phi: Profile,
    pub psi: Profile,
    pub inner: Reconstruction,
}

/// Initial displacement and velocity from one displacement and one gradient
/// measurement.
pub fn wave_observe(
    spec: &WaveSpec,
    obs: &WaveObservation,
    nx: usize,
    sopts: &SidewiseOptions,
    solver: &SolverOptions,
) -> Result<WaveReconstruction> {
    let sys = moving_subsystem(spec)?;
    let horizon = obs.displacement.horizon();
    let t_star = spec.min_control_time();
    if horizon <= t_star {
        return Err(Error::TimeTooShort { t: horizon, t_star });
    }
    if obs.gradient.len() != obs.displacement.len() {
        return Err(Error::InvalidInput("measurements must share one time grid".into()));
    }
    let u = obs.displacement.values();
    let w_meas = gradient(u, obs.displacement.dt());
    let samples = u.len();
    let (mut left, mut right) = (Vec::with_capacity(2 * samples), Vec::with_capacity(2 * samples));
    for k in 0..samples {
        let t = obs.displacement.time(k);
        let (dh, hb) = (obs.h.derivative_at(t), obs.hbar.eval(t));
        let (w0, w1) = match obs.displacement_end {
            End::Left => (w_meas[k], w_meas[k] - dh),
            End::Right => (w_meas[k] + dh, w_meas[k]),
        };
        let g = obs.gradient.values()[k];
        let (v0, v1) = match obs.gradient_end {
            End::Left => (g, g - hb),
            End::Right => (g + hb, g),
        };
        let (p0, p1) = (spec.potential(0.0, v0), spec.potential(0.0, v1));
        left.extend_from_slice(&[w0 + p0, w0 - p0]);
        right.extend_from_slice(&[w1 + p1, w1 - p1]);
    }
    let left = Trace::from_samples(horizon, 2, &left)?;
    let right = Trace::from_samples(horizon, 2, &right)?;
    let inner = reconstruct_from_traces(&sys, &left, &right, nx, sopts, solver)?;
    let init = &inner.initial;
    let (mut v, mut w) = (Vec::with_capacity(nx + 1), Vec::with_capacity(nx + 1));
    for j in 0..=nx {
        let (vj, wj) = physical(spec, init.point(j))?;
        v.push(vj);
        w.push(wj);
    }
    let u0 = match obs.displacement_end {
        End::Left => u[0],
        End::Right => u[0] + obs.h.eval(0.0),
    };
    let length = spec.length;
    Ok(WaveReconstruction {
        phi: Profile::new(length, 1, cumulative_trapezoid(&v, init.dx(), u0))?,
        psi: Profile::new(length, 1, w)?,
        inner,
    })
}
