//! Diagonal quasilinear hyperbolic systems, nonlocal boundary conditions,
//! physical charts and the checks that guard them.
//!
//! Components are ordered by the sign of their characteristic speed:
//! `0..l` are negative, `l..m` vanish identically and `m..n` are positive
//! (zero-based). At `x = 0` the positive components enter the strip, at
//! `x = L` the negative ones do. Boundary maps take the outgoing traces
//!
//! ```text
//! w = (v_0..v_{m-1} at x=0, v_l..v_{n-1} at x=L)
//! ```
//!
//! and return the incoming ones
//!
//! ```text
//! z = (v_m..v_{n-1} at x=0, v_0..v_{l-1} at x=L).
//! ```

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::newton;
use crate::signal::{Profile, Signal};

/// State-dependent vector field `v -> out`.
pub type StateMap = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// Boundary map `(t, w) -> out`.
pub type BoundaryMap = Arc<dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync>;
/// Fallible coordinate change.
pub type ChartMap = Arc<dyn Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync>;

/// `∂G/∂w` evaluated at `(t, w)`.
pub type JacobianMap = Arc<dyn Fn(f64, &[f64]) -> Result<DMatrix<f64>> + Send + Sync>;

/// An `n`-component system `∂_t v_i + λ_i(v) ∂_x v_i = f_i(v)` on `[0, L]`.
#[derive(Clone)]
pub struct DiagonalSystem {
    n: usize,
    l: usize,
    m: usize,
    length: f64,
    radius: f64,
    speeds: StateMap,
    source: StateMap,
}

impl fmt::Debug for DiagonalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagonalSystem")
            .field("n", &self.n)
            .field("l", &self.l)
            .field("m", &self.m)
            .field("length", &self.length)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

impl DiagonalSystem {
    pub fn new(
        n: usize,
        l: usize,
        m: usize,
        length: f64,
        radius: f64,
        speeds: StateMap,
        source: StateMap,
    ) -> Result<Self> {
        if n == 0 || l > m || m > n {
            return Err(Error::InvalidInput(format!(
                "sign pattern needs 0 <= l <= m <= n, n >= 1 (got n={n}, l={l}, m={m})"
            )));
        }
        if !(length > 0.0) || !(radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "length and admissible radius must be positive (got {length}, {radius})"
            )));
        }
        let sys = Self {
            n,
            l,
            m,
            length,
            radius,
            speeds,
            source,
        };
        let zero = vec![0.0; n];
        let mut f0 = vec![0.0; n];
        sys.source(&zero, &mut f0);
        if let Some((i, v)) = f0.iter().enumerate().find(|(_, v)| **v != 0.0) {
            return Err(Error::ConstraintViolated(format!(
                "source must vanish at the origin, f_{i}(0) = {v:e}"
            )));
        }
        Ok(sys)
    }

    /// Constant speeds, no source. Speeds must already be sorted by sign.
    pub fn constant(length: f64, radius: f64, speeds: &[f64]) -> Result<Self> {
        let n = speeds.len();
        let l = speeds.iter().take_while(|s| **s < 0.0).count();
        let m = l + speeds[l..].iter().take_while(|s| **s == 0.0).count();
        if speeds[m..].iter().any(|s| *s <= 0.0) {
            return Err(Error::InvalidInput(
                "constant speeds must be ordered negative, zero, positive".into(),
            ));
        }
        let lam = speeds.to_vec();
        Self::new(
            n,
            l,
            m,
            length,
            radius,
            Arc::new(move |_, out| out.copy_from_slice(&lam)),
            Arc::new(|_, out| out.fill(0.0)),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn l(&self) -> usize {
        self.l
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn speeds(&self, v: &[f64], out: &mut [f64]) {
        (self.speeds)(v, out)
    }

    pub fn source(&self, v: &[f64], out: &mut [f64]) {
        (self.source)(v, out)
    }

    pub fn speed_map(&self) -> &StateMap {
        &self.speeds
    }

    pub fn source_map(&self) -> &StateMap {
        &self.source
    }

    pub fn speeds_at_zero(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.speeds(&vec![0.0; self.n], &mut out);
        out
    }

    /// Same system on an interval of different length.
    pub fn with_length(&self, length: f64) -> Self {
        Self {
            length,
            ..self.clone()
        }
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        Self {
            radius,
            ..self.clone()
        }
    }

    /// Number of outgoing traces `m + (n - l)`.
    pub fn n_outgoing(&self) -> usize {
        self.m + self.n - self.l
    }

    /// Number of incoming traces `(n - m) + l`.
    pub fn n_incoming(&self) -> usize {
        self.n - self.m + self.l
    }

    pub fn has_zero_speeds(&self) -> bool {
        self.l != self.m
    }

    /// Gather `w` from the states at both ends.
    pub fn outgoing(&self, left: &[f64], right: &[f64], w: &mut [f64]) {
        w[..self.m].copy_from_slice(&left[..self.m]);
        w[self.m..].copy_from_slice(&right[self.l..]);
    }

    /// Gather `z` from the states at both ends.
    pub fn incoming(&self, left: &[f64], right: &[f64], z: &mut [f64]) {
        let k = self.n - self.m;
        z[..k].copy_from_slice(&left[self.m..]);
        z[k..].copy_from_slice(&right[..self.l]);
    }

    /// Scatter `z` into the states at both ends.
    pub fn scatter_incoming(&self, z: &[f64], left: &mut [f64], right: &mut [f64]) {
        let k = self.n - self.m;
        left[self.m..].copy_from_slice(&z[..k]);
        right[..self.l].copy_from_slice(&z[k..]);
    }

    /// Speed sign check for one state.
    pub fn sign_pattern_holds(&self, lam: &[f64]) -> bool {
        lam.iter().enumerate().all(|(i, s)| {
            if i < self.l {
                *s < 0.0
            } else if i < self.m {
                *s == 0.0
            } else {
                *s > 0.0
            }
        })
    }
}

/// Boundary conditions as consumed by the solvers: given time and outgoing
/// traces, produce the incoming traces.
pub trait BoundaryRule: Send + Sync {
    fn incoming(&self, t: f64, outgoing: &[f64], incoming: &mut [f64]) -> Result<()>;
}

/// Time-dependent control term `H(t)` of a boundary condition.
pub type ControlFn = Arc<dyn Fn(f64, &mut [f64]) -> Result<()> + Send + Sync>;

/// The inhomogeneity `H` added to the boundary map.
#[derive(Clone, Default)]
pub enum Controls {
    /// `H ≡ 0`.
    #[default]
    Zero,
    /// Sampled signals, one per incoming trace, linearly interpolated.
    Sampled(Vec<Signal>),
    /// Evaluated exactly at every requested time.
    Function(ControlFn),
}

impl fmt::Debug for Controls {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Controls::Zero => write!(f, "Zero"),
            Controls::Sampled(s) => write!(f, "Sampled({} signals)", s.len()),
            Controls::Function(_) => write!(f, "Function"),
        }
    }
}

/// Nonlocal boundary conditions `z = G_in(t, w) + H(t)`.
#[derive(Clone)]
pub struct NonlocalBC {
    n_out: usize,
    n_in: usize,
    map: BoundaryMap,
    jacobian: Option<JacobianMap>,
    controls: Controls,
}

impl fmt::Debug for NonlocalBC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlocalBC")
            .field("n_out", &self.n_out)
            .field("n_in", &self.n_in)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("controls", &self.controls)
            .finish()
    }
}

impl NonlocalBC {
    pub fn new(n_out: usize, n_in: usize, map: BoundaryMap) -> Self {
        Self {
            n_out,
            n_in,
            map,
            jacobian: None,
            controls: Controls::Zero,
        }
    }

    /// Linear map `z = M w`, with `M` given row-major (`n_in x n_out`).
    pub fn linear(n_out: usize, n_in: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != n_out * n_in {
            return Err(Error::InvalidInput("boundary matrix has wrong size".into()));
        }
        let mat = Arc::new(matrix);
        let m2 = mat.clone();
        let map: BoundaryMap = Arc::new(move |_, w, out| {
            for (r, o) in out.iter_mut().enumerate() {
                *o = (0..n_out).map(|c| mat[r * n_out + c] * w[c]).sum();
            }
            Ok(())
        });
        let jac: JacobianMap =
            Arc::new(move |_, _| Ok(DMatrix::from_row_slice(n_in, n_out, &m2)));
        Ok(Self::new(n_out, n_in, map).with_jacobian(jac))
    }

    pub fn for_system(sys: &DiagonalSystem, map: BoundaryMap) -> Self {
        Self::new(sys.n_outgoing(), sys.n_incoming(), map)
    }

    pub fn with_jacobian(mut self, jacobian: JacobianMap) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    /// Replace `H` by sampled signals.
    pub fn with_controls(&self, controls: Vec<Signal>) -> Result<Self> {
        if controls.len() != self.n_in {
            return Err(Error::InvalidInput(format!(
                "expected {} control signals, got {}",
                self.n_in,
                controls.len()
            )));
        }
        Ok(Self {
            controls: Controls::Sampled(controls),
            ..self.clone()
        })
    }

    /// Replace `H` by an exactly evaluated function of time.
    pub fn with_control_fn(&self, f: ControlFn) -> Self {
        Self {
            controls: Controls::Function(f),
            ..self.clone()
        }
    }

    pub fn without_controls(&self) -> Self {
        Self {
            controls: Controls::Zero,
            ..self.clone()
        }
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }
    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn controls(&self) -> &Controls {
        &self.controls
    }

    pub fn has_controls(&self) -> bool {
        !matches!(self.controls, Controls::Zero)
    }

    /// `H(t)`.
    pub fn control_values(&self, t: f64, out: &mut [f64]) -> Result<()> {
        match &self.controls {
            Controls::Zero => out.fill(0.0),
            Controls::Sampled(s) => {
                for (o, sig) in out.iter_mut().zip(s) {
                    *o = sig.eval(t);
                }
            }
            Controls::Function(f) => f(t, out)?,
        }
        Ok(())
    }

    /// `H'(t)`; one-sided differences of step `1e-6` for function controls.
    pub fn control_derivatives(&self, t: f64, out: &mut [f64]) -> Result<()> {
        match &self.controls {
            Controls::Zero => out.fill(0.0),
            Controls::Sampled(s) => {
                for (o, sig) in out.iter_mut().zip(s) {
                    *o = sig.derivative_at(t);
                }
            }
            Controls::Function(f) => {
                let h = 1e-6;
                let mut a = vec![0.0; out.len()];
                f(t, &mut a)?;
                f(t + h, out)?;
                for (o, a) in out.iter_mut().zip(&a) {
                    *o = (*o - a) / h;
                }
            }
        }
        Ok(())
    }

    /// `H` sampled on `samples` uniform points of `[0, horizon]`.
    pub fn sampled_controls(&self, horizon: f64, samples: usize) -> Result<Vec<Signal>> {
        let samples = samples.max(2);
        let mut cols = vec![Vec::with_capacity(samples); self.n_in];
        let mut buf = vec![0.0; self.n_in];
        for k in 0..samples {
            let t = horizon * k as f64 / (samples - 1) as f64;
            self.control_values(t, &mut buf)?;
            for (c, v) in cols.iter_mut().zip(&buf) {
                c.push(*v);
            }
        }
        cols.into_iter().map(|c| Signal::new(horizon, c)).collect()
    }

    /// `G_in(t, w)` without the control term.
    pub fn map(&self, t: f64, w: &[f64], out: &mut [f64]) -> Result<()> {
        (self.map)(t, w, out)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation {
                what: "boundary map".into(),
            });
        }
        Ok(())
    }

    pub fn map_fn(&self) -> &BoundaryMap {
        &self.map
    }

    /// `∂G_in/∂w` at `(t, w)`, analytic when available.
    pub fn jacobian(&self, t: f64, w: &[f64]) -> Result<DMatrix<f64>> {
        if let Some(j) = &self.jacobian {
            return j(t, w);
        }
        let mut f = |x: &[f64], out: &mut [f64]| self.map(t, x, out);
        newton::fd_jacobian(&mut f, w, self.n_in)
    }

    /// Controls that make `z = G_in(t, w) + H(t)` hold exactly for the given
    /// traces: `H = z - G_in(t, w)`.
    pub fn residual_controls(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        self.map(t, w, out)?;
        for (o, zi) in out.iter_mut().zip(z) {
            *o = zi - *o;
        }
        Ok(())
    }
}

impl BoundaryRule for NonlocalBC {
    fn incoming(&self, t: f64, outgoing: &[f64], incoming: &mut [f64]) -> Result<()> {
        self.map(t, outgoing, incoming)?;
        if self.has_controls() {
            let mut h = vec![0.0; self.n_in];
            self.control_values(t, &mut h)?;
            for (z, h) in incoming.iter_mut().zip(&h) {
                *z += h;
            }
        }
        Ok(())
    }
}

/// Coordinate change between physical unknowns and diagonal variables.
#[derive(Clone)]
pub struct PhysicalChart {
    to_diag: ChartMap,
    from_diag: ChartMap,
    equilibrium: Vec<f64>,
    labels: Vec<String>,
}

impl fmt::Debug for PhysicalChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhysicalChart")
            .field("equilibrium", &self.equilibrium)
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}

impl PhysicalChart {
    pub fn new(
        to_diag: ChartMap,
        from_diag: ChartMap,
        equilibrium: Vec<f64>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let chart = Self {
            to_diag,
            from_diag,
            equilibrium,
            labels,
        };
        let mut v = vec![0.0; chart.equilibrium.len()];
        chart.to_diag(&chart.equilibrium, &mut v)?;
        if v.iter().any(|x| *x != 0.0) {
            return Err(Error::ConstraintViolated(format!(
                "equilibrium must map to the origin, got {v:?}"
            )));
        }
        Ok(chart)
    }

    /// Physical unknowns equal the diagonal variables.
    pub fn identity(n: usize) -> Self {
        let id: ChartMap = Arc::new(|a, b| {
            b.copy_from_slice(a);
            Ok(())
        });
        Self {
            to_diag: id.clone(),
            from_diag: id,
            equilibrium: vec![0.0; n],
            labels: (1..=n).map(|i| format!("v{i}")).collect(),
        }
    }

    pub fn to_diag(&self, u: &[f64], v: &mut [f64]) -> Result<()> {
        (self.to_diag)(u, v)
    }

    pub fn from_diag(&self, v: &[f64], u: &mut [f64]) -> Result<()> {
        (self.from_diag)(v, u)
    }

    pub fn equilibrium(&self) -> &[f64] {
        &self.equilibrium
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// A single failed check found by [`validate_system`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SourceAtOrigin { component: usize, value: f64 },
    SignPattern {
        component: usize,
        state: Vec<f64>,
        speed: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += f * (k % base) as f64;
        k /= base;
        f *= inv;
    }
    inv = r;
    inv
}

/// Halton point `k` of dimension `dim` in `[-radius, radius]^dim`.
pub fn halton_point(k: usize, dim: usize, radius: f64, out: &mut [f64]) {
    for (d, o) in out.iter_mut().enumerate().take(dim) {
        let base = PRIMES[d % PRIMES.len()] as u64 + 2 * (d / PRIMES.len()) as u64 * 59;
        *o = radius * (2.0 * radical_inverse(k as u64 + 1, base) - 1.0);
    }
}

/// Check `f(0) = 0` and the speed sign pattern at `samples` quasi-random
/// points of the admissible ball.
pub fn validate_system(sys: &DiagonalSystem, samples: usize) -> Result<ValidationReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let n = sys.n();
    let mut violations = Vec::new();
    let zero = vec![0.0; n];
    let mut buf = vec![0.0; n];
    sys.source(&zero, &mut buf);
    for (i, v) in buf.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteEvaluation {
                what: format!("source component {i} at the origin"),
            });
        }
        if *v != 0.0 {
            violations.push(Violation::SourceAtOrigin {
                component: i,
                value: *v,
            });
        }
    }
    let mut state = vec![0.0; n];
    for k in 0..samples {
        if k > 0 {
            halton_point(k - 1, n, sys.radius(), &mut state);
        }
        sys.speeds(&state, &mut buf);
        check_finite(&buf, "speeds", &state)?;
        for (i, s) in buf.iter().enumerate() {
            let ok = if i < sys.l() {
                *s < 0.0
            } else if i < sys.m() {
                *s == 0.0
            } else {
                *s > 0.0
            };
            if !ok {
                violations.push(Violation::SignPattern {
                    component: i,
                    state: state.clone(),
                    speed: *s,
                });
            }
        }
        sys.source(&state, &mut buf);
        check_finite(&buf, "source", &state)?;
    }
    Ok(ValidationReport {
        samples,
        violations,
    })
}

fn check_finite(vals: &[f64], what: &str, state: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteEvaluation {
            what: format!("{what} at {state:?}"),
        })
    }
}

/// Compatibility residuals at the corners `(0, 0)` and `(0, L)`.
///
/// Entries follow the incoming-trace ordering: `left` holds the components
/// entering at `x = 0`, `right` those entering at `x = L`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub c0_left: Vec<f64>,
    pub c0_right: Vec<f64>,
    pub c1_left: Vec<f64>,
    pub c1_right: Vec<f64>,
}

impl CompatibilityReport {
    pub fn max_c0(&self) -> f64 {
        self.c0_left
            .iter()
            .chain(&self.c0_right)
            .fold(0.0, |a, b| a.max(*b))
    }

    pub fn max_c1(&self) -> f64 {
        self.c1_left
            .iter()
            .chain(&self.c1_right)
            .fold(0.0, |a, b| a.max(*b))
    }
}

/// Time derivative of every component at an end point, obtained from the
/// equation: `v_t = -λ(v) v_x + f(v)`.
fn time_derivative_at(sys: &DiagonalSystem, v: &[f64], vx: &[f64]) -> Vec<f64> {
    let n = sys.n();
    let mut lam = vec![0.0; n];
    let mut src = vec![0.0; n];
    sys.speeds(v, &mut lam);
    sys.source(v, &mut src);
    (0..n).map(|i| -lam[i] * vx[i] + src[i]).collect()
}

/// C⁰ (and for `order >= 1` also C¹) compatibility residuals of `phi` with
/// the boundary conditions `bc`, including its control signals.
pub fn check_compatibility(
    sys: &DiagonalSystem,
    bc: &NonlocalBC,
    phi: &Profile,
    order: u8,
) -> Result<CompatibilityReport> {
    let nx = phi.nx();
    if nx + 1 < 3 {
        return Err(Error::GridTooCoarse {
            points: nx + 1,
            required: 3,
        });
    }
    let (n, nw, nz) = (sys.n(), sys.n_outgoing(), sys.n_incoming());
    let split = n - sys.m();
    let left = phi.point(0);
    let right = phi.point(nx);
    let mut w = vec![0.0; nw];
    let mut z = vec![0.0; nz];
    sys.outgoing(left, right, &mut w);
    sys.incoming(left, right, &mut z);
    let mut rhs = vec![0.0; nz];
    bc.incoming(0.0, &w, &mut rhs)?;
    let c0: Vec<f64> = z.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).collect();

    let (mut c1_left, mut c1_right) = (Vec::new(), Vec::new());
    if order >= 1 {
        let dx = phi.dx();
        let vx_left: Vec<f64> = (0..n)
            .map(|i| (phi.value(i, 1) - phi.value(i, 0)) / dx)
            .collect();
        let vx_right: Vec<f64> = (0..n)
            .map(|i| (phi.value(i, nx) - phi.value(i, nx - 1)) / dx)
            .collect();
        let vt_left = time_derivative_at(sys, left, &vx_left);
        let vt_right = time_derivative_at(sys, right, &vx_right);
        let mut wt = vec![0.0; nw];
        let mut zt = vec![0.0; nz];
        sys.outgoing(&vt_left, &vt_right, &mut wt);
        sys.incoming(&vt_left, &vt_right, &mut zt);

        let jac = bc.jacobian(0.0, &w)?;
        let ht = 1e-6;
        let mut g0 = vec![0.0; nz];
        let mut g1 = vec![0.0; nz];
        bc.map(0.0, &w, &mut g0)?;
        bc.map(ht, &w, &mut g1)?;
        let mut dh = vec![0.0; nz];
        bc.control_derivatives(0.0, &mut dh)?;
        let c1: Vec<f64> = (0..nz)
            .map(|r| {
                let chain: f64 = (0..nw).map(|c| jac[(r, c)] * wt[c]).sum();
                let dg = (g1[r] - g0[r]) / ht + chain + dh[r];
                (zt[r] - dg).abs()
            })
            .collect();
        c1_left = c1[..split].to_vec();
        c1_right = c1[split..].to_vec();
    }
    Ok(CompatibilityReport {
        c0_left: c0[..split].to_vec(),
        c0_right: c0[split..].to_vec(),
        c1_left,
        c1_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_speed() -> DiagonalSystem {
        DiagonalSystem::constant(1.0, 1.0, &[-1.0, 1.0]).unwrap()
    }

    /// `s(0) = r... ` style loop: incoming (v_1 at 0, v_0 at L) = (v_1 at L, v_0 at 0).
    fn loop_bc() -> NonlocalBC {
        NonlocalBC::linear(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn identity_source_with_constant_speeds_is_valid() {
        let sys = DiagonalSystem::new(
            2,
            1,
            1,
            1.0,
            1.0,
            Arc::new(|_, o| {
                o[0] = -1.0;
                o[1] = 1.0
            }),
            Arc::new(|v, o| o.copy_from_slice(v)),
        )
        .unwrap();
        assert!(validate_system(&sys, 64).unwrap().is_valid());
    }

    #[test]
    fn sign_change_inside_ball_is_reported() {
        let sys = DiagonalSystem::new(
            2,
            1,
            1,
            1.0,
            1.0,
            Arc::new(|v, o| {
                o[0] = v[0];
                o[1] = 1.0
            }),
            Arc::new(|_, o| o.fill(0.0)),
        )
        .unwrap();
        let report = validate_system(&sys, 64).unwrap();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .all(|v| matches!(v, Violation::SignPattern { component: 0, .. })));
    }

    #[test]
    fn nan_speed_is_an_error() {
        let sys = DiagonalSystem::new(
            1,
            0,
            0,
            1.0,
            1.0,
            Arc::new(|_, o| o[0] = f64::NAN),
            Arc::new(|_, o| o[0] = 0.0),
        )
        .unwrap();
        assert_eq!(
            validate_system(&sys, 4).unwrap_err().name(),
            "NonFiniteEvaluation"
        );
    }

    #[test]
    fn nonzero_source_at_origin_rejected() {
        let err = DiagonalSystem::new(
            1,
            0,
            0,
            1.0,
            1.0,
            Arc::new(|_, o| o[0] = 1.0),
            Arc::new(|_, o| o[0] = 0.5),
        )
        .unwrap_err();
        assert_eq!(err.name(), "ConstraintViolated");
    }

    #[test]
    fn trace_gather_and_scatter() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-2.0, 0.0, 3.0]).unwrap();
        assert_eq!((sys.l(), sys.m()), (1, 2));
        let left = [1.0, 2.0, 3.0];
        let right = [4.0, 5.0, 6.0];
        let mut w = vec![0.0; sys.n_outgoing()];
        let mut z = vec![0.0; sys.n_incoming()];
        sys.outgoing(&left, &right, &mut w);
        sys.incoming(&left, &right, &mut z);
        assert_eq!(w, vec![1.0, 2.0, 5.0, 6.0]);
        assert_eq!(z, vec![3.0, 4.0]);
        let (mut l2, mut r2) = (left, right);
        sys.scatter_incoming(&[30.0, 40.0], &mut l2, &mut r2);
        assert_eq!(l2, [1.0, 2.0, 30.0]);
        assert_eq!(r2, [40.0, 5.0, 6.0]);
    }

    #[test]
    fn zero_profile_is_compatible() {
        let sys = two_speed();
        let report = check_compatibility(&sys, &loop_bc(), &Profile::zeros(1.0, 2, 10), 1).unwrap();
        assert_eq!(report.max_c0(), 0.0);
        assert_eq!(report.max_c1(), 0.0);
    }

    #[test]
    fn coarse_profile_rejected() {
        let sys = two_speed();
        let phi = Profile::zeros(1.0, 2, 1);
        assert!(matches!(
            check_compatibility(&sys, &loop_bc(), &phi, 0),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn controls_cancelling_c0_residual_leave_c1_residual() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let sys = two_speed();
        let bc = loop_bc();
        let coeffs: Vec<f64> = (0..6).map(|_| rng.gen_range(-1e-2..1e-2)).collect();
        let phi = Profile::from_fn(1.0, 2, 200, |x, o| {
            o[0] = coeffs[0] + coeffs[1] * x + coeffs[2] * (3.0 * x).sin();
            o[1] = coeffs[3] + coeffs[4] * x * x + coeffs[5] * (2.0 * x).cos();
        });
        // Oracle: H(0) = z - G(0, w) read straight off the boundary identity.
        let (l, r) = (phi.point(0), phi.point(200));
        let h0 = [l[1] - r[1], r[0] - l[0]];
        let controls = h0.iter().map(|h| Signal::from_fn(1.0, 11, |_| *h)).collect();
        let bc = bc.with_controls(controls).unwrap();
        let report = check_compatibility(&sys, &bc, &phi, 1).unwrap();
        assert!(report.max_c0() <= 1e-12, "{report:?}");
        assert!(report.max_c1() > 1e-6, "{report:?}");
    }

    #[test]
    fn halton_points_stay_in_ball() {
        let mut p = [0.0; 5];
        for k in 0..200 {
            halton_point(k, 5, 0.3, &mut p);
            assert!(p.iter().all(|x| x.abs() <= 0.3));
        }
    }
}
