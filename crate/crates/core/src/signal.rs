//! Uniformly sampled scalar signals, spatial profiles and boundary traces,
//! together with the discrete C¹ norms used throughout the crate.
//!
//! The discrete C¹ norm of samples `y_0..y_N` with spacing `h` is
//! `max(max_k |y_k|, max_k |y_{k+1} - y_k| / h)`.

use crate::error::{Error, Result};

/// Discrete C¹ norm of uniformly spaced samples.
pub fn c1_norm_samples(values: &[f64], step: f64) -> f64 {
    let sup = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let dsup = values
        .windows(2)
        .fold(0.0_f64, |acc, w| acc.max((w[1] - w[0]).abs() / step));
    sup.max(dsup)
}

fn interp_index(x: f64, step: f64, last: usize) -> (usize, f64) {
    if last == 0 {
        return (0, 0.0);
    }
    let s = (x / step).clamp(0.0, last as f64);
    let k = (s.floor() as usize).min(last - 1);
    (k, s - k as f64)
}

/// A scalar function of time sampled uniformly on `[0, T]`.
///
/// An analytic derivative can be attached; otherwise derivatives are taken
/// by centered differences (one-sided at the ends).
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    dt: f64,
    values: Vec<f64>,
    derivative: Option<Vec<f64>>,
}

impl Signal {
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::GridTooCoarse {
                points: values.len(),
                required: 2,
            });
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "signal horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self {
            dt: horizon / (values.len() - 1) as f64,
            values,
            derivative: None,
        })
    }

    pub fn zero(horizon: f64, samples: usize) -> Self {
        Self::from_fn(horizon, samples, |_| 0.0)
    }

    pub fn from_fn(horizon: f64, samples: usize, f: impl Fn(f64) -> f64) -> Self {
        let samples = samples.max(2);
        let dt = horizon / (samples - 1) as f64;
        Self {
            dt,
            values: (0..samples).map(|k| f(k as f64 * dt)).collect(),
            derivative: None,
        }
    }

    pub fn from_fn_with_derivative(
        horizon: f64,
        samples: usize,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Self {
        let mut s = Self::from_fn(horizon, samples, f);
        s.derivative = Some((0..s.values.len()).map(|k| df(k as f64 * s.dt)).collect());
        s
    }

    /// Attach derivative samples (same length as the values).
    pub fn with_derivative(mut self, derivative: Vec<f64>) -> Result<Self> {
        if derivative.len() != self.values.len() {
            return Err(Error::InvalidInput(
                "derivative samples must match signal samples".into(),
            ));
        }
        self.derivative = Some(derivative);
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Linear interpolation, clamped to the sampled interval.
    pub fn eval(&self, t: f64) -> f64 {
        let (k, a) = interp_index(t, self.dt, self.values.len() - 1);
        if a == 0.0 {
            return self.values[k];
        }
        (1.0 - a) * self.values[k] + a * self.values[k + 1]
    }

    fn derivative_sample(&self, k: usize) -> f64 {
        if let Some(d) = &self.derivative {
            return d[k];
        }
        let n = self.values.len();
        if k == 0 {
            (self.values[1] - self.values[0]) / self.dt
        } else if k == n - 1 {
            (self.values[n - 1] - self.values[n - 2]) / self.dt
        } else {
            (self.values[k + 1] - self.values[k - 1]) / (2.0 * self.dt)
        }
    }

    pub fn derivative_at(&self, t: f64) -> f64 {
        let (k, a) = interp_index(t, self.dt, self.values.len() - 1);
        if a == 0.0 {
            return self.derivative_sample(k);
        }
        (1.0 - a) * self.derivative_sample(k) + a * self.derivative_sample(k + 1)
    }

    /// The derivative as a signal on the same grid.
    pub fn derivative(&self) -> Signal {
        Signal {
            dt: self.dt,
            values: (0..self.values.len())
                .map(|k| self.derivative_sample(k))
                .collect(),
            derivative: None,
        }
    }

    pub fn resample(&self, samples: usize) -> Signal {
        let horizon = self.horizon();
        let mut s = Signal::from_fn(horizon, samples, |t| self.eval(t));
        if self.derivative.is_some() {
            let d: Vec<f64> = (0..s.values.len())
                .map(|k| self.derivative_at(k as f64 * s.dt))
                .collect();
            s.derivative = Some(d);
        }
        s
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn c1_norm(&self) -> f64 {
        c1_norm_samples(&self.values, self.dt)
    }

    pub fn scaled(&self, factor: f64) -> Signal {
        Signal {
            dt: self.dt,
            values: self.values.iter().map(|v| v * factor).collect(),
            derivative: self
                .derivative
                .as_ref()
                .map(|d| d.iter().map(|v| v * factor).collect()),
        }
    }
}

/// An `n`-component spatial profile sampled on `nx + 1` uniform points of `[0, L]`.
///
/// Storage is point-major: the components of point `j` are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    length: f64,
    n: usize,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(length: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() % n != 0 || values.len() / n < 2 {
            return Err(Error::InvalidInput(format!(
                "profile needs at least two points of {n} components, got {} values",
                values.len()
            )));
        }
        Ok(Self { length, n, values })
    }

    pub fn zeros(length: f64, n: usize, nx: usize) -> Self {
        Self {
            length,
            n,
            values: vec![0.0; n * (nx + 1)],
        }
    }

    pub fn from_fn(length: f64, n: usize, nx: usize, f: impl Fn(f64, &mut [f64])) -> Self {
        let mut p = Self::zeros(length, n, nx);
        let dx = length / nx as f64;
        for j in 0..=nx {
            f(j as f64 * dx, &mut p.values[j * n..(j + 1) * n]);
        }
        p
    }

    /// Assemble from one sample vector per component.
    pub fn from_components(length: f64, components: &[Vec<f64>]) -> Result<Self> {
        let n = components.len();
        let points = components.first().map_or(0, Vec::len);
        if n == 0 || components.iter().any(|c| c.len() != points) {
            return Err(Error::InvalidInput(
                "components must be non-empty and of equal length".into(),
            ));
        }
        let mut values = vec![0.0; n * points];
        for (i, c) in components.iter().enumerate() {
            for (j, v) in c.iter().enumerate() {
                values[j * n + i] = *v;
            }
        }
        Self::new(length, n, values)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nx(&self) -> usize {
        self.values.len() / self.n - 1
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn point_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.n;
        &mut self.values[j * n..(j + 1) * n]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.iter().skip(i).step_by(self.n).copied().collect()
    }

    /// Linear interpolation of all components at `x` (clamped to `[0, L]`).
    pub fn eval(&self, x: f64, out: &mut [f64]) {
        let (j, a) = interp_index(x, self.dx(), self.nx());
        let n = self.n;
        for i in 0..n {
            let lo = self.values[j * n + i];
            out[i] = if a == 0.0 {
                lo
            } else {
                (1.0 - a) * lo + a * self.values[(j + 1) * n + i]
            };
        }
    }

    pub fn resample(&self, nx: usize) -> Profile {
        if nx == self.nx() {
            return self.clone();
        }
        Profile::from_fn(self.length, self.n, nx, |x, out| self.eval(x, out))
    }

    /// The profile mirrored in space: `x -> L - x`.
    pub fn reflected(&self) -> Profile {
        let nx = self.nx();
        let mut p = self.clone();
        for j in 0..=nx {
            p.point_mut(j).copy_from_slice(self.point(nx - j));
        }
        p
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Maximum over components of the discrete C¹ norm.
    pub fn c1_norm(&self) -> f64 {
        let dx = self.dx();
        (0..self.n)
            .map(|i| c1_norm_samples(&self.component(i), dx))
            .fold(0.0, f64::max)
    }

    /// Sup-norm distance to another profile, evaluated on this profile's grid.
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        let mut buf = vec![0.0; other.n];
        let mut d = 0.0_f64;
        for j in 0..=self.nx() {
            other.eval(self.x(j), &mut buf);
            for (a, b) in self.point(j).iter().zip(&buf) {
                d = d.max((a - b).abs());
            }
        }
        d
    }

    /// Pointwise difference `self - other` on this profile's grid.
    pub fn difference(&self, other: &Profile) -> Profile {
        let mut out = self.clone();
        let mut buf = vec![0.0; other.n];
        for j in 0..=self.nx() {
            other.eval(self.x(j), &mut buf);
            for (a, b) in out.point_mut(j).iter_mut().zip(&buf) {
                *a -= b;
            }
        }
        out
    }
}

/// Time series of boundary (or interior) values of all `n` components at a
/// fixed abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    components: Vec<Signal>,
}

impl Trace {
    pub fn new(components: Vec<Signal>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("trace needs at least one component".into()))?;
        let len = first.len();
        let dt = first.dt();
        if components
            .iter()
            .any(|c| c.len() != len || (c.dt() - dt).abs() > 1e-14 * dt.max(1.0))
        {
            return Err(Error::InvalidInput(
                "trace components must share one time grid".into(),
            ));
        }
        Ok(Self { components })
    }

    /// Build from point-major samples `values[k * n + i]` on `[0, horizon]`.
    pub fn from_samples(horizon: f64, n: usize, values: &[f64]) -> Result<Self> {
        let comps = (0..n)
            .map(|i| Signal::new(horizon, values.iter().skip(i).step_by(n).copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.components[0].is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.components[0].dt()
    }

    pub fn horizon(&self) -> f64 {
        self.components[0].horizon()
    }

    pub fn component(&self, i: usize) -> &Signal {
        &self.components[i]
    }

    pub fn components(&self) -> &[Signal] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Signal> {
        self.components
    }

    pub fn sample(&self, k: usize, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.values()[k];
        }
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(t);
        }
    }

    pub fn resample(&self, samples: usize) -> Trace {
        Trace {
            components: self.components.iter().map(|c| c.resample(samples)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_signal_norm_is_its_magnitude() {
        let s = Signal::from_fn(3.0, 50, |_| -2.5);
        assert_eq!(s.c1_norm(), 2.5);
    }

    #[test]
    fn sine_signal_c1_norm_close_to_one() {
        let s = Signal::from_fn(2.0 * PI, 1000, f64::sin);
        assert!((s.c1_norm() - 1.0).abs() <= 2e-3, "{}", s.c1_norm());
    }

    #[test]
    fn zero_profile_norm() {
        assert_eq!(Profile::zeros(1.0, 3, 10).c1_norm(), 0.0);
    }

    #[test]
    fn signal_needs_two_samples() {
        assert!(matches!(
            Signal::new(1.0, vec![1.0]),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn interpolation_hits_samples_and_midpoints() {
        let s = Signal::new(2.0, vec![0.0, 1.0, 4.0]).unwrap();
        assert_eq!(s.eval(1.0), 1.0);
        assert_eq!(s.eval(1.5), 2.5);
        assert_eq!(s.eval(5.0), 4.0);
        assert_eq!(s.eval(-1.0), 0.0);
    }

    #[test]
    fn analytic_derivative_is_preferred() {
        let s = Signal::from_fn_with_derivative(1.0, 5, |t| t * t, |t| 2.0 * t);
        assert_eq!(s.derivative_at(0.5), 1.0);
        let fd = Signal::from_fn(1.0, 5, |t| t * t);
        assert!((fd.derivative_at(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn profile_reflection_is_an_involution() {
        let p = Profile::from_fn(2.0, 2, 17, |x, o| {
            o[0] = x.sin();
            o[1] = x * x;
        });
        assert_eq!(p.reflected().reflected(), p);
        assert_eq!(p.reflected().value(1, 0), p.value(1, 17));
    }

    #[test]
    fn components_round_trip() {
        let p = Profile::from_fn(1.0, 3, 4, |x, o| {
            o[0] = x;
            o[1] = 2.0 * x;
            o[2] = -x;
        });
        let comps: Vec<_> = (0..3).map(|i| p.component(i)).collect();
        assert_eq!(Profile::from_components(1.0, &comps).unwrap(), p);
    }
}
