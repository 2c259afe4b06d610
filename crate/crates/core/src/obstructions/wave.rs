//! Periodic wave equation `y_tt = y_xx` on `[0, 2π]`.
//!
//! Eigenmodes `sin(nt) sin(nx)` and `cos(nt) cos(nx)` have a vanishing
//! trace or a vanishing gradient at the boundary for all time, so a single
//! boundary measurement cannot see them. Paired against the control system
//! `y(t,0) = y(t,2π)`, `y_x(t,0) = y_x(t,2π) + h̃(t)` they show that some
//! initial data cannot be steered to rest.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::signal::Signal;

/// Quadrature points for every integral in this module.
pub const QUADRATURE_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// `sin(nt) sin(nx)`: zero displacement at both ends.
    Sine,
    /// `cos(nt) cos(nx)`: zero gradient at both ends.
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenmodeWitness {
    pub n: u32,
    pub kind: WitnessKind,
}

pub fn wave_eigenmode(n: u32, kind: WitnessKind) -> Result<EigenmodeWitness> {
    if n == 0 {
        return Err(Error::InvalidInput("eigenmode index must be positive".into()));
    }
    Ok(EigenmodeWitness { n, kind })
}

impl EigenmodeWitness {
    pub fn length(&self) -> f64 {
        2.0 * PI
    }

    fn k(&self) -> f64 {
        self.n as f64
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        let k = self.k();
        match self.kind {
            WitnessKind::Sine => (k * t).sin() * (k * x).sin(),
            WitnessKind::Cosine => (k * t).cos() * (k * x).cos(),
        }
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        let k = self.k();
        match self.kind {
            WitnessKind::Sine => k * (k * t).cos() * (k * x).sin(),
            WitnessKind::Cosine => -k * (k * t).sin() * (k * x).cos(),
        }
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        let k = self.k();
        match self.kind {
            WitnessKind::Sine => k * (k * t).sin() * (k * x).cos(),
            WitnessKind::Cosine => -k * (k * t).cos() * (k * x).sin(),
        }
    }

    /// `(φ(0,x), φ_t(0,x))`.
    pub fn initial(&self, x: f64) -> (f64, f64) {
        (self.value(0.0, x), self.dt(0.0, x))
    }

    /// Largest `|δ_tt φ - δ_xx φ|` with centred second differences on an
    /// `nt × nx` grid over `[0, T] × [0, 2π]`.
    pub fn discrete_residual(&self, horizon: f64, nt: usize, nx: usize) -> f64 {
        let (dt, dx) = (horizon / nt as f64, self.length() / nx as f64);
        let mut worst = 0.0_f64;
        for k in 1..nt {
            let t = k as f64 * dt;
            for j in 1..nx {
                let x = j as f64 * dx;
                let c = self.value(t, x);
                let ytt = (self.value(t + dt, x) - 2.0 * c + self.value(t - dt, x)) / (dt * dt);
                let yxx = (self.value(t, x + dx) - 2.0 * c + self.value(t, x - dx)) / (dx * dx);
                worst = worst.max((ytt - yxx).abs());
            }
        }
        worst
    }

    /// Largest boundary value of the observed quantity (`φ` for the sine
    /// mode, `φ_x` for the cosine mode) over `[0, T]`.
    pub fn boundary_signal_sup(&self, horizon: f64) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..=QUADRATURE_POINTS {
            let t = horizon * k as f64 / QUADRATURE_POINTS as f64;
            for x in [0.0, self.length()] {
                let v = match self.kind {
                    WitnessKind::Sine => self.value(t, x),
                    WitnessKind::Cosine => self.dx(t, x),
                };
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

fn trapezoid(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = (b - a) / QUADRATURE_POINTS as f64;
    let inner: f64 = (1..QUADRATURE_POINTS).map(|k| f(a + k as f64 * h)).sum();
    h * (inner + 0.5 * (f(a) + f(b)))
}

/// `∫ (-y₁ φ₀ + y₀ φ₁) dx` over `[0, 2π]`.
pub fn duality_pairing(
    y0: impl Fn(f64) -> f64,
    y1: impl Fn(f64) -> f64,
    witness: &EigenmodeWitness,
) -> f64 {
    trapezoid(0.0, witness.length(), |x| {
        let (p0, p1) = witness.initial(x);
        -y1(x) * p0 + y0(x) * p1
    })
}

/// Residual of the duality identity for a field `(y, y_t)` of the control
/// system on `[0, 2π] × [0, T]`:
///
/// `| ∫(y_t φ - y φ_t)(T) dx + ∫(-y₁ φ₀ + y₀ φ₁) dx + ∫ h̃(t) φ(t, 2π) dt |`.
///
/// The final-time term vanishes when `y(T) = 0`, leaving the pairing of the
/// initial data against the boundary integral.
pub fn duality_residual(y_field: &GridField, h_tilde: &Signal, witness: &EigenmodeWitness) -> Result<f64> {
    if y_field.n() != 2 {
        return Err(Error::InvalidInput(format!(
            "expected a field of (y, y_t), got {} components",
            y_field.n()
        )));
    }
    if (y_field.length() - witness.length()).abs() > 1e-12 {
        return Err(Error::InvalidInput("field must live on [0, 2π]".into()));
    }
    let horizon = y_field.horizon();
    let (first, last) = (y_field.initial(), y_field.last());
    let mut a = [0.0; 2];
    let mut b = [0.0; 2];
    let initial = trapezoid(0.0, witness.length(), |x| {
        first.eval(x, &mut a);
        let (p0, p1) = witness.initial(x);
        -a[1] * p0 + a[0] * p1
    });
    let terminal = trapezoid(0.0, witness.length(), |x| {
        last.eval(x, &mut b);
        b[1] * witness.value(horizon, x) - b[0] * witness.dt(horizon, x)
    });
    let boundary = trapezoid(0.0, horizon, |t| h_tilde.eval(t) * witness.value(t, witness.length()));
    Ok((terminal + initial + boundary).abs())
}

/// The same identity for a solution given in closed form: `y(t, x)`,
/// `y_t(t, x)` and the control `h̃(t)`.
pub fn duality_residual_fn(
    y: &dyn Fn(f64, f64) -> f64,
    y_t: &dyn Fn(f64, f64) -> f64,
    h_tilde: &dyn Fn(f64) -> f64,
    witness: &EigenmodeWitness,
    horizon: f64,
) -> f64 {
    let l = witness.length();
    let initial = trapezoid(0.0, l, |x| {
        let (p0, p1) = witness.initial(x);
        -y_t(0.0, x) * p0 + y(0.0, x) * p1
    });
    let terminal = trapezoid(0.0, l, |x| {
        y_t(horizon, x) * witness.value(horizon, x) - y(horizon, x) * witness.dt(horizon, x)
    });
    let boundary = trapezoid(0.0, horizon, |t| h_tilde(t) * witness.value(t, l));
    (terminal + initial + boundary).abs()
}

/// Dirichlet-controlled variant `y(t,0) = y(t,2π) + h(t)`, `y_x` periodic,
/// with `y₀ = 0`, `y₁ = cos(nx)` against the cosine mode: the pairing must
/// vanish for a null-controllable state but equals `π` in magnitude.
pub fn dirichlet_variant_obstruction(n: u32) -> Result<f64> {
    let w = wave_eigenmode(n, WitnessKind::Cosine)?;
    let k = n as f64;
    Ok(duality_pairing(|_| 0.0, |x| (k * x).cos(), &w).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_pairing_is_n_pi() {
        for n in 1..=4 {
            let w = wave_eigenmode(n, WitnessKind::Sine).unwrap();
            let k = n as f64;
            let p = duality_pairing(|x| (k * x).sin(), |_| 0.0, &w);
            assert!((p - k * PI).abs() < 1e-6, "{n}: {p}");
        }
    }

    #[test]
    fn orthogonal_data_pairs_to_zero() {
        let w = wave_eigenmode(2, WitnessKind::Sine).unwrap();
        assert!(duality_pairing(|_| 0.0, |x| (2.0 * x).cos(), &w).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_variant_is_pi() {
        for n in 1..=3 {
            assert!((dirichlet_variant_obstruction(n).unwrap() - PI).abs() < 1e-6);
        }
    }

    #[test]
    fn witnesses_are_invisible_at_the_boundary() {
        let s = wave_eigenmode(3, WitnessKind::Sine).unwrap();
        let c = wave_eigenmode(3, WitnessKind::Cosine).unwrap();
        assert!(s.boundary_signal_sup(5.0) < 1e-13);
        assert!(c.boundary_signal_sup(5.0) < 1e-13);
    }

    #[test]
    fn discrete_residual_is_second_order() {
        let w = wave_eigenmode(1, WitnessKind::Sine).unwrap();
        let r1 = w.discrete_residual(1.0, 50, 100);
        let r2 = w.discrete_residual(1.0, 100, 200);
        assert!((r1 / r2 - 4.0).abs() < 0.2, "{}", r1 / r2);
    }

    #[test]
    fn exact_free_solution_satisfies_identity() {
        // y = sin(x - t) + 0.5 cos(2x + 2t) solves the uncontrolled problem.
        let (nt, nx, horizon) = (40, 400, 1.3);
        let f = GridField::from_data(
            2,
            horizon,
            2.0 * PI,
            nt,
            nx,
            (0..=nt)
                .flat_map(|k| {
                    let t = horizon * k as f64 / nt as f64;
                    (0..=nx).flat_map(move |j| {
                        let x = 2.0 * PI * j as f64 / nx as f64;
                        [
                            (x - t).sin() + 0.5 * (2.0 * x + 2.0 * t).cos(),
                            -(x - t).cos() - (2.0 * x + 2.0 * t).sin(),
                        ]
                    })
                })
                .collect(),
        )
        .unwrap();
        for kind in [WitnessKind::Sine, WitnessKind::Cosine] {
            let w = wave_eigenmode(1, kind).unwrap();
            let r = duality_residual(&f, &Signal::zero(horizon, 11), &w).unwrap();
            assert!(r < 1e-3, "{kind:?}: {r}");
        }
    }

    #[test]
    fn closed_form_identity_is_exact_to_quadrature() {
        let y = |t: f64, x: f64| (x - t).sin() + 0.5 * (2.0 * x + 2.0 * t).cos();
        let yt = |t: f64, x: f64| -(x - t).cos() - (2.0 * x + 2.0 * t).sin();
        for n in 1..=3 {
            for kind in [WitnessKind::Sine, WitnessKind::Cosine] {
                let w = wave_eigenmode(n, kind).unwrap();
                let r = duality_residual_fn(&y, &yt, &|_| 0.0, &w, 1.7);
                assert!(r < 1e-10, "{n} {kind:?}: {r}");
            }
        }
    }
}
