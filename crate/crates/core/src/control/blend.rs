//! Quintic Hermite joins with vanishing second derivative at both ends.

/// Join `(y0, d0)` at `t = a` to `(y1, d1)` at `t = b`; value and first
/// derivative match at both ends, the second derivative vanishes there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticBlend {
    pub a: f64,
    pub b: f64,
    pub y0: f64,
    pub d0: f64,
    pub y1: f64,
    pub d1: f64,
}

impl QuinticBlend {
    pub fn eval(&self, t: f64) -> f64 {
        let tau = self.b - self.a;
        let s = ((t - self.a) / tau).clamp(0.0, 1.0);
        let (s3, s4, s5) = (s.powi(3), s.powi(4), s.powi(5));
        let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        h00 * self.y0 + h10 * tau * self.d0 + h01 * self.y1 + h11 * tau * self.d1
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let tau = self.b - self.a;
        let s = ((t - self.a) / tau).clamp(0.0, 1.0);
        let (s2, s3, s4) = (s * s, s.powi(3), s.powi(4));
        let h00 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
        let h10 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
        let h01 = -h00;
        let h11 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
        (h00 * self.y0 + h01 * self.y1) / tau + h10 * self.d0 + h11 * self.d1
    }

    /// Largest mismatch in value or slope at the two junctions, relative to
    /// the data magnitude.
    pub fn junction_jump(&self) -> f64 {
        let scale = [self.y0, self.y1, self.d0, self.d1]
            .iter()
            .fold(1e-300_f64, |m, v| m.max(v.abs()));
        let jumps = [
            self.eval(self.a) - self.y0,
            self.eval(self.b) - self.y1,
            self.derivative(self.a) - self.d0,
            self.derivative(self.b) - self.d1,
        ];
        jumps.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / scale
    }
}

/// `s³ (1 - s)³` on `[a, b]`, zero outside; C² at the ends with
/// `∫ = (b - a) / 140`.
pub fn bump(a: f64, b: f64, t: f64) -> f64 {
    if t <= a || t >= b {
        return 0.0;
    }
    let s = (t - a) / (b - a);
    (s * (1.0 - s)).powi(3)
}

/// Integral of [`bump`] over its support.
pub fn bump_integral(a: f64, b: f64) -> f64 {
    (b - a) / 140.0
}
