//! Space-time sampled solutions.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::signal::{c1_norm_samples, Profile, Signal, Trace};

/// `v_i(t_k, x_j)` on a uniform grid, `k = 0..=nt`, `j = 0..=nx`.
///
/// The spatial grid starts at `x_origin` (zero for fields on the whole
/// strip) so that pieces of a strip keep their physical abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    n: usize,
    nt: usize,
    nx: usize,
    horizon: f64,
    length: f64,
    x_origin: f64,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(n: usize, horizon: f64, length: f64, nt: usize, nx: usize) -> Self {
        Self {
            n,
            nt,
            nx,
            horizon,
            length,
            x_origin: 0.0,
            data: vec![0.0; n * (nt + 1) * (nx + 1)],
        }
    }

    pub fn from_data(
        n: usize,
        horizon: f64,
        length: f64,
        nt: usize,
        nx: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != n * (nt + 1) * (nx + 1) {
            return Err(Error::InvalidInput(format!(
                "field data has {} entries, expected {}",
                data.len(),
                n * (nt + 1) * (nx + 1)
            )));
        }
        Ok(Self {
            n,
            nt,
            nx,
            horizon,
            length,
            x_origin: 0.0,
            data,
        })
    }

    /// Stack time rows (each a profile with `nx + 1` points) into a field.
    pub fn from_rows(horizon: f64, rows: &[Profile]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidInput("field needs at least one row".into()))?;
        let (n, nx) = (first.n(), first.nx());
        let mut data = Vec::with_capacity(rows.len() * n * (nx + 1));
        for r in rows {
            if r.n() != n || r.nx() != nx {
                return Err(Error::InvalidInput("rows must share one grid".into()));
            }
            data.extend_from_slice(r.values());
        }
        Self::from_data(n, horizon, first.length(), rows.len() - 1, nx, data)
    }

    pub fn with_origin(mut self, x_origin: f64) -> Self {
        self.x_origin = x_origin;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn x_origin(&self) -> f64 {
        self.x_origin
    }

    pub fn dt(&self) -> f64 {
        if self.nt == 0 {
            0.0
        } else {
            self.horizon / self.nt as f64
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_origin + j as f64 * self.dx()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, k: usize, j: usize) -> usize {
        (k * (self.nx + 1) + j) * self.n
    }

    pub fn value(&self, i: usize, k: usize, j: usize) -> f64 {
        self.data[self.offset(k, j) + i]
    }

    pub fn point(&self, k: usize, j: usize) -> &[f64] {
        let o = self.offset(k, j);
        &self.data[o..o + self.n]
    }

    pub fn point_mut(&mut self, k: usize, j: usize) -> &mut [f64] {
        let o = self.offset(k, j);
        &mut self.data[o..o + self.n]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let o = self.offset(k, 0);
        &self.data[o..o + self.n * (self.nx + 1)]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        let o = self.offset(k, 0);
        let len = self.n * (self.nx + 1);
        &mut self.data[o..o + len]
    }

    /// Time slice `k` as a profile on `[0, length]`.
    pub fn slice(&self, k: usize) -> Profile {
        Profile::new(self.length, self.n, self.row(k).to_vec()).expect("row has nx+1 >= 2 points")
    }

    pub fn initial(&self) -> Profile {
        self.slice(0)
    }

    pub fn last(&self) -> Profile {
        self.slice(self.nt)
    }

    /// Time series of all components at spatial node `j`.
    pub fn trace_at(&self, j: usize) -> Trace {
        let mut vals = Vec::with_capacity((self.nt + 1) * self.n);
        for k in 0..=self.nt {
            vals.extend_from_slice(self.point(k, j));
        }
        Trace::from_samples(self.horizon, self.n, &vals).expect("field has at least two rows")
    }

    /// Time series of one component at spatial node `j`.
    pub fn signal_at(&self, i: usize, j: usize) -> Signal {
        Signal::new(
            self.horizon,
            (0..=self.nt).map(|k| self.value(i, k, j)).collect(),
        )
        .expect("field has at least two rows")
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// Discrete C¹ norm: values and first differences in both directions.
    pub fn c1_norm(&self) -> f64 {
        let mut norm = self.sup_norm();
        let (dt, dx) = (self.dt(), self.dx());
        for i in 0..self.n {
            for k in 0..=self.nt {
                let row: Vec<f64> = (0..=self.nx).map(|j| self.value(i, k, j)).collect();
                norm = norm.max(c1_norm_samples(&row, dx));
            }
            if self.nt > 0 {
                for j in 0..=self.nx {
                    let col: Vec<f64> = (0..=self.nt).map(|k| self.value(i, k, j)).collect();
                    norm = norm.max(c1_norm_samples(&col, dt));
                }
            }
        }
        norm
    }

    /// Mirror in space, `x -> L - x`. Applying it twice is the identity.
    pub fn reflect_x(&self) -> Self {
        let mut out = self.clone();
        for k in 0..=self.nt {
            for j in 0..=self.nx {
                out.point_mut(k, j).copy_from_slice(self.point(k, self.nx - j));
            }
        }
        out
    }

    /// Mirror in time, `t -> T - t`, keeping components in place.
    pub fn reverse_time(&self) -> Self {
        let mut out = self.clone();
        for k in 0..=self.nt {
            out.row_mut(k).copy_from_slice(self.row(self.nt - k));
        }
        out
    }

    /// New field whose component `c` is component `order[c]` of this one.
    pub fn select(&self, order: &[usize]) -> Self {
        let n = order.len();
        let points = (self.nt + 1) * (self.nx + 1);
        let mut data = Vec::with_capacity(points * n);
        for p in 0..points {
            let base = p * self.n;
            data.extend(order.iter().map(|&i| self.data[base + i]));
        }
        Self {
            n,
            data,
            ..self.clone()
        }
    }

    /// Bilinear interpolation at `(t, x)`, clamped to the grid.
    pub fn eval(&self, t: f64, x: f64, out: &mut [f64]) {
        let (k, a) = locate(t, self.dt(), self.nt);
        let (j, b) = locate(x - self.x_origin, self.dx(), self.nx);
        let k1 = (k + 1).min(self.nt);
        let j1 = (j + 1).min(self.nx);
        for i in 0..self.n {
            let v00 = self.value(i, k, j);
            let v01 = self.value(i, k, j1);
            let v10 = self.value(i, k1, j);
            let v11 = self.value(i, k1, j1);
            out[i] = (1.0 - a) * ((1.0 - b) * v00 + b * v01) + a * ((1.0 - b) * v10 + b * v11);
        }
    }

    /// Sup-norm distance on this field's grid to another field (bilinearly
    /// interpolated), over the nodes of this field lying inside `other`.
    pub fn sup_distance(&self, other: &GridField) -> f64 {
        let mut buf = vec![0.0; other.n];
        let mut d = 0.0_f64;
        let (lo, hi) = (other.x_origin, other.x_origin + other.length);
        let eps = 1e-12 * self.length.max(1.0);
        for k in 0..=self.nt {
            let t = self.t(k);
            for j in 0..=self.nx {
                let x = self.x(j);
                if x < lo - eps || x > hi + eps {
                    continue;
                }
                other.eval(t, x, &mut buf);
                for (a, b) in self.point(k, j).iter().zip(&buf) {
                    d = d.max((a - b).abs());
                }
            }
        }
        d
    }

    /// Write the CSV form: header `t,x,v1..vn`, rows ordered by `(k, j)`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write_csv_header(w, self.n, &[])?;
        for k in 0..=self.nt {
            for j in 0..=self.nx {
                write_csv_row(w, self.t(k), self.x(j), self.point(k, j), &[])?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn locate(s: f64, step: f64, last: usize) -> (usize, f64) {
    if last == 0 || step == 0.0 {
        return (0, 0.0);
    }
    let u = (s / step).clamp(0.0, last as f64);
    let k = (u.floor() as usize).min(last - 1);
    (k, u - k as f64)
}

pub(crate) fn write_csv_header<W: Write>(w: &mut W, n: usize, extra: &[&str]) -> io::Result<()> {
    write!(w, "t,x")?;
    for i in 1..=n {
        write!(w, ",v{i}")?;
    }
    for e in extra {
        write!(w, ",{e}")?;
    }
    writeln!(w)
}

pub(crate) fn write_csv_row<W: Write>(
    w: &mut W,
    t: f64,
    x: f64,
    values: &[f64],
    extra: &[f64],
) -> io::Result<()> {
    write!(w, "{t:.16e},{x:.16e}")?;
    for v in values.iter().chain(extra) {
        write!(w, ",{v:.16e}")?;
    }
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> GridField {
        let mut f = GridField::zeros(2, 1.0, 2.0, 4, 6);
        for k in 0..=4 {
            for j in 0..=6 {
                let (t, x) = (f.t(k), f.x(j));
                f.point_mut(k, j).copy_from_slice(&[t + x * x, (t * x).sin()]);
            }
        }
        f
    }

    #[test]
    fn reflections_are_involutions() {
        let f = sample_field();
        assert_eq!(f.reflect_x().reflect_x(), f);
        assert_eq!(f.reverse_time().reverse_time(), f);
        assert_eq!(f.reflect_x().value(0, 2, 0), f.value(0, 2, 6));
    }

    #[test]
    fn zero_field_has_zero_norm() {
        assert_eq!(GridField::zeros(3, 1.0, 1.0, 5, 5).c1_norm(), 0.0);
    }

    #[test]
    fn bilinear_interpolation_reproduces_bilinear_data() {
        let mut f = GridField::zeros(1, 2.0, 1.0, 8, 8);
        for k in 0..=8 {
            for j in 0..=8 {
                f.point_mut(k, j)[0] = 1.0 + 2.0 * f.t(k) - 3.0 * f.x(j) + f.t(k) * f.x(j);
            }
        }
        let mut out = [0.0];
        f.eval(0.77, 0.31, &mut out);
        assert!((out[0] - (1.0 + 1.54 - 0.93 + 0.77 * 0.31)).abs() < 1e-3);
        f.eval(0.75, 0.25, &mut out);
        assert!((out[0] - (1.0 + 1.5 - 0.75 + 0.1875)).abs() < 1e-14);
    }

    #[test]
    fn csv_layout() {
        let f = sample_field();
        let csv = f.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x,v1,v2"));
        assert_eq!(csv.lines().count(), 1 + 5 * 7);
        let second: Vec<f64> = lines
            .nth(1)
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(second[1], f.x(1));
        assert_eq!(second[2], f.value(0, 0, 1));
    }

    #[test]
    fn select_reorders_components() {
        let f = sample_field();
        let g = f.select(&[1, 0]);
        assert_eq!(g.value(0, 3, 2), f.value(1, 3, 2));
        assert_eq!(g.select(&[1, 0]), f);
    }
}
