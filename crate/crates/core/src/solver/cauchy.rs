//! Cauchy problem on the maximum determinate domain of the initial interval.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::field::{write_csv_header, write_csv_row, GridField};
use crate::signal::{c1_norm_samples, Profile};
use crate::solver::forward::{check_row, Stepper, SolverOptions, SPEED_FLOOR};
use crate::system::DiagonalSystem;

const MAX_STEPS: usize = 1_000_000;

/// Solution of the Cauchy problem between the curves `x1(t) <= x <= x2(t)`.
///
/// The underlying field covers the full strip; only nodes inside the curves
/// carry determined values.
#[derive(Debug, Clone)]
pub struct DeterminateDomain {
    x1: Vec<f64>,
    x2: Vec<f64>,
    field: GridField,
    closing_time: f64,
}

impl DeterminateDomain {
    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    /// Time at which the two curves meet (linear interpolation between rows).
    pub fn closing_time(&self) -> f64 {
        self.closing_time
    }

    pub fn inside(&self, k: usize, j: usize) -> bool {
        let x = self.field.x(j);
        let eps = 1e-12 * self.field.length().max(1.0);
        self.x1[k] - eps <= x && x <= self.x2[k] + eps
    }

    pub fn sup_norm(&self) -> f64 {
        let f = &self.field;
        let mut s = 0.0_f64;
        for k in 0..=f.nt() {
            for j in 0..=f.nx() {
                if self.inside(k, j) {
                    s = f.point(k, j).iter().fold(s, |a, v| a.max(v.abs()));
                }
            }
        }
        s
    }

    /// Discrete C¹ norm restricted to differences between inside nodes.
    pub fn c1_norm(&self) -> f64 {
        let f = &self.field;
        let mut norm = self.sup_norm();
        for i in 0..f.n() {
            for k in 0..=f.nt() {
                let row: Vec<f64> = (0..=f.nx())
                    .filter(|&j| self.inside(k, j))
                    .map(|j| f.value(i, k, j))
                    .collect();
                norm = norm.max(c1_norm_samples(&row, f.dx()));
            }
            for j in 0..=f.nx() {
                let col: Vec<f64> = (0..=f.nt())
                    .take_while(|&k| self.inside(k, j))
                    .map(|k| f.value(i, k, j))
                    .collect();
                norm = norm.max(c1_norm_samples(&col, f.dt()));
            }
        }
        norm
    }

    /// CSV with the field columns followed by `x1,x2`, inside nodes only.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let f = &self.field;
        write_csv_header(w, f.n(), &["x1", "x2"])?;
        for k in 0..=f.nt() {
            for j in 0..=f.nx() {
                if self.inside(k, j) {
                    write_csv_row(w, f.t(k), f.x(j), f.point(k, j), &[self.x1[k], self.x2[k]])?;
                }
            }
        }
        Ok(())
    }
}

fn edge_speed(sys: &DiagonalSystem, row: &[f64], nx: usize, dx: f64, x: f64, positive: bool) -> f64 {
    let n = sys.n();
    let u = (x / dx).clamp(0.0, nx as f64);
    let j = (u.floor() as usize).min(nx - 1);
    let a = u - j as f64;
    let v: Vec<f64> = (0..n)
        .map(|i| (1.0 - a) * row[j * n + i] + a * row[(j + 1) * n + i])
        .collect();
    let mut lam = vec![0.0; n];
    sys.speeds(&v, &mut lam);
    if positive {
        lam[sys.m()..].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        lam[..sys.l()].iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Integrate from `phi` until the curves `dx1/dt = max_r λ_r(v(t, x1))`,
/// `dx2/dt = min_p λ_p(v(t, x2))` meet.
pub fn solve_cauchy_max_domain(
    sys: &DiagonalSystem,
    phi: &Profile,
    nx: usize,
    opts: &SolverOptions,
) -> Result<DeterminateDomain> {
    if nx < 2 {
        return Err(Error::GridTooCoarse {
            points: nx + 1,
            required: 3,
        });
    }
    if sys.m() == sys.n() && sys.l() == 0 {
        return Err(Error::InvalidInput(
            "with no moving components the determinate domain never closes".into(),
        ));
    }
    let phi = Profile::new(sys.length(), sys.n(), phi.resample(nx).values().to_vec())?;
    check_row(phi.values(), sys.radius(), 0.0)?;
    let length = sys.length();
    let dx = length / nx as f64;
    let speed = super::forward::max_speed(sys, &phi).max(SPEED_FLOOR);
    let dt = opts.cfl * dx / speed;
    let has_pos = sys.m() < sys.n();
    let has_neg = sys.l() > 0;

    let mut stepper = Stepper::new(sys, nx, dt, dx);
    let mut old = phi.values().to_vec();
    let mut new = old.clone();
    let mut data = old.clone();
    let (mut x1, mut x2) = (vec![0.0], vec![length]);
    let mut closing_time = f64::NAN;
    for k in 0..MAX_STEPS {
        let (a, b) = (x1[k], x2[k]);
        let sa = if has_pos {
            edge_speed(sys, &old, nx, dx, a, true)
        } else {
            0.0
        };
        let sb = if has_neg {
            edge_speed(sys, &old, nx, dx, b, false)
        } else {
            0.0
        };
        stepper.advance(&old, &mut new)?;
        let (na, nb) = (a + dt * sa, b + dt * sb);
        if na >= nb {
            let gap = b - a;
            let closing = gap / (gap - (nb - na));
            closing_time = (k as f64 + closing) * dt;
            break;
        }
        let t = (k + 1) as f64 * dt;
        let eps = 1e-12 * length.max(1.0);
        let inside: Vec<f64> = (0..=nx)
            .filter(|&j| {
                let x = j as f64 * dx;
                na - eps <= x && x <= nb + eps
            })
            .flat_map(|j| new[j * sys.n()..(j + 1) * sys.n()].to_vec())
            .collect();
        check_row(&inside, sys.radius(), t)?;
        data.extend_from_slice(&new);
        x1.push(na);
        x2.push(nb);
        std::mem::swap(&mut old, &mut new);
    }
    if closing_time.is_nan() {
        return Err(Error::InvalidInput(
            "determinate domain did not close within the step budget".into(),
        ));
    }
    let nt = x1.len() - 1;
    let horizon = nt as f64 * dt;
    let field = if nt == 0 {
        // Keep two rows so that the field has a time grid.
        data.extend_from_slice(phi.values());
        x1.push(x1[0]);
        x2.push(x2[0]);
        GridField::from_data(sys.n(), dt, length, 1, nx, data)?
    } else {
        GridField::from_data(sys.n(), horizon, length, nt, nx, data)?
    };
    Ok(DeterminateDomain {
        x1,
        x2,
        field,
        closing_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_fills_the_triangle() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 1.0]).unwrap();
        let phi = Profile::from_fn(1.0, 2, 100, |_, o| o.fill(0.3));
        let dom = solve_cauchy_max_domain(&sys, &phi, 100, &Default::default()).unwrap();
        assert!((dom.closing_time() - 0.5).abs() < 1e-12, "{}", dom.closing_time());
        let f = dom.field();
        for k in 0..=f.nt() {
            assert!((dom.x1()[k] - f.t(k)).abs() < 1e-12);
            assert!((dom.x2()[k] - (1.0 - f.t(k))).abs() < 1e-12);
            for j in 0..=f.nx() {
                if dom.inside(k, j) {
                    assert_eq!(f.point(k, j), &[0.3, 0.3]);
                }
            }
        }
    }

    #[test]
    fn zero_data_is_zero_on_the_domain() {
        let sys = DiagonalSystem::constant(2.0, 1.0, &[-1.0, 3.0]).unwrap();
        let dom =
            solve_cauchy_max_domain(&sys, &Profile::zeros(2.0, 2, 60), 60, &Default::default()).unwrap();
        assert_eq!(dom.sup_norm(), 0.0);
        assert!((dom.closing_time() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn csv_has_curve_columns() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 1.0]).unwrap();
        let dom =
            solve_cauchy_max_domain(&sys, &Profile::zeros(1.0, 2, 10), 10, &Default::default()).unwrap();
        let mut buf = Vec::new();
        dom.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,v1,v2,x1,x2\n"));
    }
}
