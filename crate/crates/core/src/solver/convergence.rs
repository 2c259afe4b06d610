//! Grid-refinement studies and a-posteriori error estimates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::Profile;

/// What the final slices are compared against.
pub enum Reference<'a> {
    /// Closed-form final state.
    Exact(&'a (dyn Fn(f64, &mut [f64]) + Sync)),
    /// The same problem on a grid four times finer than the finest entry.
    SelfRefined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub error: f64,
    /// `log(e_prev / e) / log(nx / nx_prev)`; NaN on the first row or when
    /// an error vanishes.
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// True when some order could not be computed (zero errors).
    pub fn has_undefined_orders(&self) -> bool {
        self.rows.iter().skip(1).any(|r| r.order.is_nan())
    }

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().skip(1).map(|r| r.order).collect()
    }

    /// True when errors strictly decrease along the table.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

fn sup_error(coarse: &Profile, reference: &dyn Fn(f64, &mut [f64])) -> f64 {
    let mut buf = vec![0.0; coarse.n()];
    let mut e = 0.0_f64;
    for j in 0..=coarse.nx() {
        reference(coarse.x(j), &mut buf);
        for (a, b) in coarse.point(j).iter().zip(&buf) {
            e = e.max((a - b).abs());
        }
    }
    e
}

/// Sup-norm errors of the final slices returned by `solve(nx)` for each
/// entry of `nx_list`. Grids are solved concurrently.
pub fn convergence_study<F>(nx_list: &[usize], reference: Reference, solve: F) -> Result<ConvergenceTable>
where
    F: Fn(usize) -> Result<Profile> + Sync,
{
    if nx_list.is_empty() {
        return Err(Error::InvalidInput("empty grid list".into()));
    }
    let refined = match reference {
        Reference::SelfRefined => {
            let finest = *nx_list.iter().max().expect("non-empty");
            Some(solve(4 * finest)?)
        }
        Reference::Exact(_) => None,
    };
    let finals: Vec<Profile> = nx_list
        .par_iter()
        .map(|&nx| solve(nx))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(nx_list.len());
    for (idx, (nx, fin)) in nx_list.iter().zip(&finals).enumerate() {
        let error = match (&reference, &refined) {
            (Reference::Exact(f), _) => sup_error(fin, *f),
            (_, Some(r)) => fin.sup_distance(r),
            _ => unreachable!(),
        };
        let order = if idx == 0 {
            f64::NAN
        } else {
            let prev: &ConvergenceRow = &rows[idx - 1];
            if prev.error == 0.0 || error == 0.0 {
                f64::NAN
            } else {
                (prev.error / error).ln() / (*nx as f64 / prev.nx as f64).ln()
            }
        };
        rows.push(ConvergenceRow {
            nx: *nx,
            error,
            order,
        });
    }
    Ok(ConvergenceTable { rows })
}

/// Richardson-type estimate of a first-order scheme's error at `nx`:
/// `2 sup |u_nx - u_2nx|` over the final slice.
pub fn scheme_error_estimate<F>(nx: usize, solve: F) -> Result<f64>
where
    F: Fn(usize) -> Result<Profile> + Sync,
{
    let (a, b) = rayon::join(|| solve(nx), || solve(2 * nx));
    Ok(2.0 * a?.sup_distance(&b?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::forward::{solve_forward_final, SolverOptions};
    use crate::system::{DiagonalSystem, NonlocalBC};
    use std::f64::consts::PI;

    #[test]
    fn advection_orders_are_near_one() {
        let sys = DiagonalSystem::constant(1.0, 10.0, &[1.0]).unwrap();
        let bc = NonlocalBC::linear(1, 1, vec![1.0]).unwrap();
        let horizon = 0.5;
        let exact = move |x: f64, o: &mut [f64]| o[0] = (2.0 * PI * (x - horizon)).sin();
        let table = convergence_study(&[100, 200, 400], Reference::Exact(&exact), |nx| {
            let phi = Profile::from_fn(1.0, 1, nx, |x, o| o[0] = (2.0 * PI * x).sin());
            solve_forward_final(&sys, &bc, &phi, horizon, nx, &SolverOptions::default())
        })
        .unwrap();
        assert!(table.is_monotone());
        for p in table.orders() {
            assert!((0.8..=1.2).contains(&p), "{p}");
        }
    }

    #[test]
    fn zero_data_flags_undefined_orders() {
        let table = convergence_study(&[10, 20], Reference::SelfRefined, |nx| {
            Ok(Profile::zeros(1.0, 1, nx))
        })
        .unwrap();
        assert!(table.rows.iter().all(|r| r.error == 0.0));
        assert!(table.has_undefined_orders());
    }
}
