//! Damped Newton iteration for the small nonlinear systems that appear in
//! boundary relations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Residual tolerance of boundary solves.
pub const NEWTON_TOL: f64 = 1e-12;
/// Iteration cap of boundary solves.
pub const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Maximum number of step halvings per iteration.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: NEWTON_TOL,
            max_iter: NEWTON_MAX_ITER,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    /// Number of Newton steps taken.
    pub iterations: usize,
    /// Sup norm of the residual at `x`.
    pub residual: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Central finite-difference step used for Jacobians: `1e-6 * max(1, |x|_inf)`.
pub fn fd_step(x: &[f64]) -> f64 {
    1e-6 * sup(x).max(1.0)
}

/// Central finite-difference Jacobian of `f` at `x` (`m` outputs).
pub fn fd_jacobian<F>(f: &mut F, x: &[f64], m: usize) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let h = fd_step(x);
    let mut jac = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    for c in 0..x.len() {
        xp[c] = x[c] + h;
        f(&xp, &mut fp)?;
        xp[c] = x[c] - h;
        f(&xp, &mut fm)?;
        xp[c] = x[c];
        for r in 0..m {
            jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Solve `f(x) = 0` for square systems by Newton's method with step halving
/// on residual increase. The Jacobian is taken by central differences.
pub fn solve<F>(mut f: F, x0: &[f64], opts: NewtonOptions, context: &str) -> Result<NewtonOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = x0.len();
    run(&mut f, &mut |f, x| fd_jacobian(f, x, n), x0, opts, context)
}

/// As [`solve`], with an analytic Jacobian.
pub fn solve_with_jacobian<F, J>(
    mut f: F,
    mut jac: J,
    x0: &[f64],
    opts: NewtonOptions,
    context: &str,
) -> Result<NewtonOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    J: FnMut(&[f64]) -> Result<DMatrix<f64>>,
{
    run(&mut f, &mut |_, x| jac(x), x0, opts, context)
}

type JacobianFn<'a, F> = dyn FnMut(&mut F, &[f64]) -> Result<DMatrix<f64>> + 'a;

fn run<F>(
    f: &mut F,
    jacobian: &mut JacobianFn<'_, F>,
    x0: &[f64],
    opts: NewtonOptions,
    context: &str,
) -> Result<NewtonOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    f(&x, &mut r)?;
    let mut res = sup(&r);
    if !res.is_finite() {
        return Err(Error::NonFiniteEvaluation {
            what: format!("{context} residual"),
        });
    }
    let mut iterations = 0;
    let mut x_try = vec![0.0; n];
    let mut r_try = vec![0.0; n];
    while res > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NewtonDivergence {
                context: context.to_string(),
                iterations,
                residual: res,
            });
        }
        let jac = jacobian(f, &x)?;
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs).ok_or_else(|| Error::NewtonDivergence {
            context: format!("{context}: singular Jacobian"),
            iterations,
            residual: res,
        })?;
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            for i in 0..n {
                x_try[i] = x[i] + damping * step[i];
            }
            if f(&x_try, &mut r_try).is_ok() {
                let rt = sup(&r_try);
                if rt.is_finite() && rt <= res {
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        iterations += 1;
        if !accepted {
            return Err(Error::NewtonDivergence {
                context: context.to_string(),
                iterations,
                residual: res,
            });
        }
        let improved = sup(&r_try) < res;
        std::mem::swap(&mut x, &mut x_try);
        std::mem::swap(&mut r, &mut r_try);
        res = sup(&r);
        // A full step that cannot reduce the residual any further has hit
        // the rounding floor.
        if !improved {
            if res <= opts.tol * 1e3 {
                break;
            }
            return Err(Error::NewtonDivergence {
                context: format!("{context}: stagnated"),
                iterations,
                residual: res,
            });
        }
    }
    // One polishing step: near the root the residual is roughly squared, which
    // keeps exit residuals well below `tol` instead of just under it.
    if res > 0.0 && iterations < opts.max_iter {
        if let Ok(jac) = jacobian(f, &x) {
            let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
            if let Some(step) = jac.lu().solve(&rhs) {
                for i in 0..n {
                    x_try[i] = x[i] + step[i];
                }
                if f(&x_try, &mut r_try).is_ok() && sup(&r_try) < res {
                    std::mem::swap(&mut x, &mut x_try);
                    res = sup(&r_try);
                    iterations += 1;
                }
            }
        }
    }
    Ok(NewtonOutcome {
        x,
        iterations,
        residual: res,
    })
}
