//! Sidewise problems: `x` is the evolution variable and `t ∈ [0, T]` the
//! transverse one.
//!
//! Marching in direction `d = ±1`, component `i` travels in `t` with slope
//! `d / λ_i(v)`, so it takes data from the bottom row `t = 0` when
//! `d λ_i > 0` and from the top row `t = T` otherwise.

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::signal::{Profile, Trace};
use crate::solver::forward::CFL_FACTOR;
use crate::system::DiagonalSystem;

/// Smallest accepted `|λ_i|` in sidewise solves.
pub const SPEED_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidewiseOptions {
    pub cfl: f64,
    /// Force the number of time cells.
    pub nt: Option<usize>,
    pub speed_threshold: f64,
}

impl Default for SidewiseOptions {
    fn default() -> Self {
        Self {
            cfl: CFL_FACTOR,
            nt: None,
            speed_threshold: SPEED_THRESHOLD,
        }
    }
}

/// Data of a sidewise problem on `[x_start, x_end]` (either orientation).
///
/// `bottom` and `top` are full `n`-component profiles over the system's
/// interval; only the components entering through the respective row are
/// read.
#[derive(Debug, Clone, Copy)]
pub struct SidewiseProblem<'a> {
    pub trace: &'a Trace,
    pub x_start: f64,
    pub x_end: f64,
    pub bottom: &'a Profile,
    pub top: &'a Profile,
}

fn min_speed_of(sys: &DiagonalSystem, states: impl Iterator<Item = Vec<f64>>) -> Result<f64> {
    let mut lam = vec![0.0; sys.n()];
    let mut mu = f64::INFINITY;
    for v in states {
        sys.speeds(&v, &mut lam);
        for s in &lam {
            if !s.is_finite() {
                return Err(Error::NonFiniteEvaluation {
                    what: "speeds in sidewise data".into(),
                });
            }
            mu = mu.min(s.abs());
        }
    }
    Ok(mu)
}

/// Smallest `|λ_i|` over all states in the data of a sidewise problem.
pub fn data_min_speed(sys: &DiagonalSystem, prob: &SidewiseProblem) -> Result<f64> {
    let n = sys.n();
    let tr = prob.trace;
    let from_trace = (0..tr.len()).map(move |k| {
        let mut v = vec![0.0; n];
        tr.sample(k, &mut v);
        v
    });
    let rows = [prob.bottom, prob.top];
    let from_rows = rows
        .into_iter()
        .flat_map(|p| (0..=p.nx()).map(move |j| p.point(j).to_vec()));
    min_speed_of(sys, from_trace.chain(from_rows))
}

/// Number of time cells so that `h / (|λ| dt) <= cfl` for speeds down to `mu`.
pub fn sidewise_time_cells(horizon: f64, h: f64, mu: f64, cfl: f64) -> usize {
    (cfl * horizon * mu / h).floor() as usize
}

/// March the sidewise problem over `cells` spatial cells.
pub fn solve_sidewise_problem(
    sys: &DiagonalSystem,
    prob: &SidewiseProblem,
    cells: usize,
    opts: &SidewiseOptions,
) -> Result<GridField> {
    if sys.l() != sys.m() {
        return Err(Error::ZeroEigenvalueUnsupported {
            l: sys.l(),
            m: sys.m(),
        });
    }
    if cells == 0 {
        return Err(Error::GridTooCoarse {
            points: 1,
            required: 2,
        });
    }
    let n = sys.n();
    if prob.trace.n() != n || prob.bottom.n() != n || prob.top.n() != n {
        return Err(Error::InvalidInput(
            "sidewise data must carry all components".into(),
        ));
    }
    let span = prob.x_end - prob.x_start;
    if span == 0.0 {
        return Err(Error::InvalidInput("empty sidewise interval".into()));
    }
    let d = span.signum();
    let h = span.abs() / cells as f64;
    let horizon = prob.trace.horizon();

    let mu = data_min_speed(sys, prob)?;
    if mu < opts.speed_threshold {
        return Err(Error::DegenerateSpeed {
            speed: mu,
            threshold: opts.speed_threshold,
        });
    }
    let nt = opts
        .nt
        .unwrap_or_else(|| sidewise_time_cells(horizon, h, mu, opts.cfl));
    if nt < 2 {
        return Err(Error::GridTooCoarse {
            points: nt + 1,
            required: 3,
        });
    }
    let dt = horizon / nt as f64;

    let mut cur = vec![0.0; (nt + 1) * n];
    let resampled = prob.trace.resample(nt + 1);
    for k in 0..=nt {
        resampled.sample(k, &mut cur[k * n..(k + 1) * n]);
    }
    super::forward::check_row(&cur, sys.radius(), 0.0)?;

    let mut levels = Vec::with_capacity((cells + 1) * cur.len());
    levels.extend_from_slice(&cur);
    let mut next = cur.clone();
    let mut lam = vec![0.0; (nt + 1) * n];
    let mut src = vec![0.0; (nt + 1) * n];
    let mut edge = vec![0.0; n];
    let ratio = h / dt;
    for s in 1..=cells {
        let x = prob.x_start + d * s as f64 * h;
        for k in 0..=nt {
            let r = k * n..(k + 1) * n;
            sys.speeds(&cur[r.clone()], &mut lam[r.clone()]);
            sys.source(&cur[r.clone()], &mut src[r]);
        }
        for k in 0..=nt {
            for i in 0..n {
                let p = k * n + i;
                let s_i = lam[p];
                if !s_i.is_finite() || !src[p].is_finite() {
                    return Err(Error::NonFiniteEvaluation {
                        what: format!("sidewise speeds at x = {x}"),
                    });
                }
                if s_i.abs() < opts.speed_threshold {
                    return Err(Error::DegenerateSpeed {
                        speed: s_i.abs(),
                        threshold: opts.speed_threshold,
                    });
                }
                let nu = ratio / s_i.abs();
                if nu > 1.0 + 1e-12 {
                    return Err(Error::CflViolation { courant: nu });
                }
                let v = cur[p];
                let forcing = h * d * src[p] / s_i;
                next[p] = if d * s_i > 0.0 {
                    if k == 0 {
                        f64::NAN
                    } else {
                        v - nu * (v - cur[p - n]) + forcing
                    }
                } else if k == nt {
                    f64::NAN
                } else {
                    v - nu * (v - cur[p + n]) + forcing
                };
            }
        }
        prob.bottom.eval(x, &mut edge);
        for i in 0..n {
            if d * lam[i] > 0.0 {
                next[i] = edge[i];
            }
        }
        prob.top.eval(x, &mut edge);
        for i in 0..n {
            let p = nt * n + i;
            if d * lam[p] < 0.0 {
                next[p] = edge[i];
            }
        }
        super::forward::check_row(&next, sys.radius(), x)?;
        levels.extend_from_slice(&next);
        std::mem::swap(&mut cur, &mut next);
    }

    // levels[s][k][i] -> field[k][j][i], j increasing in x
    let mut data = vec![0.0; levels.len()];
    for s in 0..=cells {
        let j = if d > 0.0 { s } else { cells - s };
        for k in 0..=nt {
            let src_off = (s * (nt + 1) + k) * n;
            let dst_off = (k * (cells + 1) + j) * n;
            data[dst_off..dst_off + n].copy_from_slice(&levels[src_off..src_off + n]);
        }
    }
    Ok(GridField::from_data(n, horizon, span.abs(), nt, cells, data)?
        .with_origin(prob.x_start.min(prob.x_end)))
}

/// Rightward sidewise solve from `x = 0` to `x = L` over `nx` cells.
///
/// `bottom` holds the positive-speed components (`v_m..v_{n-1}`) at `t = 0`,
/// `top` the negative-speed ones (`v_0..v_{l-1}`) at `t = T`.
pub fn solve_sidewise(
    sys: &DiagonalSystem,
    trace0: &Trace,
    bottom: &Profile,
    top: &Profile,
    nx: usize,
    opts: &SidewiseOptions,
) -> Result<GridField> {
    let (n, l) = (sys.n(), sys.l());
    if bottom.n() != n - l || top.n() != l || bottom.nx() != top.nx() {
        return Err(Error::InvalidInput(
            "bottom must hold the positive and top the negative components on one grid".into(),
        ));
    }
    let np = bottom.nx();
    let full_bottom = Profile::from_fn(sys.length(), n, np, |x, o| {
        let mut b = vec![0.0; n - l];
        bottom.eval(x, &mut b);
        o[l..].copy_from_slice(&b);
    });
    let full_top = Profile::from_fn(sys.length(), n, np, |x, o| {
        let mut t = vec![0.0; l];
        top.eval(x, &mut t);
        o[..l].copy_from_slice(&t);
    });
    let prob = SidewiseProblem {
        trace: trace0,
        x_start: 0.0,
        x_end: sys.length(),
        bottom: &full_bottom,
        top: &full_top,
    };
    solve_sidewise_problem(sys, &prob, nx, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Signal;

    #[test]
    fn zero_data_gives_zero_field() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 2.0]).unwrap();
        let trace = Trace::new(vec![Signal::zero(2.0, 50), Signal::zero(2.0, 50)]).unwrap();
        let f = solve_sidewise(
            &sys,
            &trace,
            &Profile::zeros(1.0, 1, 20),
            &Profile::zeros(1.0, 1, 20),
            20,
            &Default::default(),
        )
        .unwrap();
        assert!(f.is_zero());
        assert_eq!(f.nx(), 20);
    }

    #[test]
    fn travelling_waves_are_transported_in_x() {
        // v_0 = g(t + x), v_1 = g(t - 2x) solve the constant system exactly.
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 0.5]).unwrap();
        let g = |s: f64| 0.1 * (1.3 * s).sin();
        let t_max = 3.0;
        let trace = Trace::new(vec![
            Signal::from_fn(t_max, 3001, |t| g(t)),
            Signal::from_fn(t_max, 3001, |t| g(t)),
        ])
        .unwrap();
        let bottom = Profile::from_fn(1.0, 1, 400, |x, o| o[0] = g(-2.0 * x));
        let top = Profile::from_fn(1.0, 1, 400, |x, o| o[0] = g(t_max + x));
        let f = solve_sidewise(&sys, &trace, &bottom, &top, 400, &Default::default()).unwrap();
        let mut err = 0.0_f64;
        for k in 0..=f.nt() {
            for j in 0..=f.nx() {
                let (t, x) = (f.t(k), f.x(j));
                err = err.max((f.value(0, k, j) - g(t + x)).abs());
                err = err.max((f.value(1, k, j) - g(t - 2.0 * x)).abs());
            }
        }
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn leftward_march_mirrors_rightward() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 1.0]).unwrap();
        let g = |s: f64| 0.05 * (2.0 * s).cos();
        let trace = Trace::new(vec![
            Signal::from_fn(2.0, 801, |t| g(t + 1.0)),
            Signal::from_fn(2.0, 801, |t| g(t - 1.0)),
        ])
        .unwrap();
        let bottom = Profile::from_fn(1.0, 2, 200, |x, o| {
            o[0] = g(x);
            o[1] = g(-x);
        });
        let top = Profile::from_fn(1.0, 2, 200, |x, o| {
            o[0] = g(2.0 + x);
            o[1] = g(2.0 - x);
        });
        let prob = SidewiseProblem {
            trace: &trace,
            x_start: 1.0,
            x_end: 0.0,
            bottom: &bottom,
            top: &top,
        };
        let f = solve_sidewise_problem(&sys, &prob, 200, &Default::default()).unwrap();
        assert_eq!(f.x(0), 0.0);
        let mut err = 0.0_f64;
        for k in 0..=f.nt() {
            for j in 0..=f.nx() {
                let (t, x) = (f.t(k), f.x(j));
                err = err.max((f.value(0, k, j) - g(t + x)).abs());
                err = err.max((f.value(1, k, j) - g(t - x)).abs());
            }
        }
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn slow_speed_is_degenerate() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1e-7, 1.0]).unwrap();
        let trace = Trace::new(vec![Signal::zero(1.0, 10), Signal::zero(1.0, 10)]).unwrap();
        let err = solve_sidewise(
            &sys,
            &trace,
            &Profile::zeros(1.0, 1, 10),
            &Profile::zeros(1.0, 1, 10),
            10,
            &Default::default(),
        )
        .unwrap_err();
        assert_eq!(err.name(), "DegenerateSpeed");
    }
}
