//! Reflection/enlargement: adjoining the mirrored state `ṽ(t, x) = v(t, L - x)`
//! turns nonlocal boundary coupling into local conditions.
//!
//! The enlarged state in natural order is `V = (v, ṽ)` with speeds
//! `(λ(v), -λ(ṽ))` and sources `(f(v), f(ṽ))`. Since the solvers expect
//! components sorted by speed sign, the enlarged system stores them as
//!
//! ```text
//! negative: V_0..V_{l-1}, V_{n+m}..V_{2n-1}
//! zero:     V_l..V_{m-1}, V_{n+l}..V_{n+m-1}
//! positive: V_m..V_{n-1}, V_n..V_{n+l-1}
//! ```

use std::sync::Arc;

use crate::error::Result;
use crate::field::GridField;
use crate::signal::Profile;
use crate::system::{BoundaryRule, DiagonalSystem, NonlocalBC};

/// Natural enlarged index of each sorted component.
fn sorted_order(n: usize, l: usize, m: usize) -> Vec<usize> {
    (0..l)
        .chain(n + m..2 * n)
        .chain(l..m)
        .chain(n + l..n + m)
        .chain(m..n)
        .chain(n..n + l)
        .collect()
}

fn inverse(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (s, &i) in order.iter().enumerate() {
        inv[i] = s;
    }
    inv
}

/// Local boundary conditions of the enlarged system.
///
/// At each end the original nonlocal map is evaluated on traces that are all
/// available at that end: at `x = 0`, `v(t, L)` is `ṽ(t, 0)`; at `x = L`,
/// `v(t, 0)` is `ṽ(t, L)`.
#[derive(Debug, Clone)]
pub struct LocalBC {
    n: usize,
    l: usize,
    m: usize,
    bc: NonlocalBC,
    order: Vec<usize>,
    position: Vec<usize>,
}

impl LocalBC {
    pub fn original_n(&self) -> usize {
        self.n
    }

    /// Natural enlarged index (`0..2n`) of sorted component `s`.
    pub fn natural_index(&self, s: usize) -> usize {
        self.order[s]
    }

    /// Sorted position of natural enlarged component `i`.
    pub fn sorted_index(&self, i: usize) -> usize {
        self.position[i]
    }

    /// Incoming values at `x = 0` from the natural enlarged state there.
    /// Returns `(v_m..v_{n-1} at 0, v_0..v_{l-1} at L)` and writes them into
    /// natural slots `m..n` and `n..n+l`.
    pub fn at_left(&self, t: f64, state: &mut [f64]) -> Result<()> {
        let (n, l, m) = (self.n, self.l, self.m);
        let w: Vec<f64> = state[..m].iter().chain(&state[n + l..]).copied().collect();
        let mut z = vec![0.0; self.bc.n_in()];
        self.bc.incoming(t, &w, &mut z)?;
        state[m..n].copy_from_slice(&z[..n - m]);
        state[n..n + l].copy_from_slice(&z[n - m..]);
        Ok(())
    }

    /// Incoming values at `x = L`, written into natural slots `0..l` and
    /// `n+m..2n`.
    pub fn at_right(&self, t: f64, state: &mut [f64]) -> Result<()> {
        let (n, l, m) = (self.n, self.l, self.m);
        let w: Vec<f64> = state[n..n + m].iter().chain(&state[l..n]).copied().collect();
        let mut z = vec![0.0; self.bc.n_in()];
        self.bc.incoming(t, &w, &mut z)?;
        state[n + m..].copy_from_slice(&z[..n - m]);
        state[..l].copy_from_slice(&z[n - m..]);
        Ok(())
    }

    fn n_neg(&self) -> usize {
        self.l + self.n - self.m
    }

    fn n_nonpos(&self) -> usize {
        self.n_neg() + 2 * (self.m - self.l)
    }

    /// Enlarged initial data `(phi(x), phi(L - x))` in sorted order.
    pub fn enlarge_profile(&self, phi: &Profile) -> Profile {
        let n = self.n;
        let refl = phi.reflected();
        let mut out = Profile::zeros(phi.length(), 2 * n, phi.nx());
        for j in 0..=phi.nx() {
            let p = out.point_mut(j);
            for (s, &i) in self.order.iter().enumerate() {
                p[s] = if i < n {
                    phi.value(i, j)
                } else {
                    refl.value(i - n, j)
                };
            }
        }
        out
    }

    /// Enlarged field reordered into natural order `(v, ṽ)`.
    pub fn natural(&self, field: &GridField) -> GridField {
        field.select(&self.position)
    }

    /// The first `n` natural components: the original unknowns.
    pub fn restrict(&self, field: &GridField) -> GridField {
        field.select(&self.position[..self.n])
    }

    /// The mirrored block `ṽ` as a field.
    pub fn mirrored(&self, field: &GridField) -> GridField {
        field.select(&self.position[self.n..])
    }
}

impl BoundaryRule for LocalBC {
    fn incoming(&self, t: f64, outgoing: &[f64], incoming: &mut [f64]) -> Result<()> {
        let n2 = 2 * self.n;
        let (neg, nonpos) = (self.n_neg(), self.n_nonpos());
        // Left end: sorted 0..nonpos known; incoming sorted nonpos..2n.
        let mut left = vec![0.0; n2];
        for s in 0..nonpos {
            left[self.order[s]] = outgoing[s];
        }
        self.at_left(t, &mut left)?;
        let k_left = n2 - nonpos;
        for s in nonpos..n2 {
            incoming[s - nonpos] = left[self.order[s]];
        }
        // Right end: sorted neg..2n known; incoming sorted 0..neg.
        let mut right = vec![0.0; n2];
        for s in neg..n2 {
            right[self.order[s]] = outgoing[nonpos + s - neg];
        }
        self.at_right(t, &mut right)?;
        for s in 0..neg {
            incoming[k_left + s] = right[self.order[s]];
        }
        Ok(())
    }
}

/// Build the `2n`-component enlarged system with local boundary conditions.
pub fn reflect_enlarge(sys: &DiagonalSystem, bc: &NonlocalBC) -> Result<(DiagonalSystem, LocalBC)> {
    let (n, l, m) = (sys.n(), sys.l(), sys.m());
    let order = Arc::new(sorted_order(n, l, m));
    let position = inverse(&order);
    let (s1, s2) = (sys.clone(), sys.clone());
    let (o1, o2) = (order.clone(), order.clone());
    let speeds = Arc::new(move |u: &[f64], out: &mut [f64]| {
        let mut nat = vec![0.0; 2 * n];
        for (s, &i) in o1.iter().enumerate() {
            nat[i] = u[s];
        }
        let mut lam = vec![0.0; 2 * n];
        s1.speeds(&nat[..n], &mut lam[..n]);
        s1.speeds(&nat[n..], &mut lam[n..]);
        for (s, &i) in o1.iter().enumerate() {
            out[s] = if i < n { lam[i] } else { -lam[i] };
        }
    });
    let source = Arc::new(move |u: &[f64], out: &mut [f64]| {
        let mut nat = vec![0.0; 2 * n];
        for (s, &i) in o2.iter().enumerate() {
            nat[i] = u[s];
        }
        let mut f = vec![0.0; 2 * n];
        s2.source(&nat[..n], &mut f[..n]);
        s2.source(&nat[n..], &mut f[n..]);
        for (s, &i) in o2.iter().enumerate() {
            out[s] = f[i];
        }
    });
    let l_e = l + n - m;
    let m_e = l_e + 2 * (m - l);
    let enlarged = DiagonalSystem::new(2 * n, l_e, m_e, sys.length(), sys.radius(), speeds, source)?;
    let local = LocalBC {
        n,
        l,
        m,
        bc: bc.clone(),
        order: order.to_vec(),
        position,
    };
    Ok((enlarged, local))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::forward::{solve_forward, SolverOptions};

    fn loop_case() -> (DiagonalSystem, NonlocalBC) {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 1.0]).unwrap();
        let bc = NonlocalBC::linear(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        (sys, bc)
    }

    #[test]
    fn enlarged_speeds_are_sorted_duplicates() {
        let (sys, bc) = loop_case();
        let (big, _) = reflect_enlarge(&sys, &bc).unwrap();
        assert_eq!(big.n(), 4);
        assert_eq!((big.l(), big.m()), (2, 2));
        assert_eq!(big.speeds_at_zero(), vec![-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn zero_speed_bookkeeping() {
        let sys = DiagonalSystem::constant(1.0, 1.0, &[-1.0, 0.0, 2.0]).unwrap();
        let bc = NonlocalBC::linear(4, 2, vec![0.0; 8]).unwrap();
        let (big, local) = reflect_enlarge(&sys, &bc).unwrap();
        assert_eq!((big.l(), big.m()), (2, 4));
        assert_eq!(big.speeds_at_zero(), vec![-1.0, -2.0, 0.0, 0.0, 2.0, 1.0]);
        for i in 0..6 {
            assert_eq!(local.natural_index(local.sorted_index(i)), i);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let (sys, bc) = loop_case();
        let (big, local) = reflect_enlarge(&sys, &bc).unwrap();
        let phi = local.enlarge_profile(&Profile::zeros(1.0, 2, 30));
        let f = solve_forward(&big, &local, &phi, 1.0, 30, &SolverOptions::default()).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn mirrored_block_is_the_reflection() {
        let (sys, bc) = loop_case();
        let (big, local) = reflect_enlarge(&sys, &bc).unwrap();
        let phi = Profile::from_fn(1.0, 2, 80, |x, o| {
            o[0] = 0.01 * (2.0 * std::f64::consts::PI * x).cos();
            o[1] = 0.01 * (2.0 * std::f64::consts::PI * x).cos();
        });
        let f = solve_forward(&big, &local, &local.enlarge_profile(&phi), 0.7, 80, &Default::default())
            .unwrap();
        let a = local.restrict(&f);
        let b = local.mirrored(&f);
        assert_eq!(b.reflect_x(), a);
    }
}
