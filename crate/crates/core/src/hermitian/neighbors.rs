//! Kneser `l`-neighbors of hermitian O-lattices.
//!
//! With `e` a rank-one idempotent of `O/lO = M_2(F_l)`, O-submodules of
//! `L/lL` correspond to subspaces of `V = (L/lL)e`, and `h` induces a
//! symplectic form on `V` with values in the line `(1-e)Oe`. Lagrangians of
//! `V` give exactly the sublattices `lL < L' < L` on which `h/l` is again
//! O-valued and unimodular.

use super::lattice::{ClassLattice, Embedding};
use crate::arith::mod_inv;
use crate::error::{consistency, Error, Result};
use crate::lattice::intlin::{rref_mod, HnfBasis};
use crate::quat_core::{MaximalOrder, OrderElt};

/// Data attached to `O/lO` that does not depend on the lattice.
#[derive(Clone, Debug)]
pub struct NeighborContext {
    ell: i64,
    eps: OrderElt,
    // a generator of (1-e)Oe mod l and a coordinate where it is invertible
    line: OrderElt,
    line_coord: usize,
    line_inv: i64,
}

impl NeighborContext {
    pub fn new(order: &MaximalOrder, ell: u64) -> Result<Self> {
        let l = ell as i64;
        if ell < 2 || !crate::arith::is_prime(ell) || ell == order.discriminant() {
            return Err(Error::InvalidParameter(format!(
                "neighbor prime {ell} must be a prime different from p"
            )));
        }
        let mut eps = None;
        'outer: for a in 0..l {
            for b in 0..l {
                for c in 0..l {
                    for d in 0..l {
                        let x = [a, b, c, d];
                        if order.trd(&x).rem_euclid(l) == 1 && order.nrd(&x).rem_euclid(l) == 0 {
                            eps = Some(x);
                            break 'outer;
                        }
                    }
                }
            }
        }
        let eps = eps.ok_or_else(|| Error::Consistency("O/lO has no rank-one idempotent".into()))?;
        let one_minus = sub(&order.one(), &eps);
        let mut line = None;
        for k in 0..4 {
            let mut o = [0i64; 4];
            o[k] = 1;
            let f = modl(&order.mul(&order.mul(&one_minus, &o), &eps), l);
            if let Some(c) = (0..4).find(|&c| f[c] != 0) {
                line = Some((f, c));
                break;
            }
        }
        let (line, line_coord) = line.ok_or_else(|| Error::Consistency("(1-e)Oe vanishes mod l".into()))?;
        let line_inv = mod_inv(line[line_coord], l).expect("nonzero mod l");
        Ok(NeighborContext { ell: l, eps, line, line_coord, line_inv })
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    /// The symplectic pairing of `u, v in V`: `h(u, v) = omega line (mod l)`.
    fn omega(&self, lat: &ClassLattice, u: &[i64], v: &[i64]) -> Result<i64> {
        let l = self.ell;
        let h = modl(&lat.h(u, v), l);
        let w = h[self.line_coord] * self.line_inv % l;
        for c in 0..4 {
            if (h[c] - w * self.line[c]).rem_euclid(l) != 0 {
                return consistency("hermitian pairing on (L/lL)e leaves the line (1-e)Oe");
            }
        }
        Ok(w)
    }
}

/// A neighbor `L'` of `L` together with its key: the reduced echelon basis of `L'/lL`.
#[derive(Clone, Debug)]
pub struct Neighbor {
    pub key: Vec<Vec<i64>>,
    pub lattice: ClassLattice,
}

/// The key of a sublattice `lL < S < L`, from generators in lattice coordinates.
pub fn sublattice_key(gens: &[Vec<i64>], ell: i64) -> Vec<Vec<i64>> {
    rref_mod(gens, ell)
}

/// The key of the image of an embedding of multiplier `l`.
pub fn embedding_key(e: &Embedding, ell: i64) -> Vec<Vec<i64>> {
    rref_mod(&e.image, ell)
}

/// The O-submodule of `L/lL` generated by some vectors, as a key.
fn module_key(lat: &ClassLattice, ws: &[Vec<i64>], ell: i64) -> Vec<Vec<i64>> {
    let mut gens = Vec::with_capacity(4 * ws.len());
    for w in ws {
        for k in 0..4 {
            gens.push(lat.right_mul_basis(w, k));
        }
    }
    rref_mod(&gens, ell)
}

/// All keys of Lagrangian `l`-neighbors of `lat`, in a deterministic order.
pub fn neighbor_keys(ctx: &NeighborContext, lat: &ClassLattice) -> Result<Vec<Vec<Vec<i64>>>> {
    let l = ctx.ell;
    let g = lat.genus();
    let n = lat.rank();
    // V = (L/lL) e
    let ve: Vec<Vec<i64>> = (0..n)
        .map(|r| {
            let mut v = vec![0i64; n];
            for k in 0..4 {
                if ctx.eps[k] != 0 {
                    for (o, &x) in v.iter_mut().zip(&lat.right_action()[k][r]) {
                        *o += ctx.eps[k] * x;
                    }
                }
            }
            v
        })
        .collect();
    let vbasis = rref_mod(&ve, l);
    if vbasis.len() != 2 * g {
        return consistency(format!("(L/lL)e has dimension {} instead of {}", vbasis.len(), 2 * g));
    }
    let m = 2 * g;
    let mut omega = vec![vec![0i64; m]; m];
    for s in 0..m {
        for t in 0..m {
            omega[s][t] = ctx.omega(lat, &vbasis[s], &vbasis[t])?;
        }
    }
    for s in 0..m {
        if omega[s][s] != 0 || (0..m).any(|t| (omega[s][t] + omega[t][s]) % l != 0) {
            return consistency("induced pairing is not alternating");
        }
    }
    let mut out = Vec::new();
    for pivots in combinations(m, g) {
        let mut rows: Vec<Vec<i64>> = Vec::with_capacity(g);
        lagrangians(&omega, &pivots, l, &mut rows, &mut |w| {
            let ws: Vec<Vec<i64>> = w
                .iter()
                .map(|coef| {
                    let mut v = vec![0i64; n];
                    for (c, b) in coef.iter().zip(&vbasis) {
                        if *c != 0 {
                            for (o, &x) in v.iter_mut().zip(b) {
                                *o = (*o + c * x) % l;
                            }
                        }
                    }
                    v
                })
                .collect();
            out.push(module_key(lat, &ws, l));
        });
    }
    for key in &out {
        if key.len() != 2 * g {
            return consistency("neighbor module has the wrong dimension");
        }
    }
    Ok(out)
}

/// The lattice `L'` with `L'/lL` spanned by `key`, with the form `h/l`.
pub fn neighbor_from_key(lat: &ClassLattice, key: &[Vec<i64>], ell: i64) -> Result<ClassLattice> {
    let n = lat.rank();
    let mut gens: Vec<Vec<i64>> = key.iter().map(|r| lat.ambient(r)).collect();
    for r in 0..n {
        let mut e = vec![0i64; n];
        e[r] = ell;
        gens.push(lat.ambient(&e));
    }
    let basis = HnfBasis::from_generators(&gens, n)
        .ok_or_else(|| Error::Consistency("neighbor lattice is degenerate".into()))?;
    ClassLattice::new(lat.order().clone(), lat.hermitian().clone(), basis, lat.scale() * ell)
}

/// All Lagrangian `l`-neighbors of `lat`.
pub fn neighbors(ctx: &NeighborContext, lat: &ClassLattice) -> Result<Vec<Neighbor>> {
    neighbor_keys(ctx, lat)?
        .into_iter()
        .map(|key| {
            let lattice = neighbor_from_key(lat, &key, ctx.ell)?;
            Ok(Neighbor { key, lattice })
        })
        .collect()
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Enumerates isotropic subspaces in reduced echelon form with the given pivot columns.
fn lagrangians<F: FnMut(&[Vec<i64>])>(
    omega: &[Vec<i64>],
    pivots: &[usize],
    l: i64,
    rows: &mut Vec<Vec<i64>>,
    visit: &mut F,
) {
    let t = rows.len();
    if t == pivots.len() {
        visit(rows);
        return;
    }
    let m = omega.len();
    let free: Vec<usize> = (pivots[t] + 1..m).filter(|c| !pivots.contains(c)).collect();
    let total = (l as u64).pow(free.len() as u32);
    let mut row = vec![0i64; m];
    for idx in 0..total {
        row.iter_mut().for_each(|x| *x = 0);
        row[pivots[t]] = 1;
        let mut rem = idx;
        for &c in &free {
            row[c] = (rem % l as u64) as i64;
            rem /= l as u64;
        }
        let isotropic = rows.iter().all(|prev| pair(omega, prev, &row, l) == 0);
        if isotropic {
            rows.push(row.clone());
            lagrangians(omega, pivots, l, rows, visit);
            rows.pop();
        }
    }
}

fn pair(omega: &[Vec<i64>], u: &[i64], v: &[i64], l: i64) -> i64 {
    let mut s = 0i64;
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0 {
            continue;
        }
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0 {
                s = (s + ui * omega[i][j] % l * vj) % l;
            }
        }
    }
    s.rem_euclid(l)
}

fn sub(x: &OrderElt, y: &OrderElt) -> OrderElt {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]]
}

fn modl(x: &[i64], l: i64) -> OrderElt {
    [x[0].rem_euclid(l), x[1].rem_euclid(l), x[2].rem_euclid(l), x[3].rem_euclid(l)]
}
