//! Brute-force oracles that share nothing with the library's enumeration code.

#![allow(dead_code)]

use num_traits::{ToPrimitive, Zero};
use superspecial::hermitian::QuatMatrix;
use superspecial::quat_core::{MaximalOrder, Quaternion};
use superspecial::Rational;

/// Elements of `O^g` from integer coordinates in the order basis.
pub fn vector(order: &MaximalOrder, c: &[i64]) -> Vec<Quaternion> {
    c.chunks(4)
        .map(|q| {
            let mut x = Quaternion::zero();
            for (k, &ck) in q.iter().enumerate() {
                if ck != 0 {
                    x = &x + &order.basis()[k].scale(&Rational::from_integer(ck.into()));
                }
            }
            x
        })
        .collect()
}

/// `x^dagger H y`.
pub fn pairing(order: &MaximalOrder, h: &QuatMatrix, x: &[Quaternion], y: &[Quaternion]) -> Quaternion {
    let alg = order.algebra();
    let mut s = Quaternion::zero();
    for r in 0..x.len() {
        for c in 0..y.len() {
            let t = alg.mul(&alg.mul(&x[r].conj(), h.get(r, c)), &y[c]);
            s = &s + &t;
        }
    }
    s
}

fn value(order: &MaximalOrder, h: &QuatMatrix, c: &[i64]) -> Rational {
    let v = vector(order, c);
    pairing(order, h, &v, &v).coeffs()[0].clone()
}

/// Coordinate bounds `|c_a| <= sqrt(m (G^-1)_aa)` for `c^T G c <= m`, from a
/// floating-point inverse with a safety margin.
fn box_bounds(order: &MaximalOrder, h: &QuatMatrix, m: i64) -> Vec<i64> {
    let n = 4 * h.rows();
    let unit = |a: usize| (0..n).map(|i| i64::from(i == a)).collect::<Vec<_>>();
    let mut g = vec![vec![0f64; n]; n];
    for a in 0..n {
        for b in 0..n {
            let mut s = unit(a);
            s[b] += 1;
            let v = value(order, h, &s) - value(order, h, &unit(a)) - value(order, h, &unit(b));
            g[a][b] = v.to_f64().unwrap() / 2.0;
        }
    }
    // Gauss-Jordan inverse
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| g[i][col].abs().total_cmp(&g[j][col].abs())).unwrap();
        g.swap(col, piv);
        inv.swap(col, piv);
        let d = g[col][col];
        for j in 0..n {
            g[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = g[i][col];
                for j in 0..n {
                    g[i][j] -= f * g[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    (0..n).map(|a| ((m as f64) * inv[a][a] + 1e-6).sqrt().floor() as i64).collect()
}

/// Every `x` in `O^g` with `x^dagger H x = m`, by exhaustive box search.
pub fn vectors_of_value(order: &MaximalOrder, h: &QuatMatrix, m: i64) -> Vec<Vec<Quaternion>> {
    let bounds = box_bounds(order, h, m);
    let n = bounds.len();
    let target = Rational::from_integer(m.into());
    let mut c: Vec<i64> = bounds.iter().map(|b| -b).collect();
    let mut out = Vec::new();
    loop {
        if value(order, h, &c) == target {
            out.push(vector(order, &c));
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            if c[k] < bounds[k] {
                c[k] += 1;
                break;
            }
            c[k] = -bounds[k];
            k += 1;
        }
    }
}

/// `#{U in Mat_g(O) : U^dagger H U = H}`, column by column from the box search.
/// The diagonal of `H` must be integral.
pub fn brute_force_automorphisms(order: &MaximalOrder, h: &QuatMatrix) -> u64 {
    let g = h.rows();
    let columns: Vec<Vec<Vec<Quaternion>>> = (0..g)
        .map(|r| vectors_of_value(order, h, h.get(r, r).coeffs()[0].to_integer().to_i64().unwrap()))
        .collect();
    fn extend(
        order: &MaximalOrder,
        h: &QuatMatrix,
        columns: &[Vec<Vec<Quaternion>>],
        chosen: &mut Vec<Vec<Quaternion>>,
    ) -> u64 {
        let k = chosen.len();
        if k == columns.len() {
            return 1;
        }
        let mut total = 0;
        for v in &columns[k] {
            let fits = (0..k).all(|j| pairing(order, h, &chosen[j], v) == *h.get(j, k));
            if fits {
                chosen.push(v.clone());
                total += extend(order, h, columns, chosen);
                chosen.pop();
            }
        }
        total
    }
    extend(order, h, &columns, &mut Vec::new())
}

/// `#{x in O : Nrd(x) = 1}`.
pub fn brute_force_units(order: &MaximalOrder) -> u64 {
    let h = QuatMatrix::identity(1);
    vectors_of_value(order, &h, 1).len() as u64
}

pub fn is_zero(x: &Rational) -> bool {
    x.is_zero()
}
