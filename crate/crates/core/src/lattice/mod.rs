//! Integral positive-definite quadratic forms: short-vector enumeration and
//! the column-by-column constrained search that underlies every isometry,
//! automorphism and Brandt count in the crate.

mod enumerate;
pub mod intlin;
pub mod lll;

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Rational;
use enumerate::Ellipsoid;
use lll::lll_gram_i128;

/// A positive-definite integral quadratic form `Q(x) = x^T G x` on `Z^n`,
/// stored through its doubled Gram matrix `2G` (integral, even diagonal).
#[derive(Clone, Debug)]
pub struct GramForm {
    gram2: Vec<Vec<i64>>,
    // LLL-reduced coordinates used for enumeration
    reduce: Vec<Vec<i64>>,
    reduced_gram2: Vec<Vec<i64>>,
}

impl PartialEq for GramForm {
    fn eq(&self, other: &Self) -> bool {
        self.gram2 == other.gram2
    }
}

impl GramForm {
    /// Builds the form from a doubled Gram matrix (`x^T gram2 x = 2 Q(x)`).
    pub fn from_gram2(gram2: Vec<Vec<i64>>) -> Result<Self> {
        let n = gram2.len();
        for (i, row) in gram2.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter("Gram matrix is not square".into()));
            }
            if row[i] % 2 != 0 {
                return Err(Error::InvalidParameter("doubled Gram has odd diagonal".into()));
            }
            for j in 0..n {
                if gram2[j][i] != row[j] {
                    return Err(Error::InvalidParameter("Gram matrix is not symmetric".into()));
                }
            }
        }
        if !leading_minors_positive(&gram2) {
            return Err(Error::InvalidParameter("form is not positive definite".into()));
        }
        let g128: Vec<Vec<i128>> = gram2
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let (t, red) = lll_gram_i128(&g128);
        Ok(GramForm {
            gram2,
            reduce: narrow(&t),
            reduced_gram2: narrow(&red),
        })
    }

    /// Builds the form from an exact rational Gram matrix `G` with `Q(x) = x^T G x`.
    pub fn from_rational(gram: &[Vec<Rational>]) -> Result<Self> {
        let two = Rational::from_integer(BigInt::from(2));
        let mut g2 = Vec::with_capacity(gram.len());
        for row in gram {
            let mut r = Vec::with_capacity(row.len());
            for x in row {
                let y = x * &two;
                if !y.is_integer() {
                    return Err(Error::InvalidParameter("form is not integral".into()));
                }
                r.push(
                    y.to_integer()
                        .to_i64()
                        .ok_or_else(|| Error::InvalidParameter("Gram entry too large".into()))?,
                );
            }
            g2.push(r);
        }
        Self::from_gram2(g2)
    }

    pub fn identity(n: usize) -> Self {
        let g = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 2 } else { 0 }).collect())
            .collect();
        Self::from_gram2(g).expect("identity form")
    }

    pub fn dim(&self) -> usize {
        self.gram2.len()
    }

    pub fn gram2(&self) -> &[Vec<i64>] {
        &self.gram2
    }

    /// `Q(x)`.
    pub fn value(&self, x: &[i64]) -> i64 {
        self.double_value(x) / 2
    }

    fn double_value(&self, x: &[i64]) -> i64 {
        let n = self.dim();
        let mut s = 0i64;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            let mut r = 0i64;
            for j in 0..n {
                r += self.gram2[i][j] * x[j];
            }
            s += x[i] * r;
        }
        s
    }

    /// `Q(x + y) - Q(x) - Q(y)`.
    pub fn polar(&self, x: &[i64], y: &[i64]) -> i64 {
        let n = self.dim();
        let mut s = 0i64;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * self.gram2[i][j] * y[j];
            }
        }
        s
    }

    /// Exact determinant of the doubled Gram matrix.
    pub fn det2(&self) -> BigInt {
        intlin::det_big(&self.gram2)
    }

    fn visit_reduced<F>(&self, value: i64, on_shell: bool, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[i64], i64) -> ControlFlow<()>,
    {
        let n = self.dim();
        let ell = Ellipsoid::from_gram2(&self.reduced_gram2);
        let center = vec![0f64; n];
        let mut z = vec![0i64; n];
        ell.enumerate(&center, value as f64, on_shell, &mut |w: &[i64]| {
            z.iter_mut().for_each(|v| *v = 0);
            for (k, &wk) in w.iter().enumerate() {
                if wk != 0 {
                    for (zi, &t) in z.iter_mut().zip(&self.reduce[k]) {
                        *zi += wk * t;
                    }
                }
            }
            let v = self.value(&z);
            visit(&z, v)
        })
    }
}

fn narrow(m: &[Vec<i128>]) -> Vec<Vec<i64>> {
    m.iter()
        .map(|r| r.iter().map(|&x| i64::try_from(x).expect("entry overflow")).collect())
        .collect()
}

fn leading_minors_positive(g: &[Vec<i64>]) -> bool {
    let n = g.len();
    (1..=n).all(|k| {
        let m: Vec<Vec<i64>> = (0..k).map(|i| g[i][..k].to_vec()).collect();
        intlin::det_big(&m).is_positive()
    })
}

/// All integer vectors attaining a given value of a form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortVectorList {
    pub value: i64,
    pub vectors: Vec<Vec<i64>>,
}

impl ShortVectorList {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Every `x` with `Q(x) = value`, in lexicographic order.
pub fn short_vectors(q: &GramForm, value: i64) -> ShortVectorList {
    let mut vectors = Vec::new();
    if value >= 0 {
        let _ = q.visit_reduced(value, true, &mut |z, v| {
            if v == value {
                vectors.push(z.to_vec());
            }
            ControlFlow::Continue(())
        });
    }
    vectors.sort();
    vectors.dedup();
    ShortVectorList { value, vectors }
}

/// Every nonzero `x` with `Q(x) <= max`, as `(Q(x), x)` sorted by value then lexicographically.
pub fn vectors_up_to(q: &GramForm, max: i64) -> Vec<(i64, Vec<i64>)> {
    let mut out = Vec::new();
    let _ = q.visit_reduced(max, false, &mut |z, v| {
        if v > 0 && v <= max {
            out.push((v, z.to_vec()));
        }
        ControlFlow::Continue(())
    });
    out.sort();
    out
}

/// Counts of vectors of each value `1..=max` (the first coefficients of the theta series).
pub fn theta_prefix(q: &GramForm, max: i64) -> Vec<u64> {
    let mut counts = vec![0u64; max as usize];
    let _ = q.visit_reduced(max, false, &mut |_, v| {
        if v > 0 && v <= max {
            counts[(v - 1) as usize] += 1;
        }
        ControlFlow::Continue(())
    });
    counts
}

/// Visits every `z = shift + sum_k w_k kernel_k` (`w` integral) with `Q(z) = value`.
pub fn enumerate_affine<F>(
    q: &GramForm,
    shift: &[i128],
    kernel: &[Vec<i128>],
    value: i64,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let n = q.dim();
    let m = kernel.len();
    let g = &q.gram2;
    let apply = |v: &[i128]| -> Vec<i128> {
        (0..n)
            .map(|i| (0..n).map(|j| g[i][j] as i128 * v[j]).sum())
            .collect()
    };
    if m == 0 {
        let gs = apply(shift);
        let two_q: i128 = shift.iter().zip(&gs).map(|(a, b)| a * b).sum();
        if two_q == 2 * value as i128 {
            let z: Vec<i64> = shift.iter().map(|&x| x as i64).collect();
            return visit(&z);
        }
        return ControlFlow::Continue(());
    }
    // reduce the kernel basis
    let gk: Vec<Vec<i128>> = kernel.iter().map(|k| apply(k)).collect();
    let a2: Vec<Vec<i128>> = (0..m)
        .map(|i| (0..m).map(|j| dot(&kernel[i], &gk[j])).collect())
        .collect();
    let (t, a2r) = lll_gram_i128(&a2);
    let kred: Vec<Vec<i128>> = t
        .iter()
        .map(|row| {
            (0..n)
                .map(|c| row.iter().zip(kernel).map(|(&tk, k)| tk * k[c]).sum())
                .collect()
        })
        .collect();
    let a2r64 = narrow(&a2r);
    let ell = Ellipsoid::from_gram2(&a2r64);
    // move the shift close to the centre of the ellipsoid
    let gs = apply(shift);
    let b: Vec<f64> = kred.iter().map(|k| -(dot(k, &gs) as f64) / 2.0).collect();
    let wstar = ell.solve(&b);
    let mut sh: Vec<i128> = shift.to_vec();
    for (k, &wk) in wstar.iter().enumerate() {
        let r = wk.round() as i128;
        if r != 0 {
            for c in 0..n {
                sh[c] += r * kred[k][c];
            }
        }
    }
    let gs = apply(&sh);
    let c2: i128 = dot(&sh, &gs);
    let bvec: Vec<i128> = kred.iter().map(|k| dot(k, &gs)).collect();
    // 2Q(sh + w K) = w^T A w + 2 b.w + c2 ; centre w* = -A^{-1} b
    let rhs: Vec<f64> = bvec.iter().map(|&x| -(x as f64) / 2.0).collect();
    let center = ell.solve(&rhs);
    let mut qcenter = 0f64;
    for i in 0..m {
        for j in 0..m {
            qcenter += center[i] * a2r64[i][j] as f64 * center[j];
        }
    }
    qcenter /= 2.0;
    let constant = c2 as f64 / 2.0 - qcenter;
    let radius = value as f64 - constant;
    let sh64: Vec<i64> = sh.iter().map(|&x| i64::try_from(x).expect("shift overflow")).collect();
    let k64 = narrow(&kred);
    let mut z = vec![0i64; n];
    ell.enumerate(&center, radius, true, &mut |w: &[i64]| {
        z.copy_from_slice(&sh64);
        for (k, &wk) in w.iter().enumerate() {
            if wk != 0 {
                for (zi, &kc) in z.iter_mut().zip(&k64[k]) {
                    *zi += wk * kc;
                }
            }
        }
        if q.double_value(&z) == 2 * value {
            visit(&z)
        } else {
            ControlFlow::Continue(())
        }
    })
}

fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A `Z^width`-valued bilinear form on `Z^n`, `B(x, y)_c = sum_{r,s} x_r y_s T[r][s][c]`.
#[derive(Clone, Debug)]
pub struct CrossForm {
    n: usize,
    width: usize,
    tensor: Vec<i64>,
}

impl CrossForm {
    pub fn new(n: usize, width: usize, tensor: Vec<i64>) -> Self {
        assert_eq!(tensor.len(), n * n * width);
        CrossForm { n, width, tensor }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn entry(&self, r: usize, s: usize) -> &[i64] {
        let o = (r * self.n + s) * self.width;
        &self.tensor[o..o + self.width]
    }

    pub fn eval(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.width];
        for r in 0..self.n {
            if x[r] == 0 {
                continue;
            }
            for s in 0..self.n {
                if y[s] == 0 {
                    continue;
                }
                let f = x[r] * y[s];
                for (o, &t) in out.iter_mut().zip(self.entry(r, s)) {
                    *o += f * t;
                }
            }
        }
        out
    }

    /// Rows of the linear map `y -> B(x, y)`.
    fn left_map(&self, x: &[i64]) -> Vec<Vec<i128>> {
        let mut rows = vec![vec![0i128; self.n]; self.width];
        for r in 0..self.n {
            if x[r] == 0 {
                continue;
            }
            for s in 0..self.n {
                for (c, &t) in self.entry(r, s).iter().enumerate() {
                    rows[c][s] += (x[r] * t) as i128;
                }
            }
        }
        rows
    }
}

/// Constraint data for [`constrained_matrix_search`]: find all tuples of
/// columns `y_0, .., y_{k-1}` in `Z^n` with `Q(y_a) = column_values[a]` and
/// `B(y_a, y_b) = cross_values[a][b]` for `a != b`.
pub struct MatrixSearch<'a> {
    pub form: &'a GramForm,
    pub cross: &'a CrossForm,
    pub column_values: Vec<i64>,
    pub cross_values: Vec<Vec<Vec<i64>>>,
}

/// Depth-first column-by-column enumeration of all solutions of a
/// [`MatrixSearch`]. Columns are processed in increasing target value; each
/// new column is enumerated inside the affine sublattice cut out by its
/// cross constraints with the columns already fixed. Solutions are passed to
/// `visit` in the caller's column order.
pub fn constrained_matrix_search<F>(search: &MatrixSearch<'_>, visit: F) -> ControlFlow<()>
where
    F: FnMut(&[Vec<i64>]) -> ControlFlow<()>,
{
    if search.column_values.is_empty() {
        let mut visit = visit;
        return visit(&[]);
    }
    let seeds = short_vectors(search.form, search.column_values[search.first_column()]);
    search.run_from(&seeds.vectors, visit)
}

impl MatrixSearch<'_> {
    fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.column_values.len()).collect();
        order.sort_by_key(|&a| (self.column_values[a], a));
        order
    }

    /// The column processed first (smallest target value).
    pub fn first_column(&self) -> usize {
        self.order()[0]
    }

    /// Runs the search with the candidates for [`MatrixSearch::first_column`]
    /// supplied by the caller, e.g. a slice of a shared short-vector list.
    pub fn run_from<F>(&self, seeds: &[Vec<i64>], mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[Vec<i64>]) -> ControlFlow<()>,
    {
        let k = self.column_values.len();
        if k == 0 {
            return visit(&[]);
        }
        let order = self.order();
        let mut chosen: Vec<Vec<i64>> = vec![Vec::new(); k];
        for y in seeds {
            chosen[order[0]] = y.clone();
            extend(self, &order, 1, &mut chosen, &mut visit)?;
        }
        ControlFlow::Continue(())
    }
}

fn extend<F>(
    search: &MatrixSearch<'_>,
    order: &[usize],
    level: usize,
    chosen: &mut Vec<Vec<i64>>,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[Vec<i64>]) -> ControlFlow<()>,
{
    let k = order.len();
    if level == k {
        return visit(chosen);
    }
    let n = search.form.dim();
    let col = order[level];
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &prev in &order[..level] {
        rows.extend(search.cross.left_map(&chosen[prev]));
        rhs.extend(search.cross_values[prev][col].iter().map(|&v| v as i128));
    }
    let Some((z0, kernel)) = intlin::solve_affine(&rows, &rhs, n) else {
        return ControlFlow::Continue(());
    };
    let mut found: Vec<Vec<i64>> = Vec::new();
    let _ = enumerate_affine(search.form, &z0, &kernel, search.column_values[col], &mut |z| {
        found.push(z.to_vec());
        ControlFlow::Continue(())
    });
    found.sort();
    for z in found {
        chosen[col] = z;
        extend(search, order, level + 1, chosen, visit)?;
    }
    chosen[col] = Vec::new();
    ControlFlow::Continue(())
}

/// Determinant of `x^T G x` style rational Gram matrices, exact.
pub fn rational_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::from_integer(BigInt::from(1));
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &piv;
            for j in c..n {
                let v = &f * &a[c][j];
                a[r][j] -= v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_counts() {
        let q = GramForm::identity(4);
        assert_eq!(short_vectors(&q, 0).vectors, vec![vec![0, 0, 0, 0]]);
        assert_eq!(short_vectors(&q, 1).len(), 8);
        assert_eq!(short_vectors(&q, 2).len(), 24);
        assert_eq!(short_vectors(&q, 3).len(), 32);
        assert_eq!(theta_prefix(&q, 3), vec![8, 24, 32]);
    }

    #[test]
    fn rejects_indefinite() {
        assert!(GramForm::from_gram2(vec![vec![2, 3], vec![3, 2]]).is_err());
        assert!(GramForm::from_gram2(vec![vec![1, 0], vec![0, 2]]).is_err());
    }

    #[test]
    fn affine_enumeration_on_identity() {
        // vectors of norm 2 in Z^3 with x0 = 1: (1, ±1, 0), (1, 0, ±1)
        let q = GramForm::identity(3);
        let shift = vec![1i128, 0, 0];
        let kernel = vec![vec![0i128, 1, 0], vec![0, 0, 1]];
        let mut out = Vec::new();
        let _ = enumerate_affine(&q, &shift, &kernel, 2, &mut |z| {
            out.push(z.to_vec());
            ControlFlow::Continue(())
        });
        out.sort();
        assert_eq!(out, vec![vec![1, -1, 0], vec![1, 0, -1], vec![1, 0, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn empty_search_has_one_solution() {
        let q = GramForm::identity(2);
        let cross = CrossForm::new(2, 1, vec![0; 4]);
        let s = MatrixSearch { form: &q, cross: &cross, column_values: vec![], cross_values: vec![] };
        let mut n = 0;
        let _ = constrained_matrix_search(&s, |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(n, 1);
    }

    #[test]
    fn orthogonal_frames_of_z2() {
        // columns of norm 1 with zero inner product: the 8 signed permutation matrices
        let q = GramForm::identity(2);
        let cross = CrossForm::new(2, 1, vec![2, 0, 0, 2]);
        let s = MatrixSearch {
            form: &q,
            cross: &cross,
            column_values: vec![1, 1],
            cross_values: vec![vec![vec![2], vec![0]], vec![vec![0], vec![2]]],
        };
        let mut n = 0;
        let _ = constrained_matrix_search(&s, |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(n, 8);
        // impossible first column
        let s2 = MatrixSearch { column_values: vec![3, 1], ..s };
        let mut m = 0;
        let _ = constrained_matrix_search(&s2, |_| {
            m += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(m, 0);
    }
}
