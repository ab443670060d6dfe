//! Brandt matrices `B_g(n)` of a class set, their arithmetic identities, and
//! comparison of matrices up to a simultaneous permutation of rows and columns.

pub mod ideals;
pub mod reference;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::hermitian::lattice::count_embeddings;
use crate::hermitian::neighbors::{neighbors, NeighborContext};
use crate::hermitian::PolarizedClassSet;
use crate::quat_core::rational_to_string;
use crate::Rational;

pub use ideals::{brandt_g1_classical, ideal_classes, IdealClassSet, RightIdeal};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrandtMatrix {
    pub p: u64,
    pub g: usize,
    pub n: u64,
    pub entries: Vec<Vec<Rational>>,
    /// Automorphism counts of the classes, in matrix order.
    pub e: Vec<u64>,
    /// Fingerprint of the class set the matrix was computed against.
    pub fingerprint: String,
}

impl BrandtMatrix {
    pub fn h(&self) -> usize {
        self.entries.len()
    }

    /// The entries as integers, if they all are.
    pub fn integer_entries(&self) -> Option<Vec<Vec<i64>>> {
        self.entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
                    .collect()
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        self.entries
            .iter()
            .map(|r| r.iter().fold(Rational::zero(), |a, b| a + b))
            .collect()
    }

    /// Whether `diag(e)^-1 B` is symmetric.
    pub fn is_weighted_symmetric(&self) -> bool {
        let h = self.h();
        let w = |i: usize, j: usize| &self.entries[i][j] / Rational::from_integer(BigInt::from(self.e[i]));
        (0..h).all(|i| (0..i).all(|j| w(i, j) == w(j, i)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let matrix: Vec<Vec<String>> =
            self.entries.iter().map(|r| r.iter().map(rational_to_string_plain).collect()).collect();
        let sums = self.row_sums();
        let row_sum = if sums.windows(2).all(|w| w[0] == w[1]) {
            sums.first().map(rational_to_string_plain)
        } else {
            None
        };
        json!({
            "p": self.p.to_string(),
            "g": self.g.to_string(),
            "n": self.n.to_string(),
            "h": self.h().to_string(),
            "matrix": matrix,
            "e": self.e.iter().map(u64::to_string).collect::<Vec<_>>(),
            "row_sum": row_sum,
        })
    }

    /// The same matrix with class `i` moved to position `map[i]`.
    pub fn reorder(&self, map: &[usize], fingerprint: String) -> BrandtMatrix {
        let h = self.h();
        let mut entries = vec![vec![Rational::zero(); h]; h];
        let mut e = vec![0; h];
        for i in 0..h {
            e[map[i]] = self.e[i];
            for j in 0..h {
                entries[map[i]][map[j]] = self.entries[i][j].clone();
            }
        }
        BrandtMatrix { p: self.p, g: self.g, n: self.n, entries, e, fingerprint }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in &self.entries {
            let cells: Vec<String> = r.iter().map(rational_to_string_plain).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Integers as plain decimals, other rationals as `a/b`.
pub fn rational_to_string_plain(x: &Rational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        rational_to_string(x)
    }
}

fn check_level(set: &PolarizedClassSet, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive (use brandt_zero for n = 0)".into()));
    }
    if set.g() > 1 && (!is_prime(n) || n == set.p()) {
        return Err(Error::InvalidParameter(format!(
            "for g > 1 the level must be a prime different from p, got {n}"
        )));
    }
    if n > i64::MAX as u64 {
        return Err(Error::InvalidParameter("level too large".into()));
    }
    Ok(())
}

fn assemble(set: &PolarizedClassSet, n: u64, counts: Vec<Vec<u64>>) -> Result<BrandtMatrix> {
    let e = set.aut_counts();
    let mut entries = Vec::with_capacity(counts.len());
    for (i, row) in counts.into_iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (j, c) in row.into_iter().enumerate() {
            if c % e[j] != 0 {
                return Err(Error::Consistency(format!(
                    "entry ({i}, {j}) of B({n}): {c} maps is not divisible by e = {}",
                    e[j]
                )));
            }
            r.push(Rational::from_integer(BigInt::from(c / e[j])));
        }
        entries.push(r);
    }
    Ok(BrandtMatrix { p: set.p(), g: set.g(), n, entries, e, fingerprint: set.fingerprint() })
}

/// `B_g(n)_ij = #{phi : L_j -> L_i, h_i(phi x, phi y) = n h_j(x, y)} / e_j`.
pub fn brandt_matrix(set: &PolarizedClassSet, n: u64) -> Result<BrandtMatrix> {
    check_level(set, n)?;
    let h = set.h();
    let classes = set.classes();
    let cells: Vec<(usize, usize)> = (0..h).flat_map(|i| (0..h).map(move |j| (i, j))).collect();
    let flat: Vec<u64> = cells
        .par_iter()
        .map(|&(i, j)| count_embeddings(classes[j].lattice(), classes[i].lattice(), n as i64))
        .collect();
    let counts = flat.chunks(h.max(1)).map(<[u64]>::to_vec).collect();
    assemble(set, n, counts)
}

/// `B_g(l)` from the neighbor side: entry `(i, j)` is the number of
/// `l`-neighbors of `L_i` isometric to `L_j`.
pub fn brandt_from_neighbors(set: &PolarizedClassSet, ell: u64) -> Result<BrandtMatrix> {
    check_level(set, ell)?;
    if !is_prime(ell) || ell == set.p() {
        return Err(Error::InvalidParameter(format!("{ell} is not a prime different from p")));
    }
    let ctx = NeighborContext::new(set.order(), ell)?;
    let h = set.h();
    let rows: Vec<Vec<u64>> = set
        .classes()
        .par_iter()
        .map(|c| -> Result<Vec<u64>> {
            let mut row = vec![0u64; h];
            for nb in neighbors(&ctx, c.lattice())? {
                let j = set
                    .identify(&nb.lattice)
                    .ok_or_else(|| Error::Consistency("neighbor lies in no known class".into()))?;
                row[j] += 1;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let e = set.aut_counts();
    let entries = rows
        .into_iter()
        .map(|r| r.into_iter().map(|c| Rational::from_integer(BigInt::from(c))).collect())
        .collect();
    Ok(BrandtMatrix { p: set.p(), g: set.g(), n: ell, entries, e, fingerprint: set.fingerprint() })
}

/// `B_g(0)_ij = 1/e_j`.
pub fn brandt_zero(set: &PolarizedClassSet) -> BrandtMatrix {
    let e = set.aut_counts();
    let row: Vec<Rational> = e.iter().map(|&x| Rational::new(BigInt::from(1), BigInt::from(x))).collect();
    BrandtMatrix {
        p: set.p(),
        g: set.g(),
        n: 0,
        entries: vec![row; e.len()],
        e,
        fingerprint: set.fingerprint(),
    }
}

/// `prod_{k=1}^{g} (l^k + 1)`, the number of maximal isotropic subgroups of `A[l]`.
pub fn expected_row_sum(ell: u64, g: usize) -> u64 {
    (1..=g as u32).map(|k| ell.pow(k) + 1).product()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowSumReport {
    pub expected: u64,
    pub row_sums: Vec<String>,
    pub ok: bool,
}

/// Checks that every row of `B_g(l)` sums to `prod (l^k + 1)`.
pub fn row_sum_check(b: &BrandtMatrix) -> RowSumReport {
    let expected = expected_row_sum(b.n, b.g);
    let sums = b.row_sums();
    let target = Rational::from_integer(BigInt::from(expected));
    RowSumReport {
        expected,
        ok: sums.iter().all(|s| *s == target),
        row_sums: sums.iter().map(rational_to_string_plain).collect(),
    }
}

/// How a computed matrix relates to a reference one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PermutationMatch {
    /// `computed[perm[i]][perm[j]] = reference[i][j]`.
    Direct(Vec<usize>),
    /// Only the transpose matches, which means an orientation bug.
    Transposed(Vec<usize>),
    None,
}

/// Finds a simultaneous row/column permutation taking `computed` to `reference`.
pub fn match_up_to_permutation(computed: &[Vec<i64>], reference: &[Vec<i64>]) -> PermutationMatch {
    if let Some(p) = find_permutation(computed, reference) {
        return PermutationMatch::Direct(p);
    }
    let h = computed.len();
    let t: Vec<Vec<i64>> = (0..h).map(|i| (0..h).map(|j| computed[j][i]).collect()).collect();
    match find_permutation(&t, reference) {
        Some(p) => PermutationMatch::Transposed(p),
        None => PermutationMatch::None,
    }
}

fn find_permutation(a: &[Vec<i64>], b: &[Vec<i64>]) -> Option<Vec<usize>> {
    let h = a.len();
    if b.len() != h || a.iter().chain(b).any(|r| r.len() != h) {
        return None;
    }
    fn rec(a: &[Vec<i64>], b: &[Vec<i64>], perm: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let k = perm.len();
        if k == a.len() {
            return true;
        }
        for c in 0..a.len() {
            if used[c] {
                continue;
            }
            perm.push(c);
            let ok = (0..=k).all(|t| a[perm[k]][perm[t]] == b[k][t] && a[perm[t]][perm[k]] == b[t][k]);
            if ok {
                used[c] = true;
                if rec(a, b, perm, used) {
                    return true;
                }
                used[c] = false;
            }
            perm.pop();
        }
        false
    }
    let mut perm = Vec::with_capacity(h);
    let mut used = vec![false; h];
    rec(a, b, &mut perm, &mut used).then_some(perm)
}

/// `AB - BA`, for commutativity checks.
pub fn commutator(a: &BrandtMatrix, b: &BrandtMatrix) -> Vec<Vec<Rational>> {
    let h = a.h();
    let prod = |x: &[Vec<Rational>], y: &[Vec<Rational>], i: usize, j: usize| {
        (0..h).fold(Rational::zero(), |s, k| s + &x[i][k] * &y[k][j])
    };
    (0..h)
        .map(|i| (0..h).map(|j| prod(&a.entries, &b.entries, i, j) - prod(&b.entries, &a.entries, i, j)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_matching() {
        let b = vec![vec![12, 3], vec![10, 5]];
        let swapped = vec![vec![5, 10], vec![3, 12]];
        assert_eq!(match_up_to_permutation(&swapped, &b), PermutationMatch::Direct(vec![1, 0]));
        let transposed = vec![vec![12, 10], vec![3, 5]];
        assert_eq!(match_up_to_permutation(&transposed, &b), PermutationMatch::Transposed(vec![0, 1]));
        assert_eq!(match_up_to_permutation(&[vec![1]], &b), PermutationMatch::None);
    }

    #[test]
    fn row_sum_products() {
        assert_eq!(expected_row_sum(2, 2), 15);
        assert_eq!(expected_row_sum(3, 3), 1120);
        assert_eq!(expected_row_sum(7, 1), 8);
    }
}
