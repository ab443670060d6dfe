//! Exact characteristic polynomials, real-root isolation by Sturm sequences,
//! and Ramanujan-bound reports for Brandt and adjacency matrices.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::brandt::rational_to_string_plain;
use crate::error::{Error, Result};
use crate::Rational;

/// Integer polynomial, coefficients from the constant term up.
pub type IntPoly = Vec<BigInt>;
type RatPoly = Vec<Rational>;

/// `det(x I - M)`, by Berkowitz's division-free algorithm.
pub fn char_poly(m: &[Vec<i64>]) -> IntPoly {
    let n = m.len();
    let a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    // coefficients of det(x I - A_k), highest degree first
    let mut c: Vec<BigInt> = vec![BigInt::one()];
    for k in 0..n {
        // A_{k+1} = [[A_k, col], [row, a_kk]]
        let row: Vec<BigInt> = (0..k).map(|j| a[k][j].clone()).collect();
        let col: Vec<BigInt> = (0..k).map(|i| a[i][k].clone()).collect();
        let akk = a[k][k].clone();
        // Toeplitz column: 1, -a_kk, -row col, -row A col, -row A^2 col, ...
        let mut t = vec![BigInt::one(), -akk];
        let mut v = col;
        for _ in 0..k {
            let s: BigInt = row.iter().zip(&v).map(|(x, y)| x * y).sum();
            t.push(-s);
            v = (0..k).map(|i| (0..k).map(|j| &a[i][j] * &v[j]).sum()).collect();
        }
        let mut next = vec![BigInt::zero(); k + 2];
        for (i, ni) in next.iter_mut().enumerate() {
            for (j, cj) in c.iter().enumerate() {
                if i >= j && i - j < t.len() {
                    *ni += &t[i - j] * cj;
                }
            }
        }
        c = next;
    }
    c.reverse();
    c
}

fn to_rat(p: &[BigInt]) -> RatPoly {
    p.iter().map(|c| Rational::from_integer(c.clone())).collect()
}

fn trim(mut p: RatPoly) -> RatPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn degree(p: &[Rational]) -> usize {
    p.len().saturating_sub(1)
}

fn derivative(p: &[Rational]) -> RatPoly {
    trim(p.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(BigInt::from(i))).collect())
}

fn divmod(a: &[Rational], b: &[Rational]) -> (RatPoly, RatPoly) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![Rational::zero(); r.len() - b.len() + 1];
    let lead = b.last().unwrap().clone();
    while !r.is_empty() && r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &f * bc;
        }
        q[shift] = f;
        r.pop();
        r = trim(r);
    }
    (trim(q), r)
}

fn monic(p: RatPoly) -> RatPoly {
    let p = trim(p);
    match p.last() {
        Some(l) if !l.is_one() => {
            let l = l.clone();
            p.into_iter().map(|c| c / &l).collect()
        }
        _ => p,
    }
}

fn gcd(a: &[Rational], b: &[Rational]) -> RatPoly {
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let (_, r) = divmod(&x, &y);
        x = y;
        y = r;
    }
    monic(x)
}

fn sub(a: &[Rational], b: &[Rational]) -> RatPoly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| a.get(i).cloned().unwrap_or_else(Rational::zero) - b.get(i).cloned().unwrap_or_else(Rational::zero))
            .collect(),
    )
}

/// Yun's square-free factorization: `(factor, multiplicity)` with monic square-free factors.
fn square_free_factors(p: &[Rational]) -> Vec<(RatPoly, usize)> {
    let p = monic(p.to_vec());
    if degree(&p) == 0 {
        return vec![];
    }
    let dp = derivative(&p);
    let a0 = gcd(&p, &dp);
    let mut b = divmod(&p, &a0).0;
    let mut c = divmod(&dp, &a0).0;
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while degree(&b) > 0 {
        let a = gcd(&b, &d);
        b = divmod(&b, &a).0;
        c = divmod(&d, &a).0;
        d = sub(&c, &derivative(&b));
        if degree(&a) > 0 {
            out.push((a, i));
        }
        i += 1;
    }
    out
}

fn eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn sturm_chain(p: &[Rational]) -> Vec<RatPoly> {
    let mut chain = vec![p.to_vec(), derivative(p)];
    loop {
        let n = chain.len();
        if chain[n - 1].is_empty() {
            chain.pop();
            break;
        }
        let (_, r) = divmod(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes(chain: &[RatPoly], x: &Rational) -> usize {
    let signs: Vec<i32> = chain
        .iter()
        .map(|q| eval(q, x))
        .filter(|v| !v.is_zero())
        .map(|v| if v.is_positive() { 1 } else { -1 })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// A real root: exact, or strictly inside `(lower, upper)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealRoot {
    pub lower: Rational,
    pub upper: Rational,
    pub exact: Option<Rational>,
    pub multiplicity: usize,
    factor: RatPoly,
}

impl RealRoot {
    fn exact(x: Rational, multiplicity: usize, factor: RatPoly) -> Self {
        RealRoot { lower: x.clone(), upper: x.clone(), exact: Some(x), multiplicity, factor }
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lower + &self.upper) / Rational::from_integer(BigInt::from(2))
    }

    pub fn approx(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    fn bisect(&mut self) {
        if self.exact.is_some() {
            return;
        }
        let mid = self.midpoint();
        let fm = eval(&self.factor, &mid);
        if fm.is_zero() {
            self.lower = mid.clone();
            self.upper = mid.clone();
            self.exact = Some(mid);
            return;
        }
        let fl = eval(&self.factor, &self.lower);
        if fl.is_positive() == fm.is_positive() {
            self.lower = mid;
        } else {
            self.upper = mid;
        }
    }

    fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "lower": rational_to_string_plain(&self.lower),
            "upper": rational_to_string_plain(&self.upper),
            "exact": self.exact.as_ref().map(rational_to_string_plain),
            "multiplicity": self.multiplicity.to_string(),
        })
    }
}

fn root_bound(p: &[Rational]) -> Rational {
    let lead = p.last().unwrap().abs();
    let m = p[..p.len() - 1].iter().map(|c| c.abs() / &lead).fold(Rational::zero(), |a, b| if b > a { b } else { a });
    m + Rational::one()
}

fn isolate_factor(f: &RatPoly, multiplicity: usize, width: &Rational) -> Vec<RealRoot> {
    let chain = sturm_chain(f);
    let bound = root_bound(f);
    let mut out = Vec::new();
    let mut stack = vec![(-bound.clone(), bound)];
    while let Some((lo, hi)) = stack.pop() {
        let count = sign_changes(&chain, &lo) - sign_changes(&chain, &hi);
        if count == 0 {
            continue;
        }
        let mid = (&lo + &hi) / Rational::from_integer(BigInt::from(2));
        if eval(f, &mid).is_zero() {
            // deflate and start over on the quotient
            let (q, _) = divmod(f, &[-mid.clone(), Rational::one()]);
            let mut roots = vec![RealRoot::exact(mid, multiplicity, f.clone())];
            if degree(&q) > 0 {
                roots.extend(isolate_factor(&q, multiplicity, width));
            }
            return roots;
        }
        if count == 1 {
            let mut r = RealRoot { lower: lo, upper: hi, exact: None, multiplicity, factor: f.clone() };
            while r.exact.is_none() && r.width() > *width {
                r.bisect();
            }
            out.push(r);
        } else {
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
    }
    out
}

/// Number of distinct real roots of `p`.
pub fn real_root_count(p: &IntPoly) -> usize {
    square_free_factors(&to_rat(p)).iter().map(|(f, _)| sign_changes_total(f)).sum()
}

fn sign_changes_total(f: &RatPoly) -> usize {
    let chain = sturm_chain(f);
    let b = root_bound(f);
    sign_changes(&chain, &-b.clone()) - sign_changes(&chain, &b)
}

/// Every real root of `p`, ascending, each isolated to width at most `2^-30`
/// unless it is rational, in which case it is exact.
pub fn eigenvalues(p: &IntPoly) -> Vec<RealRoot> {
    let width = Rational::new(BigInt::one(), BigInt::one() << 30);
    let mut out = Vec::new();
    for (f, mult) in square_free_factors(&to_rat(p)) {
        out.extend(isolate_factor(&f, mult, &width));
    }
    for r in out.iter_mut() {
        // a monic integer polynomial has only integral rational roots
        if r.exact.is_none() {
            let guess = r.midpoint().round();
            if guess > r.lower && guess < r.upper && eval(&r.factor, &guess).is_zero() {
                *r = RealRoot::exact(guess, r.multiplicity, r.factor.clone());
            }
        }
    }
    out.sort_by(|a, b| a.lower.cmp(&b.lower).then(a.upper.cmp(&b.upper)));
    out
}

fn poly_at_int(p: &IntPoly, x: i64) -> BigInt {
    let x = BigInt::from(x);
    p.iter().rev().fold(BigInt::zero(), |acc, c| acc * &x + c)
}

/// Compares `|root|` with `sqrt(b2)` exactly.
fn compare_abs_with_sqrt(root: &mut RealRoot, b2: &BigInt) -> Ordering {
    let b2r = Rational::from_integer(b2.clone());
    if let Some(x) = &root.exact {
        return (x * x).cmp(&b2r);
    }
    // is +-sqrt(b2) a root of the factor? f(s) = even(b2) + s odd(b2)
    let (mut even, mut odd) = (Rational::zero(), Rational::zero());
    let mut pw = Rational::one();
    for (i, c) in root.factor.iter().enumerate() {
        if i % 2 == 0 {
            even += c * &pw;
        } else {
            odd += c * &pw;
            pw *= &b2r;
        }
    }
    let s_is_root = |sign: i32| -> bool {
        // even + sign * sqrt(b2) * odd = 0  <=>  even = -sign * sqrt(b2) odd
        if even.is_zero() && odd.is_zero() {
            return true;
        }
        if even.is_zero() || odd.is_zero() {
            return false;
        }
        let same_sign = even.is_positive() == odd.is_positive();
        (sign < 0) == same_sign && &even * &even == &odd * &odd * &b2r
    };
    for sign in [1, -1] {
        if s_is_root(sign) {
            let lo = &root.lower * &root.lower;
            let hi = &root.upper * &root.upper;
            let contains_sign = if sign > 0 { root.upper.is_positive() } else { root.lower.is_negative() };
            // the interval may contain sqrt(b2) itself; refine until it excludes it or is tight
            if contains_sign && lo.clone().min(hi.clone()) <= b2r && lo.max(hi) >= b2r {
                let mut probe = root.clone();
                for _ in 0..256 {
                    probe.bisect();
                    let a = &probe.lower * &probe.lower;
                    let b = &probe.upper * &probe.upper;
                    let same_side = probe.lower.is_positive() == probe.upper.is_positive();
                    if same_side && (a.clone().max(b.clone()) < b2r || a.min(b) > b2r) {
                        break;
                    }
                }
                let a = &probe.lower * &probe.lower;
                let b = &probe.upper * &probe.upper;
                if probe.lower.is_positive() == probe.upper.is_positive() && (a.clone().max(b.clone()) < b2r || a.min(b) > b2r) {
                    *root = probe;
                } else {
                    return Ordering::Equal;
                }
            }
        }
    }
    loop {
        let a = &root.lower * &root.lower;
        let b = &root.upper * &root.upper;
        let straddles_zero = !root.lower.is_positive() && !root.upper.is_negative();
        let max = if a > b { a.clone() } else { b.clone() };
        if max <= b2r {
            return Ordering::Less;
        }
        if !straddles_zero && a.min(b) > b2r {
            return Ordering::Greater;
        }
        root.bisect();
        if let Some(x) = &root.exact {
            return (x * x).cmp(&b2r);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub eigenvalue: RealRoot,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralReport {
    pub fingerprint: String,
    pub char_poly: IntPoly,
    pub eigenvalues: Vec<RealRoot>,
    /// The row sum `k`.
    pub k: i64,
    /// Eigenvalues removed as trivial: `k`, and `-k` for bipartite matrices.
    pub trivial: Vec<i64>,
    /// `(2 sqrt(k - 1))^2`.
    pub bound_squared: i64,
    pub verdicts: Vec<Verdict>,
    pub ramanujan: bool,
}

impl SpectralReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "fingerprint": self.fingerprint,
            "char_poly": self.char_poly.iter().map(BigInt::to_string).collect::<Vec<_>>(),
            "eigenvalues": self.eigenvalues.iter().map(RealRoot::to_json).collect::<Vec<_>>(),
            "k": self.k.to_string(),
            "trivial": self.trivial.iter().map(i64::to_string).collect::<Vec<_>>(),
            "bound": format!("2*sqrt({})", self.k - 1),
            "bound_squared": self.bound_squared.to_string(),
            "bound_approx": format!("{:.9}", 2.0 * ((self.k - 1) as f64).sqrt()),
            "verdicts": self.verdicts.iter().map(|v| json!({
                "eigenvalue": v.eigenvalue.to_json(),
                "within_bound": v.within_bound,
            })).collect::<Vec<_>>(),
            "ramanujan": self.ramanujan,
        })
    }
}

pub fn matrix_fingerprint(m: &[Vec<i64>]) -> String {
    hex::encode(Sha256::digest(format!("{m:?}").as_bytes()))
}

/// Classifies the nontrivial eigenvalues of a constant-row-sum matrix against `2 sqrt(k - 1)`.
/// With `bipartite`, `-k` is also treated as trivial.
pub fn ramanujan_report(m: &[Vec<i64>], bipartite: bool) -> Result<SpectralReport> {
    let sums: Vec<i64> = m.iter().map(|r| r.iter().sum()).collect();
    let k = *sums.first().ok_or_else(|| Error::InvalidParameter("empty matrix".into()))?;
    if sums.iter().any(|&s| s != k) {
        return Err(Error::InvalidParameter("matrix does not have constant row sums".into()));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("row sum must be positive".into()));
    }
    let cp = char_poly(m);
    if !poly_at_int(&cp, k).is_zero() {
        return Err(Error::Consistency(format!("row sum {k} is not an eigenvalue")));
    }
    let mut trivial = vec![k];
    if bipartite {
        if !poly_at_int(&cp, -k).is_zero() {
            return Err(Error::Consistency(format!("{} is not an eigenvalue of a bipartite matrix", -k)));
        }
        trivial.push(-k);
    }
    let eigenvalues = eigenvalues(&cp);
    let distinct_real: usize = eigenvalues.len();
    let total: usize = eigenvalues.iter().map(|r| r.multiplicity).sum();
    if total != m.len() {
        return Err(Error::Consistency(format!(
            "{} of {} eigenvalues are real ({distinct_real} distinct)",
            total,
            m.len()
        )));
    }
    let bound_squared = 4 * (k - 1);
    let b2 = BigInt::from(bound_squared);
    let mut verdicts = Vec::new();
    let mut pending: Vec<Rational> = trivial.iter().map(|&t| Rational::from_integer(BigInt::from(t))).collect();
    for root in &eigenvalues {
        let mut mult = root.multiplicity;
        if let Some(x) = &root.exact {
            while mult > 0 {
                match pending.iter().position(|t| t == x) {
                    Some(i) => {
                        pending.remove(i);
                        mult -= 1;
                    }
                    None => break,
                }
            }
        }
        for _ in 0..mult {
            let mut r = root.clone();
            let within = compare_abs_with_sqrt(&mut r, &b2) != Ordering::Greater;
            verdicts.push(Verdict { eigenvalue: root.clone(), within_bound: within });
        }
    }
    let ramanujan = verdicts.iter().all(|v| v.within_bound);
    Ok(SpectralReport {
        fingerprint: matrix_fingerprint(m),
        char_poly: cp,
        eigenvalues,
        k,
        trivial,
        bound_squared,
        verdicts,
        ramanujan,
    })
}

/// `p(-x)` up to the sign making it monic.
pub fn negate_variable(p: &IntPoly) -> IntPoly {
    let n = p.len() - 1;
    p.iter()
        .enumerate()
        .map(|(i, c)| if (n - i) % 2 == 1 { -c.clone() } else { c.clone() })
        .collect()
}

pub fn poly_mul(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> IntPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_char_polys() {
        assert_eq!(char_poly(&[vec![3]]), ints(&[-3, 1]));
        assert_eq!(char_poly(&[vec![12, 3], vec![10, 5]]), ints(&[30, -17, 1]));
        assert_eq!(char_poly(&[]), ints(&[1]));
    }

    #[test]
    fn companion_round_trip() {
        // x^3 - 2x^2 - 5x + 6 = (x - 1)(x + 2)(x - 3)
        let coeffs = [6i64, -5, -2];
        let mut m = vec![vec![0i64; 3]; 3];
        m[1][0] = 1;
        m[2][1] = 1;
        for (i, c) in coeffs.iter().enumerate() {
            m[i][2] = -c;
        }
        assert_eq!(char_poly(&m), ints(&[6, -5, -2, 1]));
        let roots: Vec<Option<Rational>> = eigenvalues(&char_poly(&m)).into_iter().map(|r| r.exact).collect();
        let want: Vec<Option<Rational>> = [-2, 1, 3].iter().map(|&x| Some(Rational::from_integer(BigInt::from(x)))).collect();
        assert_eq!(roots, want);
    }

    #[test]
    fn irrational_roots_are_isolated() {
        // x^2 - 2
        let roots = eigenvalues(&ints(&[-2, 0, 1]));
        assert_eq!(roots.len(), 2);
        let w = Rational::new(BigInt::one(), BigInt::one() << 30);
        for r in &roots {
            assert!(r.exact.is_none());
            assert!(r.upper.clone() - r.lower.clone() <= w);
            assert!((r.approx().abs() - 2f64.sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn exact_root_at_a_bisection_point() {
        // integer roots hit as bisection midpoints after other roots were isolated
        for poly in [ints(&[-1, 0, 1]), ints(&[0, -1, 1]), ints(&[-6, 1, 1]), ints(&[-4, 0, 1])] {
            let roots = eigenvalues(&poly);
            assert_eq!(roots.len(), 2, "{poly:?}");
            assert!(roots.iter().all(|r| r.exact.is_some()));
        }
    }

    #[test]
    fn repeated_roots() {
        // (x - 2)^2 (x + 1)
        let roots = eigenvalues(&ints(&[4, 0, -3, 1]));
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].multiplicity, 1);
        assert_eq!(roots[1].multiplicity, 2);
    }

    #[test]
    fn ramanujan_on_table_matrix() {
        let r = ramanujan_report(&[vec![12, 3], vec![10, 5]], false).unwrap();
        assert_eq!(r.k, 15);
        assert_eq!(r.verdicts.len(), 1);
        assert_eq!(r.verdicts[0].eigenvalue.exact, Some(Rational::from_integer(BigInt::from(2))));
        assert!(r.ramanujan);
        assert!(ramanujan_report(&[vec![1, 2], vec![0, 1]], false).is_err());
    }

    #[test]
    fn bound_is_attained_exactly() {
        // eigenvalues 3 and -3 with k = 3: 2 sqrt(2) < 3, not Ramanujan
        let r = ramanujan_report(&[vec![0, 3], vec![3, 0]], false).unwrap();
        assert!(!r.ramanujan);
        // an irrational eigenvalue equal to the bound: k = 3, bound^2 = 8, lambda = +-sqrt(8)
        let mut root = eigenvalues(&ints(&[-8, 0, 1])).pop().unwrap();
        assert_eq!(compare_abs_with_sqrt(&mut root, &BigInt::from(8)), Ordering::Equal);
    }
}
