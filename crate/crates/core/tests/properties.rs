mod common;

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use superspecial::hermitian::{act, dagger, haupt_norm, moore_determinant, reduced_norm_mat, HermitianForm, QuatMatrix};
use superspecial::lattice::{short_vectors, GramForm};
use superspecial::quat_core::{order_for_prime, MaximalOrder, Quaternion};
use superspecial::spectra::{char_poly, eigenvalues};
use superspecial::Rational;

const PRIMES: [u64; 6] = [2, 3, 5, 7, 13, 17];

fn orders() -> &'static Vec<Arc<MaximalOrder>> {
    static ORDERS: OnceLock<Vec<Arc<MaximalOrder>>> = OnceLock::new();
    ORDERS.get_or_init(|| PRIMES.iter().map(|&p| Arc::new(order_for_prime(p).unwrap())).collect())
}

fn coords(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, n)
}

fn matrix(order: &MaximalOrder, g: usize, c: &[i64]) -> QuatMatrix {
    let entries = common::vector(order, c);
    QuatMatrix::from_fn(g, g, |r, s| entries[r * g + s].clone())
}

fn rational_quaternion() -> impl Strategy<Value = Quaternion> {
    prop::collection::vec((-20i64..=20, 1i64..=6), 4).prop_map(|v| {
        let c: Vec<Rational> = v.into_iter().map(|(n, d)| Rational::new(n.into(), d.into())).collect();
        Quaternion::new([c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_is_an_anti_involution(k in 0..PRIMES.len(), x in rational_quaternion(), y in rational_quaternion()) {
        let alg = orders()[k].algebra();
        prop_assert_eq!(x.conj().conj(), x.clone());
        prop_assert_eq!(alg.mul(&x, &y).conj(), alg.mul(&y.conj(), &x.conj()));
    }

    #[test]
    fn norm_is_multiplicative_and_positive(k in 0..PRIMES.len(), x in rational_quaternion(), y in rational_quaternion()) {
        let alg = orders()[k].algebra();
        prop_assert_eq!(alg.norm(&alg.mul(&x, &y)), alg.norm(&x) * alg.norm(&y));
        if !x.is_zero() {
            prop_assert!(alg.norm(&x).is_positive());
        }
        // x conj(x) is the scalar Nm(x)
        prop_assert_eq!(alg.mul(&x, &x.conj()), Quaternion::scalar(alg.norm(&x)));
    }

    #[test]
    fn multiplication_is_associative(k in 0..PRIMES.len(), x in rational_quaternion(), y in rational_quaternion(), z in rational_quaternion()) {
        let alg = orders()[k].algebra();
        prop_assert_eq!(alg.mul(&alg.mul(&x, &y), &z), alg.mul(&x, &alg.mul(&y, &z)));
    }

    #[test]
    fn order_is_closed_with_integral_trace_and_norm(k in 0..PRIMES.len(), a in coords(4), b in coords(4)) {
        let order = &orders()[k];
        let alg = order.algebra();
        let x = common::vector(order, &a).remove(0);
        let y = common::vector(order, &b).remove(0);
        let xy = alg.mul(&x, &y);
        prop_assert!(order.contains(&xy));
        prop_assert!(order.contains(&x.conj()));
        prop_assert!(xy.trace().is_integer());
        prop_assert!(alg.norm(&xy).is_integer());
    }

    #[test]
    fn dagger_reverses_products(k in 0..PRIMES.len(), a in coords(16), b in coords(16)) {
        let order = &orders()[k];
        let alg = order.algebra();
        let (m, n) = (matrix(order, 2, &a), matrix(order, 2, &b));
        prop_assert_eq!(dagger(&dagger(&m)), m.clone());
        prop_assert_eq!(dagger(&m.mul(alg, &n)), dagger(&n).mul(alg, &dagger(&m)));
    }

    #[test]
    fn reduced_norm_is_multiplicative(k in 0..PRIMES.len(), a in coords(16), b in coords(16)) {
        let order = &orders()[k];
        let alg = order.algebra();
        let (m, n) = (matrix(order, 2, &a), matrix(order, 2, &b));
        prop_assert_eq!(
            reduced_norm_mat(alg, &m.mul(alg, &n)),
            reduced_norm_mat(alg, &m) * reduced_norm_mat(alg, &n)
        );
        let x = m.get(0, 0).clone();
        prop_assert_eq!(reduced_norm_mat(alg, &QuatMatrix::diagonal(&[x.clone()])), alg.norm(&x));
    }

    #[test]
    fn haupt_norm_identities(k in 0..PRIMES.len(), a in coords(16), b in coords(16), n in 1i64..5) {
        let order = &orders()[k];
        let alg = order.algebra();
        let m = matrix(order, 2, &a);
        let u = matrix(order, 2, &b);
        let nrd_m = reduced_norm_mat(alg, &m);
        prop_assume!(!nrd_m.is_zero() && !reduced_norm_mat(alg, &u).is_zero());
        // M^dagger M is positive definite with Haupt norm Nrd(M)
        let h = dagger(&m).mul(alg, &m);
        let form = HermitianForm::new(order.clone(), h.clone()).unwrap();
        prop_assert_eq!(form.haupt_norm(), &nrd_m);
        prop_assert_eq!(moore_determinant(alg, &h), Some(nrd_m.clone()));
        // homogeneity
        let scaled = h.scale(&Rational::from_integer(n.into()));
        prop_assert_eq!(haupt_norm(alg, &scaled).unwrap(), nrd_m.clone() * Rational::from_integer((n * n).into()));
        // norm transport and the right action law
        let hu = act(&form, &u).unwrap();
        prop_assert_eq!(hu.haupt_norm(), &(reduced_norm_mat(alg, &u) * &nrd_m));
        let hum = act(&hu, &m).unwrap();
        let direct = act(&form, &u.mul(alg, &m)).unwrap();
        prop_assert_eq!(hum.matrix(), direct.matrix());
    }

    #[test]
    fn short_vectors_match_box_search(n in 1usize..=4, seed in prop::collection::vec(-3i64..=3, 16), value in 0i64..=20) {
        // G = A^T A + I has entries <= 10 in absolute value and Q(x) >= |x|^2
        let a: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if j < i { seed[i * 4 + j] / 2 } else if j == i { 1 } else { 0 }).collect()).collect();
        let g: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| a[k][i] * a[k][j]).sum::<i64>() + i64::from(i == j)).collect())
            .collect();
        let gram2: Vec<Vec<i64>> = g.iter().map(|r| r.iter().map(|x| 2 * x).collect()).collect();
        let form = GramForm::from_gram2(gram2).unwrap();
        let found = short_vectors(&form, value).vectors;

        let bound = (value as f64).sqrt().floor() as i64;
        let mut naive = Vec::new();
        let mut x = vec![-bound; n];
        loop {
            let q: i64 = (0..n).map(|i| (0..n).map(|j| x[i] * g[i][j] * x[j]).sum::<i64>()).sum();
            if q == value {
                naive.push(x.clone());
            }
            let mut k = 0;
            while k < n && x[k] == bound {
                x[k] = -bound;
                k += 1;
            }
            if k == n {
                break;
            }
            x[k] += 1;
        }
        naive.sort();
        prop_assert_eq!(&found, &naive);
        for v in &found {
            let neg: Vec<i64> = v.iter().map(|c| -c).collect();
            prop_assert!(found.binary_search(&neg).is_ok());
        }
    }

    #[test]
    fn symmetric_matrices_have_real_spectra(n in 1usize..=6, seed in prop::collection::vec(-5i64..=5, 36)) {
        let m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| seed[i.min(j) * 6 + i.max(j)]).collect()).collect();
        let cp = char_poly(&m);
        prop_assert_eq!(cp.len(), n + 1);
        let roots = eigenvalues(&cp);
        let count: usize = roots.iter().map(|r| r.multiplicity).sum();
        prop_assert_eq!(count, n);
        // the product of the roots is the determinant
        let det: f64 = roots.iter().map(|r| r.approx().powi(r.multiplicity as i32)).product();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let constant = num_traits::ToPrimitive::to_f64(&cp[0]).unwrap() * sign;
        prop_assert!((det - constant).abs() <= 1e-6 * constant.abs().max(1.0), "{} vs {}", det, constant);
        let trace: i64 = (0..n).map(|i| m[i][i]).sum();
        prop_assert_eq!(&cp[n - 1], &BigInt::from(-trace));
    }
}
