//! Small integer number theory used throughout the crate: primality,
//! Legendre and Hilbert symbols, modular inverses and exact square roots.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Rational;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime divisors of `|n|`, ascending.
pub fn prime_divisors(n: i64) -> Vec<u64> {
    let mut n = n.unsigned_abs();
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn mod_pow(base: i64, exp: u64, m: i64) -> i64 {
    let m128 = m as i128;
    let mut b = (base as i128).rem_euclid(m128);
    let mut e = exp;
    let mut acc: i128 = 1 % m128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    acc as i64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: i64, m: i64) -> Option<i64> {
    let g = i64::extended_gcd(&a.rem_euclid(m), &m);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m))
}

/// Legendre symbol `(a/q)` for an odd prime `q`.
pub fn legendre(a: i64, q: i64) -> i32 {
    let a = a.rem_euclid(q);
    if a == 0 {
        return 0;
    }
    if mod_pow(a, ((q - 1) / 2) as u64, q) == 1 {
        1
    } else {
        -1
    }
}

fn split_valuation(mut n: i64, q: i64) -> (u32, i64) {
    let mut v = 0;
    while n % q == 0 {
        n /= q;
        v += 1;
    }
    (v, n)
}

/// Hilbert symbol `(a, b)_q` at a finite prime `q` for nonzero integers.
pub fn hilbert_symbol(a: i64, b: i64, q: u64) -> i32 {
    assert!(a != 0 && b != 0, "Hilbert symbol of zero");
    let q = q as i64;
    let (alpha, u) = split_valuation(a, q);
    let (beta, v) = split_valuation(b, q);
    if q == 2 {
        let eps = |x: i64| (x.rem_euclid(4) - 1) / 2 % 2;
        let omega = |x: i64| {
            let r = x.rem_euclid(8);
            if r == 3 || r == 5 {
                1
            } else {
                0
            }
        };
        let e = eps(u) * eps(v) + alpha as i64 * omega(v) + beta as i64 * omega(u);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        let mut s = if (alpha as i64 * beta as i64 * ((q - 1) / 2)) % 2 == 0 {
            1
        } else {
            -1
        };
        if beta % 2 == 1 {
            s *= legendre(u, q);
        }
        if alpha % 2 == 1 {
            s *= legendre(v, q);
        }
        s
    }
}

/// Hilbert symbol at the real place.
pub fn hilbert_symbol_real(a: i64, b: i64) -> i32 {
    if a < 0 && b < 0 {
        -1
    } else {
        1
    }
}

/// Exact integer square root, if `n` is a perfect square.
pub fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Exact square root of a nonnegative rational, if it is a rational square.
pub fn exact_rational_sqrt(x: &Rational) -> Option<Rational> {
    let n = exact_isqrt(x.numer())?;
    let d = exact_isqrt(x.denom())?;
    Some(Rational::new(n, d))
}

pub fn isqrt_floor(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Bernoulli number `B_n` (with `B_1 = -1/2`).
pub fn bernoulli(n: usize) -> Rational {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        let mut acc = Rational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += Rational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    b.pop().unwrap()
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(!is_prime(4));
    }

    #[test]
    fn hilbert_product_formula() {
        for a in [-1i64, -2, -3, -5, -7, -11, -13, 3, 5, 6, -6, 10, -10] {
            for b in [-1i64, -2, -3, -5, -7, -11, -13, -17, 7, 15, -15] {
                let mut primes = prime_divisors(2 * a * b);
                primes.sort();
                let prod: i32 = primes.iter().map(|&q| hilbert_symbol(a, b, q)).product::<i32>()
                    * hilbert_symbol_real(a, b);
                assert_eq!(prod, 1, "product formula fails for ({a},{b})");
            }
        }
    }

    #[test]
    fn hamilton_quaternions_ramify_at_two() {
        assert_eq!(hilbert_symbol(-1, -1, 2), -1);
        assert_eq!(hilbert_symbol(-1, -1, 3), 1);
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(6), rat(1, 42));
        assert_eq!(bernoulli(8), rat(-1, 30));
        assert_eq!(bernoulli(3), rat(0, 1));
    }

    #[test]
    fn modular_helpers() {
        assert_eq!(mod_inv(3, 7), Some(5));
        assert_eq!(mod_inv(2, 4), None);
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(3, 7), -1);
        assert_eq!(isqrt_floor(99), 9);
        assert_eq!(exact_isqrt(&BigInt::from(144)), Some(BigInt::from(12)));
        assert_eq!(exact_isqrt(&BigInt::from(145)), None);
    }
}
