//! LLL reduction of a positive-definite integral Gram matrix.
//!
//! The basis transform is tracked exactly in integers; floating point is only
//! used to decide size-reduction coefficients and swaps, so the output is
//! always a unimodular change of basis regardless of rounding.

/// Returns `(t, reduced)` where rows of `t` are the new basis vectors in the
/// old coordinates and `reduced = t G t^T`.
pub fn lll_gram(gram: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let g: Vec<Vec<i128>> = gram
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let (t, g) = lll_gram_i128(&g);
    (to_i64(&t), to_i64(&g))
}

/// [`lll_gram`] on wide integers, for Gram matrices of skewed kernel bases.
pub fn lll_gram_i128(gram: &[Vec<i128>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let n = gram.len();
    let mut g: Vec<Vec<i128>> = gram.to_vec();
    let mut t: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    if n <= 1 {
        return (t, g);
    }
    let delta = 0.99f64;
    let mut k = 1usize;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 1_000_000, "LLL failed to terminate");
        // size-reduce b_k against b_{k-1}, ..., b_0
        for j in (0..k).rev() {
            let (mu, _) = gso(&g, k + 1);
            let q = mu[k][j].round();
            if q != 0.0 {
                let q = q as i128;
                sub_row(&mut g, &mut t, k, j, q);
            }
        }
        let (mu, bstar) = gso(&g, k + 1);
        if bstar[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            k += 1;
        } else {
            swap(&mut g, &mut t, k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    (t, g)
}

fn to_i64(m: &[Vec<i128>]) -> Vec<Vec<i64>> {
    m.iter()
        .map(|r| r.iter().map(|&x| i64::try_from(x).expect("LLL entry overflow")).collect())
        .collect()
}

fn gso(g: &[Vec<i128>], upto: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut mu = vec![vec![0f64; upto]; upto];
    let mut bstar = vec![0f64; upto];
    for i in 0..upto {
        for j in 0..i {
            let mut s = g[i][j] as f64;
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * bstar[k];
            }
            mu[i][j] = s / bstar[j];
        }
        let mut s = g[i][i] as f64;
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * bstar[k];
        }
        bstar[i] = s;
        mu[i][i] = 1.0;
    }
    (mu, bstar)
}

/// b_k <- b_k - q b_j
fn sub_row(g: &mut [Vec<i128>], t: &mut [Vec<i128>], k: usize, j: usize, q: i128) {
    let n = g.len();
    for c in 0..n {
        t[k][c] -= q * t[j][c];
    }
    // G' = E G E^T with row k of E equal to e_k - q e_j
    let gkk = g[k][k];
    let gkj = g[k][j];
    let gjj = g[j][j];
    for c in 0..n {
        if c != k {
            let v = g[k][c] - q * g[j][c];
            g[k][c] = v;
            g[c][k] = v;
        }
    }
    g[k][k] = gkk - 2 * q * gkj + q * q * gjj;
}

fn swap(g: &mut [Vec<i128>], t: &mut [Vec<i128>], a: usize, b: usize) {
    t.swap(a, b);
    g.swap(a, b);
    for r in g.iter_mut() {
        r.swap(a, b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(t: &[Vec<i64>], g: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let n = g.len();
        let mut out = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0;
                for a in 0..n {
                    for b in 0..n {
                        s += t[i][a] * g[a][b] * t[j][b];
                    }
                }
                out[i][j] = s;
            }
        }
        out
    }

    #[test]
    fn reduces_skewed_basis() {
        // identity lattice in a skewed basis
        let basis = [vec![1i64, 0, 0], vec![7, 1, 0], vec![13, 5, 1]];
        let mut g = vec![vec![0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = (0..3).map(|k| basis[i][k] * basis[j][k]).sum();
            }
        }
        let (t, red) = lll_gram(&g);
        assert_eq!(apply(&t, &g), red);
        for i in 0..3 {
            assert_eq!(red[i][i], 1);
        }
    }
}
