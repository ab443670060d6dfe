//! Fincke-Pohst enumeration of lattice points in (possibly shifted) ellipsoids.
//!
//! Bounds are computed from a floating-point LDL decomposition padded by a
//! relative tolerance, so the enumerated set is a superset of the exact
//! solution set; every candidate is then accepted or rejected by the caller
//! with exact integer arithmetic.

use std::ops::ControlFlow;

const REL_TOL: f64 = 1e-7;

pub(crate) struct Ellipsoid {
    n: usize,
    d: Vec<f64>,
    mu: Vec<Vec<f64>>,
}

impl Ellipsoid {
    /// LDL decomposition `Q(x) = sum_i d_i (x_i + sum_{j>i} mu_ij x_j)^2` of the
    /// quadratic form with (doubled) Gram `gram2`, halved so the form is `x^T G x / 2`.
    pub fn from_gram2(gram2: &[Vec<i64>]) -> Self {
        let n = gram2.len();
        let a: Vec<Vec<f64>> = gram2
            .iter()
            .map(|r| r.iter().map(|&x| x as f64 / 2.0).collect())
            .collect();
        let mut d = vec![0f64; n];
        let mut mu = vec![vec![0f64; n]; n];
        for i in 0..n {
            let mut s = a[i][i];
            for k in 0..i {
                s -= mu[k][i] * mu[k][i] * d[k];
            }
            d[i] = s;
            assert!(s > 0.0, "form is not positive definite");
            for j in i + 1..n {
                let mut t = a[i][j];
                for k in 0..i {
                    t -= mu[k][i] * mu[k][j] * d[k];
                }
                mu[i][j] = t / d[i];
            }
        }
        Ellipsoid { n, d, mu }
    }

    /// Solve `G c = b` using the decomposition (G = gram2 / 2).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        // G = U^T D U with U unit upper triangular (U_ij = mu_ij)
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.mu[k][i] * y[k];
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.mu[i][j] * y[j];
            }
        }
        y
    }

    /// Visit every integer point `x` with `Q(x - center) <= radius` (padded).
    /// With `on_shell`, the last coordinate is restricted to the (at most four)
    /// integers nearest the two roots of `Q(x - center) = radius`.
    pub fn enumerate<F>(&self, center: &[f64], radius: f64, on_shell: bool, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[i64]) -> ControlFlow<()>,
    {
        if self.n == 0 {
            if radius.abs() <= REL_TOL {
                return visit(&[]);
            }
            return ControlFlow::Continue(());
        }
        let tol = REL_TOL * (1.0 + radius.abs());
        if radius < -tol {
            return ControlFlow::Continue(());
        }
        let mut x = vec![0i64; self.n];
        self.rec(self.n - 1, radius, center, tol, on_shell, &mut x, visit)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec<F>(
        &self,
        i: usize,
        budget: f64,
        center: &[f64],
        tol: f64,
        on_shell: bool,
        x: &mut [i64],
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[i64]) -> ControlFlow<()>,
    {
        let mut shift = 0.0;
        for j in i + 1..self.n {
            shift += self.mu[i][j] * (x[j] as f64 - center[j]);
        }
        let ci = center[i] - shift;
        let r = budget / self.d[i];
        if i == 0 && on_shell {
            let s = r.max(0.0).sqrt();
            let mut cands = [
                (ci - s).floor() as i64,
                (ci - s).ceil() as i64,
                (ci + s).floor() as i64,
                (ci + s).ceil() as i64,
            ];
            cands.sort_unstable();
            let mut last = None;
            for c in cands {
                if Some(c) == last {
                    continue;
                }
                last = Some(c);
                x[0] = c;
                visit(x)?;
            }
            return ControlFlow::Continue(());
        }
        let s = (r + tol / self.d[i]).max(0.0).sqrt();
        let lo = (ci - s).ceil() as i64;
        let hi = (ci + s).floor() as i64;
        for xi in lo..=hi {
            let dx = xi as f64 - ci;
            let nb = budget - self.d[i] * dx * dx;
            if nb < -tol {
                continue;
            }
            x[i] = xi;
            if i == 0 {
                visit(x)?;
            } else {
                self.rec(i - 1, nb, center, tol, on_shell, x, visit)?;
            }
        }
        x[i] = 0;
        ControlFlow::Continue(())
    }
}
