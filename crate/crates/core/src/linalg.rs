//! Small dense solvers used by the alternative-minimisation oracles.

use crate::scalar::Scalar;

/// Solves the square system `a x = b` (row-major, `n x n`) by Gaussian
/// elimination with full pivoting. Rank-deficient directions get zero, which
/// is a valid solution whenever the system is consistent.
pub(crate) fn solve_pivoted<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, n: usize) -> Vec<T> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let tol = scale * T::epsilon() * T::lit(64.0) * T::from_usize_lossy(n.max(1));
    let mut col: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for r in 0..n {
        let (mut pr, mut pc, mut best) = (r, r, T::zero());
        for i in r..n {
            for j in r..n {
                let v = a[i * n + j].abs();
                if v > best {
                    best = v;
                    pr = i;
                    pc = j;
                }
            }
        }
        if best <= tol || best == T::zero() {
            break;
        }
        if pr != r {
            for j in 0..n {
                a.swap(r * n + j, pr * n + j);
            }
            b.swap(r, pr);
        }
        if pc != r {
            for i in 0..n {
                a.swap(i * n + r, i * n + pc);
            }
            col.swap(r, pc);
        }
        let piv = a[r * n + r];
        for i in r + 1..n {
            let f = a[i * n + r] / piv;
            if f != T::zero() {
                for j in r..n {
                    let v = a[r * n + j];
                    a[i * n + j] = a[i * n + j] - f * v;
                }
                b[i] = b[i] - f * b[r];
            }
        }
        rank += 1;
    }
    let mut y = vec![T::zero(); n];
    for r in (0..rank).rev() {
        let mut s = b[r];
        for j in r + 1..rank {
            s = s - a[r * n + j] * y[j];
        }
        y[r] = s / a[r * n + r];
    }
    let mut x = vec![T::zero(); n];
    for (r, &c) in col.iter().enumerate() {
        x[c] = y[r];
    }
    x
}

/// Sparse linear inequality `sum coef_i x_i <= rhs`.
#[derive(Debug, Clone)]
pub(crate) struct Halfspace<T> {
    pub terms: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Scalar> Halfspace<T> {
    pub fn new(terms: Vec<(usize, T)>, rhs: T) -> Self {
        Halfspace { terms, rhs }
    }

    #[inline]
    fn dot(&self, x: &[T]) -> T {
        self.terms.iter().map(|&(i, c)| c * x[i]).sum()
    }

    /// `a^T H^{-1} b` for diagonal `H`.
    fn inner(&self, other: &Self, h: &[T]) -> T {
        let mut s = T::zero();
        for &(i, a) in &self.terms {
            for &(j, b) in &other.terms {
                if i == j {
                    s = s + a * b / h[i];
                }
            }
        }
        s
    }
}

/// Minimises `0.5 sum h_i x_i^2 + g^T x` subject to the halfspaces, starting
/// from the feasible point `x0`. Primal active-set method; `h` must be positive.
pub(crate) fn diag_qp<T: Scalar>(h: &[T], g: &[T], cons: &[Halfspace<T>], x0: Vec<T>) -> Vec<T> {
    let n = h.len();
    let m = cons.len();
    let mut x = x0;
    let mut active: Vec<usize> = Vec::new();
    let max_iter = 50 * (n + m) + 100;

    for _ in 0..max_iter {
        // Equality-constrained minimiser over the working set.
        let na = active.len();
        let mut mat = vec![T::zero(); na * na];
        let mut rhs = vec![T::zero(); na];
        for (r, &ci) in active.iter().enumerate() {
            for (c, &cj) in active.iter().enumerate() {
                mat[r * na + c] = cons[ci].inner(&cons[cj], h);
            }
            let hg: T = cons[ci].terms.iter().map(|&(i, a)| a * g[i] / h[i]).sum();
            rhs[r] = -cons[ci].rhs - hg;
        }
        let nu = if na > 0 { solve_pivoted(mat, rhs, na) } else { Vec::new() };
        let mut target: Vec<T> = (0..n).map(|i| g[i]).collect();
        for (r, &ci) in active.iter().enumerate() {
            for &(i, a) in &cons[ci].terms {
                target[i] = target[i] + a * nu[r];
            }
        }
        for i in 0..n {
            target[i] = -target[i] / h[i];
        }
        let p: Vec<T> = (0..n).map(|i| target[i] - x[i]).collect();
        let pnorm = p.iter().fold(T::zero(), |s, v| s.max(v.abs()));
        let xnorm = x.iter().fold(T::one(), |s, v| s.max(v.abs()));

        if pnorm <= T::lit(1e-14) * xnorm {
            // Multipliers of `C x <= d` enter as `H x + g + C^T nu = 0` with `nu >= 0`.
            let mut worst = None;
            let mut worst_val = -T::lit(1e-12);
            for (r, &v) in nu.iter().enumerate() {
                if v < worst_val {
                    worst_val = v;
                    worst = Some(r);
                }
            }
            match worst {
                None => return x,
                Some(r) => {
                    active.remove(r);
                }
            }
            continue;
        }

        let mut alpha = T::one();
        let mut blocking = None;
        for (ci, c) in cons.iter().enumerate() {
            if active.contains(&ci) {
                continue;
            }
            let cp = c.dot(&p);
            if cp > T::epsilon() * pnorm {
                let slack = (c.rhs - c.dot(&x)).max(T::zero());
                let a = slack / cp;
                if a < alpha {
                    alpha = a;
                    blocking = Some(ci);
                }
            }
        }
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
        }
        match blocking {
            Some(ci) => active.push(ci),
            None => {
                x = target;
            }
        }
    }
    x
}
