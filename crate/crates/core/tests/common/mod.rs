//! Independent brute-force oracles for the alternative-set minimisation.
#![allow(dead_code)]

use std::collections::VecDeque;

use structured_bandits::expfamily::Family;

pub const GRID_STEP: f64 = 0.005;

/// Grid from `lo` to `hi`, both included, at spacing at most `step`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let n = ((hi - lo) / step).ceil() as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

pub fn cost(f: &Family<f64>, mu: f64, w: f64, x: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * f.divergence(mu, x)
    }
}

/// Hull of the means; the search range for structures closed under clipping.
pub fn hull(mu: &[f64]) -> (f64, f64) {
    (mu.iter().cloned().fold(f64::INFINITY, f64::min), mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Unconstrained cell: only `j` and `k` move; 2-d grid search.
pub fn unconstrained(f: &Family<f64>, mu: &[f64], w: &[f64], j: usize, k: usize) -> f64 {
    let (lo, hi) = hull(mu);
    let g = grid(lo, hi, GRID_STEP);
    let mut best = f64::INFINITY;
    for &a in &g {
        for &b in g.iter().filter(|&&b| b >= a) {
            best = best.min(cost(f, mu[j], w[j], a) + cost(f, mu[k], w[k], b));
        }
    }
    best
}

fn window_min(prev: &[f64], band: usize) -> Vec<f64> {
    let n = prev.len();
    let mut out = vec![f64::INFINITY; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for v in 0..n {
        while next < n && next <= v + band {
            while dq.back().is_some_and(|&b| prev[b] >= prev[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&f| f + band < v) {
            dq.pop_front();
        }
        out[v] = prev[*dq.front().expect("window holds v")];
    }
    out
}

/// Minimum over grid paths with coordinate `i` restricted to indices in
/// `ranges[i]`. Lipschitz: consecutive indices differ by at most `band`.
/// Unimodal: nondecreasing then nonincreasing.
fn chain_dp(g: &[f64], ranges: &[(usize, usize)], unit: &dyn Fn(usize, f64) -> f64, band: Option<usize>) -> f64 {
    let n = g.len();
    let inf = f64::INFINITY;
    let point = |i: usize, v: usize| {
        if v < ranges[i].0 || v > ranges[i].1 {
            inf
        } else {
            unit(i, g[v])
        }
    };
    let mut up: Vec<f64> = (0..n).map(|v| point(0, v)).collect();
    let mut down = vec![inf; n];
    for i in 1..ranges.len() {
        let (mut nu, mut nd);
        match band {
            Some(b) => {
                nu = window_min(&up, b);
                nd = vec![inf; n];
            }
            None => {
                nu = vec![inf; n];
                nd = vec![inf; n];
                let mut run = inf;
                for v in 0..n {
                    run = run.min(up[v]);
                    nu[v] = run;
                }
                let mut run = inf;
                for v in (0..n).rev() {
                    run = run.min(up[v]).min(down[v]);
                    nd[v] = run;
                }
            }
        }
        for v in 0..n {
            let c = point(i, v);
            nu[v] += c;
            nd[v] += c;
        }
        up = nu;
        down = nd;
    }
    up.iter().chain(down.iter()).cloned().fold(inf, f64::min)
}

/// Unimodal (`lipschitz = None`) or Lipschitz cell: enumerate the grid level of
/// `lambda^j`, restrict `lambda^k` to levels at or above it, and run the DP.
pub fn chain(f: &Family<f64>, mu: &[f64], w: &[f64], j: usize, k: usize, lipschitz: Option<f64>) -> f64 {
    let (lo, hi) = hull(mu);
    let g = grid(lo, hi, GRID_STEP);
    let h = if g.len() > 1 { g[1] - g[0] } else { 1.0 };
    let band = lipschitz.map(|l| ((l / h) * (1.0 + 1e-12)).floor() as usize);
    let unit = |i: usize, x: f64| cost(f, mu[i], w[i], x);
    let last = g.len() - 1;
    let mut best = f64::INFINITY;
    for a in 0..g.len() {
        let mut ranges = vec![(0, last); mu.len()];
        ranges[j] = (a, a);
        ranges[k] = (a, last);
        best = best.min(chain_dp(&g, &ranges, &unit, band));
    }
    best
}

/// Sparse cell (`lambda >= gamma` everywhere, at most `s` coordinates above):
/// enumerate supports, grid the coupled pair `(j, k)`.
pub fn sparse(f: &Family<f64>, mu: &[f64], w: &[f64], j: usize, k: usize, s: usize, gamma: f64) -> f64 {
    let n = mu.len();
    let top = mu.iter().cloned().fold(gamma, f64::max);
    let g = grid(gamma, top, GRID_STEP);
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize > s {
            continue;
        }
        let inside = |i: usize| mask & (1 << i) != 0;
        let mut base = 0.0;
        for i in (0..n).filter(|&i| i != j && i != k) {
            base += cost(f, mu[i], w[i], if inside(i) { mu[i].max(gamma) } else { gamma });
        }
        let range = |i: usize| if inside(i) { g.clone() } else { vec![gamma] };
        let (gj, gk) = (range(j), range(k));
        for &a in &gj {
            for &b in gk.iter().filter(|&&b| b >= a) {
                best = best.min(base + cost(f, mu[j], w[j], a) + cost(f, mu[k], w[k], b));
            }
        }
    }
    best
}

/// Categorised cell (one category entirely above the other): enumerate the
/// orientation and a separating level `l` on the grid; given `l` every arm is
/// confined to a half-line and only `(j, k)` are coupled, searched on the grid.
pub fn categorised(f: &Family<f64>, mu: &[f64], w: &[f64], j: usize, k: usize, cat: &[usize]) -> f64 {
    let (lo, hi) = hull(mu);
    let g = grid(lo, hi, GRID_STEP);
    let n = mu.len();
    let mut best = f64::INFINITY;
    for top in 0..2 {
        for &l in &g {
            let range = |i: usize| if cat[i] == top { (l, f64::INFINITY) } else { (f64::NEG_INFINITY, l) };
            let mut base = 0.0;
            for i in (0..n).filter(|&i| i != j && i != k) {
                let (a, b) = range(i);
                base += cost(f, mu[i], w[i], mu[i].clamp(a, b));
            }
            let (ja, jb) = range(j);
            let (ka, kb) = range(k);
            let cj: Vec<f64> = g.iter().cloned().filter(|&x| x >= ja && x <= jb).collect();
            let ck: Vec<f64> = g.iter().cloned().filter(|&x| x >= ka && x <= kb).collect();
            // Best k value at or above each j value, via suffix minima.
            let kc: Vec<f64> = ck.iter().map(|&x| cost(f, mu[k], w[k], x)).collect();
            let mut suffix = vec![f64::INFINITY; ck.len() + 1];
            for i in (0..ck.len()).rev() {
                suffix[i] = suffix[i + 1].min(kc[i]);
            }
            for &a in &cj {
                let p = ck.partition_point(|&x| x < a);
                best = best.min(base + cost(f, mu[j], w[j], a) + suffix[p]);
            }
        }
    }
    best
}

/// Linear Gaussian cell in dimension 2: either the unconstrained weighted least
/// squares point (when it lies in the cell) or a point of the line
/// `(x_k - x_j) . eta = 0`, searched on a grid along that line.
pub fn linear2(f: &Family<f64>, mu: &[f64], w: &[f64], j: usize, k: usize, arms: &[[f64; 2]]) -> f64 {
    let value = |eta: [f64; 2]| -> f64 {
        arms.iter().zip(mu).zip(w).map(|((a, &m), &wi)| cost(f, m, wi, a[0] * eta[0] + a[1] * eta[1])).sum()
    };
    let mut best = f64::INFINITY;
    // Weighted least squares through the 2x2 normal equations.
    let (mut s00, mut s01, mut s11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((a, &m), &wi) in arms.iter().zip(mu).zip(w) {
        s00 += wi * a[0] * a[0];
        s01 += wi * a[0] * a[1];
        s11 += wi * a[1] * a[1];
        b0 += wi * a[0] * m;
        b1 += wi * a[1] * m;
    }
    let det = s00 * s11 - s01 * s01;
    if det.abs() > 1e-12 {
        let eta = [(s11 * b0 - s01 * b1) / det, (s00 * b1 - s01 * b0) / det];
        let d = |i: usize| arms[i][0] * eta[0] + arms[i][1] * eta[1];
        if d(k) >= d(j) {
            best = best.min(value(eta));
        }
    }
    let dir = [arms[k][0] - arms[j][0], arms[k][1] - arms[j][1]];
    let norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    if norm < 1e-12 {
        // x_k = x_j: every eta is in the cell, already covered above unless singular.
        return best.min(grid_plane(&value));
    }
    let u = [-dir[1] / norm, dir[0] / norm];
    for t in grid(-10.0, 10.0, GRID_STEP / 4.0) {
        best = best.min(value([t * u[0], t * u[1]]));
    }
    best
}

fn grid_plane(value: &dyn Fn([f64; 2]) -> f64) -> f64 {
    let g = grid(-5.0, 5.0, 0.02);
    let mut best = f64::INFINITY;
    for &a in &g {
        for &b in &g {
            best = best.min(value([a, b]));
        }
    }
    best
}
