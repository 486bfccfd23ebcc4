//! Test-side oracles, written independently of the library internals.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Unit-energy SRRC impulse response with Nyquist period `t`.
pub fn srrc(x_over_t: f64, rho: f64) -> f64 {
    let x = x_over_t;
    if x.abs() < 1e-12 {
        return 1.0 - rho + 4.0 * rho / PI;
    }
    if (4.0 * rho * x).abs() - 1.0 == 0.0 || ((4.0 * rho * x).abs() - 1.0).abs() < 1e-12 {
        let a = PI / (4.0 * rho);
        return rho / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - rho)).sin() + 4.0 * rho * x * (PI * x * (1.0 + rho)).cos();
    let den = PI * x * (1.0 - (4.0 * rho * x).powi(2));
    num / den
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `(f*f)(lag)` of the SRRC truncated to `[-span T, span T]`, by quadrature
/// (time in units of `T`).
pub fn srrc_autocorrelation(lag: f64, rho: f64, span: f64, intervals: usize) -> f64 {
    let lo = (-span).max(lag - span);
    let hi = span.min(lag + span);
    if hi <= lo {
        return 0.0;
    }
    simpson(|t| srrc(t, rho) * srrc(lag - t, rho), lo, hi, intervals)
}

/// Full-stream linear convolution `y_k[t] = sum_n sum_p h_kn[p] x_n[t - p]`.
pub fn convolve(taps: &[Vec<C64>], users: usize, antennas: usize, x: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let len = x[0].len();
    let order = taps.iter().map(|t| t.len()).max().unwrap_or(1) - 1;
    let mut y = vec![vec![C64::new(0.0, 0.0); len + order]; users];
    for (k, yk) in y.iter_mut().enumerate() {
        for (n, xn) in x.iter().enumerate().take(antennas) {
            let h = &taps[k * antennas + n];
            for (t, &xv) in xn.iter().enumerate() {
                for (p, &hv) in h.iter().enumerate() {
                    yk[t + p] += hv * xv;
                }
            }
        }
    }
    y
}

/// Blocks `b >= 1` whose interference matrix `h[p_r - p_c + delta + sign b P]`
/// has an index inside `0..=order` for some `p_r, p_c`.
pub fn brute_force(order: usize, p: usize, delta: usize, sign: i64) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for b in 1..=(order + delta) / p + 3 {
        'entries: for pr in 0..p as i64 {
            for pc in 0..p as i64 {
                let idx = pr - pc + delta as i64 + sign * (b * p) as i64;
                if (0..=order as i64).contains(&idx) {
                    out.insert(b);
                    break 'entries;
                }
            }
        }
    }
    out
}

/// Energy of `sum_p x[p] f(t - p T_s)` by quadrature of the truncated pulse
/// (time in units of the pulse's Nyquist period).
pub fn time_domain_energy(x: &[C64], ts: f64, rho: f64, span: f64) -> f64 {
    let lo = -span;
    let hi = (x.len() - 1) as f64 * ts + span;
    let intervals = ((hi - lo) / 0.004) as usize;
    simpson(
        |t| {
            let mut acc = C64::new(0.0, 0.0);
            for (p, &v) in x.iter().enumerate() {
                let u = t - p as f64 * ts;
                if u.abs() <= span {
                    acc += v * srrc(u, rho);
                }
            }
            acc.norm_sqr()
        },
        lo,
        hi,
        intervals,
    )
}

pub fn cn(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) / 2f64.sqrt()
}

pub fn random_taps(rng: &mut ChaCha8Rng, links: usize, order: usize) -> Vec<Vec<C64>> {
    (0..links).map(|_| (0..=order).map(|_| cn(rng)).collect()).collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random strictly convex QP `min 1/2 x'Qx + c'x, Gx <= h` with a strictly
/// feasible point.
pub struct RandomQp {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    /// Strictly feasible point.
    pub x0: DVector<f64>,
}

pub fn random_qp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> RandomQp {
    let a = gaussian_matrix(rng, n, n);
    let q = a.transpose() * &a + DMatrix::identity(n, n) * 0.5;
    let c = gaussian_matrix(rng, n, 1).column(0).into_owned() * 3.0;
    let g = gaussian_matrix(rng, m, n);
    let x0 = gaussian_matrix(rng, n, 1).column(0).into_owned();
    let slack = DVector::from_fn(m, |_, _| rng.gen_range(0.05..1.0));
    let h = &g * &x0 + slack;
    RandomQp { q, c, g, h, x0 }
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    let mut v = DVector::from_element(a.nrows(), 1.0);
    let mut lam = 0.0;
    for _ in 0..500 {
        let w = a * &v;
        let nrm = w.norm();
        if nrm == 0.0 {
            return 0.0;
        }
        lam = nrm;
        v = w / nrm;
    }
    lam
}

/// Accelerated projected gradient on the dual `max_{lambda >= 0}`, returning
/// the primal point `x = -Q^-1 (c + G' lambda)`.
pub fn projected_gradient(qp: &RandomQp, iterations: usize) -> DVector<f64> {
    let qinv = qp.q.clone().try_inverse().expect("Q invertible");
    let hess = &qp.g * &qinv * qp.g.transpose();
    let step = 1.0 / spectral_norm(&hess).max(1e-12);
    let m = qp.g.nrows();
    let primal = |lam: &DVector<f64>| -(&qinv * (&qp.c + qp.g.transpose() * lam));
    let grad = |lam: &DVector<f64>| &qp.g * primal(lam) - &qp.h;
    let mut lam = DVector::zeros(m);
    let mut y = lam.clone();
    let mut t = 1.0f64;
    for _ in 0..iterations {
        let next = (&y + grad(&y) * step).map(|v| v.max(0.0));
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        let restart = (&next - &lam).dot(&(&y - &next)) > 0.0;
        y = if restart { next.clone() } else { &next + (&next - &lam) * momentum };
        t = if restart { 1.0 } else { t_next };
        lam = next;
    }
    primal(&lam)
}

/// Exact minimizer by enumerating active sets (small `m` only).
pub fn active_set_oracle(qp: &RandomQp) -> DVector<f64> {
    let (n, m) = (qp.q.nrows(), qp.g.nrows());
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if active.len() > n {
            continue;
        }
        let a = active.len();
        let mut kkt = DMatrix::zeros(n + a, n + a);
        kkt.view_mut((0, 0), (n, n)).copy_from(&qp.q);
        let mut rhs = DVector::zeros(n + a);
        rhs.rows_mut(0, n).copy_from(&(-&qp.c));
        for (j, &i) in active.iter().enumerate() {
            for col in 0..n {
                kkt[(n + j, col)] = qp.g[(i, col)];
                kkt[(col, n + j)] = qp.g[(i, col)];
            }
            rhs[n + j] = qp.h[i];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        let x = sol.rows(0, n).into_owned();
        let feasible = (&qp.g * &x - &qp.h).iter().all(|&v| v <= 1e-9);
        let dual_ok = sol.rows(n, a).iter().all(|&v| v >= -1e-9);
        if feasible && dual_ok {
            let f = 0.5 * x.dot(&(&qp.q * &x)) + qp.c.dot(&x);
            if best.as_ref().is_none_or(|(b, _)| f < *b) {
                best = Some((f, x));
            }
        }
    }
    best.expect("feasible instance").1
}

/// Relative KKT residual of `(x, lambda)` for `Gx <= h`.
pub fn kkt_residual(qp: &RandomQp, x: &DVector<f64>, lambda: &DVector<f64>) -> f64 {
    let scale = 1.0 + qp.q.amax().max(qp.g.amax()).max(qp.c.amax()).max(qp.h.amax());
    let stat = (&qp.q * x + &qp.c + qp.g.transpose() * lambda).amax();
    let viol = (&qp.g * x - &qp.h).map(|v| v.max(0.0)).amax();
    let dual = lambda.map(|v| (-v).max(0.0)).amax();
    let slack = &qp.h - &qp.g * x;
    let comp = slack.iter().zip(lambda.iter()).map(|(s, l)| (s * l).abs()).fold(0.0, f64::max);
    stat.max(viol).max(dual).max(comp) / scale
}
