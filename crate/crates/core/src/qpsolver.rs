//! Dense convex QP solver: Mehrotra predictor-corrector primal-dual interior
//! point method for
//!
//! ```text
//! minimize   1/2 x' Q x + c' x
//! subject to G x <= h,  A x = b
//! ```
//!
//! with `Q` symmetric positive definite.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, real_embedding, CMatrix, CVector};

/// Tolerance on `Q` symmetry.
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct QpProblem {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
}

impl QpProblem {
    /// Inequality-constrained problem; validates dimensions, symmetry and
    /// definiteness of `Q`.
    pub fn new(q: DMatrix<f64>, c: DVector<f64>, g: DMatrix<f64>, h: DVector<f64>) -> Result<Self> {
        let n = q.nrows();
        Self::with_equalities(q, c, g, h, DMatrix::zeros(0, n), DVector::zeros(0))
    }

    pub fn with_equalities(
        q: DMatrix<f64>,
        c: DVector<f64>,
        g: DMatrix<f64>,
        h: DVector<f64>,
        a_eq: DMatrix<f64>,
        b_eq: DVector<f64>,
    ) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n || c.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "Q is {}x{}, c has {} entries",
                q.nrows(),
                q.ncols(),
                c.len()
            )));
        }
        if g.ncols() != n || g.nrows() != h.len() {
            return Err(Error::DimensionMismatch(format!(
                "G is {}x{}, h has {} entries, n = {n}",
                g.nrows(),
                g.ncols(),
                h.len()
            )));
        }
        if a_eq.ncols() != n || a_eq.nrows() != b_eq.len() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, b has {} entries, n = {n}",
                a_eq.nrows(),
                a_eq.ncols(),
                b_eq.len()
            )));
        }
        let scale = q.amax().max(1.0);
        let asym = (&q - q.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotHermitian(asym));
        }
        if n > 0 && Cholesky::new(q.clone()).is_none() {
            return Err(Error::NotPositiveDefinite("QP objective matrix".into()));
        }
        Ok(QpProblem { q, c, g, h, a_eq, b_eq })
    }

    pub fn n_vars(&self) -> usize {
        self.q.nrows()
    }

    pub fn n_ineq(&self) -> usize {
        self.g.nrows()
    }

    pub fn n_eq(&self) -> usize {
        self.a_eq.nrows()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.c.dot(x)
    }

    pub fn to_file(&self) -> QpProblemFile {
        QpProblemFile {
            q: rows(&self.q),
            c: self.c.iter().copied().collect(),
            g: rows(&self.g),
            h: self.h.iter().copied().collect(),
            a_eq: rows(&self.a_eq),
            b_eq: self.b_eq.iter().copied().collect(),
        }
    }

    pub fn from_file(file: &QpProblemFile) -> Result<Self> {
        let n = file.c.len();
        QpProblem::with_equalities(
            from_rows(&file.q, n)?,
            DVector::from_vec(file.c.clone()),
            from_rows(&file.g, n)?,
            DVector::from_vec(file.h.clone()),
            from_rows(&file.a_eq, n)?,
            DVector::from_vec(file.b_eq.clone()),
        )
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: QpProblemFile = match serde_json::from_str::<QpArchive>(&text) {
            Ok(archive) => archive.problem,
            Err(_) => serde_json::from_str(&text)?,
        };
        Self::from_file(&file)
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("row of length {} for n = {n}", bad.len())));
    }
    Ok(DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]))
}

/// Row-major JSON form of a [`QpProblem`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpProblemFile {
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub g: Vec<Vec<f64>>,
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default)]
    pub a_eq: Vec<Vec<f64>>,
    #[serde(default)]
    pub b_eq: Vec<f64>,
}

/// Problem and solution written together for external cross-validation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QpArchive {
    pub problem: QpProblemFile,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub nu: Vec<f64>,
    pub status: QpStatus,
    pub kkt: KktReport,
    pub iterations: usize,
}

pub fn save_archive(path: impl AsRef<Path>, problem: &QpProblem, sol: &QpSolution) -> Result<()> {
    let archive = QpArchive {
        problem: problem.to_file(),
        x: sol.x.iter().copied().collect(),
        lambda: sol.lambda.iter().copied().collect(),
        nu: sol.nu.iter().copied().collect(),
        status: sol.status,
        kkt: sol.kkt,
        iterations: sol.iterations,
    };
    std::fs::write(path, serde_json::to_string_pretty(&archive)?)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// Relative KKT residuals (infinity norms).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Inequality multipliers.
    pub lambda: DVector<f64>,
    /// Equality multipliers.
    pub nu: DVector<f64>,
    pub status: QpStatus,
    pub kkt: KktReport,
    pub iterations: usize,
    /// Objective after each iteration (index 0 is the starting point).
    pub objective_trace: Vec<f64>,
    /// Position in `objective_trace` of the first primal-feasible iterate.
    pub first_feasible: Option<usize>,
}

impl QpSolution {
    pub fn objective(&self, p: &QpProblem) -> f64 {
        p.objective(&self.x)
    }
}

/// How the Newton system is reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KktStrategy {
    /// Dual-space reduction when there are no more constraints than
    /// variables, primal otherwise.
    #[default]
    Auto,
    /// `Q + G' W G` in the primal variables.
    Primal,
    /// `C Q^-1 C' + D` in the multipliers.
    Dual,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Static diagonal regularization of the reduced Newton system.
    pub regularization: f64,
    pub strategy: KktStrategy,
    pub warm_start: Option<DVector<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            max_iter: 100,
            regularization: 1e-10,
            strategy: KktStrategy::Auto,
            warm_start: None,
        }
    }
}

/// Independent KKT residuals of `(x, lambda, nu)`, computed from the problem
/// data alone.
pub fn kkt_residuals(p: &QpProblem, x: &DVector<f64>, lambda: &DVector<f64>, nu: &DVector<f64>) -> KktReport {
    let qx = &p.q * x;
    let gl = p.g.transpose() * lambda;
    let an = p.a_eq.transpose() * nu;
    let grad = &qx + &p.c + &gl + &an;
    let scale = 1.0 + inf(&qx).max(inf(&p.c)).max(inf(&gl)).max(inf(&an));
    let stationarity = inf(&grad) / scale;

    let slack = &p.h - &p.g * x;
    let viol_in = slack.iter().map(|s| (-s).max(0.0)).fold(0.0, f64::max);
    let viol_eq = inf(&(&p.a_eq * x - &p.b_eq));
    let primal = (viol_in / (1.0 + inf(&p.h))).max(viol_eq / (1.0 + inf(&p.b_eq)));

    let dual = lambda.iter().map(|l| (-l).max(0.0)).fold(0.0, f64::max);

    let comp = slack
        .iter()
        .zip(lambda.iter())
        .map(|(s, l)| (s * l).abs())
        .fold(0.0, f64::max);
    let complementarity = comp / (1.0 + p.objective(x).abs());
    KktReport {
        stationarity,
        primal,
        dual,
        complementarity,
    }
}

fn inf(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Factorization of the Newton system
/// `[Q G' A'; G -D 0; A 0 0] [dx; dz; dy] = [rx; rz; ry]` for a given
/// diagonal `D`.
enum Factor<'a> {
    Primal {
        p: &'a QpProblem,
        d: DVector<f64>,
        k: Cholesky<f64, Dyn>,
        /// `A K^-1` pieces for the equality Schur complement.
        schur: Option<(DMatrix<f64>, Cholesky<f64, Dyn>)>,
    },
    Dual {
        dual: &'a DualPrecompute,
        n_ineq: usize,
        m: Cholesky<f64, Dyn>,
    },
}

/// Iteration-independent products for the dual-space reduction.
struct DualPrecompute {
    q_chol: Cholesky<f64, Dyn>,
    /// `C = [G; A]`.
    c: DMatrix<f64>,
    /// `C Q^-1 C'`.
    cqc: DMatrix<f64>,
}

impl DualPrecompute {
    fn new(p: &QpProblem) -> Result<Self> {
        let q_chol = Cholesky::new(p.q.clone()).ok_or_else(|| Error::NotPositiveDefinite("QP objective matrix".into()))?;
        let (mi, me, n) = (p.n_ineq(), p.n_eq(), p.n_vars());
        let mut c = DMatrix::zeros(mi + me, n);
        c.rows_mut(0, mi).copy_from(&p.g);
        c.rows_mut(mi, me).copy_from(&p.a_eq);
        // V = L^-1 C', C Q^-1 C' = V' V
        let l = q_chol.l();
        let mut v = c.transpose();
        l.solve_lower_triangular_mut(&mut v);
        let cqc = v.transpose() * &v;
        Ok(DualPrecompute { q_chol, c, cqc })
    }
}

fn factor<'a>(
    p: &'a QpProblem,
    dual: Option<&'a DualPrecompute>,
    d: &DVector<f64>,
    reg: f64,
) -> Option<Factor<'a>> {
    match dual {
        Some(pre) => {
            let mi = p.n_ineq();
            let mut m = pre.cqc.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += if i < mi { d[i] } else { 0.0 } + reg;
            }
            Some(Factor::Dual {
                dual: pre,
                n_ineq: mi,
                m: Cholesky::new(m)?,
            })
        }
        None => {
            let n = p.n_vars();
            let w = d.map(|v| 1.0 / v);
            let mut gw = p.g.clone();
            for (i, mut row) in gw.row_iter_mut().enumerate() {
                row *= w[i];
            }
            let mut k = &p.q + p.g.transpose() * gw;
            for i in 0..n {
                k[(i, i)] += reg;
            }
            let k = Cholesky::new(k)?;
            let schur = if p.n_eq() > 0 {
                let kinv_at = k.solve(&p.a_eq.transpose());
                let mut s = &p.a_eq * &kinv_at;
                for i in 0..s.nrows() {
                    s[(i, i)] += reg;
                }
                Some((kinv_at, Cholesky::new(s)?))
            } else {
                None
            };
            Some(Factor::Primal {
                p,
                d: d.clone(),
                k,
                schur,
            })
        }
    }
}

impl Factor<'_> {
    fn solve(
        &self,
        rx: &DVector<f64>,
        rz: &DVector<f64>,
        ry: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        match self {
            Factor::Primal { p, d, k, schur } => {
                // dz = D^-1 (G dx - rz)
                let wrz = rz.component_div(d);
                let rt = rx + p.g.transpose() * &wrz;
                let (dx, dy) = match schur {
                    None => (k.solve(&rt), DVector::zeros(0)),
                    Some((kinv_at, s)) => {
                        let kr = k.solve(&rt);
                        let dy = s.solve(&(&p.a_eq * &kr - ry));
                        (kr - kinv_at * &dy, dy)
                    }
                };
                let dz = (&p.g * &dx - rz).component_div(d);
                (dx, dz, dy)
            }
            Factor::Dual { dual, n_ineq, m } => {
                let qrx = dual.q_chol.solve(rx);
                let mut rl = DVector::zeros(rz.len() + ry.len());
                rl.rows_mut(0, rz.len()).copy_from(rz);
                rl.rows_mut(rz.len(), ry.len()).copy_from(ry);
                let dl = m.solve(&(&dual.c * &qrx - rl));
                let dx = dual.q_chol.solve(&(rx - dual.c.transpose() * &dl));
                let dz = dl.rows(0, *n_ineq).into_owned();
                let dy = dl.rows(*n_ineq, dl.len() - *n_ineq).into_owned();
                (dx, dz, dy)
            }
        }
    }
}

/// Largest step in `(0, 1]` keeping `v + a dv >= 0`.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(1.0, f64::min)
}

/// Farkas check: `z >= 0`, `G' z + A' y ~ 0`, `h' z + b' y < 0` proves that
/// no `x` satisfies the constraints.
fn certifies_infeasibility(p: &QpProblem, z: &DVector<f64>, y: &DVector<f64>, tol: f64) -> bool {
    let scale = z.amax().max(if y.is_empty() { 0.0 } else { y.amax() });
    if !(scale > 0.0) {
        return false;
    }
    let (zn, yn) = (z / scale, y / scale);
    let ray = p.g.transpose() * &zn + p.a_eq.transpose() * &yn;
    let gap = p.h.dot(&zn) + p.b_eq.dot(&yn);
    let data = 1.0 + p.g.amax().max(if p.n_eq() > 0 { p.a_eq.amax() } else { 0.0 });
    inf(&ray) <= tol * data && gap < -tol.sqrt()
}

pub fn solve(p: &QpProblem, opts: &SolverOptions) -> Result<QpSolution> {
    let (n, mi, me) = (p.n_vars(), p.n_ineq(), p.n_eq());
    let use_dual = match opts.strategy {
        KktStrategy::Auto => mi + me <= n,
        KktStrategy::Primal => false,
        KktStrategy::Dual => true,
    };
    let pre = if use_dual && mi + me > 0 {
        Some(DualPrecompute::new(p)?)
    } else {
        None
    };
    let singular = || Error::NotPositiveDefinite("reduced Newton system".into());

    // Starting point from the system with D = I.
    let ones = DVector::from_element(mi, 1.0);
    let (mut x, mut s, mut z, mut y);
    {
        let f = factor(p, pre.as_ref(), &ones, opts.regularization).ok_or_else(singular)?;
        let (x0, z0, y0) = f.solve(&(-&p.c), &p.h, &p.b_eq);
        x = x0;
        y = y0;
        if let Some(w) = &opts.warm_start {
            if w.len() == n {
                x = w.clone();
            }
        }
        s = &p.h - &p.g * &x;
        z = z0;
        let shift = |v: &mut DVector<f64>| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            if mi > 0 && lo <= 0.0 {
                v.add_scalar_mut(1.0 - lo);
            }
        };
        shift(&mut s);
        shift(&mut z);
        if opts.warm_start.is_none() {
            // the least-squares start gives s = -z for the slack estimate
            z.iter_mut().for_each(|v| *v = v.max(1e-8));
        }
    }

    let mut trace = vec![p.objective(&x)];
    let mut first_feasible = None;
    let mut status = QpStatus::MaxIter;
    let mut iterations = 0;
    let feas_tol = opts.tol.max(1e-12);

    for it in 0..=opts.max_iter {
        let r_d = &p.q * &x + &p.c + p.g.transpose() * &z + p.a_eq.transpose() * &y;
        let r_p = &p.g * &x + &s - &p.h;
        let r_e = &p.a_eq * &x - &p.b_eq;
        let mu = if mi > 0 { s.dot(&z) / mi as f64 } else { 0.0 };

        let viol = (&p.g * &x - &p.h).iter().fold(0.0f64, |a, v| a.max(*v));
        if first_feasible.is_none()
            && viol <= feas_tol * (1.0 + inf(&p.h))
            && inf(&r_e) <= feas_tol * (1.0 + inf(&p.b_eq))
        {
            first_feasible = Some(trace.len() - 1);
        }

        let scale_d = 1.0 + inf(&p.c).max(inf(&(&p.q * &x)));
        let converged = inf(&r_d) <= opts.tol * scale_d
            && inf(&r_p) <= opts.tol * (1.0 + inf(&p.h))
            && inf(&r_e) <= opts.tol * (1.0 + inf(&p.b_eq))
            && mu <= opts.tol * (1.0 + p.objective(&x).abs());
        if converged {
            status = QpStatus::Optimal;
            iterations = it;
            break;
        }
        if mi > 0 && certifies_infeasibility(p, &z, &y, 1e-8) {
            status = QpStatus::Infeasible;
            iterations = it;
            break;
        }
        if it == opts.max_iter {
            iterations = it;
            break;
        }

        let d = s.component_div(&z);
        let f = match factor(p, pre.as_ref(), &d, opts.regularization) {
            Some(f) => f,
            None => {
                iterations = it;
                break;
            }
        };
        let rx = -&r_d;
        let ry = -&r_e;

        // predictor
        let r_c = s.component_mul(&z);
        let rz = -&r_p + r_c.component_div(&z);
        let (dx_a, dz_a, dy_a) = f.solve(&rx, &rz, &ry);
        let ds_a = -(&r_c + s.component_mul(&dz_a)).component_div(&z);
        let (dx, ds, dz, dy) = if mi > 0 {
            let a_aff = max_step(&s, &ds_a).min(max_step(&z, &dz_a));
            let mu_aff = (&s + &ds_a * a_aff).dot(&(&z + &dz_a * a_aff)) / mi as f64;
            let sigma = (mu_aff / mu).powi(3);
            // corrector
            let r_c = &r_c + ds_a.component_mul(&dz_a) - DVector::from_element(mi, sigma * mu);
            let rz = -&r_p + r_c.component_div(&z);
            let (dx, dz, dy) = f.solve(&rx, &rz, &ry);
            let ds = -(&r_c + s.component_mul(&dz)).component_div(&z);
            (dx, ds, dz, dy)
        } else {
            (dx_a, ds_a, dz_a, dy_a)
        };
        let alpha = if mi > 0 {
            (0.99 * max_step(&s, &ds).min(max_step(&z, &dz))).min(1.0)
        } else {
            1.0
        };
        x += &dx * alpha;
        s += &ds * alpha;
        z += &dz * alpha;
        y += &dy * alpha;
        trace.push(p.objective(&x));
        iterations = it + 1;
    }

    if status == QpStatus::MaxIter && mi > 0 && certifies_infeasibility(p, &z, &y, 1e-6) {
        status = QpStatus::Infeasible;
    }
    let kkt = kkt_residuals(p, &x, &z, &y);
    Ok(QpSolution {
        x,
        lambda: z,
        nu: y,
        status,
        kkt,
        iterations,
        objective_trace: trace,
        first_feasible,
    })
}

/// Complex affine half-plane `Re(a^H d) >= beta` (or `=` when used as an
/// equality).
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPlane {
    pub a: CVector,
    pub beta: f64,
}

/// Real embedding with `x = [Re d; Im d]`: `d^H Gamma d = x' Q x`. Inequality
/// half-planes become rows `-[Re a, Im a] x <= -beta`, equalities rows
/// `[Re a, Im a] x = beta`.
pub fn embed_complex(gamma: &CMatrix, inequalities: &[HalfPlane], equalities: &[HalfPlane]) -> Result<QpProblem> {
    let defect = hermitian_defect(gamma);
    if defect > SYMMETRY_TOL * gamma.camax().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let dim = gamma.nrows();
    let mut q = real_embedding(gamma);
    // remove rounding asymmetry
    q = (&q + q.transpose()) * 0.5;
    let row = |hp: &HalfPlane, sign: f64| -> Result<Vec<f64>> {
        if hp.a.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "half-plane of dimension {} for {dim} variables",
                hp.a.len()
            )));
        }
        Ok(hp.a.iter().map(|z| sign * z.re).chain(hp.a.iter().map(|z| sign * z.im)).collect())
    };
    let mut g = DMatrix::zeros(inequalities.len(), 2 * dim);
    for (i, hp) in inequalities.iter().enumerate() {
        g.row_mut(i).copy_from_slice(&row(hp, -1.0)?);
    }
    let mut a = DMatrix::zeros(equalities.len(), 2 * dim);
    for (i, hp) in equalities.iter().enumerate() {
        a.row_mut(i).copy_from_slice(&row(hp, 1.0)?);
    }
    QpProblem::with_equalities(
        q,
        DVector::zeros(2 * dim),
        g,
        DVector::from_iterator(inequalities.len(), inequalities.iter().map(|hp| -hp.beta)),
        a,
        DVector::from_iterator(equalities.len(), equalities.iter().map(|hp| hp.beta)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{stack_real, C64};

    fn dm(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    #[test]
    fn unconstrained_minimum() {
        let p = QpProblem::new(DMatrix::identity(2, 2), DVector::zeros(2), DMatrix::zeros(0, 2), DVector::zeros(0))
            .unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(sol.x.amax() < 1e-12);
    }

    #[test]
    fn single_bound() {
        let p = QpProblem::new(dm(1, 1, &[1.0]), DVector::zeros(1), dm(1, 1, &[-1.0]), DVector::from_element(1, -1.0))
            .unwrap();
        for strategy in [KktStrategy::Primal, KktStrategy::Dual] {
            let sol = solve(&p, &SolverOptions { strategy, ..Default::default() }).unwrap();
            assert_eq!(sol.status, QpStatus::Optimal);
            assert!((sol.x[0] - 1.0).abs() < 1e-8);
            assert!((sol.lambda[0] - 1.0).abs() < 1e-8);
            assert!(sol.kkt.max() < 1e-6);
        }
    }

    #[test]
    fn equality_constraint() {
        // min 1/2 |x|^2 s.t. x0 + x1 = 2, x0 <= 0.5
        let p = QpProblem::with_equalities(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            dm(1, 2, &[1.0, 0.0]),
            DVector::from_element(1, 0.5),
            dm(1, 2, &[1.0, 1.0]),
            DVector::from_element(1, 2.0),
        )
        .unwrap();
        for strategy in [KktStrategy::Primal, KktStrategy::Dual] {
            let sol = solve(&p, &SolverOptions { strategy, ..Default::default() }).unwrap();
            assert_eq!(sol.status, QpStatus::Optimal);
            assert!((sol.x[0] - 0.5).abs() < 1e-7 && (sol.x[1] - 1.5).abs() < 1e-7);
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x >= 1 and x <= 0
        let p = QpProblem::new(dm(1, 1, &[1.0]), DVector::zeros(1), dm(2, 1, &[-1.0, 1.0]), DVector::from_vec(vec![-1.0, 0.0]))
            .unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Infeasible);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let bad = QpProblem::new(dm(2, 2, &[1.0, 0.0, 0.0, -1.0]), DVector::zeros(2), DMatrix::zeros(0, 2), DVector::zeros(0));
        assert!(matches!(bad, Err(Error::NotPositiveDefinite(_))));
        let asym = QpProblem::new(dm(2, 2, &[1.0, 0.5, 0.0, 1.0]), DVector::zeros(2), DMatrix::zeros(0, 2), DVector::zeros(0));
        assert!(matches!(asym, Err(Error::NotHermitian(_))));
    }

    #[test]
    fn embedding_examples() {
        let id = CMatrix::identity(3, 3);
        let p = embed_complex(&id, &[], &[]).unwrap();
        assert_eq!(p.q, DMatrix::identity(6, 6));
        let hp = HalfPlane {
            a: CVector::from_element(1, C64::new(1.0, 0.0)),
            beta: 1.0,
        };
        let p = embed_complex(&CMatrix::identity(1, 1), &[hp], &[]).unwrap();
        assert_eq!(p.g, dm(1, 2, &[-1.0, 0.0]));
        assert_eq!(p.h[0], -1.0);
    }

    #[test]
    fn embedding_preserves_quadratic_form() {
        let b = CMatrix::from_fn(3, 3, |r, c| C64::new((r + 2 * c) as f64 * 0.3 - 0.5, (r as f64 - c as f64) * 0.7));
        let gamma = &b * b.adjoint() + CMatrix::identity(3, 3);
        let p = embed_complex(&gamma, &[], &[]).unwrap();
        let d = CVector::from_fn(3, |i, _| C64::new(i as f64 - 1.2, 0.4 * i as f64 + 0.1));
        let x = stack_real(&d);
        let lhs = (d.adjoint() * &gamma * &d)[(0, 0)].re;
        assert!((lhs - x.dot(&(&p.q * &x))).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn rejects_non_hermitian_gamma() {
        let mut g = CMatrix::identity(2, 2);
        g[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(embed_complex(&g, &[], &[]), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = QpProblem::new(dm(1, 1, &[2.0]), DVector::from_element(1, 0.5), dm(1, 1, &[-1.0]), DVector::from_element(1, -1.0))
            .unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("qp.json");
        save_archive(&path, &p, &sol).unwrap();
        assert_eq!(QpProblem::load_json(&path).unwrap(), p);
    }
}
