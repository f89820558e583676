//! Small numerical kernels: bracketing bisection, a dense two-phase simplex
//! solver with Bland's rule, central differences and equispaced grid scans.

use thiserror::Error;

/// Default absolute tolerance on the root argument.
pub const ROOT_TOL: f64 = 1e-12;

/// Default LP feasibility tolerance.
pub const LP_FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("non-finite function value at {at}")]
    NonFinite { at: f64 },
    #[error("invalid bracket [{lo}, {hi}] with tol {tol}")]
    InvalidBracket { lo: f64, hi: f64, tol: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("linear program is infeasible (phase-one residual {residual:e})")]
    Infeasible { residual: f64 },
    #[error("internal error: linear program reported unbounded")]
    Unbounded,
    #[error("internal error: simplex iteration limit {0} reached")]
    IterationLimit(usize),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// An interval `[lo, hi]` together with the absolute width at which
/// bisection stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
    tol: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Result<Self> {
        if !(lo < hi) || !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(NumericsError::InvalidBracket { lo, hi, tol });
        }
        Ok(Self { lo, hi, tol })
    }

    /// Bracket with the default [`ROOT_TOL`].
    pub fn with_default_tol(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, ROOT_TOL)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

fn eval_finite<F: Fn(f64) -> f64>(f: &F, t: f64) -> Result<f64> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::NonFinite { at: t })
    }
}

/// Bisection on a sign-changing bracket.
///
/// Halves the bracket until its width is at most `tol` (or until the
/// midpoint can no longer be represented strictly inside it) and returns
/// the midpoint of the final bracket. An exact zero at an endpoint or a
/// midpoint is returned immediately.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, bracket: &Bracket) -> Result<f64> {
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut flo = eval_finite(&f, lo)?;
    let fhi = eval_finite(&f, hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericsError::NoSignChange { lo, hi, flo, fhi });
    }
    while hi - lo > bracket.tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fmid = eval_finite(&f, mid)?;
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Symmetric difference quotient `(f(s+h) - f(s-h)) / 2h`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, s: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(NumericsError::InvalidInput(format!("step h={h} must be positive")));
    }
    let up = eval_finite(&f, s + h)?;
    let down = eval_finite(&f, s - h)?;
    Ok((up - down) / (2.0 * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

/// `n` equispaced points on `[lo, hi]`, endpoints included exactly.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Evaluates `f` on `n` equispaced points of `[lo, hi]` and returns the
/// first point attaining the requested extremum together with its value.
pub fn scan_extremum<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    n: usize,
    mode: Extremum,
) -> Result<(f64, f64)> {
    if !(lo < hi) || n < 2 {
        return Err(NumericsError::InvalidInput(format!(
            "scan needs lo < hi and n >= 2 (got [{lo}, {hi}], n={n})"
        )));
    }
    let mut best: Option<(f64, f64)> = None;
    for t in linspace(lo, hi, n) {
        let v = eval_finite(&f, t)?;
        let better = match (best, mode) {
            (None, _) => true,
            (Some((_, b)), Extremum::Min) => v < b,
            (Some((_, b)), Extremum::Max) => v > b,
        };
        if better {
            best = Some((t, v));
        }
    }
    Ok(best.expect("n >= 2"))
}

/// `max c.w` subject to `A w = b`, `w >= 0`, where one row of `A` is the
/// all-ones simplex row with right-hand side 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    eq_matrix: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, eq_matrix: Vec<Vec<f64>>, eq_rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        let k = eq_matrix.len();
        if n == 0 || k == 0 || k > n {
            return Err(NumericsError::InvalidInput(format!(
                "need 0 < rows <= columns (rows={k}, columns={n})"
            )));
        }
        if eq_rhs.len() != k || eq_matrix.iter().any(|row| row.len() != n) {
            return Err(NumericsError::InvalidInput("ragged LP data".into()));
        }
        let all_finite = objective.iter().chain(eq_rhs.iter()).chain(eq_matrix.iter().flatten());
        if all_finite.clone().any(|v| !v.is_finite()) {
            return Err(NumericsError::InvalidInput("non-finite LP coefficient".into()));
        }
        let has_simplex_row = eq_matrix
            .iter()
            .zip(&eq_rhs)
            .any(|(row, &b)| b == 1.0 && row.iter().all(|&a| a == 1.0));
        if !has_simplex_row {
            return Err(NumericsError::InvalidInput("missing sum-to-one row".into()));
        }
        Ok(Self { objective, eq_matrix, eq_rhs })
    }

    /// Convenience: appends the simplex row to `rows`.
    pub fn convex_combination(objective: Vec<f64>, mut rows: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Result<Self> {
        rows.push(vec![1.0; objective.len()]);
        rhs.push(1.0);
        Self::new(objective, rows, rhs)
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_matrix(&self) -> &[Vec<f64>] {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Largest phase-one artificial sum accepted as feasible.
    pub feas_tol: f64,
    /// Reduced costs above this enter the basis.
    pub opt_tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { feas_tol: LP_FEAS_TOL, opt_tol: 1e-12, pivot_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub weights: Vec<f64>,
    pub value: f64,
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(problem, &LpOptions::default())
}

/// Dense tableau: `m` rows over `n` structural plus `m` artificial columns,
/// right-hand side stored last in each row.
struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.cells[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let w = self.width;
        let p = self.cells[r * w + c];
        for v in &mut self.cells[r * w..(r + 1) * w] {
            *v /= p;
        }
        self.cells[r * w + c] = 1.0;
        let pivot_row: Vec<f64> = self.cells[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let factor = self.cells[i * w + c];
            if factor != 0.0 {
                let row = &mut self.cells[i * w..(i + 1) * w];
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pr;
                }
                row[c] = 0.0;
            }
        }
        let factor = cost[c];
        if factor != 0.0 {
            for (v, pr) in cost.iter_mut().zip(&pivot_row) {
                *v -= factor * pr;
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Simplex iterations on `cost` (reduced costs, last entry holds minus
    /// the objective), entering only columns below `enter_limit`. Uses the
    /// largest reduced cost until a run of degenerate pivots, then Bland's
    /// rule for the rest of the phase.
    fn optimize(&mut self, cost: &mut [f64], enter_limit: usize, opts: &LpOptions) -> Result<()> {
        let max_iter = 50_000 + 50 * (self.n + self.m);
        let mut degenerate_run = 0;
        let mut bland = false;
        for _ in 0..max_iter {
            let entering = if bland {
                (0..enter_limit).find(|&j| cost[j] > opts.opt_tol)
            } else {
                (0..enter_limit)
                    .filter(|&j| cost[j] > opts.opt_tol)
                    .fold(None, |best: Option<usize>, j| match best {
                        Some(b) if cost[b] >= cost[j] => Some(b),
                        _ => Some(j),
                    })
            };
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > opts.pivot_tol {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-14 * br.abs().max(1.0);
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(NumericsError::Unbounded);
            };
            if ratio == 0.0 {
                degenerate_run += 1;
                bland |= degenerate_run > 4 * self.m + 16;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c, cost);
            for i in 0..self.m {
                let idx = i * self.width + self.width - 1;
                if self.cells[idx] < 0.0 && self.cells[idx] > -opts.feas_tol {
                    self.cells[idx] = 0.0;
                }
            }
        }
        Err(NumericsError::IterationLimit(max_iter))
    }
}

/// Two-phase dense simplex; Bland's rule guards against cycling.
pub fn solve_lp_with(problem: &LpProblem, opts: &LpOptions) -> Result<LpSolution> {
    let n = problem.num_vars();
    let m = problem.eq_matrix.len();
    let width = n + m + 1;
    let mut cells = vec![0.0; m * width];
    for (i, (row, &b)) in problem.eq_matrix.iter().zip(&problem.eq_rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for (j, &a) in row.iter().enumerate() {
            cells[i * width + j] = sign * a;
        }
        cells[i * width + n + i] = 1.0;
        cells[i * width + width - 1] = sign * b;
    }
    let mut tab = Tableau { m, n, width, cells, basis: (n..n + m).collect() };

    // Phase one: maximize -(sum of artificials).
    let mut cost = vec![0.0; width];
    for i in 0..m {
        for j in 0..n {
            cost[j] += tab.at(i, j);
        }
        cost[width - 1] += tab.rhs(i);
    }
    tab.optimize(&mut cost, n, opts)?;
    let residual = cost[width - 1];
    if residual > opts.feas_tol {
        return Err(NumericsError::Infeasible { residual });
    }

    // Drive zero-level artificials out; rows without a usable pivot are redundant.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| tab.at(r, j).abs() > opts.pivot_tol) {
                tab.pivot(r, c, &mut cost);
            }
        }
    }

    // Phase two on the original objective.
    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(&problem.objective);
    for i in 0..m {
        let b = tab.basis[i];
        let cb = if b < n { problem.objective[b] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                cost[j] -= cb * tab.at(i, j);
            }
        }
    }
    tab.optimize(&mut cost, n, opts)?;

    let mut weights = vec![0.0; n];
    for i in 0..m {
        let b = tab.basis[i];
        if b < n {
            weights[b] = tab.rhs(i).max(0.0);
        }
    }
    let value = weights.iter().zip(&problem.objective).map(|(w, c)| w * c).sum();
    Ok(LpSolution { weights, value })
}
