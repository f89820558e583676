//! The minimal concave majorant of the boundary data, computed by linear
//! programming over sampled boundary points, and the slice `B̂(1, 1, x3)`.

use rayon::prelude::*;
use thiserror::Error;

use crate::bellman::{brute_force_b, BellmanError, SearchBudget};
use crate::certificates::{certificate_for, CertError, Certificate};
use crate::domain::{boundary_value, contains, DomainError, Exponent, LambdaPoint, Theta, FACE_TOL};
use crate::numerics::{linspace, solve_lp, LpProblem, NumericsError};

/// Weights below this are dropped from [`EnvelopeQuery::active_weights`].
pub const ACTIVE_WEIGHT_TOL: f64 = 1e-14;
/// `B̂` may fall this far below a certificate along the slice.
pub const SANDWICH_LOWER_TOL: f64 = 5e-3;
/// `B̂` may exceed a certificate by this much.
pub const SANDWICH_UPPER_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvelopeError {
    #[error("n_per_face must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error("truncation radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("{x} is outside the sampled hull; enlarge the radius")]
    OutsideHull { x: LambdaPoint },
    #[error("x3={x3} is outside [0, 2^p]")]
    SliceRange { x3: f64 },
    #[error("grid was sampled for a different p or theta")]
    GridMismatch,
    #[error("sample {0} is not on a face of the cone")]
    OffBoundary(LambdaPoint),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Bellman(#[from] BellmanError),
}

pub type Result<T> = std::result::Result<T, EnvelopeError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    pub p: Exponent,
    pub theta: Theta,
    pub radius: f64,
}

/// Boundary samples `y_i` with obstacle values `R(y_i)`; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleGrid {
    points: Vec<LambdaPoint>,
    values: Vec<f64>,
    meta: GridMeta,
}

impl ObstacleGrid {
    pub fn points(&self) -> &[LambdaPoint] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Adds boundary points (e.g. the chord endpoints for a given `ε`).
    /// The result is a superset of `self`, so `B̂` can only grow.
    pub fn with_points(&self, extra: &[LambdaPoint]) -> Result<Self> {
        let mut grid = self.clone();
        for &y in extra {
            grid.push(y)?;
        }
        Ok(grid)
    }

    fn push(&mut self, y: LambdaPoint) -> Result<()> {
        if !contains(y, self.meta.p, FACE_TOL)?.is_face() {
            return Err(EnvelopeError::OffBoundary(y));
        }
        self.values.push(boundary_value(y, self.meta.p, self.meta.theta)?);
        self.points.push(y);
        Ok(())
    }
}

/// `8 max(1, 2ε^{-p})`, enlarged when needed so that `(1, 1, 2^p)` is
/// strictly inside.
pub fn default_radius(p: Exponent, eps: Option<f64>) -> f64 {
    let chord = match eps {
        Some(e) if e > 0.0 => 2.0 * e.powf(-p.get()),
        _ => 1.0,
    };
    (8.0 * chord.max(1.0)).max(2.0 * p.get().exp2())
}

/// Samples the three faces with `n_per_face` directions each, every
/// direction at the `n_per_face` scales `radius j / n_per_face` in the sup
/// norm. Directions are uniform in the ratio of the roots: `(α^p, (1-α)^p, 1)`
/// on face 3 and `(1, β^p, (1-β)^p)` with its mirror on the side faces, so
/// `β = 1` is the common edge `(1, 1, 0)`. The apex and `(1, 1, 2^p)` with
/// its ray are always included.
pub fn sample_boundary(p: Exponent, theta: Theta, n_per_face: usize, radius: f64) -> Result<ObstacleGrid> {
    if n_per_face < 2 {
        return Err(EnvelopeError::TooFewSamples(n_per_face));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(EnvelopeError::InvalidRadius(radius));
    }
    let pp = p.get();
    let mut dirs = Vec::with_capacity(3 * n_per_face + 2);
    for alpha in linspace(0.0, 1.0, n_per_face) {
        dirs.push(LambdaPoint::new(alpha.powf(pp), (1.0 - alpha).powf(pp), 1.0));
    }
    for beta in linspace(0.0, 1.0, n_per_face + 1).into_iter().skip(1) {
        let d = LambdaPoint::new(1.0, beta.powf(pp), (1.0 - beta).powf(pp));
        dirs.push(d);
        if beta < 1.0 {
            dirs.push(d.swapped());
        }
    }
    let top = LambdaPoint::new(1.0, 1.0, pp.exp2());
    dirs.push(top);

    let mut grid = ObstacleGrid {
        points: Vec::with_capacity(dirs.len() * n_per_face + 2),
        values: Vec::with_capacity(dirs.len() * n_per_face + 2),
        meta: GridMeta { p, theta, radius },
    };
    grid.push(LambdaPoint::default())?;
    for d in dirs {
        let unit = d.scale(1.0 / d.max_abs());
        for j in 1..=n_per_face {
            grid.push(unit.scale(radius * j as f64 / n_per_face as f64))?;
        }
    }
    if top.max_abs() <= radius {
        grid.push(top)?;
    }
    Ok(grid)
}

/// `B̂(x)` with its Carathéodory decomposition over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeQuery {
    pub x: LambdaPoint,
    pub result: f64,
    /// `(grid index, weight)` for the positive weights of the LP vertex.
    pub active_weights: Vec<(usize, f64)>,
}

/// `max Σ λ_i R(y_i)` over `Σ λ_i y_i = x`, `Σ λ_i = 1`, `λ >= 0`.
pub fn concavify(grid: &ObstacleGrid, x: LambdaPoint) -> Result<EnvelopeQuery> {
    let rows: Vec<Vec<f64>> = (0..3)
        .map(|k| grid.points.iter().map(|y| y.to_array()[k]).collect())
        .collect();
    let lp = LpProblem::convex_combination(grid.values.clone(), rows, x.to_array().to_vec())?;
    let sol = match solve_lp(&lp) {
        Ok(sol) => sol,
        Err(NumericsError::Infeasible { .. }) => return Err(EnvelopeError::OutsideHull { x }),
        Err(e) => return Err(e.into()),
    };
    let active_weights = sol
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > ACTIVE_WEIGHT_TOL)
        .map(|(i, &w)| (i, w))
        .collect();
    Ok(EnvelopeQuery { x, result: sol.value, active_weights })
}

/// `(x3, B̂(1, 1, x3))` in input order.
pub fn envelope_slice(p: Exponent, theta: Theta, x3_grid: &[f64], grid: &ObstacleGrid) -> Result<Vec<(f64, f64)>> {
    if theta != grid.meta.theta || p != grid.meta.p {
        return Err(EnvelopeError::GridMismatch);
    }
    let top = p.get().exp2();
    if let Some(&x3) = x3_grid.iter().find(|&&x3| !(0.0..=top).contains(&x3)) {
        return Err(EnvelopeError::SliceRange { x3 });
    }
    x3_grid
        .par_iter()
        .map(|&x3| Ok((x3, concavify(grid, LambdaPoint::new(1.0, 1.0, x3))?.result)))
        .collect()
}

/// One row of the slice table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceRow {
    pub x3: f64,
    pub envelope: f64,
    pub certificate: f64,
    pub brute_force: f64,
    /// Sandwich `brute_force - 5e-3 <= envelope <= certificate + 1e-9` holds.
    pub ok: bool,
}

impl SliceRow {
    pub const CSV_HEADER: &'static str = "x3,envelope,certificate,brute_force";
    pub const FIELDS: [&'static str; 4] = ["x3", "envelope", "certificate", "brute_force"];

    pub fn values(&self) -> [f64; 4] {
        [self.x3, self.envelope, self.certificate, self.brute_force]
    }
}

/// The slice with certificate and brute-force columns for comparison.
/// Brute-force restarts use the seed of `budget`; rows are independent of
/// scheduling.
pub fn slice_table(
    p: Exponent,
    theta: Theta,
    eps: Option<f64>,
    x3_grid: &[f64],
    grid: &ObstacleGrid,
    budget: &SearchBudget,
) -> Result<Vec<SliceRow>> {
    let cert: Certificate = certificate_for(p, eps)?;
    let env = envelope_slice(p, theta, x3_grid, grid)?;
    env.into_iter()
        .map(|(x3, envelope)| {
            let x = LambdaPoint::new(1.0, 1.0, x3);
            let certificate = cert.value(x);
            let brute_force = brute_force_b(x, p, theta, budget)?.value;
            let ok = envelope <= certificate + SANDWICH_UPPER_TOL && envelope >= brute_force - SANDWICH_LOWER_TOL;
            Ok(SliceRow { x3, envelope, certificate, brute_force, ok })
        })
        .collect()
}
