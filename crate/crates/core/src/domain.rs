//! Geometry of the moment cone `Λ` of `(|f|^p, |g|^p, |f-g|^p)`, its three
//! boundary faces, the Bellman boundary data on them, and the slice
//! profile `(s, g(s), 1)` used by the certificates.

use std::fmt;

use thiserror::Error;

/// Default relative tolerance for face classification.
pub const FACE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("exponent p={0} must be finite and > 1")]
    InvalidExponent(f64),
    #[error("theta={0} must lie in [0, 1]")]
    InvalidTheta(f64),
    #[error("negative coordinate in ({0}, {1}, {2})")]
    NegativeCoordinate(f64, f64, f64),
    #[error("point is not on the boundary of the cone (classified {0})")]
    NotOnBoundary(BoundaryFace),
    #[error("slice parameter s={s} below 2^-p={min}")]
    OutOfRange { s: f64, min: f64 },
}

pub type Result<T> = std::result::Result<T, DomainError>;

/// An exponent `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(Self(p))
        } else {
            Err(DomainError::InvalidExponent(p))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn inv(self) -> f64 {
        1.0 / self.0
    }

    /// Left end `2^{-p}` of the slice parametrization.
    pub fn slice_min(self) -> f64 {
        (-self.0).exp2()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Mixing weight of the payoff `|θ f + (1-θ) g|^p`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Theta(f64);

impl Theta {
    pub const HALF: Theta = Theta(0.5);

    pub fn new(theta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(DomainError::InvalidTheta(theta))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Theta {
    fn default() -> Self {
        Self::HALF
    }
}

/// A point `(x1, x2, x3)` of moment space. Membership in `Λ` is not
/// enforced; see [`contains`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LambdaPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl LambdaPoint {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn from_array([x1, x2, x3]: [f64; 3]) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn scale(self, lambda: f64) -> Self {
        Self::new(lambda * self.x1, lambda * self.x2, lambda * self.x3)
    }

    /// Coordinates swapped in the first two slots.
    pub fn swapped(self) -> Self {
        Self::new(self.x2, self.x1, self.x3)
    }

    pub fn max_abs(self) -> f64 {
        self.x1.abs().max(self.x2.abs()).max(self.x3.abs())
    }

    pub fn dist_inf(self, other: Self) -> f64 {
        (self.x1 - other.x1)
            .abs()
            .max((self.x2 - other.x2).abs())
            .max((self.x3 - other.x3).abs())
    }

    /// `(1-λ) a + λ b`.
    pub fn lerp(a: Self, b: Self, lambda: f64) -> Self {
        let mix = |u: f64, v: f64| (1.0 - lambda) * u + lambda * v;
        Self::new(mix(a.x1, b.x1), mix(a.x2, b.x2), mix(a.x3, b.x3))
    }

    fn roots(self, p: Exponent) -> [f64; 3] {
        let q = p.inv();
        [self.x1.powf(q), self.x2.powf(q), self.x3.powf(q)]
    }
}

impl fmt::Display for LambdaPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x1, self.x2, self.x3)
    }
}

/// The moment map `m(u, v) = (|u|^p, |v|^p, |u-v|^p)`.
pub fn moment_map(u: f64, v: f64, p: Exponent) -> LambdaPoint {
    let p = p.get();
    LambdaPoint::new(u.abs().powf(p), v.abs().powf(p), (u - v).abs().powf(p))
}

/// Position of a point relative to `Λ`. Face names follow the coordinate
/// whose root equals the sum of the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryFace {
    /// `x1^{1/p} + x2^{1/p} = x3^{1/p}` (f and g of opposite sign).
    Face3,
    /// `x2^{1/p} + x3^{1/p} = x1^{1/p}`.
    Face1,
    /// `x3^{1/p} + x1^{1/p} = x2^{1/p}`.
    Face2,
    Interior,
    Outside,
}

impl BoundaryFace {
    pub fn is_face(self) -> bool {
        matches!(self, Self::Face1 | Self::Face2 | Self::Face3)
    }
}

impl fmt::Display for BoundaryFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Face3 => "face3",
            Self::Face1 => "face1",
            Self::Face2 => "face2",
            Self::Interior => "interior",
            Self::Outside => "outside",
        };
        f.write_str(s)
    }
}

/// Classifies `x` against the three p-th-root triangle inequalities.
///
/// `tol` is relative to the largest root. The apex is reported as
/// `Face3`; on edges the first matching face in the order 3, 1, 2 wins.
pub fn contains(x: LambdaPoint, p: Exponent, tol: f64) -> Result<BoundaryFace> {
    if x.x1 < 0.0 || x.x2 < 0.0 || x.x3 < 0.0 {
        return Err(DomainError::NegativeCoordinate(x.x1, x.x2, x.x3));
    }
    let [r1, r2, r3] = x.roots(p);
    let scale = r1.max(r2).max(r3);
    if scale == 0.0 {
        return Ok(BoundaryFace::Face3);
    }
    let band = tol * scale;
    let defects = [
        (BoundaryFace::Face3, r1 + r2 - r3),
        (BoundaryFace::Face1, r2 + r3 - r1),
        (BoundaryFace::Face2, r3 + r1 - r2),
    ];
    if defects.iter().any(|&(_, d)| d < -band) {
        return Ok(BoundaryFace::Outside);
    }
    Ok(defects
        .iter()
        .find(|&&(_, d)| d.abs() <= band)
        .map_or(BoundaryFace::Interior, |&(face, _)| face))
}

/// Boundary data of the Bellman function: the payoff of the (unique up to
/// sign) collinear pair with the given moments.
pub fn boundary_value(x: LambdaPoint, p: Exponent, theta: Theta) -> Result<f64> {
    let face = contains(x, p, FACE_TOL)?;
    let [r1, r2, r3] = x.roots(p);
    let th = theta.get();
    let pp = p.get();
    match face {
        BoundaryFace::Face3 => Ok((th * r1 - (1.0 - th) * r2).abs().powf(pp)),
        BoundaryFace::Face1 => Ok((th * r3 + r2).powf(pp)),
        BoundaryFace::Face2 => Ok((r1 + (1.0 - th) * r3).powf(pp)),
        other => Err(DomainError::NotOnBoundary(other)),
    }
}

/// The slice functions at `s` for `θ = 1/2`: `g(s) = |1 - s^{1/p}|^p`,
/// `f(s) = (s^{1/p} - 1/2)^p`, and their derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryProfile {
    pub s: f64,
    pub g: f64,
    pub f: f64,
    pub g_prime: f64,
    pub f_prime: f64,
}

impl BoundaryProfile {
    /// `f'(s) / (1 + g'(s))`: slope in `x1 + x2` of the tangent plane
    /// touching the slice at `s`.
    pub fn kappa(&self) -> f64 {
        self.f_prime / (1.0 + self.g_prime)
    }
}

fn check_slice(s: f64, p: Exponent) -> Result<()> {
    let min = p.slice_min();
    if s >= min && s.is_finite() {
        Ok(())
    } else {
        Err(DomainError::OutOfRange { s, min })
    }
}

pub fn boundary_profile(s: f64, p: Exponent) -> Result<BoundaryProfile> {
    check_slice(s, p)?;
    let pp = p.get();
    let t = s.powf(p.inv());
    // s^{1/p - 1}
    let chain = t / s;
    let half_gap = (t - 0.5).max(0.0);
    let one_gap = 1.0 - t;
    let g = one_gap.abs().powf(pp);
    let f = half_gap.powf(pp);
    let f_prime = half_gap.powf(pp - 1.0) * chain;
    let g_prime = if s == 1.0 || one_gap == 0.0 {
        0.0
    } else {
        -one_gap.signum() * one_gap.abs().powf(pp - 1.0) * chain
    };
    Ok(BoundaryProfile { s, g, f, g_prime, f_prime })
}

/// `(s, g(s), 1)`, or `(g(s), s, 1)` when `swapped`.
pub fn slice_point(s: f64, p: Exponent, swapped: bool) -> Result<LambdaPoint> {
    let prof = boundary_profile(s, p)?;
    let pt = LambdaPoint::new(s, prof.g, 1.0);
    Ok(if swapped { pt.swapped() } else { pt })
}
