//! The sharp modulus of convexity `δ_{L^p}(ε)` by three independent routes.
//!
//! * `p >= 2`: the closed form `1 - (1 - (ε/2)^p)^{1/p}`.
//! * `1 < p < 2`: through the touching parameter `s*` solving
//!   `s + g(s) = 2ε^{-p}`, giving `δ = 1 - ε (s*^{1/p} - 1/2)`.
//! * `1 < p <= 2`: the implicit equation
//!   `(1 - δ + ε/2)^p + |1 - δ - ε/2|^p = 2`, solved for `δ ∈ [0, 1]`.

use std::fmt;

use thiserror::Error;

use crate::domain::{boundary_profile, DomainError, Exponent};
use crate::numerics::{bisect_root, Bracket, NumericsError, ROOT_TOL};

/// Cap on the geometric growth of the `s*` bracket.
pub const S_STAR_MAX: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuliError {
    #[error("epsilon={0} must lie in [0, 2]")]
    InvalidEpsilon(f64),
    #[error("route needs {need}, got p={p}")]
    WrongRegime { p: f64, need: &'static str },
    #[error("s* is undefined at epsilon=0")]
    ZeroEpsilon,
    #[error("no sign change for s + g(s) - 2eps^-p up to s={cap:e} (epsilon={eps})")]
    BracketFailure { eps: f64, cap: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

pub type Result<T> = std::result::Result<T, ModuliError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusQuery {
    p: Exponent,
    eps: f64,
}

impl ModulusQuery {
    pub fn new(p: Exponent, eps: f64) -> Result<Self> {
        if (0.0..=2.0).contains(&eps) {
            Ok(Self { p, eps })
        } else {
            Err(ModuliError::InvalidEpsilon(eps))
        }
    }

    /// Validates both `p > 1` and `ε ∈ [0, 2]`.
    pub fn from_raw(p: f64, eps: f64) -> Result<Self> {
        Self::new(Exponent::new(p)?, eps)
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// Root of `s + g(s) = 2ε^{-p}` on `[2^{-p}, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SStar {
    pub s_star: f64,
    pub eps: f64,
    pub p: Exponent,
}

impl SStar {
    /// `s* + g(s*) - 2ε^{-p}`.
    pub fn residual(&self) -> f64 {
        let prof = boundary_profile(self.s_star, self.p).expect("s* >= 2^-p");
        self.s_star + prof.g - 2.0 * self.eps.powf(-self.p.get())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    ClosedForm,
    SStar,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::ClosedForm => "closed_form",
            Route::SStar => "s_star",
        })
    }
}

pub fn route_for(p: Exponent) -> Route {
    if p.get() >= 2.0 {
        Route::ClosedForm
    } else {
        Route::SStar
    }
}

pub fn delta_closed_form(q: ModulusQuery) -> Result<f64> {
    let p = q.p.get();
    if p < 2.0 {
        return Err(ModuliError::WrongRegime { p, need: "p >= 2" });
    }
    let inner = 1.0 - (0.5 * q.eps).powf(p);
    Ok(1.0 - inner.max(0.0).powf(1.0 / p))
}

pub fn solve_s_star(q: ModulusQuery) -> Result<SStar> {
    let p = q.p;
    if p.get() > 2.0 {
        return Err(ModuliError::WrongRegime { p: p.get(), need: "1 < p <= 2" });
    }
    if q.eps == 0.0 {
        return Err(ModuliError::ZeroEpsilon);
    }
    let lo = p.slice_min();
    if q.eps == 2.0 {
        return Ok(SStar { s_star: lo, eps: q.eps, p });
    }
    let target = 2.0 * q.eps.powf(-p.get());
    let phi = |s: f64| match boundary_profile(s, p) {
        Ok(prof) => s + prof.g - target,
        Err(_) => f64::NAN,
    };
    let mut hi = (2.0 * lo).max(1.0);
    while phi(hi) < 0.0 {
        hi *= 2.0;
        if hi > S_STAR_MAX {
            return Err(ModuliError::BracketFailure { eps: q.eps, cap: S_STAR_MAX });
        }
    }
    let s_star = bisect_root(phi, &Bracket::new(lo, hi, ROOT_TOL)?)?;
    Ok(SStar { s_star, eps: q.eps, p })
}

pub fn delta_via_s_star(q: ModulusQuery) -> Result<f64> {
    if q.p.get() > 2.0 {
        return Err(ModuliError::WrongRegime { p: q.p.get(), need: "1 < p <= 2" });
    }
    if q.eps == 0.0 {
        return Ok(0.0);
    }
    let s = solve_s_star(q)?;
    let t = s.s_star.powf(q.p.inv());
    Ok((1.0 - q.eps * (t - 0.5)).clamp(0.0, 1.0))
}

pub fn delta_implicit(q: ModulusQuery) -> Result<f64> {
    let p = q.p.get();
    if p > 2.0 {
        return Err(ModuliError::WrongRegime { p, need: "1 < p <= 2" });
    }
    let eps = q.eps;
    if eps == 0.0 {
        return Ok(0.0);
    }
    if eps == 2.0 {
        return Ok(1.0);
    }
    let lhs = |d: f64| (1.0 - d + 0.5 * eps).powf(p) + (1.0 - d - 0.5 * eps).abs().powf(p) - 2.0;
    Ok(bisect_root(lhs, &Bracket::new(0.0, 1.0, ROOT_TOL)?)?)
}

/// Dispatches on the regime: closed form for `p >= 2`, the `s*` route
/// otherwise.
pub fn delta(q: ModulusQuery) -> Result<f64> {
    if q.eps == 0.0 {
        return Ok(0.0);
    }
    match route_for(q.p) {
        Route::ClosedForm => {
            let d = delta_closed_form(q)?;
            if cfg!(debug_assertions) && q.p.get() == 2.0 {
                let alt = delta_via_s_star(q)?;
                debug_assert!((d - alt).abs() < 1e-10, "p=2 seam: {d} vs {alt}");
            }
            Ok(d)
        }
        Route::SStar => delta_via_s_star(q),
    }
}

/// `|primary route - implicit equation|` for `p <= 2`; zero for `p > 2`
/// where no second route exists.
pub fn cross_check_residual(q: ModulusQuery) -> Result<f64> {
    if q.p.get() > 2.0 {
        return Ok(0.0);
    }
    Ok((delta(q)? - delta_implicit(q)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn q(p: f64, eps: f64) -> ModulusQuery {
        ModulusQuery::from_raw(p, eps).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(delta_closed_form(q(3.0, 0.0)).unwrap(), 0.0);
        assert_eq!(delta_closed_form(q(3.0, 2.0)).unwrap(), 1.0);
        assert_abs_diff_eq!(
            delta_closed_form(q(2.0, 1.0)).unwrap(),
            1.0 - 3f64.sqrt() / 2.0,
            epsilon = 1e-15
        );
        assert!(matches!(delta_closed_form(q(1.5, 1.0)), Err(ModuliError::WrongRegime { .. })));
    }

    #[test]
    fn s_star_examples() {
        for p in [1.1f64, 1.5, 1.9, 2.0] {
            let s = solve_s_star(q(p, 2.0)).unwrap();
            assert_eq!(s.s_star, (-p).exp2());
        }
        let s = solve_s_star(q(1.5, 1.0)).unwrap();
        // 30-digit reference: 1.71519516811951145...
        assert_abs_diff_eq!(s.s_star, 1.715_195_168_119_511_5, epsilon = 1e-11);
        assert!(s.residual().abs() < 1e-10);
        // p = 2, ε = √2: s + (1 - √s)^2 = 1 has root s = 1
        let s = solve_s_star(q(2.0, 2f64.sqrt())).unwrap();
        assert_abs_diff_eq!(s.s_star, 1.0, epsilon = 1e-11);
        assert_eq!(solve_s_star(q(1.5, 0.0)), Err(ModuliError::ZeroEpsilon));
        assert!(matches!(solve_s_star(q(3.0, 1.0)), Err(ModuliError::WrongRegime { .. })));
    }

    #[test]
    fn s_star_bracket_cap() {
        assert!(matches!(solve_s_star(q(1.9, 1e-7)), Err(ModuliError::BracketFailure { .. })));
    }

    #[test]
    fn via_s_star_examples() {
        assert_eq!(delta_via_s_star(q(1.5, 2.0)).unwrap(), 1.0);
        let d = delta_via_s_star(q(1.5, 1.0)).unwrap();
        assert_abs_diff_eq!(d, 0.067_122_610_329_016_17, epsilon = 1e-10);
        let tiny = delta_via_s_star(q(1.5, 1e-4)).unwrap();
        assert!((0.0..1e-4).contains(&tiny));
    }

    #[test]
    fn implicit_examples() {
        for p in [1.2, 1.5, 2.0] {
            assert_eq!(delta_implicit(q(p, 2.0)).unwrap(), 1.0);
            assert_eq!(delta_implicit(q(p, 0.0)).unwrap(), 0.0);
        }
        let d = delta_implicit(q(1.5, 1.0)).unwrap();
        assert!((d - delta_via_s_star(q(1.5, 1.0)).unwrap()).abs() < 1e-9);
        assert_abs_diff_eq!(delta_implicit(q(2.0, 1.0)).unwrap(), 1.0 - 3f64.sqrt() / 2.0, epsilon = 1e-11);
        assert!(delta_implicit(q(3.0, 1.0)).is_err());
    }

    #[test]
    fn dispatcher_examples() {
        for p in [1.1, 1.5, 2.0, 4.0, 8.0] {
            assert_eq!(delta(q(p, 0.0)).unwrap(), 0.0);
        }
        let d4 = delta(q(4.0, 1.0)).unwrap();
        assert_abs_diff_eq!(d4, 0.016_005_164_367_284_83, epsilon = 1e-9);
        assert_abs_diff_eq!((1.0 - d4).powi(4), 15.0 / 16.0, epsilon = 1e-14);
        assert_abs_diff_eq!(delta(q(1.5, 1.0)).unwrap(), 0.067_122_610_329_016_17, epsilon = 1e-10);
        assert_eq!(route_for(Exponent::new(2.0).unwrap()), Route::ClosedForm);
        assert_eq!(route_for(Exponent::new(1.99).unwrap()), Route::SStar);
    }

    #[test]
    fn epsilon_validation() {
        assert_eq!(ModulusQuery::from_raw(2.0, 2.5), Err(ModuliError::InvalidEpsilon(2.5)));
        assert!(ModulusQuery::from_raw(0.5, 1.0).is_err());
    }
}
