//! Linear majorants of the Bellman function (tangent planes at the query
//! point `(1, 1, ε^p)`) and grid verification of the one-variable
//! inequalities that make them majorants.
//!
//! Every scan is reported as a [`VerificationReport`]; nothing here panics
//! on a failed claim.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::domain::{boundary_profile, boundary_value, slice_point, DomainError, Exponent, LambdaPoint, Theta};
use crate::moduli::{solve_s_star, ModuliError, ModulusQuery};
use crate::numerics::linspace;

/// Allowed negativity of the majorization gap `U`.
pub const MAJORIZATION_TOL: f64 = 1e-12;
/// Allowed positive second difference of `W`, relative to `max(1, |W|)`.
pub const W_CONCAVITY_TOL: f64 = 1e-9;
/// Tolerance on the analytic endpoint values of `W`.
pub const ANCHOR_TOL: f64 = 1e-12;
/// Allowed positivity of `f (1 + g') - f' (s + g)`.
pub const SLOPE_CLAIM_TOL: f64 = 1e-12;
/// Chord coincidence tolerance for `1 < p < 2`.
pub const CHORD_TOL: f64 = 1e-10;
/// Offset of `(ε^{-p}, ε^{-p}, 1)` from the chord midpoint.
pub const CHORD_QUERY_TOL: f64 = 1e-12;
/// Tolerance for a certificate touching the boundary data.
pub const TOUCH_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("certificate needs {need}, got p={p}")]
    WrongRegime { p: f64, need: &'static str },
    #[error("epsilon required for p<2")]
    MissingEpsilon,
    #[error("s={s} outside [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Moduli(#[from] ModuliError),
}

pub type Result<T> = std::result::Result<T, CertError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `p >= 2`
    Ge2,
    /// `1 < p < 2`
    Lt2,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Ge2 => "ge2",
            Regime::Lt2 => "lt2",
        })
    }
}

impl Regime {
    pub fn of(p: Exponent) -> Self {
        if p.get() >= 2.0 {
            Regime::Ge2
        } else {
            Regime::Lt2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateMeta {
    pub regime: Regime,
    pub p: Exponent,
    /// Query separation; `None` for the `p >= 2` plane, which does not
    /// depend on it.
    pub eps: Option<f64>,
    pub s_star: Option<f64>,
}

/// The affine function `c0 + c · x` on moment space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub c0: f64,
    pub c: [f64; 3],
    pub meta: CertificateMeta,
}

impl Certificate {
    pub fn value(&self, x: LambdaPoint) -> f64 {
        self.c0 + self.c[0] * x.x1 + self.c[1] * x.x2 + self.c[2] * x.x3
    }

    /// `Σ |c_i|`, the Lipschitz constant in the max norm.
    pub fn lipschitz_inf(&self) -> f64 {
        self.c.iter().map(|c| c.abs()).sum()
    }
}

/// `(x1 + x2)/2 - 2^{-p} x3`.
pub fn certificate_ge2(p: Exponent) -> Result<Certificate> {
    if p.get() < 2.0 {
        return Err(CertError::WrongRegime { p: p.get(), need: "p >= 2" });
    }
    Ok(Certificate {
        c0: 0.0,
        c: [0.5, 0.5, -p.slice_min()],
        meta: CertificateMeta { regime: Regime::Ge2, p, eps: None, s_star: None },
    })
}

/// `x3 f(s*) + κ* (x1 + x2 - 2ε^{-p} x3)` with `κ* = f'(s*)/(1 + g'(s*))`.
///
/// At `ε = 2` the touching point is `s* = 2^{-p}` where `κ*` is `0/0`; the
/// zero plane is returned there. It has the right value at `(1, 1, 2^p)`
/// but is not a majorant.
pub fn certificate_lt2(p: Exponent, eps: f64) -> Result<Certificate> {
    if p.get() >= 2.0 {
        return Err(CertError::WrongRegime { p: p.get(), need: "1 < p < 2" });
    }
    let s = solve_s_star(ModulusQuery::new(p, eps)?)?;
    let meta = CertificateMeta { regime: Regime::Lt2, p, eps: Some(eps), s_star: Some(s.s_star) };
    if s.s_star <= p.slice_min() {
        return Ok(Certificate { c0: 0.0, c: [0.0; 3], meta });
    }
    let prof = boundary_profile(s.s_star, p)?;
    let kappa = prof.kappa();
    let target = 2.0 * eps.powf(-p.get());
    Ok(Certificate { c0: 0.0, c: [kappa, kappa, prof.f - target * kappa], meta })
}

/// The plane for the regime of `p`; `eps` is required when `p < 2`.
pub fn certificate_for(p: Exponent, eps: Option<f64>) -> Result<Certificate> {
    match Regime::of(p) {
        Regime::Ge2 => certificate_ge2(p),
        Regime::Lt2 => certificate_lt2(p, eps.ok_or(CertError::MissingEpsilon)?),
    }
}

/// `U(s) = cert(s, g(s), 1) - f(s)`.
pub fn majorization_gap(s: f64, cert: &Certificate) -> Result<f64> {
    let p = cert.meta.p;
    let prof = boundary_profile(s, p)?;
    Ok(cert.value(LambdaPoint::new(s, prof.g, 1.0)) - prof.f)
}

/// `W(s) = 1 - (s-1)^{p-1} - 2(1 - s/2)^{p-1}` on `[1, 2]`, `p >= 2`.
pub fn w_function(s: f64, p: Exponent) -> Result<f64> {
    let pp = p.get();
    if pp < 2.0 {
        return Err(CertError::WrongRegime { p: pp, need: "p >= 2" });
    }
    if !(1.0..=2.0).contains(&s) {
        return Err(CertError::OutOfRange { s, lo: 1.0, hi: 2.0 });
    }
    Ok(1.0 - (s - 1.0).powf(pp - 1.0) - 2.0 * (1.0 - 0.5 * s).powf(pp - 1.0))
}

/// `f(s)(1 + g'(s)) - f'(s)(s + g(s))`; nonpositive for all `s >= 2^{-p}`.
pub fn slope_claim(s: f64, p: Exponent) -> Result<f64> {
    let prof = boundary_profile(s, p)?;
    Ok(prof.f * (1.0 + prof.g_prime) - prof.f_prime * (s + prof.g))
}

/// Outcome of one grid scan.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub claim: String,
    pub grid: usize,
    pub worst_value: f64,
    pub worst_arg: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(claim: impl Into<String>, grid: usize, worst_value: f64, worst_arg: f64, pass: bool) -> Self {
        Self { claim: claim.into(), grid, worst_value, worst_arg, pass }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "claim={} pass={} worst={:.16e} at={:.16e} grid={}",
            self.claim, self.pass, self.worst_value, self.worst_arg, self.grid
        )
    }
}

/// Evaluates `h` on `args` in parallel and returns the values in grid order.
fn eval_grid<F>(args: &[f64], h: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    args.par_iter().map(|&s| h(s)).collect()
}

/// Worst (largest) value with its argument; NaN counts as worst.
fn worst_max(args: &[f64], vals: &[f64]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for (&s, &v) in args.iter().zip(vals) {
        if v.is_nan() {
            return (f64::NAN, s);
        }
        if v > best.0 {
            best = (v, s);
        }
    }
    best
}

fn worst_min(args: &[f64], vals: &[f64]) -> (f64, f64) {
    let negated: Vec<f64> = vals.iter().map(|v| -v).collect();
    let (v, s) = worst_max(args, &negated);
    (-v, s)
}

/// Scan of `h >= -tol` on `args`.
fn scan_lower(claim: &str, args: &[f64], tol: f64, h: impl Fn(f64) -> f64 + Sync) -> VerificationReport {
    let vals = eval_grid(args, h);
    let (worst, at) = worst_min(args, &vals);
    VerificationReport::new(claim, args.len(), worst, at, worst >= -tol)
}

/// Scan of `h <= tol` on `args`.
fn scan_upper(claim: &str, args: &[f64], tol: f64, h: impl Fn(f64) -> f64 + Sync) -> VerificationReport {
    let vals = eval_grid(args, h);
    let (worst, at) = worst_max(args, &vals);
    VerificationReport::new(claim, args.len(), worst, at, worst <= tol)
}

/// Upper end of the equispaced slice grid; larger `s` is covered by the tail
/// substitution.
pub const DEFAULT_S_MAX: f64 = 10.0;

/// Tail grid `s = 1/u` for `u` on `(0, 1/s_max]`, returned as `s` values.
fn tail_grid(s_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| s_max * n as f64 / i as f64).collect()
}

/// Scans every one-variable claim behind the certificate of the regime of
/// `p`, on `grid_n` equispaced slice points of `[2^{-p}, s_max]` plus the
/// substitution `u = 1/s` on `(0, 1/s_max]` for the unbounded claims. Tail
/// claims scan the degree-one rescaling `u · h(1/u)`.
///
/// For `p < 2` the upper end is raised to `2 s*` when `s*` exceeds `s_max`
/// so that the sign change of `U'` lies inside the grid.
pub fn verify_appendix(p: Exponent, eps: Option<f64>, grid_n: usize, s_max: f64) -> Result<Vec<VerificationReport>> {
    let lo = p.slice_min();
    if grid_n < 3 || !(s_max > lo) {
        return Err(CertError::OutOfRange { s: s_max, lo, hi: f64::INFINITY });
    }
    let cert = certificate_for(p, eps)?;
    let s_hi = match cert.meta.s_star {
        Some(ss) if 2.0 * ss > s_max => 2.0 * ss,
        _ => s_max,
    };
    let grid = linspace(lo, s_hi, grid_n);
    let tail = tail_grid(s_hi, grid_n);
    let gap = |s: f64| majorization_gap(s, &cert).unwrap_or(f64::NAN);
    let claim_d = |s: f64| slope_claim(s, p).unwrap_or(f64::NAN);

    let mut out = vec![
        scan_lower("U_nonneg", &grid, MAJORIZATION_TOL, gap),
        scan_lower("U_nonneg_tail", &tail, MAJORIZATION_TOL, |s| gap(s) / s),
    ];
    match cert.meta.regime {
        Regime::Ge2 => out.extend(verify_w(p, grid_n)?),
        Regime::Lt2 => out.extend(verify_lt2_slopes(p, &cert, &grid)?),
    }
    out.push(scan_upper("slope_claim", &grid, SLOPE_CLAIM_TOL, claim_d));
    out.push(scan_upper("slope_claim_tail", &tail, SLOPE_CLAIM_TOL, |s| claim_d(s) / s));
    Ok(out)
}

fn verify_w(p: Exponent, grid_n: usize) -> Result<Vec<VerificationReport>> {
    let w = |s: f64| w_function(s, p).unwrap_or(f64::NAN);
    let grid = linspace(1.0, 2.0, grid_n);
    let vals = eval_grid(&grid, w);
    let (wmin, wmin_at) = worst_min(&grid, &vals);
    let nonneg = VerificationReport::new("W_nonneg", grid_n, wmin, wmin_at, wmin >= -MAJORIZATION_TOL);

    let inner = &grid[1..grid_n - 1];
    let d2: Vec<f64> = (1..grid_n - 1)
        .map(|i| (vals[i - 1] - 2.0 * vals[i] + vals[i + 1]) / vals[i].abs().max(1.0))
        .collect();
    let (d2max, d2_at) = worst_max(inner, &d2);
    let concave = VerificationReport::new("W_concave", grid_n, d2max, d2_at, d2max <= W_CONCAVITY_TOL);

    let w1 = w_function(1.0, p)?;
    let left_err = (w1 - (1.0 - (2.0 - p.get()).exp2())).abs();
    let left = VerificationReport::new("W_left_anchor", 1, left_err, 1.0, left_err <= ANCHOR_TOL && w1 >= 0.0);
    let w2 = w_function(2.0, p)?.abs();
    let right = VerificationReport::new("W_right_anchor", 1, w2, 2.0, w2 <= ANCHOR_TOL);
    Ok(vec![nonneg, concave, left, right])
}

fn verify_lt2_slopes(p: Exponent, cert: &Certificate, grid: &[f64]) -> Result<Vec<VerificationReport>> {
    // the left end is excluded: 1 + g' vanishes there and κ is 0/0
    let open = &grid[1..];
    let profiles: Vec<_> = open
        .par_iter()
        .map(|&s| boundary_profile(s, p))
        .collect::<std::result::Result<_, _>>()?;
    let one_plus: Vec<f64> = profiles.iter().map(|pr| 1.0 + pr.g_prime).collect();
    let (min1, min1_at) = worst_min(open, &one_plus);
    let positive = VerificationReport::new("one_plus_gprime_pos", open.len(), min1, min1_at, min1 > 0.0);

    let kappa: Vec<f64> = profiles.iter().map(|pr| pr.kappa()).collect();
    let diffs: Vec<f64> = kappa.windows(2).map(|w| w[1] - w[0]).collect();
    let (dmax, dmax_at) = worst_max(&open[1..], &diffs);
    let decreasing = VerificationReport::new("kappa_decreasing", open.len(), dmax, dmax_at, dmax < 0.0);

    // U'(s)(1 + g'(s)) = κ* - κ(s): negative below s*, positive above.
    let s_star = cert.meta.s_star.expect("lt2 certificate carries s*");
    let kappa_star = boundary_profile(s_star, p)?.kappa();
    let window = 1e-9 * s_star;
    let mut worst = (f64::NEG_INFINITY, f64::NAN);
    let mut last_sign = 0.0;
    let mut changes = 0usize;
    for (&s, &k) in open.iter().zip(&kappa) {
        let scaled = kappa_star - k;
        if (s - s_star).abs() <= window {
            continue;
        }
        let violation = if s < s_star { scaled } else { -scaled };
        if violation > worst.0 || violation.is_nan() {
            worst = (violation, s);
        }
        let sign = scaled.signum();
        if scaled != 0.0 {
            if last_sign != 0.0 && sign != last_sign {
                changes += 1;
            }
            last_sign = sign;
        }
    }
    let pattern = VerificationReport::new(
        "uprime_sign_pattern",
        open.len(),
        worst.0,
        worst.1,
        worst.0 < 0.0 && changes == 1,
    );
    Ok(vec![positive, decreasing, pattern])
}

/// Offset `|(s* + g(s*))/2 - ε^{-p}|` between the chord midpoint and the
/// rescaled query point.
pub fn chord_query_offset(p: Exponent, eps: f64) -> Result<f64> {
    let s = solve_s_star(ModulusQuery::new(p, eps)?)?;
    let g = boundary_profile(s.s_star, p)?.g;
    Ok((0.5 * (s.s_star + g) - eps.powf(-p.get())).abs())
}

/// Compares the certificate with the affine interpolant `L` of the
/// boundary data along a chord between two boundary points.
///
/// * `p >= 2`: chord from `A = (2^{-p}, 2^{-p}, 1)` to `D(s_probe)`;
///   reports `max |L - cert| / (x1 + x2 + x3)`, the homogeneity-normalized
///   gap, which tends to zero as `s_probe` grows. Passes when both
///   interpolation nodes are touched.
/// * `1 < p < 2`: chord from `A = (s*, g(s*), 1)` to its mirror image;
///   passes when `max |L - cert| < 1e-10` and the chord midpoint is
///   `(ε^{-p}, ε^{-p}, 1)` to `1e-12`. The reported worst value is the
///   larger of the two discrepancies.
pub fn sharpness_check(p: Exponent, eps: f64, s_probe: f64, n_chord: usize) -> Result<VerificationReport> {
    let n = n_chord.max(2);
    let lambdas = linspace(0.0, 1.0, n);
    match Regime::of(p) {
        Regime::Ge2 => {
            let cert = certificate_ge2(p)?;
            let a = slice_point(p.slice_min(), p, false)?;
            let d = slice_point(s_probe, p, false)?;
            let ba = boundary_value(a, p, Theta::HALF)?;
            let bd = boundary_value(d, p, Theta::HALF)?;
            let gaps: Vec<f64> = lambdas
                .iter()
                .map(|&l| {
                    let x = LambdaPoint::lerp(a, d, l);
                    let chord = (1.0 - l) * ba + l * bd;
                    (chord - cert.value(x)).abs() / (x.x1 + x.x2 + x.x3)
                })
                .collect();
            let (worst, at) = worst_max(&lambdas, &gaps);
            let touches = (cert.value(a) - ba).abs() <= TOUCH_TOL;
            Ok(VerificationReport::new("sharpness_chord_ge2", n, worst, at, touches && worst.is_finite()))
        }
        Regime::Lt2 => {
            let cert = certificate_lt2(p, eps)?;
            let s_star = cert.meta.s_star.expect("lt2 certificate carries s*");
            let a = slice_point(s_star, p, false)?;
            let d = a.swapped();
            let ba = boundary_value(a, p, Theta::HALF)?;
            let bd = boundary_value(d, p, Theta::HALF)?;
            let gaps: Vec<f64> = lambdas
                .iter()
                .map(|&l| {
                    let chord = (1.0 - l) * ba + l * bd;
                    (chord - cert.value(LambdaPoint::lerp(a, d, l))).abs()
                })
                .collect();
            let (gap, at) = worst_max(&lambdas, &gaps);
            let offset = chord_query_offset(p, eps)?;
            let pass = gap < CHORD_TOL && offset <= CHORD_QUERY_TOL;
            Ok(VerificationReport::new("sharpness_chord_lt2", n, gap.max(offset), at, pass))
        }
    }
}

/// Checks that the certificate equals the boundary data at its touching
/// points: `A = (2^{-p}, 2^{-p}, 1)` and `(1, 1, 2^p)` for `p >= 2`,
/// `A = (s*, g(s*), 1)` and its mirror for `p < 2`.
pub fn touching_check(cert: &Certificate) -> Result<VerificationReport> {
    let p = cert.meta.p;
    let anchors = match cert.meta.regime {
        Regime::Ge2 => vec![
            slice_point(p.slice_min(), p, false)?,
            LambdaPoint::new(1.0, 1.0, p.get().exp2()),
        ],
        Regime::Lt2 => {
            let a = slice_point(cert.meta.s_star.expect("lt2 certificate carries s*"), p, false)?;
            vec![a, a.swapped()]
        }
    };
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for (i, x) in anchors.iter().enumerate() {
        let err = (cert.value(*x) - boundary_value(*x, p, Theta::HALF)?).abs();
        if err > worst.0 {
            worst = (err, i as f64);
        }
    }
    Ok(VerificationReport::new("touching", anchors.len(), worst.0, worst.1, worst.0 <= TOUCH_TOL))
}
