//! Numerical verification of the blow-up and global-regularity results:
//! the functional `C = 4 integral phi u0^2 v0`, the bound
//! `T* = (4 C cosfac / (3 pi (b-a)^2))^{-1/3} I_inf` (cosfac = 1 on the
//! line, `cos(pi (b-a)/P)` on a circle of period `P`), the scalar-model
//! bound `T* = 2 pi (b-a)^2 / integral phi u0`, the integrated ODE
//! inequality for the weighted mass `F(t)`, and the small-data decay
//! certificate with its `H^1(v)` bound.

use crate::analysis::{fit_blowup, linear_fit, BlowupFit, FitWindow};
use crate::dynamics::{ModelSpec, Variant};
use crate::grid::Field;
use crate::integrator::RunResult;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Relative slack for the integrated ODE inequality, reflecting
/// centered-difference error in `F_t` near blow-up.
pub const BOUND_INEQUALITY_TOL: f64 = 1e-3;

fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature to the given absolute tolerance.
pub(crate) fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `I(x) = integral_0^x dy / sqrt(y^3 + 1)`, accepting `x = inf`.
///
/// The tail beyond `y = 1` is compactified with `u = y^{-1/2}`, giving
/// `2 integral_{x^{-1/2}}^{1} du / sqrt(1 + u^6)`; both pieces are smooth
/// and integrate adaptively to better than `1e-10` absolute.
pub fn incomplete_blowup_integral(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::NegativeIntegralArgument(x));
    }
    let head_integrand = |y: f64| 1.0 / (y * y * y + 1.0).sqrt();
    if x <= 1.0 {
        return Ok(adaptive_simpson(head_integrand, 0.0, x, 1e-12));
    }
    let head = adaptive_simpson(head_integrand, 0.0, 1.0, 1e-12);
    let tail_integrand = |u: f64| 1.0 / (1.0 + u.powi(6)).sqrt();
    let lo = if x.is_infinite() { 0.0 } else { 1.0 / x.sqrt() };
    Ok(head + 2.0 * adaptive_simpson(tail_integrand, lo, 1.0, 1e-12))
}

/// `I_inf = integral_0^inf dy / sqrt(y^3 + 1)`.
pub fn blowup_integral_infinity() -> f64 {
    incomplete_blowup_integral(f64::INFINITY).expect("infinity is a valid argument")
}

/// Which blow-up bound a certificate instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CertificateKind {
    /// Compactly supported data on the line.
    CompactLine,
    /// Compactly supported data on a circle; requires support narrower
    /// than half the period and carries the cosine factor.
    Periodic,
    /// Scalar model `u_t = u H(u)` with nonnegative data.
    Clm,
}

/// Upper bound on the blow-up time computed from initial data.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlowupCertificate {
    /// `4 integral (x-a) u0^2 v0 dx` for the system kinds;
    /// `integral (x-a) u0 dx` for the scalar kind.
    pub functional: f64,
    pub support: (f64, f64),
    pub kind: CertificateKind,
    /// Bound on the blow-up time; `None` when the functional is not
    /// positive and the certificate does not apply.
    pub t_star: Option<f64>,
    /// Cached `I_inf`.
    pub i_infty: f64,
    /// `cos(pi (b-a)/P)` for periodic certificates, 1 otherwise.
    pub cos_factor: f64,
}

/// Compute the certificate for the given initial data. `u0` must carry a
/// compact-support tag; `v0` is ignored for the scalar kind.
pub fn blowup_certificate(
    u0: &Field,
    v0: &Field,
    kind: CertificateKind,
) -> Result<BlowupCertificate> {
    let (a, b) = u0.support().ok_or(Error::MissingSupportTag)?;
    let width = b - a;
    let grid = u0.grid();
    let cos_factor = match kind {
        CertificateKind::Periodic => {
            let period = match grid.kind() {
                crate::grid::GridKind::Periodic { period } => *period,
                _ => return Err(Error::PeriodicGridRequired),
            };
            if width >= 0.5 * period {
                return Err(Error::SupportTooWide { width, period });
            }
            (PI * width / period).cos()
        }
        CertificateKind::CompactLine => {
            if grid.is_periodic() {
                return Err(Error::LineGridRequired);
            }
            1.0
        }
        CertificateKind::Clm => 1.0,
    };
    let i_infty = blowup_integral_infinity();
    let points = grid.points();
    let (functional, t_star) = match kind {
        CertificateKind::Clm => {
            let weighted: Vec<f64> = points
                .iter()
                .zip(u0.values())
                .map(|(&x, &u)| (x - a) * u)
                .collect();
            let f = grid.integrate(&weighted);
            let t_star = (f > 0.0).then(|| 2.0 * PI * width * width / f);
            (f, t_star)
        }
        CertificateKind::CompactLine | CertificateKind::Periodic => {
            if u0.grid() != v0.grid() {
                return Err(Error::GridMismatch);
            }
            let weighted: Vec<f64> = points
                .iter()
                .zip(u0.values().iter().zip(v0.values()))
                .map(|(&x, (&u, &v))| (x - a) * u * u * v)
                .collect();
            let c = 4.0 * grid.integrate(&weighted);
            let t_star = (c > 0.0)
                .then(|| (4.0 * c * cos_factor / (3.0 * PI * width * width)).powf(-1.0 / 3.0) * i_infty);
            (c, t_star)
        }
    };
    Ok(BlowupCertificate {
        functional,
        support: (a, b),
        kind,
        t_star,
        i_infty,
        cos_factor,
    })
}

/// Outcome of checking a run against its blow-up certificate.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundReport {
    pub fit: BlowupFit,
    pub t_star: f64,
    /// Fitted blow-up time does not exceed the bound.
    pub bound_respected: bool,
    /// Forward-difference `F_t(0)` against the functional `C`.
    pub initial_rate: f64,
    pub initial_rate_rel_err: f64,
    /// Minimum over interior record times of `F_t / rhs - 1` for the
    /// integrated inequality `F_t >= sqrt(coef (F - F(0))^3 + C^2)`.
    pub min_margin: f64,
    pub inequality_ok: bool,
    pub points_checked: usize,
}

/// Check a run of the canonical `(2, 1)` system against its certificate:
/// the fitted blow-up time must not exceed `T*`, and the recorded
/// weighted mass must satisfy the integrated ODE inequality
/// `F_t >= sqrt(coef (F - F(0))^3 + C^2)` within [`BOUND_INEQUALITY_TOL`]
/// (`F(0)` shifted out, so the inequality holds with the same constant).
pub fn verify_bound(
    run: &RunResult,
    model: &ModelSpec,
    cert: &BlowupCertificate,
) -> Result<BoundReport> {
    if !(model.alpha == 2.0 && model.beta == 1.0 && model.nu == 0.0)
        || !matches!(model.variant, Variant::Full)
    {
        return Err(Error::CertificateMismatch(
            "bound verification requires the inviscid (alpha, beta) = (2, 1) system".into(),
        ));
    }
    if matches!(cert.kind, CertificateKind::Clm) {
        return Err(Error::CertificateMismatch(
            "scalar-model certificates are checked against scalar-model runs directly".into(),
        ));
    }
    let Some(t_star) = cert.t_star else {
        return Err(Error::CertificateMismatch(
            "certificate inapplicable: functional is not positive".into(),
        ));
    };
    let mass = run
        .weighted_mass
        .as_ref()
        .ok_or(Error::WeightedMassNotTracked)?;
    let times: Vec<f64> = run.norm_history.iter().map(|r| r.t).collect();
    debug_assert_eq!(times.len(), mass.len());

    let fit = fit_blowup(&run.norm_history, &FitWindow::Default)?;
    let bound_respected = fit.t_blowup <= t_star;

    let c = cert.functional;
    let width = cert.support.1 - cert.support.0;
    let coef = 4.0 * cert.cos_factor / (3.0 * PI * width * width);
    let f0 = mass[0];

    let initial_rate = (mass[1] - mass[0]) / (times[1] - times[0]);
    let initial_rate_rel_err = ((initial_rate - c) / c).abs();

    let mut min_margin = f64::INFINITY;
    let mut points_checked = 0;
    for i in 1..times.len() - 1 {
        let ft = (mass[i + 1] - mass[i - 1]) / (times[i + 1] - times[i - 1]);
        let shifted = (mass[i] - f0).max(0.0);
        let rhs = (coef * shifted.powi(3) + c * c).sqrt();
        min_margin = min_margin.min(ft / rhs - 1.0);
        points_checked += 1;
    }
    let inequality_ok = min_margin >= -BOUND_INEQUALITY_TOL;

    Ok(BoundReport {
        fit,
        t_star,
        bound_respected,
        initial_rate,
        initial_rate_rel_err,
        min_margin,
        inequality_ok,
        points_checked,
    })
}

/// Hypotheses of the global-regularity result evaluated on initial data.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegularityCertificate {
    /// Support length of `u0`.
    pub delta: f64,
    /// `delta^{1/2} (||v0x|| + (1/3) delta^{1/2} ||u0x||^2)`.
    pub lhs: f64,
    /// Max of `v0` over the support of `u0`.
    pub v0_max_on_support: f64,
    pub smallness_ok: bool,
    pub v0_condition_ok: bool,
    /// Both sub-conditions hold.
    pub satisfied: bool,
    pub u0x_l2_sq: f64,
    pub v0x_l2: f64,
    pub v0_l2: f64,
}

/// The smallness functional of the decay hypothesis.
pub fn regularity_lhs(delta: f64, v0x_l2: f64, u0x_l2_sq: f64) -> f64 {
    delta.sqrt() * (v0x_l2 + delta.sqrt() * u0x_l2_sq / 3.0)
}

/// Evaluate the decay hypotheses: `v0 <= -3` on the support of `u0` and
/// the smallness condition `lhs < 1/4`.
pub fn check_global_regularity(u0: &Field, v0: &Field) -> Result<RegularityCertificate> {
    if u0.grid() != v0.grid() {
        return Err(Error::GridMismatch);
    }
    let (a, b) = u0.support().ok_or(Error::MissingSupportTag)?;
    let delta = b - a;
    let u0x = crate::grid::derivative(u0);
    let v0x = crate::grid::derivative(v0);
    let u0x_l2_sq = {
        let l2 = u0x.l2_norm();
        l2 * l2
    };
    let v0x_l2 = v0x.l2_norm();
    let lhs = regularity_lhs(delta, v0x_l2, u0x_l2_sq);
    let v0_max_on_support = u0
        .grid()
        .points()
        .iter()
        .zip(v0.values())
        .filter(|(&x, _)| x >= a && x <= b)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let smallness_ok = lhs < 0.25;
    let v0_condition_ok = v0_max_on_support <= -3.0;
    Ok(RegularityCertificate {
        delta,
        lhs,
        v0_max_on_support,
        smallness_ok,
        v0_condition_ok,
        satisfied: smallness_ok && v0_condition_ok,
        u0x_l2_sq,
        v0x_l2,
        v0_l2: v0.l2_norm(),
    })
}

/// Decay-rate and boundedness checks on a certified run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecayReport {
    /// Fitted tail slope of `ln sup|u|`.
    pub sup_rate: f64,
    /// Fitted tail slope of `ln ||u||_{H^1}`.
    pub h1_rate: f64,
    /// Both rates at or below `-3 + 0.1`.
    pub rates_ok: bool,
    pub v_h1_max: f64,
    /// `||v0|| + delta ||u0x||^2 / 6 + ||v0x|| + delta^{1/2} ||u0x||^2 / 3`.
    pub v_h1_bound: f64,
    pub v_bound_ok: bool,
}

/// Fit the tail decay of `sup|u|` and `||u||_{H^1}` on a run whose data
/// satisfy the regularity certificate, and check the a priori `H^1(v)`
/// bound assembled from the initial data.
pub fn verify_decay(
    run: &RunResult,
    model: &ModelSpec,
    cert: &RegularityCertificate,
) -> Result<DecayReport> {
    if !cert.satisfied {
        return Err(Error::CertificateMismatch(
            "regularity certificate not satisfied on the initial data".into(),
        ));
    }
    if model.alpha != 2.0 || model.nu != 0.0 {
        return Err(Error::CertificateMismatch(
            "decay verification requires the inviscid alpha = 2 system".into(),
        ));
    }
    let history = &run.norm_history;
    let t_end = history.last().map(|r| r.t).unwrap_or(0.0);
    let tail: Vec<&crate::grid::NormRecord> = history
        .iter()
        .filter(|r| r.t >= 0.5 * t_end && r.sup_u > 0.0 && r.h1_u > 0.0)
        .collect();
    if tail.len() < 10 {
        return Err(Error::FitWindowTooSmall(tail.len()));
    }
    let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let ln_sup: Vec<f64> = tail.iter().map(|r| r.sup_u.ln()).collect();
    let ln_h1: Vec<f64> = tail.iter().map(|r| r.h1_u.ln()).collect();
    let sup_rate = linear_fit(&ts, &ln_sup).0;
    let h1_rate = linear_fit(&ts, &ln_h1).0;
    let rates_ok = sup_rate <= -2.9 && h1_rate <= -2.9;

    let v_h1_bound = cert.v0_l2
        + cert.delta * cert.u0x_l2_sq / 6.0
        + cert.v0x_l2
        + cert.delta.sqrt() * cert.u0x_l2_sq / 3.0;
    let v_h1_max = history.iter().fold(0.0_f64, |m, r| m.max(r.h1_v));
    let v_bound_ok = v_h1_max <= v_h1_bound * (1.0 + 1e-9);

    Ok(DecayReport {
        sup_rate,
        h1_rate,
        rates_ok,
        v_h1_max,
        v_h1_bound,
        v_bound_ok,
    })
}
