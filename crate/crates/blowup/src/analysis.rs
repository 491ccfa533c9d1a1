//! Post-processing of run data: singularity-time fitting from the sup
//! norm, self-similar profile extraction and collapse, rescaled wave-speed
//! estimation, and the regularity-criterion monitor.

use crate::grid::{Field, NormRecord, SolutionState};
use crate::{Error, Result};

/// Least-squares line `y = intercept + slope * x`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Sample-selection rule for [`fit_blowup`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum FitWindow {
    /// Samples with `sup_u >= 100 * sup_u(0)`, excluding the final 5
    /// steps (resolution-marginal).
    Default,
    /// The final `decades` of sup-norm growth (samples with
    /// `sup_u >= max_sup / 10^decades`), excluding the final 5 steps.
    LastDecades(f64),
    /// Samples with `sup_u` in `[lo, hi]`.
    SupRange { lo: f64, hi: f64 },
    /// Samples with `t` in `[t0, t1]`.
    TimeRange { t0: f64, t1: f64 },
}

/// Fitted singularity form `sup|u| = C / (T - t)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlowupFit {
    /// Fitted blow-up time.
    #[serde(rename = "T")]
    pub t_blowup: f64,
    /// Scaling constant of the fit.
    #[serde(rename = "C")]
    pub c_scale: f64,
    /// Exponent of the fitted form; the production fit is linear in
    /// `1/sup|u|`, i.e. `alpha = 1`.
    pub alpha_exp: f64,
    /// Free-exponent diagnostic from log-log regression of `sup|u|`
    /// against `T - t`.
    pub alpha_diag: f64,
    /// Time span `[t_start, t_end]` of the samples used.
    pub window: (f64, f64),
    /// Max relative deviation of `1/sup|u|` from the fitted line.
    pub residual: f64,
    pub samples: usize,
}

fn window_indices(history: &[NormRecord], window: &FitWindow) -> Vec<usize> {
    let initial_sup = history.first().map(|r| r.sup_u).unwrap_or(0.0);
    let max_sup = history.iter().fold(0.0_f64, |m, r| m.max(r.sup_u));
    let (keep, drop_tail): (Box<dyn Fn(&NormRecord) -> bool>, usize) = match *window {
        FitWindow::Default => (Box::new(move |r| r.sup_u >= 100.0 * initial_sup), 5),
        FitWindow::LastDecades(d) => {
            let lo = max_sup / 10.0_f64.powf(d);
            (Box::new(move |r| r.sup_u >= lo), 5)
        }
        FitWindow::SupRange { lo, hi } => (Box::new(move |r| r.sup_u >= lo && r.sup_u <= hi), 0),
        FitWindow::TimeRange { t0, t1 } => (Box::new(move |r| r.t >= t0 && r.t <= t1), 0),
    };
    let mut idx: Vec<usize> = history
        .iter()
        .enumerate()
        .filter(|(_, r)| keep(r))
        .map(|(i, _)| i)
        .collect();
    let len = idx.len();
    idx.truncate(len.saturating_sub(drop_tail));
    idx
}

/// Linear least squares of `1/sup|u|` against `t`: slope `s < 0`,
/// intercept `q` give `T = -q/s` and `C = -1/s`. A free-exponent
/// diagnostic is fitted alongside.
pub fn fit_blowup(history: &[NormRecord], window: &FitWindow) -> Result<BlowupFit> {
    let idx = window_indices(history, window);
    if idx.len() < 10 {
        return Err(Error::FitWindowTooSmall(idx.len()));
    }
    let ts: Vec<f64> = idx.iter().map(|&i| history[i].t).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| 1.0 / history[i].sup_u).collect();
    if !(ys[ys.len() - 1] < ys[0]) {
        return Err(Error::FitNotDecreasing);
    }
    let (slope, intercept) = linear_fit(&ts, &ys);
    if !(slope < 0.0) {
        return Err(Error::FitNoBlowupTrend);
    }
    let t_blowup = -intercept / slope;
    let c_scale = -1.0 / slope;
    let residual = ts
        .iter()
        .zip(&ys)
        .map(|(&t, &y)| {
            let fit = intercept + slope * t;
            ((y - fit) / fit).abs()
        })
        .fold(0.0_f64, f64::max);

    // log-log diagnostic: ln sup = ln C - alpha ln(T - t)
    let last_t = *ts.last().expect("nonempty window");
    if !(t_blowup > last_t) {
        return Err(Error::FitPrecedesSnapshot { t: t_blowup, snapshot: last_t });
    }
    let lx: Vec<f64> = ts.iter().map(|&t| (t_blowup - t).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| -(y.ln())).collect();
    let (diag_slope, _) = linear_fit(&lx, &ly);

    Ok(BlowupFit {
        t_blowup,
        c_scale,
        alpha_exp: 1.0,
        alpha_diag: -diag_slope,
        window: (ts[0], last_t),
        residual,
        samples: idx.len(),
    })
}

/// Resolution of the rescaled profile grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProfileParams {
    /// Half-width of the xi grid.
    pub xi_max: f64,
    /// Sample count; forced odd so xi = 0 is a sample.
    pub samples: usize,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams { xi_max: 4.0, samples: 801 }
    }
}

/// Snapshot rescaled into the self-similar frame
/// `u(x,t) = U(xi)/(T-t)` with
/// `xi = (x - x0) / ((T-t)^{1/2} ln(1/(T-t))^{1/2})`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SelfSimilarFrame {
    pub t: f64,
    #[serde(rename = "T")]
    pub t_blowup: f64,
    /// Subgrid location of the global max of |u| (parabolic refinement).
    pub x0: f64,
    /// Length scale `(T-t)^{1/2} ln(1/(T-t))^{1/2}`.
    pub lengthscale: f64,
    pub xi: Vec<f64>,
    #[serde(rename = "U")]
    pub u_profile: Vec<f64>,
    #[serde(rename = "V")]
    pub v_profile: Vec<f64>,
    /// `(T-t)^{1/2} dx0/dt`, filled by neighbouring-frame differencing.
    pub lambda_est: Option<f64>,
}

fn argmax_abs(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = values[0].abs();
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v.abs() > best_val {
            best_val = v.abs();
            best = i;
        }
    }
    best
}

/// Parabolic refinement of the peak location through the three points
/// around the discrete argmax of |u|. The xi scale shrinks like
/// `(T-t)^{1/2}`, so snapping x0 to the grid would dominate the profile
/// error near blow-up.
fn subgrid_peak(f: &Field) -> Result<f64> {
    let v = f.values();
    let n = v.len();
    let grid = f.grid();
    let j = argmax_abs(v);
    let (ym, y0, yp) = if grid.is_periodic() {
        (v[(j + n - 1) % n].abs(), v[j].abs(), v[(j + 1) % n].abs())
    } else {
        if j == 0 || j == n - 1 {
            return Err(Error::PeakAtBoundary);
        }
        (v[j - 1].abs(), v[j].abs(), v[j + 1].abs())
    };
    let denom = ym - 2.0 * y0 + yp;
    let delta = if denom == 0.0 { 0.0 } else { 0.5 * (ym - yp) / denom };
    Ok(grid.points()[j] + delta.clamp(-0.5, 0.5) * grid.spacing())
}

/// Evaluate a periodic field at arbitrary points by direct summation of
/// its Fourier series.
fn sample_periodic(f: &Field, xs: &[f64]) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.n();
    let spec = f.spectral();
    let scale = 1.0 / n as f64;
    xs.iter()
        .map(|&x| {
            let mut acc = spec[0].re;
            for j in 1..n / 2 {
                let k = grid.wavenumber_phys(j);
                let (s, c) = (k * x).sin_cos();
                // conjugate pair j and n - j combined
                acc += 2.0 * (spec[j].re * c - spec[j].im * s);
            }
            let knyq = grid.wavenumber_phys(n / 2).abs();
            acc += spec[n / 2].re * (knyq * x).cos();
            acc * scale
        })
        .collect()
}

/// Four-point Lagrange (cubic) interpolation on the uniform line grid.
fn sample_cubic(f: &Field, xs: &[f64]) -> Result<Vec<f64>> {
    let grid = f.grid();
    let pts = grid.points();
    let v = f.values();
    let n = grid.n();
    let h = grid.spacing();
    xs.iter()
        .map(|&x| {
            let fspan = (x - pts[0]) / h;
            if fspan < 1.0 || fspan > (n - 3) as f64 {
                return Err(Error::PeakAtBoundary);
            }
            let j = (fspan.floor() as usize).clamp(1, n - 3);
            let s = fspan - j as f64;
            // nodes j-1, j, j+1, j+2 at offsets -1, 0, 1, 2
            let w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
            let w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
            let w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
            let w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
            Ok(w0 * v[j - 1] + w1 * v[j] + w2 * v[j + 1] + w3 * v[j + 2])
        })
        .collect()
}

fn sample_field(f: &Field, xs: &[f64]) -> Result<Vec<f64>> {
    if f.grid().is_periodic() {
        Ok(sample_periodic(f, xs))
    } else {
        sample_cubic(f, xs)
    }
}

/// Rescale a snapshot into the self-similar frame of the given fit.
pub fn extract_profile(
    state: &SolutionState,
    fit: &BlowupFit,
    params: &ProfileParams,
) -> Result<SelfSimilarFrame> {
    let remaining = fit.t_blowup - state.t;
    if !(remaining > 0.0) {
        return Err(Error::FitPrecedesSnapshot { t: fit.t_blowup, snapshot: state.t });
    }
    if remaining >= 1.0 {
        // the logarithmic factor in the length scale requires T - t < 1
        return Err(Error::FitPrecedesSnapshot { t: fit.t_blowup, snapshot: state.t });
    }
    let x0 = subgrid_peak(&state.u)?;
    let lengthscale = (remaining * (1.0 / remaining).ln()).sqrt();
    let m = if params.samples % 2 == 0 { params.samples + 1 } else { params.samples };
    let xi: Vec<f64> = (0..m)
        .map(|j| -params.xi_max + 2.0 * params.xi_max * j as f64 / (m - 1) as f64)
        .collect();
    let xs: Vec<f64> = xi.iter().map(|&s| x0 + s * lengthscale).collect();
    let u_profile: Vec<f64> = sample_field(&state.u, &xs)?
        .into_iter()
        .map(|u| remaining * u)
        .collect();
    let v_profile: Vec<f64> = sample_field(&state.v, &xs)?
        .into_iter()
        .map(|v| remaining * v)
        .collect();
    Ok(SelfSimilarFrame {
        t: state.t,
        t_blowup: fit.t_blowup,
        x0,
        lengthscale,
        xi,
        u_profile,
        v_profile,
        lambda_est: None,
    })
}

/// Rescaled wave speed extracted from a sequence of frames.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LambdaEstimate {
    /// Mean of the last three midpoint estimates.
    pub value: f64,
    /// Max minus min of those estimates.
    pub spread: f64,
    /// `(T - t_mid)^{1/2} (x0_{i+1} - x0_i)/(t_{i+1} - t_i)` per gap.
    pub midpoints: Vec<f64>,
}

/// Estimate `lambda = lim (T-t)^{1/2} dx0/dt` by finite-differencing the
/// peak locations of successive frames; the limit is approximated by
/// averaging the last three midpoint values.
pub fn estimate_lambda(frames: &[SelfSimilarFrame]) -> Result<LambdaEstimate> {
    if frames.len() < 3 {
        return Err(Error::TooFewFrames(frames.len()));
    }
    let t_blowup = frames.last().expect("nonempty").t_blowup;
    let mut midpoints = Vec::with_capacity(frames.len() - 1);
    for pair in frames.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let t_mid = 0.5 * (a.t + b.t);
        let speed = (b.x0 - a.x0) / (b.t - a.t);
        midpoints.push((t_blowup - t_mid).max(0.0).sqrt() * speed);
    }
    let tail = &midpoints[midpoints.len().saturating_sub(3)..];
    let value = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - tail.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    Ok(LambdaEstimate { value, spread, midpoints })
}

/// Result of matching one rescaled profile onto another.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CollapseResult {
    /// Optimal stretch `s` such that `U_other(s xi) ~ U_ref(xi)`.
    pub scale: f64,
    /// Relative sup-norm mismatch at the optimum over the xi overlap.
    pub mismatch: f64,
}

fn interp_profile(xi: &[f64], u: &[f64], x: f64) -> f64 {
    let m = xi.len();
    let h = (xi[m - 1] - xi[0]) / (m - 1) as f64;
    let fspan = (x - xi[0]) / h;
    let j = (fspan.floor() as usize).clamp(1, m - 3);
    let s = fspan - j as f64;
    let w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    w0 * u[j - 1] + w1 * u[j] + w2 * u[j + 1] + w3 * u[j + 2]
}

/// One-parameter search for the stretch `s` minimizing the sup-norm
/// mismatch of `U_other(s xi)` against `U_ref(xi)` over the overlap of
/// the two xi ranges. Coarse log-spaced scan followed by golden-section
/// refinement; the best evaluated point is returned.
pub fn collapse_profiles(
    reference: &SelfSimilarFrame,
    other: &SelfSimilarFrame,
) -> Result<CollapseResult> {
    let ref_max = reference.xi.last().copied().unwrap_or(0.0);
    let oth_max = other.xi.last().copied().unwrap_or(0.0);
    if !(ref_max > 0.0 && oth_max > 0.0) {
        return Err(Error::NoProfileOverlap);
    }
    let umax = reference
        .u_profile
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    let mismatch_at = |s: f64| -> f64 {
        let hi = ref_max.min(oth_max / s);
        if !(hi > 0.0) {
            return f64::INFINITY;
        }
        let samples = 401;
        let mut worst = 0.0_f64;
        for j in 0..samples {
            let xi = -hi + 2.0 * hi * j as f64 / (samples - 1) as f64;
            let a = interp_profile(&reference.xi, &reference.u_profile, xi);
            let b = interp_profile(&other.xi, &other.u_profile, s * xi);
            worst = worst.max((a - b).abs());
        }
        worst / umax
    };

    let mut best = (1.0, mismatch_at(1.0));
    let scan = 160;
    for j in 0..=scan {
        let s = 10.0_f64.powf(-1.5 + 3.0 * j as f64 / scan as f64);
        let m = mismatch_at(s);
        if m < best.1 {
            best = (s, m);
        }
    }
    // golden-section refinement around the scan winner
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best.0 / 1.3, best.0 * 1.3);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (mismatch_at(x1), mismatch_at(x2));
    for _ in 0..60 {
        if f1 < f2 {
            if f1 < best.1 {
                best = (x1, f1);
            }
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = mismatch_at(x1);
        } else {
            if f2 < best.1 {
                best = (x2, f2);
            }
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = mismatch_at(x2);
        }
        if (hi - lo) < 1e-6 * best.0 {
            break;
        }
    }
    if !best.1.is_finite() {
        return Err(Error::NoProfileOverlap);
    }
    Ok(CollapseResult { scale: best.0, mismatch: best.1 })
}

/// Classification of the running regularity-criterion integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BkmClassification {
    /// The integrand shows no `c/(T-t)` trend so far.
    BoundedSoFar,
    /// The integrand tail fits `c/(T-t)`, whose integral diverges at `T`.
    SuperlinearGrowth,
}

/// Tail fit of the integrand against `c/(T-t)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BkmTailFit {
    #[serde(rename = "T")]
    pub t_blowup: f64,
    pub residual: f64,
}

/// Report of the blow-up-criterion monitor.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BkmReport {
    /// Final value of the running integral of `sup|u| + sup|v|`.
    pub integral: f64,
    /// Late-time slope of the integrand in `t`.
    pub growth_rate: f64,
    pub classification: BkmClassification,
    pub tail_fit: Option<BkmTailFit>,
}

/// Monitor the integral controlling `H^1` regularity: the solution stays
/// regular exactly as long as the running integral of
/// `sup|u| + sup|v|` is finite, so a tail of the integrand fitting
/// `c/(T-t)` signals divergence at `T`.
pub fn bkm_monitor(history: &[NormRecord]) -> BkmReport {
    let Some(last) = history.last() else {
        return BkmReport {
            integral: 0.0,
            growth_rate: 0.0,
            classification: BkmClassification::BoundedSoFar,
            tail_fit: None,
        };
    };
    let integral = last.bkm_integral;
    let quarter = history.len().saturating_sub(history.len() / 4).min(history.len() - 1);
    let tail = &history[quarter..];
    let growth_rate = if tail.len() >= 3 && tail.last().unwrap().t > tail[0].t {
        let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
        let ys: Vec<f64> = tail.iter().map(|r| r.bkm_integrand).collect();
        linear_fit(&ts, &ys).0
    } else {
        0.0
    };

    let max_integrand = history.iter().fold(0.0_f64, |m, r| m.max(r.bkm_integrand));
    let first_integrand = history[0].bkm_integrand;
    let mut tail_fit = None;
    let mut classification = BkmClassification::BoundedSoFar;
    if max_integrand > 10.0 * first_integrand.max(1e-300) {
        // final decade of integrand growth against c/(T-t)
        let window: Vec<&NormRecord> = history
            .iter()
            .filter(|r| r.bkm_integrand >= max_integrand / 10.0)
            .collect();
        if window.len() >= 10 {
            let ts: Vec<f64> = window.iter().map(|r| r.t).collect();
            let ys: Vec<f64> = window.iter().map(|r| 1.0 / r.bkm_integrand).collect();
            let (slope, intercept) = linear_fit(&ts, &ys);
            if slope < 0.0 {
                let residual = ts
                    .iter()
                    .zip(&ys)
                    .map(|(&t, &y)| ((y - (intercept + slope * t)) / (intercept + slope * t)).abs())
                    .fold(0.0_f64, f64::max);
                if residual < 0.05 {
                    classification = BkmClassification::SuperlinearGrowth;
                    tail_fit = Some(BkmTailFit { t_blowup: -intercept / slope, residual });
                }
            }
        }
    }
    BkmReport { integral, growth_rate, classification, tail_fit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn synthetic_history(t_blowup: f64, c: f64, n: usize) -> Vec<NormRecord> {
        // 1/sup = (T - t)/C sampled on [0, 0.9 T]
        (0..n)
            .map(|j| {
                let t = 0.9 * t_blowup * j as f64 / (n - 1) as f64;
                let sup = c / (t_blowup - t);
                NormRecord {
                    t,
                    sup_u: sup,
                    sup_v: 0.0,
                    l2_u: sup,
                    l2_v: 0.0,
                    h1_u: sup,
                    h1_v: 0.0,
                    bkm_integrand: sup,
                    bkm_integral: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn exact_linear_data_recovers_parameters() {
        let history = synthetic_history(2.0, 1.5, 200);
        let fit = fit_blowup(&history, &FitWindow::TimeRange { t0: 0.0, t1: 2.0 }).unwrap();
        assert!((fit.t_blowup - 2.0).abs() < 1e-10);
        assert!((fit.c_scale - 1.5).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
        assert!((fit.alpha_diag - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fit_self_consistency() {
        let history = synthetic_history(0.78, 1.68, 400);
        let fit = fit_blowup(&history, &FitWindow::LastDecades(1.0)).unwrap();
        let regen = synthetic_history(fit.t_blowup, fit.c_scale, 400);
        let fit2 = fit_blowup(&regen, &FitWindow::LastDecades(1.0)).unwrap();
        assert!((fit2.t_blowup - fit.t_blowup).abs() < 1e-10 * fit.t_blowup);
        assert!((fit2.c_scale - fit.c_scale).abs() < 1e-10 * fit.c_scale);
    }

    #[test]
    fn fit_rejects_flat_and_short_windows() {
        let history = synthetic_history(2.0, 1.5, 8);
        assert!(matches!(
            fit_blowup(&history, &FitWindow::TimeRange { t0: 0.0, t1: 2.0 }),
            Err(Error::FitWindowTooSmall(_))
        ));
        let mut flat = synthetic_history(2.0, 1.5, 50);
        for r in &mut flat {
            r.sup_u = 3.0;
        }
        assert!(matches!(
            fit_blowup(&flat, &FitWindow::TimeRange { t0: 0.0, t1: 2.0 }),
            Err(Error::FitNotDecreasing)
        ));
    }

    #[test]
    fn profile_recovers_synthetic_sech2() {
        let g = Grid::periodic(1.0, 1024).unwrap();
        let t_blowup = 1.0;
        let t = 1.0 - 1e-4;
        let remaining: f64 = t_blowup - t;
        let len = (remaining * (1.0 / remaining).ln()).sqrt();
        let x0 = 0.5;
        let u = Field::from_fn(&g, |x| {
            let xi = (x - x0) / len;
            (1.0 / remaining) / xi.cosh().powi(2)
        });
        let state = SolutionState::new(u, Field::zeros(&g), t);
        let fit = BlowupFit {
            t_blowup,
            c_scale: 1.0,
            alpha_exp: 1.0,
            alpha_diag: 1.0,
            window: (0.0, t),
            residual: 0.0,
            samples: 100,
        };
        let frame = extract_profile(&state, &fit, &ProfileParams::default()).unwrap();
        assert!((frame.x0 - x0).abs() < 1e-6);
        for (&xi, &uj) in frame.xi.iter().zip(&frame.u_profile) {
            let exact = 1.0 / xi.cosh().powi(2);
            assert!((uj - exact).abs() < 1e-6, "xi {xi}: {uj} vs {exact}");
        }
        // peak lands on the central sample by construction
        let mid = frame.u_profile.len() / 2;
        assert_eq!(argmax_abs(&frame.u_profile), mid);
        assert!(frame.u_profile[mid] > 0.0);
    }

    #[test]
    fn lambda_from_synthetic_trajectory() {
        // x0(t) = X - 2 sqrt(T - t) has (T-t)^{1/2} dx0/dt = 1 exactly
        let t_blowup = 1.0;
        let frame = |t: f64| SelfSimilarFrame {
            t,
            t_blowup,
            x0: 3.0 - 2.0 * (t_blowup - t).sqrt(),
            lengthscale: 1.0,
            xi: vec![-1.0, 0.0, 1.0],
            u_profile: vec![0.0, 1.0, 0.0],
            v_profile: vec![0.0, 0.0, 0.0],
            lambda_est: None,
        };
        let frames = vec![frame(0.9), frame(0.9001), frame(0.9002), frame(0.9003)];
        let est = estimate_lambda(&frames).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6, "lambda {}", est.value);
        assert!(est.spread < 1e-6);

        let still = vec![
            SelfSimilarFrame { x0: 0.4, ..frame(0.9) },
            SelfSimilarFrame { x0: 0.4, ..frame(0.91) },
            SelfSimilarFrame { x0: 0.4, ..frame(0.92) },
        ];
        assert_eq!(estimate_lambda(&still).unwrap().value, 0.0);

        assert!(matches!(
            estimate_lambda(&frames[..2]),
            Err(Error::TooFewFrames(2))
        ));
    }

    fn gaussian_frame(width: f64, xi_max: f64) -> SelfSimilarFrame {
        let m = 801;
        let xi: Vec<f64> = (0..m)
            .map(|j| -xi_max + 2.0 * xi_max * j as f64 / (m - 1) as f64)
            .collect();
        let u: Vec<f64> = xi.iter().map(|&s| (-(s / width).powi(2)).exp()).collect();
        SelfSimilarFrame {
            t: 0.9,
            t_blowup: 1.0,
            x0: 0.5,
            lengthscale: 1.0,
            xi,
            u_profile: u,
            v_profile: vec![0.0; m],
            lambda_est: None,
        }
    }

    #[test]
    fn collapse_identical_frames() {
        let f = gaussian_frame(1.0, 4.0);
        let r = collapse_profiles(&f, &f).unwrap();
        assert_eq!(r.scale, 1.0);
        assert!(r.mismatch < 1e-12);
    }

    #[test]
    fn collapse_recovers_prestretch() {
        let reference = gaussian_frame(1.0, 4.0);
        // other(xi) = reference(xi / 2): twice as wide
        let other = gaussian_frame(2.0, 8.0);
        let r = collapse_profiles(&reference, &other).unwrap();
        assert!((r.scale - 2.0).abs() < 1e-3, "scale {}", r.scale);
        assert!(r.mismatch < 1e-6, "mismatch {}", r.mismatch);
    }

    #[test]
    fn collapse_symmetry() {
        let a = gaussian_frame(1.0, 4.0);
        let b = gaussian_frame(1.7, 6.0);
        let ab = collapse_profiles(&a, &b).unwrap();
        let ba = collapse_profiles(&b, &a).unwrap();
        assert!((ab.scale * ba.scale - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bkm_zero_solution() {
        let history: Vec<NormRecord> = (0..20)
            .map(|j| NormRecord {
                t: j as f64 * 0.1,
                sup_u: 0.0,
                sup_v: 0.0,
                l2_u: 0.0,
                l2_v: 0.0,
                h1_u: 0.0,
                h1_v: 0.0,
                bkm_integrand: 0.0,
                bkm_integral: 0.0,
            })
            .collect();
        let report = bkm_monitor(&history);
        assert_eq!(report.integral, 0.0);
        assert_eq!(report.classification, BkmClassification::BoundedSoFar);
        assert!(report.tail_fit.is_none());
    }

    #[test]
    fn bkm_flags_blowup_trend() {
        let history = synthetic_history(2.0, 1.5, 500);
        let report = bkm_monitor(&history);
        assert_eq!(report.classification, BkmClassification::SuperlinearGrowth);
        let fit = report.tail_fit.unwrap();
        assert!((fit.t_blowup - 2.0).abs() < 0.02);
        assert!(report.growth_rate > 0.0);
    }
}
