//! Time advancement: classical RK4, the integrating-factor RK4 that
//! integrates the viscous symbol exactly, and the adaptive run loop with
//! `dt = c_dt / sup|u|`, norm recording, threshold snapshots, and
//! stopping criteria.

use crate::dynamics::{nonlinear_rhs, rhs, ModelSpec};
use crate::fft;
use crate::grid::{Field, NormRecord, SolutionState};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;

/// Adaptive time-step rule `dt = c_dt / sup|u|`, capped by `dt_max` while
/// the solution is small and floored by `dt_floor` (reaching the floor
/// terminates the run).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepPolicy {
    pub c_dt: f64,
    pub dt_max: f64,
    pub dt_floor: f64,
    /// Steps between refreshes of `dt` from the current sup norm.
    pub recompute_every: usize,
}

impl StepPolicy {
    /// Default policy for a domain of the given extent:
    /// `c_dt = 1e-3`, `dt_max = 1e-3 * extent`, `dt_floor = 1e-14`.
    pub fn for_extent(extent: f64) -> StepPolicy {
        StepPolicy {
            c_dt: 1e-3,
            dt_max: 1e-3 * extent,
            dt_floor: 1e-14,
            recompute_every: 1,
        }
    }
}

/// Run termination criteria. Both bounds are optional; the floor of the
/// step policy and non-finite values always terminate.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct StopSpec {
    pub max_time: Option<f64>,
    pub max_sup: Option<f64>,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StopReason {
    MaxTime,
    SupNormThreshold,
    DtFloor,
    NonFinite,
}

/// Everything recorded along a run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Norms at `t = 0` and after every accepted step.
    pub norm_history: Vec<NormRecord>,
    /// Step sizes aligned with `norm_history` (0 for the initial record).
    pub dts: Vec<f64>,
    /// Weighted mass `F(t) = integral (x - a) u^2 dx`, aligned with
    /// `norm_history`, when tracking was requested.
    pub weighted_mass: Option<Vec<f64>>,
    /// States captured when `sup|u|` first crosses each configured
    /// threshold.
    pub snapshots: Vec<SolutionState>,
    pub stop_reason: StopReason,
    pub steps_taken: usize,
    /// Last finite state.
    pub final_state: SolutionState,
}

/// Optional recording hooks for [`run`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Capture a snapshot the first time `sup|u|` crosses each value.
    pub snapshot_thresholds: Vec<f64>,
    /// Record `F(t) = integral (x-a) u^2` each step; requires `u` to carry
    /// a compact-support tag (the weight is `x - a` on it).
    pub track_weighted_mass: bool,
}

/// Classical four-stage RK4 advance of `(u, v)` by `dt`. Inviscid path;
/// viscous periodic runs use [`integrating_factor_rk4_step`].
pub fn rk4_step(state: &SolutionState, model: &ModelSpec, dt: f64) -> Result<SolutionState> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let (k1u, k1v) = rhs(state, model)?;
    let s2 = offset_state(state, &k1u, &k1v, 0.5 * dt);
    let (k2u, k2v) = rhs(&s2, model)?;
    let s3 = offset_state(state, &k2u, &k2v, 0.5 * dt);
    let (k3u, k3v) = rhs(&s3, model)?;
    let s4 = offset_state(state, &k3u, &k3v, dt);
    let (k4u, k4v) = rhs(&s4, model)?;

    let combine = |y: &Field, k1: &Field, k2: &Field, k3: &Field, k4: &Field| {
        let sixth = dt / 6.0;
        let values = y
            .values()
            .iter()
            .zip(k1.values())
            .zip(k2.values().iter().zip(k3.values()))
            .zip(k4.values())
            .map(|(((y, k1), (k2, k3)), k4)| y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
            .collect();
        let mut out = Field::from_values(y.grid(), values);
        if let Some(s) = y.support() {
            out = out.with_support(s);
        }
        out
    };
    let u = combine(&state.u, &k1u, &k2u, &k3u, &k4u);
    let v = combine(&state.v, &k1v, &k2v, &k3v, &k4v);
    let next = SolutionState::new(u, v, state.t + dt);
    if !next.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(next)
}

fn offset_state(base: &SolutionState, du: &Field, dv: &Field, step: f64) -> SolutionState {
    let add = |y: &Field, d: &Field| {
        let values = y
            .values()
            .iter()
            .zip(d.values())
            .map(|(&a, &b)| a + step * b)
            .collect();
        let mut out = Field::from_values(y.grid(), values);
        if let Some(s) = y.support() {
            out = out.with_support(s);
        }
        out
    };
    SolutionState::new(add(&base.u, du), add(&base.v, dv), base.t + step)
}

/// RK4 on the integrating-factor variables `e^{nu k^2 tau} u^`,
/// `e^{nu k^2 tau} v^` over one step, which integrates the viscous symbol
/// exactly and leaves the explicit stages free of stiffness. The exponent
/// is kept relative to the step start, so it stays bounded at late times.
pub fn integrating_factor_rk4_step(
    state: &SolutionState,
    model: &ModelSpec,
    dt: f64,
) -> Result<SolutionState> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let grid = state.grid();
    if !grid.is_periodic() {
        return Err(Error::ViscousLineRun);
    }
    let n = grid.n();
    let nu = model.nu;

    // half- and full-step decay factors per mode
    let mut e_half = vec![0.0; n];
    let mut e_full = vec![0.0; n];
    for j in 0..n {
        let k = grid.wavenumber_phys(j);
        e_half[j] = (-nu * k * k * 0.5 * dt).exp();
        e_full[j] = e_half[j] * e_half[j];
    }

    let spectrum = |f: &Field| f.spectral().to_vec();
    let physical = |spec: &[Complex64]| Field::from_values(grid, fft::inverse(spec));
    let transformed_rhs = |u: &Field, v: &Field, t: f64| -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let st = SolutionState::new(u.clone(), v.clone(), t);
        let (du, dv) = nonlinear_rhs(&st, model)?;
        Ok((spectrum(&du), spectrum(&dv)))
    };

    let u0 = spectrum(&state.u);
    let v0 = spectrum(&state.v);
    let t = state.t;

    let (n1u, n1v) = transformed_rhs(&state.u, &state.v, t)?;

    // stage a at tau = dt/2: E (y0 + dt/2 N1)
    let stage = |y0: &[Complex64], nst: &[Complex64], e: &[f64], w: f64| -> Vec<Complex64> {
        y0.iter()
            .zip(nst)
            .zip(e)
            .map(|((y, k), &e)| (y + w * k) * e)
            .collect()
    };
    let ua = physical(&stage(&u0, &n1u, &e_half, 0.5 * dt));
    let va = physical(&stage(&v0, &n1v, &e_half, 0.5 * dt));
    let (n2u, n2v) = transformed_rhs(&ua, &va, t + 0.5 * dt)?;

    // stage b at tau = dt/2: E y0 + dt/2 N2
    let stage_b = |y0: &[Complex64], nst: &[Complex64]| -> Vec<Complex64> {
        y0.iter()
            .zip(nst)
            .zip(&e_half)
            .map(|((y, k), &e)| y * e + 0.5 * dt * k)
            .collect()
    };
    let ub = physical(&stage_b(&u0, &n2u));
    let vb = physical(&stage_b(&v0, &n2v));
    let (n3u, n3v) = transformed_rhs(&ub, &vb, t + 0.5 * dt)?;

    // stage c at tau = dt: E^2 y0 + dt E N3
    let stage_c = |y0: &[Complex64], nst: &[Complex64]| -> Vec<Complex64> {
        y0.iter()
            .zip(nst)
            .zip(e_half.iter().zip(&e_full))
            .map(|((y, k), (&eh, &ef))| y * ef + dt * eh * k)
            .collect()
    };
    let uc = physical(&stage_c(&u0, &n3u));
    let vc = physical(&stage_c(&v0, &n3v));
    let (n4u, n4v) = transformed_rhs(&uc, &vc, t + dt)?;

    // combine: E^2 y0 + dt/6 (E^2 N1 + 2 E (N2 + N3) + N4)
    let combine = |y0: &[Complex64],
                   n1: &[Complex64],
                   n2: &[Complex64],
                   n3: &[Complex64],
                   n4: &[Complex64]|
     -> Vec<Complex64> {
        let sixth = dt / 6.0;
        (0..n)
            .map(|j| {
                y0[j] * e_full[j]
                    + sixth
                        * (n1[j] * e_full[j] + 2.0 * e_half[j] * (n2[j] + n3[j]) + n4[j])
            })
            .collect()
    };
    let u = physical(&combine(&u0, &n1u, &n2u, &n3u, &n4u));
    let v = physical(&combine(&v0, &n1v, &n2v, &n3v, &n4v));
    let next = SolutionState::new(u, v, t + dt);
    if !next.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(next)
}

fn step(state: &SolutionState, model: &ModelSpec, dt: f64) -> Result<SolutionState> {
    if model.nu > 0.0 {
        integrating_factor_rk4_step(state, model, dt)
    } else {
        rk4_step(state, model, dt)
    }
}

fn weighted_mass(state: &SolutionState) -> Result<f64> {
    let (a, _) = state.u.support().ok_or(Error::MissingSupportTag)?;
    let weighted: Vec<f64> = state
        .grid()
        .points()
        .iter()
        .zip(state.u.values())
        .map(|(&x, &u)| (x - a) * u * u)
        .collect();
    Ok(state.grid().integrate(&weighted))
}

/// Advance `initial` under `model` until a stopping criterion fires,
/// recording norms every step and snapshots at sup-norm thresholds.
///
/// The step size is refreshed from the sup norm of the step just
/// completed (lagged, per the policy), and the final step is clamped to
/// land exactly on `max_time` when one is set.
pub fn run(
    initial: SolutionState,
    model: &ModelSpec,
    policy: &StepPolicy,
    stop: &StopSpec,
    options: &RunOptions,
) -> Result<RunResult> {
    if model.nu > 0.0 && !initial.grid().is_periodic() {
        return Err(Error::ViscousLineRun);
    }
    let mut state = initial;
    let mut history = vec![NormRecord::measure(&state, None)];
    let mut dts = vec![0.0];
    let mut mass = if options.track_weighted_mass {
        Some(vec![weighted_mass(&state)?])
    } else {
        None
    };
    let mut snapshots = Vec::new();
    let mut crossed = vec![false; options.snapshot_thresholds.len()];
    let mut steps = 0usize;
    let mut dt = f64::NAN;

    let stop_reason = loop {
        let sup = history.last().expect("nonempty").sup_u;
        if let Some(max_sup) = stop.max_sup {
            if sup >= max_sup {
                break StopReason::SupNormThreshold;
            }
        }
        if let Some(max_time) = stop.max_time {
            if state.t >= max_time - 1e-15 * max_time.abs().max(1.0) {
                break StopReason::MaxTime;
            }
        }
        if steps % policy.recompute_every == 0 || !dt.is_finite() {
            dt = if sup > 0.0 {
                (policy.c_dt / sup).min(policy.dt_max)
            } else {
                policy.dt_max
            };
        }
        let mut clamped = dt;
        if let Some(max_time) = stop.max_time {
            if state.t + clamped > max_time {
                clamped = max_time - state.t;
            }
        }
        if clamped < policy.dt_floor {
            break StopReason::DtFloor;
        }
        state = match step(&state, model, clamped) {
            Ok(s) => s,
            Err(Error::NonFinite) => break StopReason::NonFinite,
            Err(e) => return Err(e),
        };
        steps += 1;
        history.push(NormRecord::measure(&state, history.last()));
        dts.push(clamped);
        if let Some(m) = mass.as_mut() {
            m.push(weighted_mass(&state)?);
        }
        let sup_now = history.last().expect("nonempty").sup_u;
        for (i, &thr) in options.snapshot_thresholds.iter().enumerate() {
            if !crossed[i] && sup_now >= thr {
                crossed[i] = true;
                snapshots.push(state.clone());
            }
        }
    };

    Ok(RunResult {
        norm_history: history,
        dts,
        weighted_mass: mass,
        snapshots,
        stop_reason,
        steps_taken: steps,
        final_state: state,
    })
}
