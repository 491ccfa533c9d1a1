//! Right-hand sides for the nonlocal system and its variants, plus the
//! coefficient normalization mapping the `(alpha, beta)` system onto the
//! canonical `(2, 1)` one.

use crate::grid::{Field, SolutionState};
use crate::hilbert::hilbert;
use crate::{grid, Error, Result};

/// Reduced scalar model selected by [`Variant::Clm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ClmForm {
    /// `u_t = u H(u)`.
    Scalar,
    /// `w_t = 4 w H(w)`, the `w = u^2` reduction of the full system with
    /// `v` slaved to `H(u^2)`.
    Reduction,
}

impl ClmForm {
    pub fn coefficient(self) -> f64 {
        match self {
            ClmForm::Scalar => 1.0,
            ClmForm::Reduction => 4.0,
        }
    }
}

/// System variant.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Variant {
    /// `u_t = alpha u v, v_t = beta H(u^2)`.
    Full,
    /// Scalar reduction evolving `u` alone; `v` is ignored and held at 0.
    Clm(ClmForm),
    /// `v_t = -beta H(u^2)`; traveling waves flip direction.
    SignFlipped,
}

/// Coefficients of the system.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelSpec {
    /// Coefficient of `u v` in the `u` equation (2 in the analysis
    /// normalization, 1 in the numerical experiments).
    pub alpha: f64,
    /// Coefficient of `H(u^2)` in the `v` equation.
    pub beta: f64,
    /// Viscosity; viscous runs are periodic-only and handled by the
    /// integrating-factor stepper.
    pub nu: f64,
    pub variant: Variant,
}

impl ModelSpec {
    /// Canonical analysis normalization `u_t = 2uv, v_t = H(u^2)`.
    pub fn canonical() -> ModelSpec {
        ModelSpec { alpha: 2.0, beta: 1.0, nu: 0.0, variant: Variant::Full }
    }

    /// The normalization used in the numerical experiments:
    /// `u_t = uv, v_t = H(u^2)`.
    pub fn experiment() -> ModelSpec {
        ModelSpec { alpha: 1.0, beta: 1.0, nu: 0.0, variant: Variant::Full }
    }

    pub fn with_viscosity(mut self, nu: f64) -> ModelSpec {
        self.nu = nu;
        self
    }

    /// Scalar model `u_t = u H(u)`.
    pub fn clm() -> ModelSpec {
        ModelSpec { alpha: 0.0, beta: 0.0, nu: 0.0, variant: Variant::Clm(ClmForm::Scalar) }
    }
}

/// Time rescaling `gamma` and `v` rescaling `mu` identifying the
/// `(alpha, beta)` system with the canonical one through
/// `u(x,t) = u~(x, gamma t)`, `v(x,t) = mu v~(x, gamma t)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScalingParams {
    pub gamma: f64,
    pub mu: f64,
}

/// `gamma = sqrt(alpha beta / 2)`, `mu = sgn(alpha) sqrt(2 beta / alpha)`;
/// defined only for `alpha * beta > 0`.
pub fn normalize_scaling(model: &ModelSpec) -> Result<ScalingParams> {
    let (alpha, beta) = (model.alpha, model.beta);
    if !(alpha * beta > 0.0) {
        return Err(Error::InvalidScaling { alpha, beta });
    }
    Ok(ScalingParams {
        gamma: (alpha * beta / 2.0).sqrt(),
        mu: alpha.signum() * (2.0 * beta / alpha).sqrt(),
    })
}

fn pointwise_product(a: &Field, b: &Field) -> Field {
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| x * y)
        .collect();
    Field::from_values(a.grid(), values)
}

pub(crate) fn square(f: &Field) -> Field {
    let mut out = pointwise_product(f, f);
    if let Some(s) = f.support() {
        out = out.with_support(s);
    }
    out
}

/// Nonlinear part of the right-hand side:
/// `du = alpha u v`, `dv = +-beta H(u^2)` (or the scalar reduction).
/// Viscous terms are excluded here; the integrating-factor stepper
/// integrates them exactly.
pub fn nonlinear_rhs(state: &SolutionState, model: &ModelSpec) -> Result<(Field, Field)> {
    if state.u.grid() != state.v.grid() {
        return Err(Error::GridMismatch);
    }
    match model.variant {
        Variant::Full | Variant::SignFlipped => {
            let sign = if matches!(model.variant, Variant::SignFlipped) { -1.0 } else { 1.0 };
            let mut du = pointwise_product(&state.u, &state.v);
            for v in du.values_mut() {
                *v *= model.alpha;
            }
            if let Some(s) = state.u.support() {
                du = du.with_support(s);
            }
            let mut dv = hilbert(&square(&state.u))?;
            for v in dv.values_mut() {
                *v *= sign * model.beta;
            }
            Ok((du, dv))
        }
        Variant::Clm(form) => {
            let du = clm_rhs(&state.u, form)?;
            Ok((du, Field::zeros(state.grid())))
        }
    }
}

/// Full right-hand side including viscous terms (periodic grids only when
/// `nu > 0`). Used directly by the inviscid stepper and by tests; viscous
/// production runs route `nu` through the integrating factor instead.
pub fn rhs(state: &SolutionState, model: &ModelSpec) -> Result<(Field, Field)> {
    let (mut du, mut dv) = nonlinear_rhs(state, model)?;
    if model.nu != 0.0 {
        if !state.grid().is_periodic() {
            return Err(Error::ViscousLineRun);
        }
        let uxx = grid::spectral_second_derivative(&state.u)?;
        let vxx = grid::spectral_second_derivative(&state.v)?;
        for (d, &w) in du.values_mut().iter_mut().zip(uxx.values()) {
            *d += model.nu * w;
        }
        for (d, &w) in dv.values_mut().iter_mut().zip(vxx.values()) {
            *d += model.nu * w;
        }
    }
    Ok((du, dv))
}

/// Scalar-model right-hand side `c w H(w)` with `c` set by the form.
pub fn clm_rhs(w: &Field, form: ClmForm) -> Result<Field> {
    let hw = hilbert(w)?;
    let mut out = pointwise_product(w, &hw);
    let c = form.coefficient();
    for v in out.values_mut() {
        *v *= c;
    }
    if let Some(s) = w.support() {
        out = out.with_support(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::hilbert::{weighted_bilinear_lhs, TestWeight};
    use std::f64::consts::PI;

    #[test]
    fn zero_u_freezes_everything() {
        let g = Grid::periodic(1.0, 64).unwrap();
        let state = SolutionState::new(
            Field::zeros(&g),
            Field::from_fn(&g, |x| (2.0 * PI * x).cos()),
            0.0,
        );
        let (du, dv) = rhs(&state, &ModelSpec::experiment()).unwrap();
        assert!(du.values().iter().all(|&v| v == 0.0));
        assert!(dv.values().iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn constant_u_has_static_v() {
        let g = Grid::periodic(1.0, 64).unwrap();
        let state = SolutionState::new(Field::from_fn(&g, |_| 2.0), Field::zeros(&g), 0.0);
        let (du, dv) = rhs(&state, &ModelSpec::experiment()).unwrap();
        assert!(du.values().iter().all(|&v| v == 0.0)); // u * 0
        assert!(dv.values().iter().all(|&v| v == 0.0)); // H(4) = 0
    }

    #[test]
    fn sine_squared_transform() {
        // H(sin^2) = H(1/2 - cos(4 pi x)/2) = -sin(4 pi x)/2
        let g = Grid::periodic(1.0, 128).unwrap();
        let state = SolutionState::new(
            Field::from_fn(&g, |x| (2.0 * PI * x).sin()),
            Field::zeros(&g),
            0.0,
        );
        let (_, dv) = rhs(&state, &ModelSpec::experiment()).unwrap();
        for (&x, &v) in g.points().iter().zip(dv.values()) {
            assert!((v + 0.5 * (4.0 * PI * x).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn scaling_params() {
        let s = normalize_scaling(&ModelSpec::canonical()).unwrap();
        assert!((s.gamma - 1.0).abs() < 1e-15 && (s.mu - 1.0).abs() < 1e-15);

        let s = normalize_scaling(&ModelSpec::experiment()).unwrap();
        assert!((s.gamma - 0.5_f64.sqrt()).abs() < 1e-15);
        assert!((s.mu - 2.0_f64.sqrt()).abs() < 1e-15);

        let flipped = ModelSpec { alpha: -2.0, beta: -1.0, ..ModelSpec::canonical() };
        let s = normalize_scaling(&flipped).unwrap();
        assert!((s.gamma - 1.0).abs() < 1e-15 && (s.mu + 1.0).abs() < 1e-15);

        let bad = ModelSpec { alpha: 1.0, beta: -1.0, ..ModelSpec::canonical() };
        assert!(normalize_scaling(&bad).is_err());
    }

    #[test]
    fn clm_trivial_cases() {
        let g = Grid::periodic(1.0, 64).unwrap();
        assert!(clm_rhs(&Field::zeros(&g), ClmForm::Scalar)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        assert!(clm_rhs(&Field::from_fn(&g, |_| 1.5), ClmForm::Reduction)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn clm_weighted_mass_growth_rate() {
        // d/dt integral (x-a) u = integral (x-a) u H(u) = (1/2pi)(integral u)^2
        let g = Grid::line(0.0, 1.0, (0.45, 0.55), 2048).unwrap();
        let u = Field::from_fn(&g, |x| {
            let s = (x - 0.5) / 0.05;
            if s.abs() < 1.0 { (1.0 - 1.0 / (1.0 - s * s)).exp() } else { 0.0 }
        })
        .with_support((0.45, 0.55));
        let w = TestWeight::shifted_linear(0.45);
        let lhs = weighted_bilinear_lhs(&u, &w).unwrap();
        let mass = g.integrate(u.values());
        let expect = mass * mass / (2.0 * PI);
        assert!((lhs - expect).abs() < 1e-6 * expect, "lhs {lhs:.9e} expect {expect:.9e}");
        // and clm_rhs is exactly u * H(u) under the scalar form
        let du = clm_rhs(&u, ClmForm::Scalar).unwrap();
        let weighted: Vec<f64> = g
            .points()
            .iter()
            .zip(du.values())
            .map(|(&x, &d)| (x - 0.45) * d)
            .collect();
        let rate = g.integrate(&weighted);
        assert!((rate - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn support_is_preserved_by_du() {
        let g = Grid::line(0.0, 1.0, (0.45, 0.55), 256).unwrap();
        let u = Field::from_fn(&g, |x| {
            let s = (x - 0.5) / 0.05;
            if s.abs() < 1.0 { (1.0 - 1.0 / (1.0 - s * s)).exp() } else { 0.0 }
        })
        .with_support((0.45, 0.55));
        let v = Field::from_fn(&g, |x| 1.0 + x);
        let state = SolutionState::new(u, v, 0.0);
        let (du, dv) = rhs(&state, &ModelSpec::canonical()).unwrap();
        assert!(du.respects_support());
        assert_eq!(du.support(), Some((0.45, 0.55)));
        assert_eq!(dv.support(), None);
    }

    #[test]
    fn viscous_rhs_rejected_on_line() {
        let g = Grid::line(0.0, 1.0, (0.4, 0.6), 64).unwrap();
        let state = SolutionState::new(Field::zeros(&g), Field::zeros(&g), 0.0);
        let model = ModelSpec::experiment().with_viscosity(1e-3);
        assert!(matches!(rhs(&state, &model), Err(Error::ViscousLineRun)));
    }
}
