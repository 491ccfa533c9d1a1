//! Run configuration, canonical initial conditions, and experiment
//! presets. Configs serialize to the same JSON schema that runs echo back
//! next to their artifacts, so any emitted `config.json` can be fed back
//! in unchanged.

use crate::analysis::{FitWindow, ProfileParams};
use crate::dynamics::{ModelSpec, Variant};
use crate::grid::{Field, Grid, SolutionState};
use crate::integrator::{StepPolicy, StopSpec};
use crate::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Grid description in a config file.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Periodic { period: f64, n: usize },
    Line { x_lo: f64, x_hi: f64, support: (f64, f64), n: usize },
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<Grid>> {
        match *self {
            GridSpec::Periodic { period, n } => Grid::periodic(period, n),
            GridSpec::Line { x_lo, x_hi, support, n } => Grid::line(x_lo, x_hi, support, n),
        }
    }

    pub fn extent(&self) -> f64 {
        match *self {
            GridSpec::Periodic { period, .. } => period,
            GridSpec::Line { x_lo, x_hi, .. } => x_hi - x_lo,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            GridSpec::Periodic { n, .. } | GridSpec::Line { n, .. } => n,
        }
    }

    pub fn set_n(&mut self, new_n: usize) {
        match self {
            GridSpec::Periodic { n, .. } | GridSpec::Line { n, .. } => *n = new_n,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, GridSpec::Periodic { .. })
    }
}

/// Initial data selector.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// Smooth bump `exp(1 - (1 - ((x-0.5)/0.05)^2)^{-1})` supported in
    /// `[0.45, 0.55]`, `v0 = 0`. Line grids only.
    Ic1,
    /// `u0 = 2 + sin(2 pi x) + cos(4 pi x)`, `v0 = 0`, period 1.
    Ic2,
    /// `u0 = 1/(1.2 + cos(2 pi x))`, `v0 = 0`, period 1.
    Ic3,
    /// Expressions in `x` evaluated on the grid; an optional support
    /// interval zeroes `u0` outside it and tags the field.
    Custom {
        u0: String,
        v0: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support: Option<(f64, f64)>,
    },
}

impl InitialCondition {
    fn name(&self) -> &'static str {
        match self {
            InitialCondition::Ic1 => "ic1",
            InitialCondition::Ic2 => "ic2",
            InitialCondition::Ic3 => "ic3",
            InitialCondition::Custom { .. } => "custom",
        }
    }
}

/// Everything needed to reproduce a run. Serializes to the JSON schema
/// used both for input configs and for the echo written next to results.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunConfig {
    pub name: String,
    pub model: ModelSpec,
    pub grid: GridSpec,
    pub initial_condition: InitialCondition,
    /// `None` derives the default policy from the grid extent; the echo
    /// always carries the resolved value.
    #[serde(default)]
    pub policy: Option<StepPolicy>,
    pub stop: StopSpec,
    #[serde(default)]
    pub snapshot_thresholds: Vec<f64>,
    /// Record the weighted mass `F(t)` each step (needs tagged `u0`).
    #[serde(default)]
    pub track_weighted_mass: bool,
    #[serde(default = "default_fit_window")]
    pub fit_window: FitWindow,
    #[serde(default = "ProfileParams::default")]
    pub profile: ProfileParams,
}

fn default_fit_window() -> FitWindow {
    FitWindow::Default
}

impl RunConfig {
    /// Step policy with defaults derived from the grid extent.
    pub fn resolved_policy(&self) -> StepPolicy {
        self.policy
            .unwrap_or_else(|| StepPolicy::for_extent(self.grid.extent()))
    }

    /// Copy of the config with the policy made explicit, for echoing.
    pub fn resolved(&self) -> RunConfig {
        let mut c = self.clone();
        c.policy = Some(self.resolved_policy());
        c
    }

    /// Kind constraints: the bump initial condition needs a line grid,
    /// the periodic ones a periodic grid, and viscosity is periodic-only.
    pub fn validate(&self) -> Result<()> {
        let periodic = self.grid.is_periodic();
        match (&self.initial_condition, periodic) {
            (InitialCondition::Ic1, true) => {
                return Err(Error::InitialConditionGrid { ic: "ic1".into(), kind: "line" })
            }
            (InitialCondition::Ic2, false) | (InitialCondition::Ic3, false) => {
                return Err(Error::InitialConditionGrid {
                    ic: self.initial_condition.name().into(),
                    kind: "periodic",
                })
            }
            _ => {}
        }
        if self.model.nu > 0.0 && !periodic {
            return Err(Error::ViscousLineRun);
        }
        Ok(())
    }
}

/// The standard bump profile of the compactly supported initial datum,
/// zero for `|s| >= 1`.
pub fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn compile_expression(expr: &str) -> Result<impl Fn(f64) -> f64> {
    let parsed: meval::Expr = expr.parse().map_err(|e: meval::Error| Error::InvalidExpression {
        expr: expr.to_string(),
        msg: e.to_string(),
    })?;
    parsed.bind("x").map_err(|e| Error::InvalidExpression {
        expr: expr.to_string(),
        msg: e.to_string(),
    })
}

/// Sample the configured initial condition on the grid. `v0 = 0` in the
/// canonical presets; custom expressions may set both fields.
pub fn build_initial_condition(config: &RunConfig, grid: &Arc<Grid>) -> Result<SolutionState> {
    config.validate()?;
    let (u0, v0) = match &config.initial_condition {
        InitialCondition::Ic1 => {
            let u = Field::from_fn(grid, |x| bump((x - 0.5) / 0.05)).with_support((0.45, 0.55));
            (u, Field::zeros(grid))
        }
        InitialCondition::Ic2 => {
            let u = Field::from_fn(grid, |x| {
                2.0 + (2.0 * PI * x).sin() + (4.0 * PI * x).cos()
            });
            (u, Field::zeros(grid))
        }
        InitialCondition::Ic3 => {
            let u = Field::from_fn(grid, |x| 1.0 / (1.2 + (2.0 * PI * x).cos()));
            (u, Field::zeros(grid))
        }
        InitialCondition::Custom { u0, v0, support } => {
            let fu = compile_expression(u0)?;
            let fv = compile_expression(v0)?;
            let mut u = match *support {
                Some((a, b)) => {
                    Field::from_fn(grid, |x| if x >= a && x <= b { fu(x) } else { 0.0 })
                }
                None => Field::from_fn(grid, &fu),
            };
            if let Some(s) = *support {
                u = u.with_support(s);
            }
            (u, Field::from_fn(grid, fv))
        }
    };
    if !u0.is_finite() || !v0.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(SolutionState::new(u0, v0, 0.0))
}

/// Names of the built-in presets, in display order.
pub fn preset_names() -> Vec<&'static str> {
    vec![
        "ic1-inviscid-n12",
        "ic1-inviscid-n14",
        "ic2-inviscid-n13",
        "ic2-inviscid-n14",
        "ic3-inviscid-n13",
        "ic3-inviscid-n14",
        "ic2-viscous-nu1e-3-n14",
        "ic3-viscous-nu1e-3-n14",
        "ic2-viscous-nu1e-2-n14",
        "ic3-viscous-nu1e-2-n14",
    ]
}

fn periodic_preset(name: &str, ic: InitialCondition, n: usize, nu: f64) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        model: ModelSpec { alpha: 1.0, beta: 1.0, nu, variant: Variant::Full },
        grid: GridSpec::Periodic { period: 1.0, n },
        initial_condition: ic,
        policy: None,
        stop: StopSpec { max_time: None, max_sup: Some(1e6) },
        snapshot_thresholds: vec![1e3, 1e4, 1e5],
        track_weighted_mass: false,
        fit_window: FitWindow::LastDecades(1.0),
        profile: ProfileParams::default(),
    }
}

/// Look up a built-in experiment preset by name.
pub fn preset(name: &str) -> Result<RunConfig> {
    let config = match name {
        "ic1-inviscid-n12" | "ic1-inviscid-n14" => {
            let n = if name.ends_with("n12") { 1 << 12 } else { 1 << 14 };
            RunConfig {
                name: name.to_string(),
                model: ModelSpec { alpha: 1.0, beta: 1.0, nu: 0.0, variant: Variant::Full },
                grid: GridSpec::Line { x_lo: 0.0, x_hi: 1.0, support: (0.45, 0.55), n },
                initial_condition: InitialCondition::Ic1,
                policy: None,
                stop: StopSpec { max_time: None, max_sup: Some(1e5) },
                // snapshot at the sup-norm values used for the reference
                // rescaled-profile comparison
                snapshot_thresholds: vec![3948.0, 17617.0, 78422.0],
                track_weighted_mass: true,
                fit_window: FitWindow::LastDecades(1.0),
                profile: ProfileParams::default(),
            }
        }
        "ic2-inviscid-n13" => periodic_preset(name, InitialCondition::Ic2, 1 << 13, 0.0),
        "ic2-inviscid-n14" => periodic_preset(name, InitialCondition::Ic2, 1 << 14, 0.0),
        "ic3-inviscid-n13" => periodic_preset(name, InitialCondition::Ic3, 1 << 13, 0.0),
        "ic3-inviscid-n14" => periodic_preset(name, InitialCondition::Ic3, 1 << 14, 0.0),
        "ic2-viscous-nu1e-3-n14" => periodic_preset(name, InitialCondition::Ic2, 1 << 14, 1e-3),
        "ic3-viscous-nu1e-3-n14" => periodic_preset(name, InitialCondition::Ic3, 1 << 14, 1e-3),
        "ic2-viscous-nu1e-2-n14" => periodic_preset(name, InitialCondition::Ic2, 1 << 14, 1e-2),
        "ic3-viscous-nu1e-2-n14" => periodic_preset(name, InitialCondition::Ic3, 1 << 14, 1e-2),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(config)
}
