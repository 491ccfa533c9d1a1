//! Run execution and plot-ready serialization: norm history and field
//! snapshots as CSV, fits and certificates as JSON with a full config
//! echo. Numbers are written with 17 significant digits so doubles
//! round-trip exactly.

use crate::analysis::{
    bkm_monitor, collapse_profiles, estimate_lambda, extract_profile, fit_blowup, BkmReport,
    BlowupFit, CollapseResult, LambdaEstimate, SelfSimilarFrame,
};
use crate::config::{build_initial_condition, RunConfig};
use crate::dynamics::Variant;
use crate::grid::SolutionState;
use crate::integrator::{run, RunOptions, RunResult, StopReason};
use crate::theory::{
    blowup_certificate, check_global_regularity, BlowupCertificate, CertificateKind,
    RegularityCertificate,
};
use crate::Result;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Completed run plus everything derived from it.
#[derive(Debug)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub result: RunResult,
    pub fit: Option<BlowupFit>,
    pub frames: Vec<SelfSimilarFrame>,
    pub lambda: Option<LambdaEstimate>,
    pub collapses: Vec<CollapseResult>,
    pub bkm: BkmReport,
    pub blowup_cert: Option<BlowupCertificate>,
    pub regularity_cert: Option<RegularityCertificate>,
}

/// Execute a configured run and the applicable post-processing: the
/// singularity fit, rescaled profiles for every snapshot (with pairwise
/// collapse against the first), the wave-speed estimate, the regularity
/// monitor, and initial-data certificates when `u0` carries a support tag.
pub fn execute(config: &RunConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let grid = config.grid.build()?;
    let initial = build_initial_condition(config, &grid)?;

    let blowup_cert = initial.u.support().and_then(|_| {
        let kind = match config.model.variant {
            Variant::Clm(_) => CertificateKind::Clm,
            _ if grid.is_periodic() => CertificateKind::Periodic,
            _ => CertificateKind::CompactLine,
        };
        blowup_certificate(&initial.u, &initial.v, kind).ok()
    });
    let regularity_cert = initial
        .u
        .support()
        .and_then(|_| check_global_regularity(&initial.u, &initial.v).ok());

    let options = RunOptions {
        snapshot_thresholds: config.snapshot_thresholds.clone(),
        track_weighted_mass: config.track_weighted_mass && initial.u.support().is_some(),
    };
    let result = run(
        initial,
        &config.model,
        &config.resolved_policy(),
        &config.stop,
        &options,
    )?;

    let fit = fit_blowup(&result.norm_history, &config.fit_window).ok();
    let mut frames = Vec::new();
    if let Some(fit) = &fit {
        for snapshot in &result.snapshots {
            if let Ok(frame) = extract_profile(snapshot, fit, &config.profile) {
                frames.push(frame);
            }
        }
    }
    if frames.len() >= 3 {
        if let Ok(est) = estimate_lambda(&frames) {
            let midpoints = est.midpoints.clone();
            for (frame, lambda) in frames.iter_mut().skip(1).zip(midpoints) {
                frame.lambda_est = Some(lambda);
            }
            frames.last_mut().expect("nonempty").lambda_est = Some(est.value);
        }
    }
    let collapses = frames
        .split_first()
        .map(|(first, rest)| {
            rest.iter()
                .filter_map(|frame| collapse_profiles(first, frame).ok())
                .collect()
        })
        .unwrap_or_default();
    let lambda = if frames.len() >= 3 {
        estimate_lambda(&frames).ok()
    } else {
        None
    };
    let bkm = bkm_monitor(&result.norm_history);

    Ok(RunArtifacts {
        config: config.resolved(),
        result,
        fit,
        frames,
        lambda,
        collapses,
        bkm,
        blowup_cert,
        regularity_cert,
    })
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Norm history CSV: `t,dt,sup_u,sup_v,l2_u,l2_v,h1_u,h1_v,bkm_integral`.
pub fn write_norms_csv(path: &Path, result: &RunResult) -> Result<()> {
    let mut out = String::from("t,dt,sup_u,sup_v,l2_u,l2_v,h1_u,h1_v,bkm_integral\n");
    for (rec, &dt) in result.norm_history.iter().zip(&result.dts) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(rec.t),
            fmt(dt),
            fmt(rec.sup_u),
            fmt(rec.sup_v),
            fmt(rec.l2_u),
            fmt(rec.l2_v),
            fmt(rec.h1_u),
            fmt(rec.h1_v),
            fmt(rec.bkm_integral),
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Field snapshot CSV: `x,u,v`.
pub fn write_snapshot_csv(path: &Path, state: &SolutionState) -> Result<()> {
    let mut out = String::from("x,u,v\n");
    for ((&x, &u), &v) in state
        .grid()
        .points()
        .iter()
        .zip(state.u.values())
        .zip(state.v.values())
    {
        out.push_str(&format!("{},{},{}\n", fmt(x), fmt(u), fmt(v)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Rescaled profile CSV: `xi,U,V`.
pub fn write_profile_csv(path: &Path, frame: &SelfSimilarFrame) -> Result<()> {
    let mut out = String::from("xi,U,V\n");
    for ((&xi, &u), &v) in frame.xi.iter().zip(&frame.u_profile).zip(&frame.v_profile) {
        out.push_str(&format!("{},{},{}\n", fmt(xi), fmt(u), fmt(v)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Fit record with the config echo, as written to `fit.json`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitDocument {
    #[serde(flatten)]
    pub fit: BlowupFit,
    pub config: RunConfig,
}

/// Certificates with the config echo, as written to `certificates.json`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CertificateDocument {
    pub blowup: Option<BlowupCertificate>,
    pub regularity: Option<RegularityCertificate>,
    pub config: RunConfig,
}

/// Machine-readable run summary, as written to `summary.json`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SummaryDocument {
    pub stop_reason: StopReason,
    pub steps_taken: usize,
    pub final_time: f64,
    pub final_sup_u: f64,
    pub snapshot_times: Vec<f64>,
    pub lambda: Option<LambdaEstimate>,
    pub collapses: Vec<CollapseResult>,
    pub bkm: BkmReport,
    pub config: RunConfig,
}

pub fn read_fit_json(path: &Path) -> Result<FitDocument> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Write the full artifact set into `dir` (created if missing):
/// `config.json`, `norms.csv`, `snapshot_<i>.csv`, `profile_<i>.csv`,
/// `fit.json`, `certificates.json`, `summary.json`.
pub fn write_artifacts(dir: &Path, artifacts: &RunArtifacts) -> Result<()> {
    fs::create_dir_all(dir)?;
    let config = &artifacts.config;
    write_json(&dir.join("config.json"), config)?;
    write_norms_csv(&dir.join("norms.csv"), &artifacts.result)?;
    for (i, snapshot) in artifacts.result.snapshots.iter().enumerate() {
        write_snapshot_csv(&dir.join(format!("snapshot_{i}.csv")), snapshot)?;
    }
    for (i, frame) in artifacts.frames.iter().enumerate() {
        write_profile_csv(&dir.join(format!("profile_{i}.csv")), frame)?;
    }
    if let Some(fit) = &artifacts.fit {
        write_json(
            &dir.join("fit.json"),
            &FitDocument { fit: *fit, config: config.clone() },
        )?;
    }
    if artifacts.blowup_cert.is_some() || artifacts.regularity_cert.is_some() {
        write_json(
            &dir.join("certificates.json"),
            &CertificateDocument {
                blowup: artifacts.blowup_cert,
                regularity: artifacts.regularity_cert,
                config: config.clone(),
            },
        )?;
    }
    let last = artifacts.result.norm_history.last();
    write_json(
        &dir.join("summary.json"),
        &SummaryDocument {
            stop_reason: artifacts.result.stop_reason,
            steps_taken: artifacts.result.steps_taken,
            final_time: last.map(|r| r.t).unwrap_or(0.0),
            final_sup_u: last.map(|r| r.sup_u).unwrap_or(0.0),
            snapshot_times: artifacts.result.snapshots.iter().map(|s| s.t).collect(),
            lambda: artifacts.lambda.clone(),
            collapses: artifacts.collapses.clone(),
            bkm: artifacts.bkm.clone(),
            config: config.clone(),
        },
    )?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Execute a preset or config and write its artifacts under `dir`.
pub fn run_to_directory(config: &RunConfig, dir: &Path) -> Result<RunArtifacts> {
    let artifacts = execute(config)?;
    write_artifacts(dir, &artifacts)?;
    Ok(artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::FitWindow;
    use crate::config::{GridSpec, InitialCondition};
    use crate::dynamics::ModelSpec;
    use crate::integrator::StopSpec;

    fn tiny_config() -> RunConfig {
        RunConfig {
            name: "tiny".into(),
            model: ModelSpec::experiment(),
            grid: GridSpec::Periodic { period: 1.0, n: 256 },
            initial_condition: InitialCondition::Ic2,
            policy: None,
            stop: StopSpec { max_time: None, max_sup: Some(50.0) },
            snapshot_thresholds: vec![10.0],
            track_weighted_mass: false,
            fit_window: FitWindow::Default,
            profile: crate::analysis::ProfileParams { xi_max: 2.0, samples: 101 },
        }
    }

    #[test]
    fn empty_history_gives_header_only_csv() {
        let dir = std::env::temp_dir().join(format!("blowup-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let g = crate::grid::Grid::periodic(1.0, 32).unwrap();
        let state = crate::grid::SolutionState::new(
            crate::grid::Field::zeros(&g),
            crate::grid::Field::zeros(&g),
            0.0,
        );
        let result = RunResult {
            norm_history: vec![],
            dts: vec![],
            weighted_mass: None,
            snapshots: vec![],
            stop_reason: StopReason::MaxTime,
            steps_taken: 0,
            final_state: state,
        };
        let path = dir.join("norms.csv");
        write_norms_csv(&path, &result).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,dt,sup_u,sup_v,l2_u,l2_v,h1_u,h1_v,bkm_integral\n");
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn fit_document_round_trips_bit_exact() {
        let fit = BlowupFit {
            t_blowup: 0.780894805082166,
            c_scale: 1.68253514799506,
            alpha_exp: 1.0,
            alpha_diag: 1.0123456789,
            window: (0.7, 0.78),
            residual: 3.7e-5,
            samples: 4211,
        };
        let doc = FitDocument { fit, config: tiny_config().resolved() };
        let text = serde_json::to_string(&doc).unwrap();
        let back: FitDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(doc, back);
        assert_eq!(doc.fit.t_blowup.to_bits(), back.fit.t_blowup.to_bits());
        // schema carries the required keys
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["T", "C", "alpha_exp", "window", "residual", "config"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }

    #[test]
    fn execute_writes_complete_artifact_set() {
        let dir = std::env::temp_dir().join(format!("blowup-artifacts-{}", std::process::id()));
        fs::remove_dir_all(&dir).ok();
        let config = tiny_config();
        let artifacts = run_to_directory(&config, &dir).unwrap();
        assert_eq!(artifacts.result.stop_reason, StopReason::SupNormThreshold);
        for name in ["config.json", "norms.csv", "summary.json", "snapshot_0.csv"] {
            assert!(dir.join(name).exists(), "missing {name}");
        }
        // echoed config parses back identically (policy resolved)
        let echoed: RunConfig =
            serde_json::from_str(&fs::read_to_string(dir.join("config.json")).unwrap()).unwrap();
        assert_eq!(echoed, config.resolved());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn identical_configs_produce_identical_bytes() {
        let base = std::env::temp_dir().join(format!("blowup-det-{}", std::process::id()));
        let (d1, d2) = (base.join("a"), base.join("b"));
        fs::remove_dir_all(&base).ok();
        let config = tiny_config();
        run_to_directory(&config, &d1).unwrap();
        run_to_directory(&config, &d2).unwrap();
        let a = fs::read(d1.join("norms.csv")).unwrap();
        let b = fs::read(d2.join("norms.csv")).unwrap();
        assert_eq!(a, b);
        fs::remove_dir_all(&base).ok();
    }
}
