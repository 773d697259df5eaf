//! Scenario execution and trajectory persistence.
//!
//! Output files are written atomically (temp file in the same directory,
//! then rename), floats with 17 significant digits so the CSV parses back to
//! the exact in-memory values.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::ScenarioConfig;
use super::fit::{DecayFit, fit_decay};
use crate::dynamics::{TrajectoryRecord, evolve};
use crate::measures::q_relaxation_weighted;
use crate::states::build_pure_mixed;
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "t,q_d,q_r,s_rel_star,s_rel_zero,bures_star,bures_zero,min_pt_eig,neg_count,trace_err,herm_err";

/// Measures at one end of the run, echoed into the summary.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureSnapshot {
    pub t: f64,
    pub q_d: f64,
    pub q_r: f64,
    /// Relaxation referenced to the amplitude-weighted targets |c_k|²/N_k.
    pub q_r_weighted: f64,
    pub s_rel_star: f64,
    pub s_rel_zero: f64,
    pub bures_star: f64,
    pub bures_zero: f64,
    pub min_pt_eig: f64,
    pub neg_count: usize,
}

/// JSON summary of one scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub seed: u64,
    pub env_seed: u64,
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
    pub n_records: usize,
    pub initial: MeasureSnapshot,
    pub r#final: MeasureSnapshot,
    pub q_d_fit: DecayFit,
    pub wall_clock_seconds: f64,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    /// Full configuration in the flat text format, for reproduction.
    pub config: String,
}

/// Run one scenario: evolve, fit the decoherence decay, and write the
/// trajectory CSV plus the JSON summary.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioSummary> {
    config.validate()?;
    let params = config.build_params()?;
    let spec = config.hamiltonian_spec();

    let started = Instant::now();
    let trajectory = evolve(
        &params,
        &spec,
        config.dt,
        config.n_steps,
        config.record_every,
        config.bath,
        config.env_seed,
    )?;
    let wall_clock_seconds = started.elapsed().as_secs_f64();

    let records = &trajectory.records;
    let q_d_series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.q_d)).collect();
    let q_d_fit = fit_decay(&q_d_series);

    let layout = params.layout();
    let rho0 = build_pure_mixed(&params);
    let initial = snapshot(
        &records[0],
        q_relaxation_weighted(&rho0, layout, params.amplitudes())?,
    );
    let r#final = snapshot(
        records.last().expect("at least the t = 0 record"),
        q_relaxation_weighted(&trajectory.final_state, layout, params.amplitudes())?,
    );

    let csv_path = config.csv_path();
    let json_path = config.json_path();
    write_csv(records, &csv_path)?;

    let summary = ScenarioSummary {
        scenario: config.scenario.clone(),
        seed: config.seed,
        env_seed: config.env_seed,
        dt: config.dt,
        n_steps: config.n_steps,
        record_every: config.record_every,
        n_records: records.len(),
        initial,
        r#final,
        q_d_fit,
        wall_clock_seconds,
        csv_path: csv_path.clone(),
        json_path: json_path.clone(),
        config: config.to_text(),
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("summary serialization failed: {e}")))?;
    write_atomic(&json_path, json.as_bytes())?;
    Ok(summary)
}

fn snapshot(record: &TrajectoryRecord, q_r_weighted: f64) -> MeasureSnapshot {
    MeasureSnapshot {
        t: record.t,
        q_d: record.q_d,
        q_r: record.q_r,
        q_r_weighted,
        s_rel_star: record.s_rel_star,
        s_rel_zero: record.s_rel_zero,
        bures_star: record.bures_star,
        bures_zero: record.bures_zero,
        min_pt_eig: record.min_pt_eig,
        neg_count: record.neg_count,
    }
}

/// 17 significant digits: enough for f64 round-trips.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(records: &[TrajectoryRecord], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 200 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(r.t),
            fmt(r.q_d),
            fmt(r.q_r),
            fmt(r.s_rel_star),
            fmt(r.s_rel_zero),
            fmt(r.bures_star),
            fmt(r.bures_zero),
            fmt(r.min_pt_eig),
            r.neg_count,
            fmt(r.trace_err),
            fmt(r.herm_err),
        ));
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_csv(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected CSV header {other:?} in {}",
                path.display()
            )));
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Config(format!(
                "line {}: expected 11 fields, got {}",
                i + 2,
                fields.len()
            )));
        }
        let f = |k: usize| -> Result<f64> {
            fields[k]
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad float '{}'", i + 2, fields[k])))
        };
        records.push(TrajectoryRecord {
            t: f(0)?,
            q_d: f(1)?,
            q_r: f(2)?,
            s_rel_star: f(3)?,
            s_rel_zero: f(4)?,
            bures_star: f(5)?,
            bures_zero: f(6)?,
            min_pt_eig: f(7)?,
            neg_count: fields[8]
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad count '{}'", i + 2, fields[8])))?,
            trace_err: f(9)?,
            herm_err: f(10)?,
        });
    }
    Ok(records)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    if let Some(dir) = dir {
        // directory entry durability is best-effort
        let _ = fs::File::open(dir).and_then(|d| d.sync_all());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::WeightsKind;

    fn smoke_config(out: &str) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::preset("fig1").unwrap();
        cfg.n_e = 12;
        cfg.n_steps = 20;
        cfg.record_every = 4;
        cfg.out = std::env::temp_dir().join(out);
        cfg
    }

    #[test]
    fn smoke_run_writes_parseable_csv_and_summary() {
        let cfg = smoke_config("decolab_smoke");
        let summary = run_scenario(&cfg).unwrap();
        assert_eq!(summary.n_records, 20 / 4 + 1);

        let text = fs::read_to_string(&summary.csv_path).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(text.lines().count(), summary.n_records + 1);

        let parsed = read_csv(&summary.csv_path).unwrap();
        assert_eq!(parsed.len(), summary.n_records);
        assert_eq!(parsed[0].t, 0.0);
        assert_eq!(parsed[0].neg_count, 1);

        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&summary.json_path).unwrap()).unwrap();
        assert_eq!(json["scenario"], "fig1");
        assert!(json["q_d_fit"]["verdict"].is_string());

        fs::remove_file(&summary.csv_path).unwrap();
        fs::remove_file(&summary.json_path).unwrap();
    }

    #[test]
    fn csv_round_trips_to_full_precision() {
        let cfg = smoke_config("decolab_roundtrip");
        let params = cfg.build_params().unwrap();
        let spec = cfg.hamiltonian_spec();
        let traj = evolve(&params, &spec, cfg.dt, 12, 3, cfg.bath, cfg.env_seed).unwrap();
        let path = std::env::temp_dir().join("decolab_roundtrip.csv");
        write_csv(&traj.records, &path).unwrap();
        let parsed = read_csv(&path).unwrap();
        assert_eq!(parsed.len(), traj.records.len());
        for (a, b) in traj.records.iter().zip(&parsed) {
            assert_eq!(a, b, "record did not survive the round trip");
        }
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn identical_configs_produce_byte_identical_output() {
        let cfg = smoke_config("decolab_det_a");
        let mut cfg_b = cfg.clone();
        cfg_b.out = std::env::temp_dir().join("decolab_det_b");
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg_b).unwrap();
        let bytes_a = fs::read(&a.csv_path).unwrap();
        let bytes_b = fs::read(&b.csv_path).unwrap();
        assert_eq!(bytes_a, bytes_b);
        for p in [a.csv_path, a.json_path, b.csv_path, b.json_path] {
            fs::remove_file(p).unwrap();
        }
    }

    #[test]
    fn invalid_configs_are_rejected_before_running() {
        let mut cfg = smoke_config("decolab_invalid");
        cfg.weights = WeightsKind::Explicit(vec![vec![1.0]]);
        assert!(run_scenario(&cfg).is_err());
    }
}
