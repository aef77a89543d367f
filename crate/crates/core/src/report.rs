//! File output: CSV series and structured JSON documents.
//!
//! Everything here is plotter-agnostic plumbing. Numbers go through the
//! shortest round-trip decimal formatting (`{}` on `f64`), so a CSV read
//! back into a double reproduces the bits that were written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::integrate::Trajectory;
use crate::scenarios::{ReproduceReport, SweepReport};
use crate::theorems::CampaignReport;

/// Trajectory samples as CSV: `t` plus one column per compartment of the
/// trajectory's system (absent compartments are omitted, not zero-filled).
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["t"];
    header.extend(traj.sys.compartments().iter().map(|c| c.label()));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for (t, state) in traj.times.iter().zip(&traj.states) {
        row.clear();
        row.push(t.to_string());
        row.extend(state.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Detected events as CSV: `t,kind,compartment`.
pub fn write_events_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["t", "kind", "compartment"])?;
    for e in &traj.events {
        w.write_record([e.t.to_string(), e.kind.label().to_string(), e.compartment_label().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Any serializable report as a pretty-printed JSON document.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// The JSON body of a reproduction report. The trajectory itself lives in
/// the CSV files next to it; duplicating thousands of samples into the JSON
/// would only bloat it.
#[derive(Serialize)]
struct ReproduceDoc<'a> {
    id: &'a str,
    preset: &'a crate::scenarios::ScenarioPreset,
    outcome: &'a crate::classify::OutcomeLabel,
    expected: &'a str,
    pass: bool,
    cross: &'a [crate::theorems::CrossValidation],
    events: &'a [crate::integrate::Event],
    final_time: f64,
    final_state: Vec<f64>,
}

/// Write the full reproduction bundle into `dir`:
/// `<id>_trajectory.csv`, `<id>_events.csv`, `<id>_report.json`.
/// Returns the paths written, in that order.
pub fn write_reproduce(rep: &ReproduceReport, dir: &Path) -> Result<[PathBuf; 3]> {
    std::fs::create_dir_all(dir)?;
    let id = rep.preset.id;
    let traj_path = dir.join(format!("{id}_trajectory.csv"));
    let events_path = dir.join(format!("{id}_events.csv"));
    let report_path = dir.join(format!("{id}_report.json"));
    write_trajectory_csv(&rep.trajectory, &traj_path)?;
    write_events_csv(&rep.trajectory, &events_path)?;
    let doc = ReproduceDoc {
        id,
        preset: &rep.preset,
        outcome: &rep.outcome,
        expected: rep.preset.expected.label(),
        pass: rep.pass,
        cross: &rep.cross,
        events: &rep.trajectory.events,
        final_time: rep.trajectory.last_time(),
        final_state: rep.trajectory.last_state().to_vec(),
    };
    write_json(&doc, &report_path)?;
    Ok([traj_path, events_path, report_path])
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    tool: &'static str,
    version: &'static str,
    spec: &'a crate::scenarios::SweepSpec,
    cells: usize,
    failures: usize,
}

/// Write a sweep as `sweep.csv` plus `sweep_manifest.json` in `dir`.
/// CSV columns: one per swept axis (named by its parameter key), then
/// `outcome`, `hopf_gap_sign` (side of H* - sqrt(K_hat), empty when H* is
/// undefined), `r0_v`, and `error`. Returns the two paths.
pub fn write_sweep(rep: &SweepReport, dir: &Path) -> Result<[PathBuf; 2]> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("sweep.csv");
    let manifest_path = dir.join("sweep_manifest.json");

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&csv_path)?));
    let mut header: Vec<&str> = rep.spec.axes.iter().map(|a| a.key.as_str()).collect();
    header.extend(["outcome", "hopf_gap_sign", "r0_v", "error"]);
    w.write_record(&header)?;
    for cell in &rep.cells {
        let mut row: Vec<String> = cell.coords.iter().map(|v| v.to_string()).collect();
        row.push(cell.outcome.map(|k| k.label().to_string()).unwrap_or_default());
        row.push(cell.hopf_gap_sign.map(|s| s.to_string()).unwrap_or_default());
        row.push(cell.r0_v.map(|v| v.to_string()).unwrap_or_default());
        row.push(cell.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;

    let manifest = SweepManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        spec: &rep.spec,
        cells: rep.cells.len(),
        failures: rep.cells.iter().filter(|c| c.error.is_some()).count(),
    };
    write_json(&manifest, &manifest_path)?;
    Ok([csv_path, manifest_path])
}

/// Campaign summary CSV: `draw,theorem,clause,hypothesis_holds,agreement`.
pub fn write_campaign_csv(rep: &CampaignReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["draw", "theorem", "clause", "hypothesis_holds", "agreement"])?;
    for row in &rep.rows {
        w.write_record([
            row.draw.to_string(),
            row.theorem.to_string(),
            row.clause.to_string(),
            row.hypothesis_holds.to_string(),
            format!("{:?}", row.agreement).to_lowercase(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, IntegrationConfig};
    use crate::params::Params;
    use crate::state::SystemId;

    fn small_traj() -> Trajectory {
        let p = Params {
            r: 1500.0,
            k_hat: 1e6,
            rho: 0.9,
            d_h: 0.15,
            d_m: 0.1,
            mu_h: 0.1,
            mu_m: 0.01,
            alpha: 0.005,
            c: 0.005,
            beta_h: 0.24,
            beta_mh_hat: 0.03,
            beta_mh_tilde: 0.005,
            beta_hm_hat: 0.03,
        };
        integrate(
            SystemId::MiteFree,
            &[4001.0, 10.0],
            &p,
            &IntegrationConfig::to(30.0),
        )
        .unwrap()
    }

    #[test]
    fn trajectory_csv_round_trips_bits() {
        let traj = small_traj();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trajectory_csv(&traj, &path).unwrap();

        let mut r = csv::Reader::from_path(&path).unwrap();
        let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, ["t", "S_h", "I_h"]);
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), traj.len());
        for (row, (t, state)) in rows.iter().zip(traj.times.iter().zip(&traj.states)) {
            assert_eq!(row[0].parse::<f64>().unwrap(), *t);
            for (cell, v) in row.iter().skip(1).zip(state.iter()) {
                assert_eq!(cell.parse::<f64>().unwrap(), *v, "bit-exact round trip");
            }
        }
    }

    #[test]
    fn reproduce_bundle_writes_three_files() {
        let rep = crate::scenarios::reproduce("fig2_virusfree").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_reproduce(&rep, dir.path()).unwrap();
        for p in &paths {
            assert!(p.exists(), "{p:?}");
        }
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&paths[2]).unwrap()).unwrap();
        assert_eq!(doc["id"], "fig2_virusfree");
        assert_eq!(doc["pass"], true);
        assert_eq!(doc["outcome"]["kind"], "Coexistence");
        assert!(doc["cross"].as_array().unwrap().len() > 0);
    }

    #[test]
    fn sweep_files_carry_manifest_and_quoted_errors() {
        use crate::scenarios::{sweep, SweepAxis, SweepSpec, X0Rule};
        let base = crate::scenarios::preset("fig2_virusfree").unwrap();
        let spec = SweepSpec {
            sys: SystemId::VirusFree,
            base: base.params,
            axes: vec![SweepAxis {
                key: "d_h".into(),
                lo: -0.05,
                hi: 0.15,
                count: 2,
            }],
            x0: X0Rule::Fixed(vec![4001.0, 5.0]),
            horizon: 50.0,
        };
        let rep = sweep(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let [csv_path, manifest_path] = write_sweep(&rep, dir.path()).unwrap();

        let mut r = csv::Reader::from_path(&csv_path).unwrap();
        let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, ["d_h", "outcome", "hopf_gap_sign", "r0_v", "error"]);
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert!(!rows[0][4].is_empty(), "validation error recorded");
        assert!(rows[0][1].is_empty());
        assert!(!rows[1][1].is_empty());

        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
        assert_eq!(m["cells"], 2);
        assert_eq!(m["failures"], 1);
        assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(m["spec"]["axes"][0]["key"], "d_h");
    }
}
