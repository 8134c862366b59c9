//! Output files: schema-versioned CSV tables, field snapshots and run
//! metadata. Floats are written in shortest round-trip form, so identical
//! runs give identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::estimators::{ExceedanceTable, KbReport, MollLimitReport, StationarityReport};
use crate::integrator::Trajectory;
use crate::noise::ZetaAlphaTable;
use crate::spectral::snapshot::write_snapshot;
use crate::verify::CheckRow;

use super::config::RunConfig;

pub const SCHEMA_LINE: &str = "# schema=v1";
pub const VERSION: &str = concat!("sdns ", env!("CARGO_PKG_VERSION"));

/// Column order of the trajectory table.
pub const TRAJECTORY_COLUMNS: [&str; 7] =
    ["time", "norm_H", "norm_L4", "norm_Hdelta", "grad_u_L2", "z_L4", "energy_residual"];

/// Write `# schema=v1`, the header row and the records.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())?;
    }
    w.flush()?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    write_csv(
        path,
        &TRAJECTORY_COLUMNS,
        traj.records.iter().map(|r| {
            [r.time, r.norm_h, r.norm_l4, r.norm_hdelta, r.grad_u_l2, r.z_l4, r.energy_residual].map(num)
        }),
    )
}

/// Panel observables along the run: `time` plus one column per observable.
pub fn write_panel(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut header = vec!["time"];
    header.extend(traj.meta.panel.iter().map(String::as_str));
    write_csv(
        path,
        &header,
        traj.records.iter().zip(&traj.panel).map(|(r, row)| {
            std::iter::once(num(r.time))
                .chain(row.iter().map(|&x| num(x)))
                .collect::<Vec<_>>()
        }),
    )
}

/// `v` and `z` snapshots as `v_<index>.sdns` / `z_<index>.sdns`.
pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if traj.snapshots.is_empty() {
        return Ok(written);
    }
    fs::create_dir_all(dir)?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        for (tag, field) in [("v", &s.v), ("z", &s.z)] {
            let path = dir.join(format!("{tag}_{i:06}.sdns"));
            let mut out = BufWriter::new(File::create(&path)?);
            write_snapshot(&mut out, s.time, field)?;
            out.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn write_kb_report(path: &Path, report: &KbReport) -> Result<()> {
    let mut rows = Vec::new();
    for (h, &t) in report.horizons.iter().enumerate() {
        for (o, name) in report.observables.iter().enumerate() {
            let a = report.averages[h][o];
            let (gap, gap_se) = match h.checked_sub(1).map(|p| report.gaps[p][o]) {
                Some(g) => (num(g.mean), num(g.se)),
                None => (String::new(), String::new()),
            };
            rows.push(vec![name.clone(), num(t), num(a.mean), num(a.se), gap, gap_se, a.n.to_string()]);
        }
    }
    write_csv(path, &["observable", "horizon", "mean", "se", "gap_mean", "gap_se", "members"], rows)
}

pub fn write_exceedance(path: &Path, table: &ExceedanceTable) -> Result<()> {
    let mut rows = Vec::new();
    for (i, &r) in table.radii.iter().enumerate() {
        for (h, &t) in table.horizons.iter().enumerate() {
            let f = table.fractions[h][i];
            rows.push(vec![num(r), num(t), num(f.mean), num(f.se), f.n.to_string()]);
        }
    }
    write_csv(path, &["radius", "horizon", "fraction", "se", "members"], rows)
}

/// One row per (member, observable).
pub fn write_stationarity(path: &Path, rows: &[(u64, String, StationarityReport)], level: f64) -> Result<()> {
    write_csv(
        path,
        &["member", "observable", "ks", "p_value", "ess_first", "ess_second", "inconclusive", "passed"],
        rows.iter().map(|(m, name, r)| {
            vec![
                m.to_string(),
                name.clone(),
                num(r.ks),
                num(r.p_value),
                num(r.ess_first),
                num(r.ess_second),
                r.inconclusive.to_string(),
                r.passes(level).to_string(),
            ]
        }),
    )
}

pub fn write_zeta_alpha(path: &Path, table: &ZetaAlphaTable) -> Result<()> {
    write_csv(
        path,
        &["alpha", "h2_mean", "h2_se", "l4_mean", "l4_se", "samples"],
        table.rows.iter().map(|r| {
            vec![num(r.alpha), num(r.h2.mean), num(r.h2.se), num(r.l4.mean), num(r.l4.se), r.h2.n.to_string()]
        }),
    )
}

pub fn write_moll_limit(path: &Path, report: &MollLimitReport) -> Result<()> {
    let mut rows = Vec::new();
    for row in &report.rows {
        for (o, name) in report.observables.iter().enumerate() {
            let (gap, gap_se) = match &row.gap_to_previous {
                Some(g) => (num(g[o].mean), num(g[o].se)),
                None => (String::new(), String::new()),
            };
            let a = row.averages[o];
            rows.push(vec![num(row.m), name.clone(), num(a.mean), num(a.se), gap, gap_se]);
        }
    }
    write_csv(path, &["m", "observable", "mean", "se", "gap_mean", "gap_se"], rows)
}

pub fn write_ledger(path: &Path, rows: &[CheckRow]) -> Result<()> {
    write_csv(
        path,
        &["id", "anchor", "measured", "relation", "threshold", "passed", "samples", "digest", "note"],
        rows.iter().map(|r| {
            vec![
                r.id.clone(),
                r.anchor.clone(),
                num(r.measured),
                r.relation.symbol().to_string(),
                num(r.threshold),
                r.passed.to_string(),
                r.samples.to_string(),
                r.digest.clone(),
                r.note.clone(),
            ]
        }),
    )
}

/// `resolved_config.toml` plus `run.toml` (version, command, seed, digest).
pub fn write_run_metadata(dir: &Path, command: &str, config: &RunConfig) -> Result<()> {
    fs::write(dir.join("resolved_config.toml"), config.to_toml())?;
    let meta = format!(
        "version = \"{VERSION}\"\ncommand = \"{command}\"\nseed = {}\nconfig_digest = \"{}\"\nschema = \"v1\"\n",
        config.seed,
        config.digest()
    );
    fs::write(dir.join("run.toml"), meta)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_carries_schema_line_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["a", "b"], [vec![num(1.0), num(0.1)]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# schema=v1\na,b\n1,0.1\n");
    }
}
