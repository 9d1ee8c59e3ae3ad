//! `sweep`: run the minimizer across a frequency list (golden-mean
//! convergents or a user file) and emit one CSV row per frequency.

use std::path::Path;

use anyhow::{bail, Context, Result};

use sgflow::mather::{golden_convergents, sweep, RotationVector};
use sgflow::BoundaryCondition;

use crate::config::Settings;
use crate::report;

pub struct SweepArgs<'a> {
    pub golden: bool,
    pub levels: usize,
    pub omegas: Option<&'a Path>,
    pub window: i64,
    pub osc_side: f64,
}

/// Sweep the configured potential/operator across frequencies; item failures
/// are recorded in the rows rather than aborting the sweep.
pub fn run(settings: &Settings, args: &SweepArgs, json: bool) -> Result<bool> {
    let start = std::time::Instant::now();
    let (omegas, source) = frequency_list(settings, args)?;
    let out_dir = report::prepare_out_dir(
        settings,
        "sweep",
        serde_json::json!({
            "golden": args.golden,
            "levels": args.levels,
            "omegas": args.omegas.map(|p| p.display().to_string()),
            "window": args.window,
            "osc_side": args.osc_side,
        }),
    )?;

    if settings.bc != BoundaryCondition::Periodic {
        bail!("sweeps run on periodic grids; set grid.bc = \"periodic\"");
    }
    let rep = sweep(
        &omegas,
        settings.resolved.grid.n,
        &settings.coeffs,
        settings.discretization,
        &settings.params,
        &settings.potential,
        args.window,
        args.osc_side,
    );
    report::write_text(&out_dir.join("sweep.csv"), &rep.to_csv_string())?;

    let rows: Vec<serde_json::Value> = rep
        .rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "omega": r.omega.to_string(),
                "N": r.omega.den(),
                "residual": r.residual,
                "birkhoff_ok": r.birkhoff_ok,
                "osc_Q": r.osc_q,
                "sup_p": r.sup_p,
                "energy_per_cell": r.energy_per_cell,
                "converged": r.converged,
                "error": r.error,
            })
        })
        .collect();
    let n_converged = rep.rows.iter().filter(|r| r.converged).count();
    let n_errors = rep.rows.iter().filter(|r| r.error.is_some()).count();
    let summary = serde_json::json!({
        "command": "sweep",
        "source": source,
        "rows": rows,
        "n_rows": rep.rows.len(),
        "n_converged": n_converged,
        "n_errors": n_errors,
        "wall_time_ms": report::wall_ms(start),
    });
    report::write_json(&out_dir.join("summary.json"), &summary)?;

    if json {
        print!("{}", report::to_json_string(&summary)?);
    } else {
        println!(
            "sweep: {} rows ({n_converged} converged, {n_errors} errors) -> {}",
            rep.rows.len(),
            out_dir.join("sweep.csv").display()
        );
    }
    Ok(true)
}

fn frequency_list(
    settings: &Settings,
    args: &SweepArgs,
) -> Result<(Vec<RotationVector>, String)> {
    let (omegas, source) = match (args.golden, args.omegas) {
        (true, Some(_)) => bail!("choose either --golden or --omegas, not both"),
        (false, None) => bail!("choose a frequency source: --golden or --omegas <file>"),
        (true, None) => {
            if args.levels == 0 {
                bail!("--levels must be >= 1");
            }
            (golden_convergents(args.levels), format!("golden:{}", args.levels))
        }
        (false, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading frequency list {}", path.display()))?;
            let mut out = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                out.push(RotationVector::parse(line)?);
            }
            if out.is_empty() {
                bail!("frequency list {} contains no frequencies", path.display());
            }
            (out, path.display().to_string())
        }
    };
    for omega in &omegas {
        if omega.d() != settings.resolved.grid.d {
            bail!(
                "rotation vector {omega} lives in d={} but the config grid has d={}",
                omega.d(),
                settings.resolved.grid.d
            );
        }
    }
    Ok((omegas, source))
}
