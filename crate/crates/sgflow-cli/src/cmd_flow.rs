//! `flow`: evolve the descent from a chosen initial state, writing the
//! trajectory series as CSV and a run summary as JSON.

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sgflow::flow::{energy, evolve, residual};
use sgflow::Field;

use crate::config::Settings;
use crate::report;

/// Evolve from `u0_source` ("zero", "random", or a state CSV path). Returns
/// false on a NaN abort, after dumping the last good state.
pub fn run(settings: &Settings, u0_source: &str, amplitude: f64, json: bool) -> Result<bool> {
    let start = std::time::Instant::now();
    let out_dir = report::prepare_out_dir(
        settings,
        "flow",
        serde_json::json!({ "u0": u0_source, "amplitude": amplitude }),
    )?;

    let grid = settings.grid()?;
    let op = settings.operator(grid)?;
    let u0 = match u0_source {
        "zero" => Field::zeros(grid),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed());
            Field::random_band_limited(grid, amplitude, &mut rng)
        }
        path => {
            let f = Field::read_csv(path)
                .with_context(|| format!("loading initial state from {path}"))?;
            if *f.grid() != grid {
                bail!(
                    "initial state grid (d={} N={} n={} bc={}) does not match the config grid \
                     (d={} N={} n={} bc={})",
                    f.grid().d(),
                    f.grid().period(),
                    f.grid().points_per_period(),
                    f.grid().bc().as_str(),
                    grid.d(),
                    grid.period(),
                    grid.points_per_period(),
                    grid.bc().as_str()
                );
            }
            f
        }
    };

    let traj = evolve(
        &u0,
        settings.scheme.as_ref(),
        &op,
        &settings.params,
        settings.potential.as_ref(),
    )?;

    report::write_text(&out_dir.join("trajectory.csv"), &traj.to_csv_string())?;
    let last = traj.final_state();
    let state_file = if traj.nan_at.is_some() { "last_good_state.csv" } else { "final_state.csv" };
    last.write_csv(out_dir.join(state_file))?;

    let final_energy = energy(last, &op, settings.potential.as_ref())?;
    let final_residual = residual(last, &op, settings.potential.as_ref())?;
    let steps = (traj.final_time() / settings.params.dt).round() as u64;
    let summary = serde_json::json!({
        "command": "flow",
        "u0": u0_source,
        "final_time": traj.final_time(),
        "steps": steps,
        "final_energy": final_energy,
        "final_residual": final_residual,
        "converged": traj.converged,
        "energy_violations": traj.energy_violations.len(),
        "nan_at": traj.nan_at,
        "state_file": state_file,
        "wall_time_ms": report::wall_ms(start),
    });
    report::write_json(&out_dir.join("summary.json"), &summary)?;

    if json {
        print!("{}", report::to_json_string(&summary)?);
    } else if let Some(t) = traj.nan_at {
        println!(
            "flow: state went non-finite at t={t:.6}; last good state -> {}",
            out_dir.join(state_file).display()
        );
    } else {
        println!(
            "flow: t={:.4}, steps={steps}, energy={final_energy:.6e}, residual={final_residual:.3e}, converged={} -> {}",
            traj.final_time(),
            traj.converged,
            out_dir.display()
        );
    }
    Ok(traj.nan_at.is_none())
}
