//! `minimize`: descend to a plane-like minimizer at one rational frequency,
//! writing the periodic part, the full state, and a summary.

use anyhow::{bail, Result};

use sgflow::mather::{birkhoff_check, energy_per_cell, find_minimizer, oscillation, RotationVector};
use sgflow::{BoundaryCondition, Grid};

use crate::config::Settings;
use crate::report;

/// Run `find_minimizer` for `omega_text` = "q1,...,qd/N" on a periodic grid
/// with the configured points per unit and window-`window` Birkhoff check.
pub fn run(settings: &Settings, omega_text: &str, window: i64, json: bool) -> Result<bool> {
    let start = std::time::Instant::now();
    let out_dir = report::prepare_out_dir(
        settings,
        "minimize",
        serde_json::json!({ "omega": omega_text, "window": window }),
    )?;

    let omega = RotationVector::parse(omega_text)?;
    if omega.d() != settings.resolved.grid.d {
        bail!(
            "rotation vector {omega} lives in d={} but the config grid has d={}",
            omega.d(),
            settings.resolved.grid.d
        );
    }
    if settings.bc != BoundaryCondition::Periodic {
        bail!("plane-like minimizers are defined on the periodic grid; set grid.bc = \"periodic\"");
    }
    // the fundamental period comes from the frequency, not from [grid].N
    let grid = Grid::new(
        omega.d(),
        omega.den() as usize,
        settings.resolved.grid.n,
        BoundaryCondition::Periodic,
    )?;
    let op = settings.operator(grid)?;

    let run = find_minimizer(omega, &op, &settings.params, &settings.potential)?;
    let birkhoff = birkhoff_check(&run.tilted, window, 1e-8)?;
    let center = vec![0.5; omega.d()];
    let osc = oscillation(&run.tilted, &center, 1.0)?;
    let epc = energy_per_cell(&run.tilted, &op, &settings.potential)?;

    run.tilted.p.write_csv(out_dir.join("minimizer_p.csv"))?;
    let mut u_csv = String::from(match omega.d() {
        1 => "i,x,u\n",
        _ => "i,x,y,u\n",
    });
    let u_values = run.tilted.u_values();
    for i in 0..grid.num_nodes() {
        let pos = grid.position(i);
        if omega.d() == 1 {
            u_csv.push_str(&format!("{},{},{}\n", i, pos[0], u_values[i]));
        } else {
            u_csv.push_str(&format!("{},{},{},{}\n", i, pos[0], pos[1], u_values[i]));
        }
    }
    report::write_text(&out_dir.join("minimizer_u.csv"), &u_csv)?;

    let summary = serde_json::json!({
        "command": "minimize",
        "omega": omega.to_string(),
        "N": omega.den(),
        "residual": run.residual,
        "converged": run.converged,
        "renormalizations": run.renormalizations,
        "birkhoff_ok": birkhoff.ok,
        "birkhoff_worst_violation": birkhoff.worst_violation,
        "osc_unit_cube": osc,
        "sup_p": run.tilted.p.max_norm(),
        "mean_p": run.tilted.p.mean(),
        "energy_per_cell": epc,
        "wall_time_ms": report::wall_ms(start),
    });
    report::write_json(&out_dir.join("summary.json"), &summary)?;

    if json {
        print!("{}", report::to_json_string(&summary)?);
    } else {
        println!(
            "minimize: omega={omega}, residual={:.3e}, converged={}, birkhoff={}, renormalizations={} -> {}",
            run.residual,
            run.converged,
            if birkhoff.ok { "ok" } else { "VIOLATED" },
            run.renormalizations,
            out_dir.display()
        );
    }
    Ok(true)
}
