//! Text formats: Young-measure files, cell-measure files, trajectory
//! tables, and reports. All numeric output carries 17 significant digits so
//! files round-trip bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::measures::{Atom, CellMeasure, MeasureError, SpaceTimeGrid, YoungMeasureField};
use crate::solver::{DiagnosticsReport, Trajectory};
use crate::state::ConsState;
use crate::weakstrong::GronwallReport;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Full-precision float: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_field<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, IoError> {
    token.parse().map_err(|_| IoError::Parse {
        line,
        message: format!("cannot parse {what} from {token:?}"),
    })
}

fn grid_header(grid: &SpaceTimeGrid) -> String {
    format!(
        "# grid {} {} {} {}\n",
        grid.n_t,
        grid.n_x,
        fmt_f64(grid.dt),
        fmt_f64(grid.dx)
    )
}

fn parse_grid_header(line: &str) -> Option<SpaceTimeGrid> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() == 6 && tokens[0] == "#" && tokens[1] == "grid" {
        let n_t: usize = tokens[2].parse().ok()?;
        let n_x: usize = tokens[3].parse().ok()?;
        let dt: f64 = tokens[4].parse().ok()?;
        let dx: f64 = tokens[5].parse().ok()?;
        if n_t == 0 || n_x == 0 || !(dt > 0.0) || !(dx > 0.0) {
            return None;
        }
        Some(SpaceTimeGrid::new(n_t, n_x, dt, dx))
    } else {
        None
    }
}

/// One atom per line: `t_index x_index weight rho m E`.
pub fn young_measure_to_string(field: &YoungMeasureField<1>) -> String {
    let grid = field.grid();
    let mut out = grid_header(grid);
    for t in 0..grid.n_t {
        for x in 0..grid.n_x {
            for atom in field.atoms(t, x) {
                let _ = writeln!(
                    out,
                    "{t} {x} {} {} {} {}",
                    fmt_f64(atom.weight),
                    fmt_f64(atom.state.rho),
                    fmt_f64(atom.state.momentum[0]),
                    fmt_f64(atom.state.total_energy)
                );
            }
        }
    }
    out
}

pub fn write_young_measure(path: &Path, field: &YoungMeasureField<1>) -> Result<(), IoError> {
    fs::write(path, young_measure_to_string(field))?;
    Ok(())
}

pub fn young_measure_from_string(text: &str) -> Result<YoungMeasureField<1>, IoError> {
    let mut grid: Option<SpaceTimeGrid> = None;
    let mut raw: Vec<(usize, usize, Atom<1>)> = Vec::new();
    let mut max_t = 0usize;
    let mut max_x = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if grid.is_none() {
                grid = parse_grid_header(trimmed);
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 6 {
            return Err(IoError::Parse {
                line: line_no,
                message: format!("expected 6 fields `t x weight rho m E`, got {}", tokens.len()),
            });
        }
        let t: usize = parse_field(tokens[0], line_no, "time index")?;
        let x: usize = parse_field(tokens[1], line_no, "space index")?;
        let weight: f64 = parse_field(tokens[2], line_no, "weight")?;
        let rho: f64 = parse_field(tokens[3], line_no, "rho")?;
        let momentum: f64 = parse_field(tokens[4], line_no, "momentum")?;
        let energy: f64 = parse_field(tokens[5], line_no, "energy")?;
        max_t = max_t.max(t);
        max_x = max_x.max(x);
        raw.push((t, x, Atom { weight, state: ConsState::new(rho, [momentum], energy) }));
    }
    let grid = grid.unwrap_or_else(|| {
        SpaceTimeGrid::new(max_t + 1, max_x + 1, 1.0, 2.0 / (max_x + 1) as f64)
    });
    let mut cells: Vec<Vec<Atom<1>>> = vec![Vec::new(); grid.cells()];
    for (t, x, atom) in raw {
        if t >= grid.n_t || x >= grid.n_x {
            return Err(IoError::Measure(MeasureError::CellOutOfRange(t, x)));
        }
        cells[grid.index(t, x)].push(atom);
    }
    Ok(YoungMeasureField::new(grid, cells)?)
}

pub fn read_young_measure(path: &Path) -> Result<YoungMeasureField<1>, IoError> {
    young_measure_from_string(&fs::read_to_string(path)?)
}

/// One cell per line: `t_index x_index sigma`.
pub fn cell_measure_to_string(measure: &CellMeasure) -> String {
    let grid = measure.grid();
    let mut out = grid_header(grid);
    for t in 0..grid.n_t {
        for x in 0..grid.n_x {
            let _ = writeln!(out, "{t} {x} {}", fmt_f64(measure.value(t, x)));
        }
    }
    out
}

pub fn write_cell_measure(path: &Path, measure: &CellMeasure) -> Result<(), IoError> {
    fs::write(path, cell_measure_to_string(measure))?;
    Ok(())
}

pub fn cell_measure_from_string(text: &str) -> Result<CellMeasure, IoError> {
    let mut grid: Option<SpaceTimeGrid> = None;
    let mut raw: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_t = 0usize;
    let mut max_x = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if grid.is_none() {
                grid = parse_grid_header(trimmed);
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(IoError::Parse {
                line: line_no,
                message: format!("expected 3 fields `t x sigma`, got {}", tokens.len()),
            });
        }
        let t: usize = parse_field(tokens[0], line_no, "time index")?;
        let x: usize = parse_field(tokens[1], line_no, "space index")?;
        let sigma: f64 = parse_field(tokens[2], line_no, "sigma")?;
        max_t = max_t.max(t);
        max_x = max_x.max(x);
        raw.push((t, x, sigma));
    }
    let grid = grid.unwrap_or_else(|| {
        SpaceTimeGrid::new(max_t + 1, max_x + 1, 1.0, 2.0 / (max_x + 1) as f64)
    });
    let mut values = vec![0.0; grid.cells()];
    for (t, x, sigma) in raw {
        if t >= grid.n_t || x >= grid.n_x {
            return Err(IoError::Measure(MeasureError::CellOutOfRange(t, x)));
        }
        values[grid.index(t, x)] = sigma;
    }
    Ok(CellMeasure::new(grid, values)?)
}

pub fn read_cell_measure(path: &Path) -> Result<CellMeasure, IoError> {
    cell_measure_from_string(&fs::read_to_string(path)?)
}

/// Snapshot table `t x rho m E`, decimated to at most `max_snapshots` evenly
/// spaced time levels (the final level always included).
pub fn trajectory_to_string(traj: &Trajectory, max_snapshots: usize) -> String {
    let levels = traj.levels.len();
    let stride = ((levels - 1) / max_snapshots.max(2).saturating_sub(1)).max(1);
    let mut out = String::from("# t x rho m E\n");
    let mut level = 0;
    while level < levels {
        write_level(&mut out, traj, level);
        if level == levels - 1 {
            break;
        }
        level = (level + stride).min(levels - 1);
    }
    out
}

fn write_level(out: &mut String, traj: &Trajectory, level: usize) {
    let grid = traj.grid;
    let t = level as f64 * grid.dt;
    for (x_index, state) in traj.levels[level].iter().enumerate() {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            fmt_f64(t),
            fmt_f64(grid.x_center(x_index)),
            fmt_f64(state.rho),
            fmt_f64(state.momentum[0]),
            fmt_f64(state.total_energy)
        );
    }
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, max_snapshots: usize) -> Result<(), IoError> {
    fs::write(path, trajectory_to_string(traj, max_snapshots))?;
    Ok(())
}

/// `tau R` rows plus `fitted-L` and `verdict` footer lines.
pub fn gronwall_report_to_string(report: &GronwallReport) -> String {
    let mut out = String::new();
    for (t, v) in report.times.iter().zip(report.values.iter()) {
        let _ = writeln!(out, "{} {}", fmt_f64(*t), fmt_f64(*v));
    }
    let _ = writeln!(out, "fitted-L {}", fmt_f64(report.fitted_growth));
    let _ = writeln!(out, "verdict {}", report.verdict);
    out
}

pub fn diagnostics_to_string(report: &DiagnosticsReport) -> String {
    let mut out = String::new();
    let b = |v: bool| if v { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "energy-initial {}", fmt_f64(report.initial_energy));
    let _ = writeln!(out, "energy-final {}", fmt_f64(report.final_energy));
    let _ = writeln!(out, "energy-max {}", fmt_f64(report.max_energy));
    let _ = writeln!(out, "energy-inequality {}", b(report.energy_inequality));
    let _ = writeln!(out, "energy-defect-max {}", fmt_f64(report.max_energy_defect));
    let _ = writeln!(
        out,
        "admissibility-probability {}",
        fmt_f64(report.admissibility_probability)
    );
    let _ = writeln!(out, "admissibility {}", b(report.admissibility));
    let _ = writeln!(out, "kinetic-moment-max {}", fmt_f64(report.kinetic_moment_max));
    let _ = writeln!(out, "gamma-moment-max {}", fmt_f64(report.gamma_moment_max));
    let _ = writeln!(out, "entropy-moment-q {}", fmt_f64(report.entropy_moment_q));
    let _ = writeln!(out, "entropy-moment-max {}", fmt_f64(report.entropy_moment_max));
    let _ = writeln!(
        out,
        "entropy-flux-moment-max {}",
        fmt_f64(report.entropy_flux_moment_max)
    );
    let _ = writeln!(
        out,
        "concentration-variation {}",
        fmt_f64(report.concentration_variation)
    );
    let _ = writeln!(
        out,
        "defect-bound-constant {}",
        fmt_f64(report.defect_bound_constant)
    );
    out
}
