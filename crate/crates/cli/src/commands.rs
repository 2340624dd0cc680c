//! Subcommand bodies; each returns the table it would write.

use rayon::prelude::*;

use comb_thermo_core::bands::{
    band_edges, density_of_states, dispersion_theta, BandError, CombSpec, Dispersion,
};
use comb_thermo_core::scattering::{Defect, DeltaPrimeDefect};
use comb_thermo_core::thermo::{
    delta_f, delta_f_single, delta_f_single_defect, entropy, entropy_fd, entropy_single_defect,
    Method, ThermoError, ThermoRequest, ThermoResult,
};

use crate::config::{MethodName, Quantity, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Upper bound on bands listed when `grid.max_bands` is absent.
pub const DEFAULT_MAX_BANDS: usize = 1000;

fn request(cfg: &RunConfig, comb: CombSpec, t: f64, method: Method) -> ThermoRequest {
    ThermoRequest::new(comb, t)
        .with_method(method)
        .with_mass(cfg.field.mass)
        .with_tolerances(cfg.tolerances())
}

fn at_temperature(t: f64, e: ThermoError) -> CliError {
    CliError::numeric(format!("T = {t}: {e}"))
}

pub fn bands(cfg: &RunConfig) -> Result<Table, CliError> {
    let comb = cfg.comb()?;
    let cut = cfg
        .grid
        .omega_max
        .ok_or_else(|| CliError::config("bands needs grid.omega_max"))?;
    if !(cut > 0.0) || !cut.is_finite() {
        return Err(CliError::config("grid.omega_max must be finite and positive"));
    }
    let max = cfg.grid.max_bands.unwrap_or(DEFAULT_MAX_BANDS);
    let mut table = Table::new(&["n", "omega_min", "omega_max"]);
    for b in band_edges(&comb, cut, max)? {
        table.push(vec![b.n.into(), b.omega_min.into(), b.omega_max.into()]);
    }
    Ok(table)
}

pub fn dos(cfg: &RunConfig) -> Result<Table, CliError> {
    let comb = cfg.comb()?;
    let range = cfg
        .grid
        .frequencies
        .ok_or_else(|| CliError::config("dos needs grid.frequencies"))?;
    let mut table = Table::new(&["omega", "theta", "dos"]);
    for w in range.values()? {
        if !(w > 0.0) {
            return Err(CliError::config("grid.frequencies must be positive"));
        }
        let row = match dispersion_theta(&comb, w)? {
            Dispersion::Forbidden => vec![w.into(), Cell::Empty, 0.0.into()],
            Dispersion::Allowed(theta) => {
                let d = match density_of_states(&comb, w) {
                    Ok(d) => Cell::Num(d),
                    Err(BandError::EdgeSingularity { .. }) => Cell::Num(f64::INFINITY),
                    Err(e) => return Err(e.into()),
                };
                vec![w.into(), theta.into(), d]
            }
        };
        table.push(row);
    }
    Ok(table)
}

pub fn free_energy(cfg: &RunConfig) -> Result<Table, CliError> {
    let comb = cfg.comb()?;
    let temps = cfg.temperatures()?;
    if cfg.method.name == MethodName::All {
        let mut table = Table::new(&[
            "T",
            "real_axis",
            "real_axis_err",
            "rotated",
            "rotated_err",
            "matsubara",
            "matsubara_err",
            "max_rel_spread",
        ]);
        let methods = [
            Method::RealAxis,
            Method::Rotated { alpha: cfg.method.alpha },
            Method::Matsubara,
        ];
        for t in temps {
            let mut row = vec![Cell::Num(t)];
            let mut values = Vec::new();
            for m in methods {
                let r = delta_f(&request(cfg, comb, t, m)).map_err(|e| at_temperature(t, e))?;
                row.extend([Cell::Num(r.value), Cell::Num(r.err_estimate)]);
                values.push(r.value);
            }
            row.push(Cell::Num(relative_spread(&values)));
            table.push(row);
        }
        return Ok(table);
    }
    let method = cfg.require_single_method("free-energy")?;
    let mut table = Table::new(&["T", "delta_f", "err", "method"]);
    for t in temps {
        let r = delta_f(&request(cfg, comb, t, method)).map_err(|e| at_temperature(t, e))?;
        table.push(vec![t.into(), r.value.into(), r.err_estimate.into(), r.method.name().into()]);
    }
    Ok(table)
}

/// `(max − min)/max|v|`.
pub fn relative_spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        0.0
    } else {
        (hi - lo) / scale
    }
}

pub fn entropy_table(cfg: &RunConfig, check_fd: bool) -> Result<Table, CliError> {
    let comb = cfg.comb()?;
    let method = cfg.require_single_method("entropy")?;
    let columns: &[&str] = if check_fd {
        &["T", "entropy", "err", "entropy_fd", "fd_rel_diff"]
    } else {
        &["T", "entropy", "err"]
    };
    let mut table = Table::new(columns);
    for t in cfg.temperatures()? {
        let req = request(cfg, comb, t, method);
        let s = entropy(&req).map_err(|e| at_temperature(t, e))?;
        let mut row = vec![Cell::Num(t), Cell::Num(s.value), Cell::Num(s.err_estimate)];
        if check_fd {
            let fd = entropy_fd(&req).map_err(|e| at_temperature(t, e))?;
            let diff = (s.value - fd.value).abs() / s.value.abs().max(f64::MIN_POSITIVE);
            row.extend([Cell::Num(fd.value), Cell::Num(diff)]);
        }
        table.push(row);
    }
    Ok(table)
}

/// Thermal free energy and entropy of one isolated defect.
pub fn single(cfg: &RunConfig) -> Result<Table, CliError> {
    if cfg.field.mass > 0.0 {
        return Err(CliError::config("single supports a massless field only"));
    }
    let defect = RunConfig::defect(&cfg.potential()?)?;
    let tol = cfg.tolerances();
    let mut table = Table::new(&["T", "delta_f", "err", "entropy", "entropy_err"]);
    for t in cfg.temperatures()? {
        let (f, s) = match defect {
            Defect::DeltaPrime(d) => (
                delta_f_single_defect(&d, t, &tol).map_err(|e| at_temperature(t, e))?,
                entropy_single_defect(&d, t, &tol).map_err(|e| at_temperature(t, e))?,
            ),
            other => {
                let f = delta_f_single(&other, t, &tol).map_err(|e| at_temperature(t, e))?;
                let step = (1e-3 * t).max(1e-6);
                let up = delta_f_single(&other, t + step, &tol).map_err(|e| at_temperature(t, e))?;
                let dn = delta_f_single(&other, t - step, &tol).map_err(|e| at_temperature(t, e))?;
                let s = ThermoResult {
                    value: -(up.value - dn.value) / (2.0 * step),
                    err_estimate: (up.err_estimate + dn.err_estimate) / (2.0 * step),
                    ..f
                };
                (f, s)
            }
        };
        table.push(vec![
            t.into(),
            f.value.into(),
            f.err_estimate.into(),
            s.value.into(),
            s.err_estimate.into(),
        ]);
    }
    Ok(table)
}

/// Outcome of one `(Ω, γ, T)` sweep cell.
#[derive(Clone, Debug, PartialEq)]
pub enum CellOutcome {
    Value(ThermoResult),
    Infeasible,
    Failed(String),
}

pub fn sweep_cell(
    cfg: &RunConfig,
    quantity: Quantity,
    omega: f64,
    gamma: f64,
    t: f64,
    method: Method,
) -> CellOutcome {
    if !(omega > -1.0 && omega < 1.0) || !(gamma >= 0.0) {
        return CellOutcome::Infeasible;
    }
    let defect = match DeltaPrimeDefect::from_omega_gamma(omega, gamma) {
        Ok(d) => d,
        Err(_) => return CellOutcome::Infeasible,
    };
    let comb = match CombSpec::new(defect, cfg.lattice.a) {
        Ok(c) => c,
        Err(_) => return CellOutcome::Infeasible,
    };
    let req = request(cfg, comb, t, method);
    let r = match quantity {
        Quantity::FreeEnergy => delta_f(&req),
        Quantity::Entropy => entropy(&req),
    };
    match r {
        Ok(r) => CellOutcome::Value(r),
        Err(e) => CellOutcome::Failed(e.to_string()),
    }
}

/// Grid of `(Ω, γ)` at every configured temperature, emitted row-major
/// (temperature, then `Ω`, then `γ`).
///
/// Numeric failures are written as `failed` rows and reported afterwards.
pub fn sweep(cfg: &RunConfig, workers: usize) -> Result<(Table, Option<CliError>), CliError> {
    if cfg.potential.is_some() {
        return Err(CliError::config(
            "sweep takes the delta-prime parameters from the (Omega, gamma) grid; remove [potential]",
        ));
    }
    let sw = cfg.sweep.ok_or_else(|| CliError::config("sweep needs a [sweep] section"))?;
    let method = cfg.require_single_method("sweep")?;
    let omegas = sw.omega.values()?;
    let gammas = sw.gamma.values()?;
    let temps = cfg.temperatures()?;
    let mut cells = Vec::with_capacity(temps.len() * omegas.len() * gammas.len());
    for &t in &temps {
        for &o in &omegas {
            for &g in &gammas {
                cells.push((o, g, t));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::numeric(format!("worker pool: {e}")))?;
    let outcomes: Vec<CellOutcome> = pool.install(|| {
        cells.par_iter().map(|&(o, g, t)| sweep_cell(cfg, sw.quantity, o, g, t, method)).collect()
    });
    let mut table = Table::new(&["Omega", "gamma", "T", "value", "err", "status"]);
    let mut first_failure = None;
    for (&(o, g, t), out) in cells.iter().zip(outcomes) {
        let (value, err, status) = match out {
            CellOutcome::Value(r) => (Cell::Num(r.value), Cell::Num(r.err_estimate), "ok".to_owned()),
            CellOutcome::Infeasible => (Cell::Empty, Cell::Empty, "infeasible".to_owned()),
            CellOutcome::Failed(msg) => {
                first_failure.get_or_insert_with(|| {
                    CliError::numeric(format!("Omega = {o}, gamma = {g}, T = {t}: {msg}"))
                });
                (Cell::Empty, Cell::Empty, "failed".to_owned())
            }
        };
        table.push(vec![o.into(), g.into(), t.into(), value, err, status.into()]);
    }
    Ok((table, first_failure))
}
