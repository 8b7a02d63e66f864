use std::collections::BTreeMap;

use anyhow::{bail, Result};
use blockade::fluctuations::{
    default_tau_grid, g2_from_correlators, g2_zero_scan, linearize, stationary_correlators, ScanAxis,
};
use blockade::fock_spectrum::{avoided_crossing_two_level, default_dim, free_two_level, staircase};
use blockade::io_response::{classify_lineshape, response_spectrum};
use blockade::lindblad_oracle::{converged_steady_state, g2_tau_regression, observables, Variant};
use blockade::model::{validate_regime, ParamsRecord, SystemParams, DEFAULT_REGIME_RATIO};
use blockade::steady_state::{
    bistability_window, hysteresis_sweep, steady_states, Branch, OmegaRange, SteadyStateRoot, WindowConfig,
    WindowMethod,
};
use blockade::units::{angular_to_mhz, mhz_to_angular, seconds_to_us, us_to_seconds};
use blockade::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{num, opt, Run, Table};
use crate::UsageError;

const FLUCTUATION_COLUMNS: [&str; 5] = ["branch", "g2", "n_f", "re_anomalous", "im_anomalous"];

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn record_value(rec: &ParamsRecord) -> Value {
    serde_json::to_value(rec).expect("plain struct serializes")
}

pub fn regime_warnings(rec: &ParamsRecord) -> Result<Vec<String>> {
    Ok(validate_regime(&rec.to_params()?, DEFAULT_REGIME_RATIO)?.warnings())
}

fn with(rec: &ParamsRecord, f: impl FnOnce(&mut ParamsRecord)) -> ParamsRecord {
    let mut r = rec.clone();
    f(&mut r);
    r
}

fn stable_roots(params: &SystemParams<f64>) -> Result<Vec<SteadyStateRoot<f64>>> {
    let roots: Vec<_> = steady_states(params)?.into_iter().filter(|r| r.stable).collect();
    if roots.is_empty() {
        bail!(Error::Undefined("no stable steady state at these parameters"));
    }
    Ok(roots)
}

fn tau_grid_us(spec: Option<&GridSpec>, kappa_mhz: f64, default_count: usize) -> Result<Vec<f64>> {
    let taus = match spec {
        Some(s) => s.values()?,
        None => {
            let kappa = mhz_to_angular(kappa_mhz);
            let full = default_tau_grid(kappa);
            let stop = seconds_to_us(full[full.len() - 1]);
            blockade::grid::linspace(0.0, stop, default_count)?
        }
    };
    if taus.first().is_some_and(|&t| t < 0.0) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(usage("--tau must be ascending and non-negative"));
    }
    Ok(taus)
}

pub fn staircase_table(
    ratios: &[f64],
    nc: &[f64],
    dim: usize,
    levels: usize,
    omega_mhz: f64,
) -> Result<(Table, Vec<String>)> {
    let mut header = vec!["ratio".to_string(), "n_c".to_string()];
    header.extend((0..levels).map(|k| format!("E_{k}")));
    header.push("mean_n".into());
    let mut table = Table::new(header);
    let mut warnings = Vec::new();
    for &ratio in ratios {
        let points = staircase(ratio, nc, dim, levels)?;
        let mut flagged = 0usize;
        let mut worst = 0.0f64;
        for p in &points {
            let mut row = vec![num(ratio), num(p.n_c)];
            row.extend(p.energies.iter().map(|e| num(e * omega_mhz)));
            row.push(num(p.mean_n));
            table.push(row);
            if let Some((a, b)) = p.truncation_warning {
                flagged += 1;
                worst = worst.max((a - b).abs());
            }
        }
        if flagged > 0 {
            warnings.push(format!(
                "ratio {ratio}: doubling dim {dim} changed mean_n at {flagged} points (worst {worst:.3e})"
            ));
        }
    }
    Ok((table, warnings))
}

pub fn staircase_cmd(a: &StaircaseArgs) -> Result<Run> {
    let ratios = a.ratios.values()?;
    let nc = a.nc.values()?;
    if ratios.iter().any(|&r| !(r > 0.0)) {
        return Err(usage("--ratios must be positive"));
    }
    if !(a.omega > 0.0) {
        return Err(usage("--omega must be positive"));
    }
    let nc_max = nc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dim = a.dim.unwrap_or_else(|| default_dim(nc_max));
    if a.levels == 0 || a.levels > dim {
        return Err(usage(format!("--levels must lie in 1..={dim}")));
    }
    let (table, warnings) = staircase_table(&ratios, &nc, dim, a.levels, a.omega)?;
    let rows = table.rows.len();
    Ok(Run {
        name: "staircase".into(),
        table,
        params: json!({ "omega_mhz": a.omega, "dim": dim, "levels": a.levels }),
        grids: BTreeMap::from([("ratios".into(), a.ratios.to_string()), ("n_c".into(), a.nc.to_string())]),
        results: Value::Null,
        warnings,
        summary: format!("staircase: {rows} rows, dim {dim}"),
    })
}

/// Free and coupled two-level energies around n_c = 1/2, in units of χ.
pub fn two_level_table(chi_over_omega: f64, nc: &[f64]) -> Table {
    let mut table = Table::new(["n_c", "free_0", "free_1", "coupled_0", "coupled_1"]);
    let omega = blockade::scalar::cis(0.0) * (1.0 / chi_over_omega);
    for &n in nc {
        let (f0, f1) = free_two_level(1.0, n);
        let (c0, c1) = avoided_crossing_two_level(1.0, n, omega);
        table.push(vec![num(n), num(f0), num(f1), num(c0), num(c1)]);
    }
    table
}

pub const SWEEP_COLUMNS: [&str; 15] = [
    "delta_d_mhz",
    "omega_mhz",
    "n_roots",
    "nbar_lower",
    "nbar_middle",
    "nbar_upper",
    "stable_lower",
    "stable_middle",
    "stable_upper",
    "log10_abs_As_lower",
    "log10_abs_As_middle",
    "log10_abs_As_upper",
    "log10_abs_As_up",
    "log10_abs_As_down",
    "log10_sqrt_n_up",
];

fn slot(b: Branch) -> usize {
    match b {
        Branch::Single | Branch::Lower => 0,
        Branch::Middle => 1,
        Branch::Upper => 2,
    }
}

/// Root table over `omega_mhz` for each detuning; a single root is reported
/// in the lower slot.
pub fn sweep_table(
    rec: &ParamsRecord,
    delta_d_mhz: &[f64],
    omega_mhz: &[f64],
    jump_factor: f64,
) -> Result<(Table, Vec<String>, f64)> {
    let omega: Vec<f64> = omega_mhz.iter().map(|&w| mhz_to_angular(w)).collect();
    let mut table = Table::new(SWEEP_COLUMNS);
    let mut warnings = Vec::new();
    let mut n_up = f64::NAN;
    for &dd in delta_d_mhz {
        let params = with(rec, |r| r.delta_d_mhz = dd).to_params()?;
        let sweep = hysteresis_sweep(&params, &omega, jump_factor)?;
        n_up = sweep.n_up;
        let log_sqrt_n_up = 0.5 * sweep.n_up.log10();
        warnings.extend(sweep.warnings.iter().map(|w| format!("delta_d {dd} MHz: {w}")));
        for (k, point) in sweep.points.iter().enumerate() {
            let mut nbar = [None; 3];
            let mut stable = [String::new(), String::new(), String::new()];
            for r in &point.roots {
                let s = slot(r.branch);
                nbar[s] = Some(r.n_bar);
                stable[s] = if r.stable { "1" } else { "0" }.into();
            }
            let logs = nbar.map(|n| n.map(|n| 0.5 * n.log10()));
            let curve = |v: f64| if v > 0.0 { num(v.log10()) } else { String::new() };
            let mut row = vec![num(dd), num(omega_mhz[k]), point.roots.len().to_string()];
            row.extend(nbar.iter().map(|&n| opt(n)));
            row.extend(stable);
            row.extend(logs.iter().map(|&l| opt(l)));
            row.push(curve(sweep.up[k]));
            row.push(curve(sweep.down[k]));
            row.push(num(log_sqrt_n_up));
            table.push(row);
        }
    }
    Ok((table, warnings, n_up))
}

pub fn sweep_cmd(a: &SweepArgs) -> Result<Run> {
    let rec = a.params.resolve(DEFAULT_PARAMS)?;
    let omega_spec = match &a.params.omega {
        Some(g) if g.scalar().is_none() => g.clone(),
        _ => "log:1e-3:1e2:1001".parse().expect("valid default"),
    };
    let dd_spec = a.params.delta_d.clone().unwrap_or(GridSpec::List(vec![rec.delta_d_mhz]));
    let omega = omega_spec.values()?;
    if omega.windows(2).any(|w| !(w[1] > w[0])) || omega[0] < 0.0 {
        return Err(usage("--omega grid must be non-negative and strictly increasing"));
    }
    if !(a.jump_factor > 1.0) {
        return Err(usage("--jump-factor must exceed 1"));
    }
    let (table, mut warnings, n_up) = sweep_table(&rec, &dd_spec.values()?, &omega, a.jump_factor)?;
    warnings.extend(regime_warnings(&rec)?);
    let bistable = table.rows.iter().filter(|r| r[2] == "3").count();
    Ok(Run {
        name: "sweep".into(),
        table,
        params: record_value(&rec),
        grids: BTreeMap::from([("omega_mhz".into(), omega_spec.to_string()), ("delta_d_mhz".into(), dd_spec.to_string())]),
        results: json!({ "n_up": n_up, "three_root_rows": bistable }),
        warnings,
        summary: format!("sweep: N_up = {n_up:.6}, {bistable} rows with three roots"),
    })
}

pub fn window_cmd(a: &WindowArgs) -> Result<Run> {
    a.params.scalar_only()?;
    let rec = a.params.resolve(DEFAULT_PARAMS)?;
    let params = rec.to_params()?;
    let mut config = WindowConfig::default_for(&params);
    if let Some(v) = a.omega_min {
        config.omega.min = mhz_to_angular(v);
    }
    if let Some(v) = a.omega_max {
        config.omega.max = mhz_to_angular(v);
    }
    let OmegaRange { min, max } = config.omega;
    if !(min > 0.0 && max > min) {
        return Err(usage("need 0 < --omega-min < --omega-max"));
    }
    if a.points < 2 || !(a.rel_tol > 0.0) {
        return Err(usage("--points must be at least 2 and --rel-tol positive"));
    }
    config.detuning_points = a.points;
    config.rel_tol = a.rel_tol;
    let methods: &[WindowMethod] = match a.method {
        MethodArg::Sweep => &[WindowMethod::Sweep],
        MethodArg::Formula => &[WindowMethod::Formula],
        MethodArg::Both => &[WindowMethod::Sweep, WindowMethod::Formula],
    };
    let mut table = Table::new(["method", "delta_minus_mhz", "delta_plus_mhz"]);
    let mut results = serde_json::Map::new();
    let mut warnings = regime_warnings(&rec)?;
    let mut summary = Vec::new();
    for &m in methods {
        let label = match m {
            WindowMethod::Sweep => "sweep",
            WindowMethod::Formula => "formula",
        };
        let w = bistability_window(&params, &config, m)?;
        let bounds = w.bounds.map(|(lo, hi)| (angular_to_mhz(lo), angular_to_mhz(hi)));
        table.push(vec![label.into(), opt(bounds.map(|b| b.0)), opt(bounds.map(|b| b.1))]);
        match bounds {
            Some((lo, hi)) => {
                results.insert(label.into(), json!({ "delta_minus_mhz": lo, "delta_plus_mhz": hi }));
                summary.push(format!("{label}: {lo:.6e} < delta_d/MHz < {hi:.6e}"));
            }
            None => {
                results.insert(label.into(), Value::Null);
                warnings.push(format!("{label}: no bistability in the searched drive range"));
                summary.push(format!("{label}: empty"));
            }
        }
    }
    Ok(Run {
        name: "window".into(),
        table,
        params: record_value(&rec),
        grids: BTreeMap::from([
            ("omega_range_mhz".into(), format!("{}:{}", angular_to_mhz(min), angular_to_mhz(max))),
            ("detuning_points".into(), a.points.to_string()),
        ]),
        results: Value::Object(results),
        warnings,
        summary: format!("window {}", summary.join("; ")),
    })
}

/// g²(τ) rows for every stable root; each row starts with `lead`.
pub fn g2_tau_rows(params: &SystemParams<f64>, tau_us: &[f64], lead: &[String], warnings: &mut Vec<String>) -> Result<Vec<Vec<String>>> {
    let tau: Vec<f64> = tau_us.iter().map(|&t| us_to_seconds(t)).collect();
    let mut rows = Vec::new();
    for root in stable_roots(params)? {
        let coeffs = linearize(&root, params)?;
        let set = stationary_correlators(&coeffs, &tau)?;
        let g2 = match g2_from_correlators(root.a_s, &set) {
            Ok(v) => v,
            Err(Error::Undefined(msg)) => {
                warnings.push(msg.into());
                vec![f64::NAN; tau.len()]
            }
            Err(e) => return Err(e.into()),
        };
        for k in 0..tau.len() {
            let mut row = lead.to_vec();
            row.extend([
                num(tau_us[k]),
                root.branch.as_str().into(),
                num(g2[k]),
                num(set.n_f),
                num(set.anomalous[k].re),
                num(set.anomalous[k].im),
            ]);
            rows.push(row);
        }
    }
    Ok(rows)
}

fn fluctuation_header(lead: &[&str], coordinate: &str) -> Vec<String> {
    lead.iter().chain([&coordinate]).chain(FLUCTUATION_COLUMNS.iter()).map(|s| s.to_string()).collect()
}

pub fn g2_cmd(a: &G2Args) -> Result<Run> {
    a.params.scalar_only()?;
    let rec = a.params.resolve(DEFAULT_PARAMS)?;
    let params = rec.to_params()?;
    let tau = tau_grid_us(a.tau.as_ref(), rec.kappa_mhz, 1001)?;
    let mut warnings = regime_warnings(&rec)?;
    let mut table = Table::new(fluctuation_header(&[], "tau_us"));
    for row in g2_tau_rows(&params, &tau, &[], &mut warnings)? {
        table.push(row);
    }
    let g2_0: Vec<String> = table.rows.iter().filter(|r| r[0] == num(tau[0])).map(|r| format!("{}={}", r[1], r[2])).collect();
    Ok(Run {
        name: "g2".into(),
        table,
        params: record_value(&rec),
        grids: BTreeMap::from([("tau_us".into(), a.tau.as_ref().map_or_else(|| format!("0:{}:1001", tau[tau.len() - 1]), |g| g.to_string()))]),
        results: Value::Null,
        warnings,
        summary: format!("g2: g2(tau_0) {}", g2_0.join(" ")),
    })
}

pub struct ScanTable {
    pub table: Table,
    pub crossings_mhz: Vec<f64>,
    pub warnings: Vec<String>,
}

/// g²(0) per stable branch over `grid_mhz`; crossings of g² = 1 are located
/// by linear interpolation between neighbouring single-branch points.
pub fn g2_scan_table(
    rec: &ParamsRecord,
    axis: ScanAxis,
    grid_mhz: &[f64],
    lead_names: &[&str],
    lead: &[String],
) -> Result<ScanTable> {
    let params = rec.to_params()?;
    let grid: Vec<f64> = grid_mhz.iter().map(|&v| mhz_to_angular(v)).collect();
    let rows = g2_zero_scan(&params, axis, &grid)?;
    let coord = match axis {
        ScanAxis::Detuning => "delta_d_mhz",
        ScanAxis::Drive => "omega_mhz",
    };
    let mut table = Table::new(fluctuation_header(lead_names, coord));
    let mut warnings = Vec::new();
    let mut empty = 0usize;
    let mut single = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let mut base = lead.to_vec();
        base.push(num(grid_mhz[k]));
        if row.branches.is_empty() {
            empty += 1;
            let mut r = base.clone();
            r.extend(std::iter::repeat_n(String::new(), FLUCTUATION_COLUMNS.len()));
            table.rows.push(r);
        }
        for b in &row.branches {
            let mut r = base.clone();
            r.extend([b.branch.as_str().into(), num(b.g2), num(b.n_f), num(b.anomalous.re), num(b.anomalous.im)]);
            table.rows.push(r);
        }
        single.push(if row.branches.len() == 1 { Some(row.branches[0].g2) } else { None });
    }
    if empty > 0 {
        warnings.push(format!("{empty} grid points without a stable root"));
    }
    let mut crossings_mhz = Vec::new();
    for k in 1..single.len() {
        if let (Some(a), Some(b)) = (single[k - 1], single[k]) {
            if (a - 1.0) * (b - 1.0) < 0.0 {
                let t = (1.0 - a) / (b - a);
                crossings_mhz.push(grid_mhz[k - 1] + t * (grid_mhz[k] - grid_mhz[k - 1]));
            }
        }
    }
    Ok(ScanTable { table, crossings_mhz, warnings })
}

fn scan_axis(p: &ParamArgs) -> Result<(ScanAxis, GridSpec)> {
    let grid = |g: &Option<GridSpec>| g.as_ref().filter(|g| g.scalar().is_none()).cloned();
    match (grid(&p.delta_d), grid(&p.omega)) {
        (Some(g), None) => Ok((ScanAxis::Detuning, g)),
        (None, Some(g)) => Ok((ScanAxis::Drive, g)),
        (Some(_), Some(_)) => Err(usage("scan either --delta-d or --omega, not both")),
        (None, None) => Err(usage("give a grid (start:stop:count) for --delta-d or --omega")),
    }
}

pub fn g2scan_cmd(a: &G2ScanArgs) -> Result<Run> {
    let rec = a.params.resolve(DEFAULT_PARAMS)?;
    let (axis, spec) = scan_axis(&a.params)?;
    let grid = spec.values()?;
    if axis == ScanAxis::Drive && grid.iter().any(|&w| w < 0.0) {
        return Err(usage("--omega values must be non-negative"));
    }
    let mut scan = g2_scan_table(&rec, axis, &grid, &[], &[])?;
    let name = scan.table.header[0].clone();
    scan.warnings.extend(regime_warnings(&rec)?);
    let crossings: Vec<String> = scan.crossings_mhz.iter().map(|c| format!("{c:.6}")).collect();
    Ok(Run {
        name: "g2scan".into(),
        table: scan.table,
        params: record_value(&rec),
        grids: BTreeMap::from([(name, spec.to_string())]),
        results: json!({ "g2_crossings_mhz": scan.crossings_mhz }),
        warnings: scan.warnings,
        summary: format!("g2scan: g2(0) = 1 crossings at [{}] MHz", crossings.join(", ")),
    })
}

pub struct ResponseResult {
    pub rows: Vec<Vec<String>>,
    pub lineshape: &'static str,
    pub results: Value,
    pub warnings: Vec<String>,
}

pub const RESPONSE_COLUMNS: [&str; 6] = ["omega_prime_mhz", "a_r", "a_i", "abs_s_out", "re_fwm", "im_fwm"];

pub fn response_rows(rec: &ParamsRecord, grid_mhz: &[f64], branch: BranchArg, lead: &[String]) -> Result<ResponseResult> {
    let params = rec.to_params()?;
    let roots = stable_roots(&params)?;
    let mut warnings = Vec::new();
    if roots.len() > 1 {
        warnings.push(format!("{} stable roots; linearizing about the {:?} one", roots.len(), branch).to_lowercase());
    }
    let root = match branch {
        BranchArg::Lower => roots.iter().min_by(|a, b| a.n_bar.total_cmp(&b.n_bar)),
        BranchArg::Upper => roots.iter().max_by(|a, b| a.n_bar.total_cmp(&b.n_bar)),
    }
    .expect("non-empty");
    let coeffs = linearize(root, &params)?;
    let grid: Vec<f64> = grid_mhz.iter().map(|&w| mhz_to_angular(w)).collect();
    let s = response_spectrum(&coeffs, &params, &grid)?;
    let report = classify_lineshape(&s)?;
    warnings.extend(report.warnings.iter().cloned());
    let rows = (0..grid.len())
        .map(|k| {
            let mut row = lead.to_vec();
            row.extend([
                num(grid_mhz[k]),
                num(s.a_r[k]),
                num(s.a_i[k]),
                num(s.s_out[k].norm()),
                num(s.fwm[k].re),
                num(s.fwm[k].im),
            ]);
            row
        })
        .collect();
    let results = json!({
        "lineshape": report.shape.as_str(),
        "extrema_mhz": report.extrema.iter().map(|&w| angular_to_mhz(w)).collect::<Vec<_>>(),
        "branch": root.branch.as_str(),
        "n_bar": root.n_bar,
        "coherent_amplitude": [s.coherent_amplitude.re, s.coherent_amplitude.im],
    });
    Ok(ResponseResult { rows, lineshape: report.shape.as_str(), results, warnings })
}

pub fn response_cmd(a: &ResponseArgs) -> Result<Run> {
    a.params.scalar_only()?;
    let rec = a.params.resolve(ParamsRecord { omega_mhz: 0.1, ..DEFAULT_PARAMS })?;
    let grid = a.omega_prime.values()?;
    let r = response_rows(&rec, &grid, a.branch, &[])?;
    let mut table = Table::new(RESPONSE_COLUMNS);
    table.rows = r.rows;
    let mut warnings = r.warnings;
    warnings.extend(regime_warnings(&rec)?);
    Ok(Run {
        name: "response".into(),
        table,
        params: record_value(&rec),
        grids: BTreeMap::from([("omega_prime_mhz".into(), a.omega_prime.to_string())]),
        results: r.results,
        warnings,
        summary: format!("response: lineshape {}", r.lineshape),
    })
}

fn variants(v: VariantArg) -> &'static [Variant] {
    match v {
        VariantArg::Kerr => &[Variant::Kerr],
        VariantArg::Full => &[Variant::FullDispersive],
        VariantArg::Both => &[Variant::Kerr, Variant::FullDispersive],
    }
}

fn oracle_row(coordinate: f64, g2: f64, source: &str) -> Vec<String> {
    vec![num(coordinate), String::new(), num(g2), String::new(), String::new(), String::new(), source.into()]
}

pub fn oracle_cmd(a: &OracleArgs) -> Result<Run> {
    let rec = a.params.resolve(DEFAULT_PARAMS)?;
    let vars = variants(a.variant);
    let mut warnings = regime_warnings(&rec)?;
    let scan = match scan_axis(&a.params) {
        Ok(s) => Some(s),
        Err(_) if [&a.params.delta_d, &a.params.omega].iter().all(|g| g.as_ref().is_none_or(|g| g.scalar().is_some())) => None,
        Err(e) => return Err(e),
    };
    let mut grids = BTreeMap::new();
    let (coord, table, mut results) = if let Some((axis, spec)) = scan {
        let grid = spec.values()?;
        let (coord, set): (&str, fn(&ParamsRecord, f64) -> ParamsRecord) = match axis {
            ScanAxis::Detuning => ("delta_d_mhz", |r, v| ParamsRecord { delta_d_mhz: v, ..r.clone() }),
            ScanAxis::Drive => ("omega_mhz", |r, v| ParamsRecord { omega_mhz: v, ..r.clone() }),
        };
        grids.insert(coord.to_string(), spec.to_string());
        let mut table = Table::new(fluctuation_header(&[], coord));
        table.header.push("source".into());
        let oracle = grid
            .par_iter()
            .map(|&v| {
                let p = set(&rec, v).to_params()?;
                vars.iter()
                    .map(|&var| {
                        let ss = converged_steady_state(&p, var)?;
                        Ok(observables(&ss.rho, &ss.ops)?.g2_zero)
                    })
                    .collect::<Result<Vec<f64>, Error>>()
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let lin = if a.no_linearized { None } else { Some(g2_scan_table(&rec, axis, &grid, &[], &[])?) };
        for (k, &v) in grid.iter().enumerate() {
            if let Some(lin) = &lin {
                for row in lin.table.rows.iter().filter(|r| r[0] == num(v)) {
                    let mut row = row.clone();
                    row.push("linearized".into());
                    table.push(row);
                }
            }
            for (j, var) in vars.iter().enumerate() {
                table.push(oracle_row(v, oracle[k][j], var.source()));
            }
        }
        if let Some(lin) = lin {
            warnings.extend(lin.warnings);
        }
        (coord, table, serde_json::Map::new())
    } else {
        let params = rec.to_params()?;
        let tau = tau_grid_us(a.tau.as_ref(), rec.kappa_mhz, 201)?;
        grids.insert("tau_us".into(), a.tau.as_ref().map_or_else(|| format!("0:{}:201", tau[tau.len() - 1]), |g| g.to_string()));
        let mut table = Table::new(fluctuation_header(&[], "tau_us"));
        table.header.push("source".into());
        if !a.no_linearized {
            for mut row in g2_tau_rows(&params, &tau, &[], &mut warnings)? {
                row.push("linearized".into());
                table.push(row);
            }
        }
        let tau_s: Vec<f64> = tau.iter().map(|&t| us_to_seconds(t)).collect();
        let mut results = serde_json::Map::new();
        for &var in vars {
            let ss = converged_steady_state(&params, var)?;
            let obs = observables(&ss.rho, &ss.ops)?;
            let g2 = g2_tau_regression(&ss.rho, &ss.ops, &tau_s)?;
            for (k, &t) in tau.iter().enumerate() {
                table.push(oracle_row(t, g2[k], var.source()));
            }
            results.insert(
                var.source().into(),
                json!({ "dim": ss.ops.dim, "mean_n": obs.mean_n, "g2_zero": obs.g2_zero }),
            );
        }
        ("tau_us", table, results)
    };
    results.insert("coordinate".into(), json!(coord));
    let rows = table.rows.len();
    Ok(Run {
        name: "oracle".into(),
        table,
        params: record_value(&rec),
        grids,
        results: Value::Object(results),
        warnings,
        summary: format!("oracle: {rows} rows"),
    })
}
