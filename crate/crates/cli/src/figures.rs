//! Parameter presets for the figure panels.

use std::collections::BTreeMap;

use anyhow::Result;
use blockade::fluctuations::ScanAxis;
use blockade::fock_spectrum::default_dim;
use blockade::model::ParamsRecord;
use blockade::steady_state::DEFAULT_JUMP_FACTOR;
use serde_json::{json, Value};

use crate::args::{BranchArg, GridSpec, Preset, DEFAULT_PARAMS};
use crate::commands::*;
use crate::output::{num, Run, Table};

const FIG2_OMEGA: &str = "log:1e-3:1e2:1201";
const FIG3A_OMEGA: &str = "log:1e-3:10:401";
const FIG1A_RATIO: f64 = 10.0;

fn spec(s: &str) -> GridSpec {
    s.parse().expect("valid preset grid")
}

fn base(g_mhz: f64, omega_mhz: f64, delta_d_mhz: f64) -> ParamsRecord {
    ParamsRecord { g_mhz, omega_mhz, delta_d_mhz, ..DEFAULT_PARAMS }
}

pub fn figure(preset: Preset) -> Result<Run> {
    let name = preset.name().to_string();
    let mut grids = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut results = Value::Null;
    let (table, params, summary) = match preset {
        Preset::Fig1a => {
            let nc = spec("0:1:801");
            grids.insert("n_c".into(), nc.to_string());
            let table = two_level_table(FIG1A_RATIO, &nc.values()?);
            (table, json!({ "chi_over_omega": FIG1A_RATIO, "energy_unit": "chi" }), "two-level curves".to_string())
        }
        Preset::Fig1b | Preset::Fig1c => {
            let (ratios, nc) = if preset == Preset::Fig1b { ("10", "-0.5:3.5:801") } else { ("1,10,100", "0:3.5:801") };
            let (ratios, nc) = (spec(ratios), spec(nc));
            let nc_values = nc.values()?;
            let dim = default_dim(nc_values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            let (table, w) = staircase_table(&ratios.values()?, &nc_values, dim, 4, 1.0)?;
            warnings.extend(w);
            grids.insert("ratios".into(), ratios.to_string());
            grids.insert("n_c".into(), nc.to_string());
            (table, json!({ "omega_mhz": 1.0, "dim": dim, "levels": 4 }), format!("staircase, dim {dim}"))
        }
        Preset::Fig2a | Preset::Fig2b => {
            let dd = spec(if preset == Preset::Fig2a { "-1,0,1" } else { "36,37,38" });
            let omega = spec(FIG2_OMEGA);
            let rec = base(200.0, 0.0, 0.0);
            let (table, w, n_up) = sweep_table(&rec, &dd.values()?, &omega.values()?, DEFAULT_JUMP_FACTOR)?;
            warnings.extend(w);
            grids.insert("delta_d_mhz".into(), dd.to_string());
            grids.insert("omega_mhz".into(), omega.to_string());
            results = json!({ "n_up": n_up });
            (table, record_value(&rec), format!("hysteresis curves, N_up = {n_up:.6}"))
        }
        Preset::Fig3a => {
            let omega = spec(FIG3A_OMEGA);
            let rec = base(200.0, 0.0, 38.5);
            let scan = g2_scan_table(&rec, ScanAxis::Drive, &omega.values()?, &[], &[])?;
            warnings.extend(scan.warnings);
            grids.insert("omega_mhz".into(), omega.to_string());
            results = json!({ "g2_crossings_mhz": scan.crossings_mhz });
            (scan.table, record_value(&rec), "g2(0) over drive".to_string())
        }
        Preset::Fig3b => {
            let rec = base(200.0, 0.01, 38.5);
            let tau = spec(&format!("0:{}:1001", 10.0 / (2.0 * std::f64::consts::PI * rec.kappa_mhz)));
            let tau_values = tau.values()?;
            let mut header = vec!["omega_mhz".to_string(), "tau_us".to_string()];
            header.extend(["branch", "g2", "n_f", "re_anomalous", "im_anomalous"].map(String::from));
            let mut table = Table::new(header);
            let drives = [0.01, 1.0];
            let mut sets = Vec::new();
            for w in drives {
                let r = ParamsRecord { omega_mhz: w, ..rec.clone() };
                for row in g2_tau_rows(&r.to_params()?, &tau_values, &[num(w)], &mut warnings)? {
                    table.push(row);
                }
                sets.push(record_value(&r));
            }
            grids.insert("tau_us".into(), tau.to_string());
            grids.insert("omega_mhz".into(), "0.01,1".into());
            (table, Value::Array(sets), "g2(tau) at two drives".to_string())
        }
        Preset::Fig3c | Preset::Fig3d => {
            let (g, dd) = if preset == Preset::Fig3c { (100.0, "9:11:401") } else { (200.0, "36:42:401") };
            let dd = spec(dd);
            let rec = base(g, 0.01, 0.0);
            let scan = g2_scan_table(&rec, ScanAxis::Detuning, &dd.values()?, &[], &[])?;
            warnings.extend(scan.warnings);
            grids.insert("delta_d_mhz".into(), dd.to_string());
            let crossings: Vec<String> = scan.crossings_mhz.iter().map(|c| format!("{c:.4}")).collect();
            results = json!({ "g2_crossings_mhz": scan.crossings_mhz });
            (scan.table, record_value(&rec), format!("g2(0) over detuning, crossings [{}] MHz", crossings.join(", ")))
        }
        Preset::Fig4a | Preset::Fig4b => {
            let grid = spec("-2:2:2001");
            let mut header = vec!["delta_d_mhz".to_string()];
            header.extend(RESPONSE_COLUMNS.map(String::from));
            let mut table = Table::new(header);
            let mut sets = Vec::new();
            let mut shapes = serde_json::Map::new();
            for dd in [9.74, 9.96] {
                let rec = base(100.0, 0.1, dd);
                let r = response_rows(&rec, &grid.values()?, BranchArg::Lower, &[num(dd)])?;
                table.rows.extend(r.rows);
                warnings.extend(r.warnings.into_iter().map(|w| format!("delta_d {dd} MHz: {w}")));
                shapes.insert(format!("{dd}"), r.results);
                sets.push(record_value(&rec));
            }
            grids.insert("omega_prime_mhz".into(), grid.to_string());
            grids.insert("delta_d_mhz".into(), "9.74,9.96".into());
            let tags: Vec<String> = shapes.iter().map(|(k, v)| format!("{k}: {}", v["lineshape"].as_str().unwrap_or("?"))).collect();
            results = Value::Object(shapes);
            (table, Value::Array(sets), format!("response, lineshapes {}", tags.join(", ")))
        }
    };
    Ok(Run { summary: format!("{name}: {summary}"), name, table, params, grids, results, warnings })
}
