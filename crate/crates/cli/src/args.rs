use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use blockade::grid::{linspace, logspace};
use blockade::model::ParamsRecord;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::UsageError;

#[derive(Parser, Debug)]
#[command(name = "blockade", version, about = "Photon blockade, bistability and transparency in dispersive circuit QED")]
pub struct Cli {
    /// Write <name>.csv and <name>.manifest.json here instead of printing CSV.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ground-state photon staircase and lowest levels of the Kerr Hamiltonian.
    Staircase(StaircaseArgs),
    /// Steady-state roots and hysteresis curves over drive strength.
    Sweep(SweepArgs),
    /// Bistability window (Δ−, Δ+).
    Window(WindowArgs),
    /// g²(τ) of the linearized fluctuations.
    G2(G2Args),
    /// g²(0) over a detuning or drive grid.
    G2scan(G2ScanArgs),
    /// Probe response spectrum and lineshape.
    Response(ResponseArgs),
    /// Truncated master-equation g², alongside the linearized result.
    Oracle(OracleArgs),
    /// Data for one of the paper figure panels.
    Figure(FigureArgs),
    /// Re-run the invocation recorded in a manifest.
    Replay(ReplayArgs),
}

/// Physical parameters in MHz of ν = ω/2π. Flags override `--params`.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Flat JSON parameter file (g_mhz, delta_mhz, kappa_mhz, omega_mhz, ...).
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Drive strength |Ω|; a grid where the subcommand scans it.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<GridSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega_phase: Option<f64>,
    /// Drive detuning Δ_d; a grid where the subcommand scans it.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_d: Option<GridSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma_z: Option<i32>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub gamma_phi: Option<f64>,
}

pub const DEFAULT_PARAMS: ParamsRecord = ParamsRecord {
    g_mhz: 100.0,
    delta_mhz: 1000.0,
    kappa_mhz: 0.1,
    omega_mhz: 0.01,
    omega_phase_rad: 0.0,
    delta_d_mhz: 0.0,
    sigma_z: 1,
    gamma_mhz: 0.0,
    gamma_phi_mhz: 0.0,
};

impl ParamArgs {
    /// Base record with scalar flags applied. Grid-valued `--omega`/`--delta-d`
    /// leave the base value in place; callers read those grids themselves.
    pub fn resolve(&self, defaults: ParamsRecord) -> anyhow::Result<ParamsRecord> {
        let mut rec = match &self.params {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
                ParamsRecord::from_json(&text)?
            }
            None => defaults,
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut rec.g_mhz, self.g);
        set(&mut rec.delta_mhz, self.delta);
        set(&mut rec.kappa_mhz, self.kappa);
        set(&mut rec.omega_phase_rad, self.omega_phase);
        set(&mut rec.gamma_mhz, self.gamma);
        set(&mut rec.gamma_phi_mhz, self.gamma_phi);
        if let Some(s) = self.sigma_z {
            rec.sigma_z = s;
        }
        if let Some(v) = self.omega.as_ref().and_then(GridSpec::scalar) {
            rec.omega_mhz = v;
        }
        if let Some(v) = self.delta_d.as_ref().and_then(GridSpec::scalar) {
            rec.delta_d_mhz = v;
        }
        rec.to_params()?;
        Ok(rec)
    }

    pub fn scalar_only(&self) -> anyhow::Result<()> {
        for (flag, g) in [("--omega", &self.omega), ("--delta-d", &self.delta_d)] {
            if g.as_ref().is_some_and(|g| g.scalar().is_none()) {
                return Err(UsageError(format!("{flag} takes a single value here")).into());
            }
        }
        Ok(())
    }
}

/// `v`, `a,b,c`, `start:stop:count` or `log:start:stop:count`; ranges include
/// both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    List(Vec<f64>),
    Linear { start: f64, stop: f64, count: usize },
    Log { start: f64, stop: f64, count: usize },
}

impl GridSpec {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            GridSpec::List(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    pub fn values(&self) -> anyhow::Result<Vec<f64>> {
        Ok(match *self {
            GridSpec::List(ref v) => v.clone(),
            GridSpec::Linear { start, stop, count } => {
                linspace(start, stop, count).map_err(|e| UsageError(format!("grid {self}: {e}")))?
            }
            GridSpec::Log { start, stop, count } => {
                logspace(start, stop, count).map_err(|e| UsageError(format!("grid {self}: {e}")))?
            }
        })
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let count = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a point count"));
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            ["log", a, b, n] => GridSpec::Log { start: num(a)?, stop: num(b)?, count: count(n)? },
            [a, b, n] => GridSpec::Linear { start: num(a)?, stop: num(b)?, count: count(n)? },
            [list] => GridSpec::List(list.split(',').map(num).collect::<Result<_, _>>()?),
            _ => return Err(format!("`{s}`: expected v, a,b,c, start:stop:count or log:start:stop:count")),
        };
        let finite = match &spec {
            GridSpec::List(v) => v.iter().all(|x| x.is_finite()),
            GridSpec::Linear { start, stop, .. } | GridSpec::Log { start, stop, .. } => {
                start.is_finite() && stop.is_finite()
            }
        };
        if !finite {
            return Err(format!("`{s}`: values must be finite"));
        }
        Ok(spec)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::List(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", items.join(","))
            }
            GridSpec::Linear { start, stop, count } => write!(f, "{start}:{stop}:{count}"),
            GridSpec::Log { start, stop, count } => write!(f, "log:{start}:{stop}:{count}"),
        }
    }
}

#[derive(Args, Debug)]
pub struct StaircaseArgs {
    /// χ/|Ω| values.
    #[arg(long, default_value = "1,10,100")]
    pub ratios: GridSpec,
    #[arg(long, default_value = "0:3.5:801", allow_hyphen_values = true)]
    pub nc: GridSpec,
    /// Number of eigenvalues reported per row.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Fock truncation (default grows with the largest n_c).
    #[arg(long)]
    pub dim: Option<usize>,
    /// |Ω|/2π in MHz setting the energy scale of E_k.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Ratio of successive n_bar above which a branch jump is reported.
    #[arg(long, default_value_t = blockade::steady_state::DEFAULT_JUMP_FACTOR)]
    pub jump_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sweep,
    Formula,
    Both,
}

#[derive(Args, Debug)]
pub struct WindowArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "sweep")]
    pub method: MethodArg,
    /// Smallest drive searched, MHz (default 1e-4 κ).
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Largest drive searched, MHz (default 1e4 κ).
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Detuning probes before edge refinement.
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub rel_tol: f64,
}

#[derive(Args, Debug)]
pub struct G2Args {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Delays in µs (default 1001 points over [0, 10/κ]).
    #[arg(long)]
    pub tau: Option<GridSpec>,
}

#[derive(Args, Debug)]
pub struct G2ScanArgs {
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Lower,
    Upper,
}

#[derive(Args, Debug)]
pub struct ResponseArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Probe offsets ω′/2π in MHz.
    #[arg(long, default_value = "-2:2:2001", allow_hyphen_values = true)]
    pub omega_prime: GridSpec,
    /// Stable root to linearize about when two exist.
    #[arg(long, value_enum, default_value = "lower")]
    pub branch: BranchArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Kerr,
    Full,
    Both,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub variant: VariantArg,
    /// Delays in µs (default 201 points over [0, 10/κ]); ignored for scans.
    #[arg(long)]
    pub tau: Option<GridSpec>,
    /// Leave out the linearized rows.
    #[arg(long)]
    pub no_linearized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig4a,
    Fig4b,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig1c => "fig1c",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig3c => "fig3c",
            Preset::Fig3d => "fig3d",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
        }
    }
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub preset: Preset,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
