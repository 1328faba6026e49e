//! Command-line front end: argument parsing, dispatch to the library and
//! CSV/JSON emission.
//!
//! Floats are written with 17 significant digits so every value round-trips
//! exactly. Output depends only on the arguments and seed.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::dispersion::{
    chain_dispersion, cutoff_report, CutoffEstimate, OscillatorParams, PhysicalConstants,
    PROTON_MASS, STATED_CUTOFF_MOMENTUM,
};
use crate::dynamics::{run_sim, SimConfig};
use crate::lattice::{fold_to_bz, BasisSpec, LatticeBasis};
use crate::quantum_bridge::{
    build_qp_matrices, commutator_defect, ground_energy, medium_atom_mass, planck_from_lattice,
    RelationInputs,
};
use crate::scattering::{
    classify, enumerate_three_phonon, kmc_run, KmcMode, KmcStatus, ModeGrid, PhononPopulation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    All,
    Normal,
}

impl From<ModeArg> for KmcMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::All => KmcMode::All,
            ModeArg::Normal => KmcMode::NormalOnly,
        }
    }
}

/// Validated invocation.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "discretum",
    version,
    about = "Discrete-medium lattice, phonon and oscillator toolkit"
)]
pub struct RunConfig {
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Format for tabular output
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Seed for every random draw (overrides the seed in a simulate config)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Fold a wave vector into the first Brillouin zone
    Fold {
        /// JSON basis file: {"dim": d, "vectors": [[..], ..]}
        #[arg(long)]
        basis: PathBuf,
        /// Wave vector, comma separated
        #[arg(long, allow_hyphen_values = true)]
        k: String,
    },
    /// List three-phonon processes on an N-site chain
    Processes {
        /// Number of sites
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Frequency tolerance as a fraction of omega_max
        #[arg(long, default_value_t = 0.2)]
        tol: f64,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Kinetic Monte Carlo of the phonon gas
    Thermalize {
        /// Number of sites
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Frequency tolerance as a fraction of omega_max
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Number of scattering events
        #[arg(long, default_value_t = 10_000)]
        events: usize,
        /// Allowed processes
        #[arg(long, value_enum, default_value_t = ModeArg::All)]
        mode: ModeArg,
        /// Initial phonon count, spread round-robin over labels n-min..=n-max
        #[arg(long, default_value_t = 100)]
        phonons: u64,
        /// Lowest initially occupied label
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n_min: i64,
        /// Highest initially occupied label [default: N/2 - 1]
        #[arg(long, allow_hyphen_values = true)]
        n_max: Option<i64>,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Integrate a harmonic chain and record per-mode energies
    Simulate {
        /// JSON run configuration
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample the chain dispersion over the first zone
    Dispersion {
        #[command(flatten)]
        chain: ChainArgs,
        /// Number of evenly spaced q samples on [-pi/a, pi/a]
        #[arg(long, default_value_t = 101)]
        q_samples: usize,
    },
    /// Cutoff momentum, lattice spacing and zone extent from an energy bound
    Cutoff {
        /// Upper energy bound in eV
        #[arg(long = "Eb-eV", default_value_t = 1e21)]
        eb_ev: f64,
        /// Particle mass in kg
        #[arg(long = "mp-kg", default_value_t = PROTON_MASS)]
        mp_kg: f64,
        /// Quoted cutoff momentum in kg m/s to compare against
        #[arg(long, default_value_t = STATED_CUTOFF_MOMENTUM)]
        p_stated: f64,
    },
    /// Truncated ladder-operator commutator and ground-state energy
    Commutator {
        /// Number of levels
        #[arg(long = "N", default_value_t = 64)]
        levels: usize,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
    },
    /// Oscillator mass that reproduces Planck's constant for a spacing a
    Planck {
        /// Lattice spacing in m
        #[arg(long, default_value_t = 1e-25)]
        a: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, clap::Args)]
pub struct ChainArgs {
    /// Spring constant
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Oscillator mass
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Lattice spacing
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
}

impl ChainArgs {
    fn params(&self) -> crate::Result<OscillatorParams> {
        OscillatorParams::new(self.kappa, self.m, self.a)
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fold { .. } => "fold",
            Command::Processes { .. } => "processes",
            Command::Thermalize { .. } => "thermalize",
            Command::Simulate { .. } => "simulate",
            Command::Dispersion { .. } => "dispersion",
            Command::Cutoff { .. } => "cutoff",
            Command::Commutator { .. } => "commutator",
            Command::Planck { .. } => "planck",
        }
    }
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    RunConfig::try_parse_from(argv)
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{command}: {source}")]
    Model {
        command: &'static str,
        #[source]
        source: crate::Error,
    },
    #[error("{command}: {path}: {message}")]
    Input {
        command: &'static str,
        path: PathBuf,
        message: String,
    },
    #[error("{command}: {message}")]
    Usage {
        command: &'static str,
        message: String,
    },
    #[error("writing output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_f64(x).parse().expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Int(i64),
    Float(f64),
    Text(&'static str),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => f.write_str(&fmt_f64(*x)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.headers.join(","))?;
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(ToString::to_string).collect();
                    writeln!(out, "{}", line.join(","))?;
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = Map::new();
                        for (h, c) in self.headers.iter().zip(row) {
                            let v = match c {
                                Cell::Int(i) => json!(i),
                                Cell::Float(x) => num(*x),
                                Cell::Text(s) => json!(s),
                            };
                            obj.insert(h.clone(), v);
                        }
                        Value::Object(obj)
                    })
                    .collect();
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&Value::Array(rows)).expect("serializable")
                )?;
            }
        }
        Ok(())
    }
}

enum Report {
    Table(Table),
    Json(Value),
}

fn read_json<T: serde::de::DeserializeOwned>(
    command: &'static str,
    path: &Path,
) -> Result<T, CliError> {
    let input = |message: String| CliError::Input {
        command,
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| input(e.to_string()))
}

fn parse_vector(command: &'static str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| CliError::Usage {
                command,
                message: format!("--k: cannot parse `{}`: {e}", s.trim()),
            })
        })
        .collect()
}

fn estimate_json(e: &CutoffEstimate) -> Value {
    json!({
        "p_cut": num(e.p_cut),
        "a_s": num(e.a_s),
        "bz_extent": num(e.bz_extent),
    })
}

fn run(config: &RunConfig, diag: &mut dyn Write) -> Result<Report, CliError> {
    let name = config.command.name();
    let model = |source: crate::Error| CliError::Model {
        command: name,
        source,
    };
    let seed = config.seed.unwrap_or(0);

    Ok(match &config.command {
        Command::Fold { basis, k } => {
            let spec: BasisSpec = read_json(name, basis)?;
            let basis = LatticeBasis::try_from(spec).map_err(model)?;
            let k = parse_vector(name, k)?;
            let folded = fold_to_bz(&basis.reciprocal(), &k).map_err(model)?;
            let d = basis.dim();
            Report::Json(json!({
                "k_folded": folded.k_folded[..d].iter().map(|&x| num(x)).collect::<Vec<_>>(),
                "g_indices": folded.g.indices[..d].to_vec(),
            }))
        }
        Command::Processes { n, tol, chain } => {
            let grid = ModeGrid::new(*n, chain.params().map_err(model)?).map_err(model)?;
            let events = enumerate_three_phonon(&grid, tol * grid.omega_max()).map_err(model)?;
            Report::Table(Table {
                headers: ["n1", "n2", "n3", "g", "kind", "delta_omega"]
                    .map(String::from)
                    .to_vec(),
                rows: events
                    .iter()
                    .map(|e| {
                        vec![
                            Cell::Int(e.n1),
                            Cell::Int(e.n2),
                            Cell::Int(e.n3),
                            Cell::Int(e.g),
                            Cell::Text(classify(e).as_str()),
                            Cell::Float(e.delta_omega),
                        ]
                    })
                    .collect(),
            })
        }
        Command::Thermalize {
            n,
            tol,
            events,
            mode,
            phonons,
            n_min,
            n_max,
            chain,
        } => {
            let grid = ModeGrid::new(*n, chain.params().map_err(model)?).map_err(model)?;
            let table = enumerate_three_phonon(&grid, tol * grid.omega_max()).map_err(model)?;
            let hi = n_max.unwrap_or(grid.hi() - 1);
            let labels: Vec<i64> = (*n_min..=hi).filter(|&l| l != 0).collect();
            if labels.is_empty() {
                return Err(CliError::Usage {
                    command: name,
                    message: format!("no nonzero labels in {n_min}..={hi}"),
                });
            }
            let mut pop = PhononPopulation::empty(&grid);
            for i in 0..*phonons {
                pop.add(labels[i as usize % labels.len()], 1)
                    .map_err(model)?;
            }
            let trace =
                kmc_run(&grid, &pop, &table, *events, seed, (*mode).into()).map_err(model)?;
            if let KmcStatus::Stalled { step } = trace.status {
                writeln!(
                    diag,
                    "warning: thermalize: no applicable event at step {step}; trace ends early"
                )?;
            }
            Report::Table(Table {
                headers: ["step", "drift", "energy", "event_g"]
                    .map(String::from)
                    .to_vec(),
                rows: trace
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            Cell::Int(r.step as i64),
                            Cell::Int(r.drift),
                            Cell::Float(r.energy),
                            Cell::Int(r.event_g),
                        ]
                    })
                    .collect(),
            })
        }
        Command::Simulate { config: path } => {
            let mut sim: SimConfig = read_json(name, path)?;
            if let Some(s) = config.seed {
                sim.init.seed = s;
            }
            let out = run_sim(&sim).map_err(model)?;
            if let Some(w) = out.warning {
                writeln!(diag, "warning: simulate: {w}")?;
            }
            let mut headers = vec!["t".to_string(), "E_total".to_string()];
            headers.extend((0..sim.n_sites).map(|j| format!("E_mode_{j}")));
            Report::Table(Table {
                headers,
                rows: out
                    .rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![Cell::Float(r.t), Cell::Float(r.total_energy)];
                        row.extend(r.mode_energies.iter().map(|&e| Cell::Float(e)));
                        row
                    })
                    .collect(),
            })
        }
        Command::Dispersion { chain, q_samples } => {
            let params = chain.params().map_err(model)?;
            if *q_samples < 2 {
                return Err(CliError::Usage {
                    command: name,
                    message: "--q-samples must be at least 2".into(),
                });
            }
            let lo = -std::f64::consts::PI / params.a();
            let span = -2.0 * lo;
            Report::Table(Table {
                headers: vec!["q".into(), "omega".into()],
                rows: (0..*q_samples)
                    .map(|i| {
                        let q = lo + span * i as f64 / (*q_samples - 1) as f64;
                        vec![Cell::Float(q), Cell::Float(chain_dispersion(&params, q))]
                    })
                    .collect(),
            })
        }
        Command::Cutoff {
            eb_ev,
            mp_kg,
            p_stated,
        } => {
            let consts = PhysicalConstants::default();
            let r = cutoff_report(&consts, *eb_ev, *mp_kg, *p_stated).map_err(model)?;
            Report::Json(json!({
                "E_b_eV": num(r.e_b_ev),
                "E_b_J": num(r.exact.e_b),
                "m_p_kg": num(r.exact.m_p),
                "exact": estimate_json(&r.exact),
                "stated": estimate_json(&r.stated),
                "momentum_ratio": num(r.momentum_ratio),
                "inconsistent": r.inconsistent,
            }))
        }
        Command::Commutator {
            levels,
            hbar,
            m,
            omega,
        } => {
            let (q, p) = build_qp_matrices(*levels, *m, *omega, *hbar).map_err(model)?;
            let c = commutator_defect(&q, &p, *hbar).map_err(model)?;
            let e0 = ground_energy(&q, &p, *m, *omega).map_err(model)?;
            Report::Json(json!({
                "N": levels,
                "hbar": num(*hbar),
                "max_defect": num(c.max_defect),
                "corner": { "re": num(c.corner.re), "im": num(c.corner.im) },
                "ground_energy": num(e0),
                "reversed_magnitude_defect": num(c.reversed_magnitude_defect),
                "reversed_real_defect": num(c.reversed_real_defect),
            }))
        }
        Command::Planck { a } => {
            let consts = PhysicalConstants::default();
            let mass = medium_atom_mass(&consts, *a).map_err(model)?;
            let inputs = RelationInputs::with_light_speed(mass, *a, consts).map_err(model)?;
            Report::Json(json!({
                "a": num(*a),
                "mass_kg": num(mass),
                "h_roundtrip": num(planck_from_lattice(&inputs)),
                "h": num(consts.h),
            }))
        }
    })
}

/// Runs the configured subcommand, writing its output to `config.output` or
/// `out`, and diagnostics to `diag`. Returns the process exit status.
pub fn dispatch(config: &RunConfig, out: &mut dyn Write, diag: &mut dyn Write) -> i32 {
    match dispatch_inner(config, out, diag) {
        Ok(()) => 0,
        // downstream closed early, e.g. `| head`
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(diag, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch_inner(
    config: &RunConfig,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<(), CliError> {
    let report = run(config, diag)?;
    let mut buf = Vec::new();
    match report {
        Report::Table(t) => t.write(config.format, &mut buf)?,
        Report::Json(v) => writeln!(
            buf,
            "{}",
            serde_json::to_string_pretty(&v).expect("serializable")
        )?,
    }
    match &config.output {
        Some(path) => fs::write(path, &buf)?,
        None => out.write_all(&buf)?,
    }
    Ok(())
}
