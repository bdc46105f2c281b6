//! `fso-harvest` command-line front end.
//!
//! Reports are `key = value` lines on stdout. Exit codes: 0 success,
//! 2 invalid input, 3 file I/O, 4 the model cannot meet the request.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fso_harvest::efficiency::CellCatalog;
use fso_harvest::experiment::{
    calibrate_effective_jitter, crossing_range, sweep, Crossing, EvaluationMode, Scenario,
};
use fso_harvest::io::units::{parse_quantity, Dimension};
use fso_harvest::io::{
    load_scenario, write_samples_csv, write_sweep_csv, IoError, RunManifest, ScenarioDocument,
};
use fso_harvest::linkbudget::{harvested_power, ModelWarning};
use fso_harvest::pointing::{
    expected_misalignment_loss, mean_radial_angle, JitterSampleSet, PointingJitter, Side,
};
use fso_harvest::Error;

#[derive(Debug, Parser)]
#[command(name = "fso-harvest", version, about = "Inter-satellite optical power transfer studies")]
struct Cli {
    /// Scenario file, or a preset name (1u-atp, 1u-noatp, 12u-atp, 12u-noatp).
    #[arg(long, global = true, default_value = "1u-noatp")]
    scenario: String,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// mean-angle, expectation or monte-carlo.
    #[arg(long, global = true)]
    mode: Option<EvaluationMode>,
    /// Output file for tabular results (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Solar cell catalog CSV replacing the bundled one.
    #[arg(long, global = true)]
    cells: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print every factor of the link budget at one operating point.
    Budget {
        #[arg(long)]
        range: String,
        #[arg(long)]
        power: String,
        #[arg(long, default_value = "0 urad")]
        psi_t: String,
        #[arg(long, default_value = "0 urad")]
        psi_r: String,
    },
    /// Average harvested power over the scenario's range and power grids.
    Sweep,
    /// Radial error statistics against their closed forms.
    Montecarlo {
        /// Range at which loss factors are compared (default: maximum range).
        #[arg(long)]
        range: Option<String>,
        /// Write raw draws to this CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Longest range allowed by the transmitter aperture cap.
    Maxrange,
    /// Range where average harvested power falls to the requirement.
    Crossing {
        #[arg(long)]
        power: String,
        /// Replace the scenario jitter by this mean radial error on both sides.
        #[arg(long)]
        psi_eff: Option<String>,
    },
    /// Radial error that places the requirement crossing at a given range.
    Calibrate {
        #[arg(long)]
        range: String,
        #[arg(long)]
        power: String,
        /// Defaults to the scenario requirement.
        #[arg(long)]
        required: Option<String>,
    },
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Io(String),
    Infeasible(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::Infeasible(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let text = format!("{}: {e}", e.kind());
        if e.is_infeasible() {
            CliError::Infeasible(text)
        } else {
            CliError::Validation(text)
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::File { .. } => CliError::Io(e.to_string()),
            IoError::Model(m) => m.into(),
            IoError::Field { field, message } => {
                CliError::Validation(format!("invalid {field}: {message}"))
            }
            IoError::Syntax(m) => CliError::Validation(format!("scenario: {m}")),
        }
    }
}

fn io_error(path: &Path, e: impl Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn arg(flag: &str, text: &str, dim: Dimension) -> Result<f64, CliError> {
    parse_quantity(text, dim).map_err(|m| CliError::Validation(format!("invalid --{flag}: {m}")))
}

trait Value {
    fn render(&self) -> String;
}

impl Value for f64 {
    fn render(&self) -> String {
        let a = self.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
            format!("{self:e}")
        } else {
            self.to_string()
        }
    }
}

macro_rules! plain_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

plain_value!(u64, usize, bool, &str, &String, String, EvaluationMode);

struct Report(Vec<(String, String)>);

impl Report {
    fn new() -> Self {
        Report(Vec::new())
    }

    fn put(&mut self, key: &str, value: impl Value) -> &mut Self {
        self.0.push((key.to_string(), value.render()));
        self
    }

    fn print(&self) {
        let mut out = std::io::stdout().lock();
        for (k, v) in &self.0 {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
}

fn rel_gap(estimate: f64, exact: f64) -> f64 {
    if estimate == exact {
        0.0
    } else {
        ((estimate - exact) / exact).abs()
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let catalog = match &cli.cells {
        Some(path) => CellCatalog::load(path).map_err(|e| match e {
            Error::Catalog { line: 0, message } => CliError::Io(message),
            other => CliError::Validation(format!("invalid --cells: {other}")),
        })?,
        None => CellCatalog::bundled(),
    };
    let mut doc = load_scenario(&cli.scenario, &catalog)?;
    apply_overrides(&mut doc.scenario, &cli)?;
    let scenario = &doc.scenario;

    match &cli.command {
        Command::Budget {
            range,
            power,
            psi_t,
            psi_r,
        } => budget(
            scenario,
            arg("range", range, Dimension::Length)?,
            arg("power", power, Dimension::Power)?,
            arg("psi-t", psi_t, Dimension::Angle)?,
            arg("psi-r", psi_r, Dimension::Angle)?,
        ),
        Command::Sweep => run_sweep(&doc, cli.out.as_deref()),
        Command::Montecarlo { range, dump } => {
            let range = range
                .as_deref()
                .map(|r| arg("range", r, Dimension::Length))
                .transpose()?;
            montecarlo(&doc, range, dump.as_deref())
        }
        Command::Maxrange => {
            let r = scenario.max_range_m()?;
            Report::new()
                .put("scenario", &scenario.name)
                .put("max_range_m", r)
                .put("max_range_km", r / 1e3)
                .put("tx_aperture_m", scenario.tx.aperture_cap_m)
                .put("divergence_urad", scenario.spot_diameter_m / r * 1e6)
                .print();
            Ok(())
        }
        Command::Crossing { power, psi_eff } => {
            let p_t = arg("power", power, Dimension::Power)?;
            let mut scenario = scenario.clone();
            if let Some(psi) = psi_eff {
                let psi = arg("psi-eff", psi, Dimension::Angle)?;
                scenario.jitter =
                    PointingJitter::from_mean_radial(psi, psi, scenario.jitter.atp_enabled)?;
            }
            crossing(&scenario, p_t)
        }
        Command::Calibrate {
            range,
            power,
            required,
        } => {
            let r = arg("range", range, Dimension::Length)?;
            let p_t = arg("power", power, Dimension::Power)?;
            let req = match required {
                Some(q) => arg("required", q, Dimension::Power)?,
                None => scenario.p_required_w,
            };
            let psi = calibrate_effective_jitter(scenario, r, p_t, req)?;
            Report::new()
                .put("scenario", &scenario.name)
                .put("range_km", r / 1e3)
                .put("p_t_w", p_t)
                .put("p_required_w", req)
                .put("psi_eff_rad", psi)
                .put("psi_eff_urad", psi * 1e6)
                .put("sigma_eff_urad", psi / mean_radial_angle(1.0) * 1e6)
                .print();
            Ok(())
        }
    }
}

fn apply_overrides(s: &mut Scenario, cli: &Cli) -> Result<(), CliError> {
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(n) = cli.samples {
        if n == 0 {
            return Err(CliError::Validation("invalid --samples: must be at least 1".into()));
        }
        s.mc_samples = n;
    }
    if let Some(mode) = cli.mode {
        s.mode = mode;
    }
    Ok(())
}

fn budget(s: &Scenario, range_m: f64, p_t: f64, psi_t: f64, psi_r: f64) -> Result<(), CliError> {
    let geometry = s.geometry(range_m)?;
    let b = harvested_power(&s.tx, &s.rx, &geometry, p_t, psi_t, psi_r, &s.overrides)?;
    let mut report = Report::new();
    report
        .put("scenario", &s.name)
        .put("range_km", range_m / 1e3)
        .put("divergence_urad", geometry.divergence_rad * 1e6)
        .put("tx_aperture_m", geometry.tx_aperture_m)
        .put("p_t_w", b.p_t_w)
        .put("psi_t_urad", psi_t * 1e6)
        .put("psi_r_urad", psi_r * 1e6)
        .put("free_space_term", b.free_space_term)
        .put("g_t", b.g_t)
        .put("g_r", b.g_r)
        .put("l_t", b.l_t)
        .put("l_r", b.l_r)
        .put("pce", b.pce)
        .put("ehce", b.ehce)
        .put("l_e", b.l_e)
        .put("l_s", b.l_s)
        .put("l_c", b.l_c)
        .put("capture_fraction", b.capture_fraction)
        .put("clamped", b.clamped)
        .put("harvested_w", b.harvested_w);
    for w in &b.warnings {
        let ModelWarning::ModelValidity {
            spot_m,
            threshold_m,
        } = w;
        report.put(
            "warning",
            format!("ModelValidity: spot {spot_m} m below (pi/4) d_r = {threshold_m} m"),
        );
    }
    report.print();
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn run_sweep(doc: &ScenarioDocument, out: Option<&Path>) -> Result<(), CliError> {
    let s = &doc.scenario;
    let ranges = doc.grid.ranges_m(s)?;
    let result = sweep(s, &ranges, &doc.grid.powers_w)?;
    for row in result.failures() {
        if let Err(e) = &row.outcome {
            log::warn!("{} km, {} W: {}: {e}", row.range_m / 1e3, row.p_t_w, e.kind());
        }
    }
    match out {
        Some(path) => {
            let mut file = create(path)?;
            write_sweep_csv(&mut file, &result)?;
            file.flush().map_err(|e| io_error(path, e))?;
            write_manifest("sweep", doc, path)
        }
        None => Ok(write_sweep_csv(std::io::stdout().lock(), &result)?),
    }
}

fn write_manifest(command: &str, doc: &ScenarioDocument, output: &Path) -> Result<(), CliError> {
    let s = &doc.scenario;
    let manifest = RunManifest::new(
        command,
        &s.name,
        &doc.digest,
        s.mode.as_str(),
        s.seed,
        s.mc_samples,
        vec![output.display().to_string()],
    );
    manifest
        .write(&RunManifest::path_for(output))
        .map_err(|e| CliError::Io(e.to_string()))
}

fn montecarlo(doc: &ScenarioDocument, range_m: Option<f64>, dump: Option<&Path>) -> Result<(), CliError> {
    let s = &doc.scenario;
    let range_m = match range_m {
        Some(r) => r,
        None => s.max_range_m()?,
    };
    let aligned = harvested_power(&s.tx, &s.rx, &s.geometry(range_m)?, 1.0, 0.0, 0.0, &s.overrides)?;
    let set = JitterSampleSet::draw(&s.jitter, s.mc_samples, s.seed)?;

    let mut report = Report::new();
    report
        .put("scenario", &s.name)
        .put("samples", set.n_samples)
        .put("seed", set.seed)
        .put("range_km", range_m / 1e3);
    for (side, tag, mean, gain) in [
        (Side::Transmitter, "t", set.mean_radial_t, aligned.g_t),
        (Side::Receiver, "r", set.mean_radial_r, aligned.g_r),
    ] {
        let sigma = s.jitter.sigma(side);
        let analytic = mean_radial_angle(sigma);
        let mc_loss = set.mean_loss(side, gain);
        let closed_loss = expected_misalignment_loss(gain, sigma);
        report
            .put(&format!("sigma_{tag}_urad"), sigma * 1e6)
            .put(&format!("mean_radial_{tag}_urad"), mean * 1e6)
            .put(&format!("mean_radial_{tag}_analytic_urad"), analytic * 1e6)
            .put(&format!("mean_radial_{tag}_rel_gap"), rel_gap(mean, analytic))
            .put(&format!("g_{tag}"), gain)
            .put(&format!("loss_{tag}_mc"), mc_loss)
            .put(&format!("loss_{tag}_closed_form"), closed_loss)
            .put(&format!("loss_{tag}_rel_gap"), rel_gap(mc_loss, closed_loss));
    }
    if let Some(path) = dump {
        let mut file = create(path)?;
        write_samples_csv(&mut file, &set)?;
        file.flush().map_err(|e| io_error(path, e))?;
        write_manifest("montecarlo", doc, path)?;
        report.put("dump", path.display().to_string());
    }
    report.print();
    Ok(())
}

fn crossing(s: &Scenario, p_t: f64) -> Result<(), CliError> {
    let mut report = Report::new();
    report
        .put("scenario", &s.name)
        .put("mode", s.mode)
        .put("p_t_w", p_t)
        .put("p_required_w", s.p_required_w);
    match crossing_range(s, p_t)? {
        Crossing::At {
            range_m,
            power_w,
            iterations,
        } => {
            report
                .put("crossing", "At")
                .put("crossing_km", range_m / 1e3)
                .put("power_w", power_w)
                .put("iterations", iterations);
        }
        Crossing::NoCrossing {
            max_range_m,
            power_w,
        } => {
            report
                .put("crossing", "NoCrossing")
                .put("max_range_km", max_range_m / 1e3)
                .put("power_at_max_w", power_w);
        }
    }
    report.print();
    Ok(())
}
