//! Command-line front end.
//!
//! Exit codes: 0 success, 1 property-suite failure, 2 configuration error,
//! 3 input-data violation.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{ExperimentConfig, Requirement};
use crate::error::Error;
use crate::limit_lab::{
    estimate_log_mgf, estimate_mean_diagram, estimate_pb_density, legendre_transform,
    near_additivity_gap, regularity_gap, trial_diagram,
};
use crate::output;
use crate::persistence::{compute_diagram, Filtration};
use crate::rng::SeedSpec;
use crate::verify::{run_suite, Scale};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;

fn long_version() -> &'static str {
    concat!(
        env!("CARGO_PKG_VERSION"),
        "\nconfig schema_version 1",
        "\nfiltration dump format 1",
        "\ndiagram format 1",
        "\ncsv format 1"
    )
}

#[derive(Debug, Parser)]
#[command(name = "cubeph", version, long_version = long_version(), about = "Random cubical filtrations: sampling, persistence diagrams, limit-law estimates")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Output directory (overrides the config's `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one filtration dump per window and trial.
    Sample {
        /// Experiment TOML file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Persistence diagram of a dump file, or of every sample of a config.
    Diagram {
        /// Filtration dump file.
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        input: Option<PathBuf>,
        /// Experiment TOML file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run an estimator and write its CSV table.
    Estimate {
        /// Experiment TOML file.
        #[arg(long)]
        config: PathBuf,
        /// Estimator to run.
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Run the exact property suite.
    Verify {
        #[arg(long, value_enum, default_value = "default")]
        scale: Scale,
        /// Validate a filtration dump before running the suite.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// Persistent Betti densities per trial: `pb_density.csv`.
    Pb,
    /// Mean diagram histograms: `histogram_q<q>_n<n>.csv`.
    Diagram,
    /// Empirical log-MGF: `mgf_q<q>_n<n>.csv`.
    Mgf,
    /// Grid Legendre transform of the log-MGF: `rate_q<q>_n<n>.csv`.
    Rate,
    /// Near-additivity and regularity gaps: `gap_q<q>.csv`.
    Gap,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn config_error(e: Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: e.to_string(),
    }
}

fn data_error(e: Error) -> Failure {
    let code = if matches!(e, Error::Io(_)) { EXIT_CONFIG } else { EXIT_DATA };
    Failure {
        code,
        message: e.to_string(),
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses arguments, runs the command, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("cubeph: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(config_error(Error::Config("--jobs must be at least 1".into())));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| config_error(Error::Config(e.to_string())))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Sample { config } => {
            let cfg = ExperimentConfig::load(config).map_err(config_error)?;
            cmd_sample(&cfg, &out_dir(cli, &cfg))
        }
        Command::Diagram { input: Some(path), .. } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            cmd_diagram_file(path, &out)
        }
        Command::Diagram { config: Some(config), .. } => {
            let cfg = ExperimentConfig::load(config).map_err(config_error)?;
            cmd_diagram_config(&cfg, &out_dir(cli, &cfg))
        }
        Command::Diagram { .. } => Err(config_error(Error::Config("need --input or --config".into()))),
        Command::Estimate { config, which } => {
            let cfg = ExperimentConfig::load(config).map_err(config_error)?;
            cmd_estimate(&cfg, *which, &out_dir(cli, &cfg))
        }
        Command::Verify { scale, input } => cmd_verify(*scale, input.as_deref(), cli.out.as_deref()),
    }
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn create(dir: &Path, name: &str) -> std::result::Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir).map_err(|e| config_error(e.into()))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| config_error(Error::Config(format!("cannot write {}: {e}", path.display()))))
}

fn finish(mut w: BufWriter<File>) -> CmdResult {
    w.flush().map_err(|e| config_error(e.into()))
}

/// Writes `filtration_n{n}_t{trial}.txt` for every window and trial and
/// prints the cube counts per dimension.
pub fn cmd_sample(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let model = cfg.model();
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    for &n in &cfg.n_list {
        let samples = crate::limit_lab::run_trials(cfg.trials, |t| model.sample(n, SeedSpec::new(cfg.seed, t)))
            .map_err(config_error)?;
        for (t, f) in samples.iter().enumerate() {
            let mut w = create(out, &format!("filtration_n{n}_t{t}.txt"))?;
            let header = [format!("model {} trial {t} master {}", model.tag(), cfg.seed)];
            f.write_dump(&mut w, &header).map_err(config_error)?;
            finish(w)?;
            let counts: Vec<String> = f.counts_by_dim().iter().map(usize::to_string).collect();
            let _ = writeln!(stdout, "n={n} trial={t} cubes_by_dim={}", counts.join(","));
        }
    }
    Ok(())
}

fn read_filtration(path: &Path) -> std::result::Result<Filtration, Failure> {
    let file = File::open(path)
        .map_err(|e| config_error(Error::Config(format!("cannot read {}: {e}", path.display()))))?;
    let f = Filtration::read_dump(BufReader::new(file)).map_err(data_error)?;
    f.validate().map_err(|v| data_error(v.into()))?;
    Ok(f)
}

/// Writes `<stem>.diagram.txt` for a dump file.
pub fn cmd_diagram_file(input: &Path, out: &Path) -> CmdResult {
    let f = read_filtration(input)?;
    let dgm = compute_diagram(&f).map_err(data_error)?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("filtration");
    let mut w = create(out, &format!("{stem}.diagram.txt"))?;
    dgm.write(&mut w).map_err(config_error)?;
    finish(w)
}

/// Writes `diagram_n{n}_t{trial}.txt` for every window and trial.
pub fn cmd_diagram_config(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let model = cfg.model();
    for &n in &cfg.n_list {
        let dgms = crate::limit_lab::run_trials(cfg.trials, |t| trial_diagram(&model, n, cfg.seed, t))
            .map_err(config_error)?;
        for (t, dgm) in dgms.iter().enumerate() {
            let mut w = create(out, &format!("diagram_n{n}_t{t}.txt"))?;
            dgm.write(&mut w).map_err(config_error)?;
            finish(w)?;
        }
    }
    Ok(())
}

pub fn cmd_estimate(cfg: &ExperimentConfig, which: Which, out: &Path) -> CmdResult {
    let model = cfg.model();
    let tag = model.tag();
    match which {
        Which::Pb => {
            cfg.require(Requirement::Pairs).map_err(config_error)?;
            let mut ests = Vec::new();
            for &q in &cfg.q {
                for &n in &cfg.n_list {
                    ests.push(
                        estimate_pb_density(&model, q, &cfg.pairs, n, cfg.trials, cfg.seed).map_err(config_error)?,
                    );
                }
            }
            let w = create(out, "pb_density.csv")?;
            output::write_pb_density(w, tag, &ests).map_err(config_error)?;
            let w = create(out, "pb_summary.csv")?;
            output::write_pb_summary(w, tag, &ests).map_err(config_error)
        }
        Which::Diagram => {
            for &q in &cfg.q {
                for &n in &cfg.n_list {
                    let mean = estimate_mean_diagram(&model, q, n, cfg.trials, cfg.l, &cfg.pairs, cfg.seed)
                        .map_err(config_error)?;
                    let w = create(out, &format!("histogram_q{q}_n{n}.csv"))?;
                    output::write_histogram(w, &mean).map_err(config_error)?;
                }
            }
            Ok(())
        }
        Which::Mgf | Which::Rate => {
            let req = if which == Which::Mgf { Requirement::Mgf } else { Requirement::Rate };
            cfg.require(req).map_err(config_error)?;
            let lambda = cfg.lambda_grid().map_err(config_error)?;
            for &q in &cfg.q {
                for &n in &cfg.n_list {
                    let phi = estimate_log_mgf(&model, q, &cfg.pairs, &lambda, n, cfg.trials, cfg.seed)
                        .map_err(config_error)?;
                    let w = create(out, &format!("mgf_q{q}_n{n}.csv"))?;
                    output::write_mgf(w, &phi).map_err(config_error)?;
                    if which == Which::Rate {
                        let x = cfg.x_grid().map_err(config_error)?;
                        let star = legendre_transform(&phi, &x).map_err(config_error)?;
                        let w = create(out, &format!("rate_q{q}_n{n}.csv"))?;
                        output::write_rate(w, &star).map_err(config_error)?;
                    }
                }
            }
            Ok(())
        }
        Which::Gap => {
            cfg.require(Requirement::Gap).map_err(config_error)?;
            let gap = cfg.gap.as_ref().expect("checked by require");
            for &q in &cfg.q {
                let mut combos: Vec<(bool, u32, u32, u32, u64)> = Vec::new();
                for &k in &gap.k {
                    for &r in &gap.r {
                        for &m in &gap.m {
                            combos.extend((0..gap.samples).map(|s| (true, k, r, m, s)));
                        }
                    }
                    for &n in &gap.n {
                        combos.extend((0..gap.samples).map(|s| (false, k, 0, n, s)));
                    }
                }
                let reports = crate::limit_lab::run_trials(combos.len() as u64, |i| {
                    let (near, k, r, mn, s) = combos[i as usize];
                    let seed = SeedSpec::new(cfg.seed, s);
                    if near {
                        near_additivity_gap(&model, q, &cfg.pairs, k, r, mn, seed)
                    } else {
                        regularity_gap(&model, q, &cfg.pairs, k, mn, seed)
                    }
                })
                .map_err(config_error)?;
                let w = create(out, &format!("gap_q{q}.csv"))?;
                output::write_gaps(w, &reports).map_err(config_error)?;
                if let Some(bad) = reports.iter().find(|g| !g.pass) {
                    return Err(Failure {
                        code: EXIT_PROPERTY,
                        message: format!("gap bound violated: {bad:?}"),
                    });
                }
            }
            Ok(())
        }
    }
}

/// Runs the property suite and prints its JSON report; with `input`, the
/// dump is validated first.
pub fn cmd_verify(scale: Scale, input: Option<&Path>, out: Option<&Path>) -> CmdResult {
    if let Some(path) = input {
        let f = read_filtration(path)?;
        compute_diagram(&f).map_err(data_error)?;
    }
    let report = run_suite(scale).map_err(config_error)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    if let Some(dir) = out {
        let mut w = create(dir, "verify_report.json")?;
        writeln!(w, "{json}").map_err(|e| config_error(e.into()))?;
        finish(w)?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_PROPERTY,
            message: "property suite failed".into(),
        })
    }
}
