//! Command-line front end. `run` does the work; the binary only maps the
//! outcome to an exit status.
//!
//! Exit codes: 0 when everything passes, 1 when a check (or the lift itself)
//! fails on mathematical grounds, 2 for usage, schema and I/O errors.

use crate::error::{Error, Result};
use crate::interchange::{load_module, load_triple, module_to_json, save_module, save_triple, triple_to_json};
use crate::lift::{build_triple, LiftConfig, NormMode};
use crate::module::{build_circle_module, build_torus_module, validate_axioms, FredholmModule};
use crate::verify::{commutator_norm_sweep, decay_csv, verify_triple, VerifyConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const SEED_ENV: &str = "SPECTRAL_LIFT_SEED";

#[derive(Debug, Parser)]
#[command(name = "spectral-lift", version, about = "Lift Fredholm modules to spectral triples and verify the result")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an example module file.
    Build,
    /// Lift a module file to a triple file.
    Lift {
        /// Module file produced by `build`.
        module: PathBuf,
    },
    /// Check a triple against its module; CSV to --out, JSON to --report.
    Verify { triple: PathBuf, module: PathBuf },
    /// Lift an example at several sizes; CSV to --out, decay tables next to it.
    Sweep,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Circle,
    Torus2,
}

impl Example {
    pub fn build(self, n: usize) -> Result<FredholmModule> {
        match self {
            Example::Circle => build_circle_module(n),
            Example::Torus2 => build_torus_module(2, n),
        }
    }
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// `--config` file, then to the built-in default.
#[derive(Debug, Default, Args)]
pub struct Options {
    #[arg(long, global = true, value_enum)]
    pub example: Option<Example>,
    /// Truncation size; a comma-separated ascending list for `sweep`.
    #[arg(long, global = true)]
    pub size: Option<String>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub mode: Option<NormMode>,
    #[arg(long = "ball-radius", global = true)]
    pub ball_radius: Option<usize>,
    #[arg(long = "scale-margin", global = true)]
    pub scale_margin: Option<f64>,
    #[arg(long = "kernel-tol", global = true)]
    pub kernel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long = "g0-exponent", global = true)]
    pub g0_exponent: Option<f64>,
    /// Master seed of the randomized suites (falls back to SPECTRAL_LIFT_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON report path for `verify` and `sweep`.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// `key = value` file; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Record wall-clock runtimes in sweep output (not reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
}

/// What a successful invocation concluded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) if is_usage_error(e) => 2,
        Err(_) => 1,
    }
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::Schema(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::NonFinite { .. }
            | Error::NotHermitian { .. }
            | Error::AxiomViolation { .. }
            | Error::EnumerationCap { .. }
    )
}

/// Parses a `key = value` file; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key = value", i + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidArgument(format!("config key {key}: cannot parse {v:?}")))
}

impl Options {
    /// Fills unset fields from a config map; unknown keys are rejected.
    pub fn merge_config(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in map {
            match k.as_str() {
                "example" => {
                    if self.example.is_none() {
                        self.example = Some(
                            Example::from_str(v, true)
                                .map_err(|_| Error::InvalidArgument(format!("unknown example {v:?}")))?,
                        )
                    }
                }
                "size" => _ = self.size.get_or_insert_with(|| v.clone()),
                "p" => fill(&mut self.p, k, v)?,
                "mode" => fill(&mut self.mode, k, v)?,
                "ball-radius" => fill(&mut self.ball_radius, k, v)?,
                "scale-margin" => fill(&mut self.scale_margin, k, v)?,
                "kernel-tol" => fill(&mut self.kernel_tol, k, v)?,
                "epsilon" => fill(&mut self.epsilon, k, v)?,
                "g0-exponent" => fill(&mut self.g0_exponent, k, v)?,
                "seed" => fill(&mut self.seed, k, v)?,
                "out" => _ = self.out.get_or_insert_with(|| v.into()),
                "report" => _ = self.report.get_or_insert_with(|| v.into()),
                "timings" => self.timings |= parse_value::<bool>(k, v)?,
                other => return Err(Error::InvalidArgument(format!("unknown config key {other:?}"))),
            }
        }
        Ok(())
    }

    pub fn lift_config(&self) -> Result<LiftConfig> {
        let d = LiftConfig::default();
        let cfg = LiftConfig {
            p: self.p,
            mode: self.mode.unwrap_or(d.mode),
            ball_radius: self.ball_radius,
            scale_margin: self.scale_margin.unwrap_or(d.scale_margin),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            kernel_tol: self.kernel_tol.unwrap_or(d.kernel_tol),
            g0_exponent: self.g0_exponent,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn verify_config(&self) -> Result<VerifyConfig> {
        let seed = match (self.seed, std::env::var(SEED_ENV)) {
            (Some(s), _) => s,
            (None, Ok(s)) => parse_value(SEED_ENV, s.trim())?,
            (None, Err(_)) => VerifyConfig::default().seed,
        };
        Ok(VerifyConfig { seed, ..VerifyConfig::default() })
    }

    fn sizes(&self) -> Result<Vec<usize>> {
        let raw = self.size.as_deref().ok_or_else(|| Error::InvalidArgument("--size is required".into()))?;
        raw.split(',').map(|s| parse_value("size", s.trim())).collect()
    }

    fn example(&self) -> Result<Example> {
        self.example.ok_or_else(|| Error::InvalidArgument("--example is required".into()))
    }
}

fn fill<T: std::str::FromStr>(slot: &mut Option<T>, key: &str, v: &str) -> Result<()> {
    if slot.is_none() {
        *slot = Some(parse_value(key, v)?);
    }
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `out.csv` → `out.decay-<n>.csv`.
pub fn decay_path(out: &Path, n: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    out.with_file_name(format!("{stem}.decay-{n}.csv"))
}

pub fn run(mut cli: Cli) -> Result<Outcome> {
    if let Some(path) = cli.opts.config.clone() {
        let map = parse_config(&fs::read_to_string(path)?)?;
        cli.opts.merge_config(&map)?;
    }
    let o = &cli.opts;
    match &cli.command {
        Command::Build => {
            let sizes = o.sizes()?;
            let [n] = sizes[..] else {
                return Err(Error::InvalidArgument("build takes a single --size".into()));
            };
            let m = o.example()?.build(n)?;
            let res = validate_axioms(&m)?;
            eprintln!("dim {}  axiom residuals {}", m.dim(), serde_json::to_string(&res)?);
            match &o.out {
                Some(p) => save_module(p, &m)?,
                None => print!("{}", module_to_json(&m)?),
            }
            Ok(Outcome::Pass)
        }
        Command::Lift { module } => {
            let m = load_module(module)?;
            let t = build_triple(&m, &o.lift_config()?)?;
            let pv = &t.provenance;
            eprintln!(
                "sigma {:e}  K {}  weight sum {:e}  tail bound {:e}  kernel dim {}  p {}",
                pv.sigma, pv.ball_radius, pv.weight_sum, pv.tail_bound, pv.kernel_dim, pv.p_used
            );
            if pv.kernel_warning {
                eprintln!("warning: kernel split consistency residual {:e}", pv.residuals.kernel_consistency);
            }
            match &o.out {
                Some(p) => save_triple(p, &t)?,
                None => print!("{}", triple_to_json(&t)?),
            }
            Ok(Outcome::Pass)
        }
        Command::Verify { triple, module } => {
            let m = load_module(module)?;
            let t = load_triple(triple)?;
            let report = verify_triple(&m, &t, &o.verify_config()?)?;
            emit(o.out.as_deref(), &report.to_csv())?;
            if let Some(p) = &o.report {
                fs::write(p, report.to_json()?)?;
            }
            for row in report.failures() {
                eprintln!("FAIL {} = {:e} (needs {})", row.name, row.value, row.threshold);
            }
            Ok(if report.all_hard_pass { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Sweep => {
            let ex = o.example()?;
            let sizes = o.sizes()?;
            let table = commutator_norm_sweep(&|n| ex.build(n), &sizes, &o.lift_config()?, o.timings)?;
            emit(o.out.as_deref(), &table.to_csv())?;
            if let Some(out) = &o.out {
                for row in &table.rows {
                    fs::write(decay_path(out, row.size), decay_csv(&row.decay))?;
                }
            }
            if let Some(p) = &o.report {
                fs::write(p, serde_json::to_string_pretty(&table)? + "\n")?;
            }
            eprintln!("max consecutive commutator-norm ratio {:.6}", table.max_ratio);
            Ok(if table.bounded { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let r = run(cli);
    if let Err(e) = &r {
        eprintln!("error: {e}");
    }
    exit_code(&r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let map = parse_config("# sweep\nexample = torus2\nkernel_tol = 1e-10 # inline\n\nsize=6,10\n").unwrap();
        assert_eq!(map["kernel-tol"], "1e-10");
        let mut o = Options { size: Some("4".into()), ..Options::default() };
        o.merge_config(&map).unwrap();
        assert_eq!(o.example, Some(Example::Torus2));
        assert_eq!(o.kernel_tol, Some(1e-10));
        assert_eq!(o.size.as_deref(), Some("4"));
        assert!(parse_config("no equals sign").is_err());
        assert!(o.merge_config(&parse_config("colour = red").unwrap()).is_err());
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&Ok(Outcome::Pass)), 0);
        assert_eq!(exit_code(&Ok(Outcome::Fail)), 1);
        assert_eq!(exit_code(&Err(Error::InvalidArgument("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::NoAdmissibleScale)), 1);
    }

    #[test]
    fn decay_paths_sit_next_to_output() {
        assert_eq!(decay_path(Path::new("/tmp/s.csv"), 16), PathBuf::from("/tmp/s.decay-16.csv"));
    }
}
