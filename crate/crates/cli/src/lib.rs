//! Command implementations behind the `otfs` executable.

pub mod gridio;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use otfs_core::bench::{run_bench, BenchOptions};
use otfs_core::channel::{
    apply_channel, dense_channel_with_cap, spectrum, DEFAULT_DENSE_CAP, DEFAULT_ZF_EPSILON,
};
use otfs_core::equalizer::{mmse_dense, mmse_fft2, zf_dense, zf_fft2};
use otfs_core::sim::{run_ber_sweep, SimConfig};
use otfs_core::verify::run_checks;
use otfs_core::{Error, Method, NoiseModel, PathSet, TransformPlan};
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Singular(String),
    #[error("{0} check(s) failed")]
    Verify(usize),
    #[error(transparent)]
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => EXIT_VERIFY,
            CliError::Singular(_) => EXIT_SINGULAR,
            CliError::Core(Error::Singular { .. } | Error::SpectralNull { .. }) => EXIT_SINGULAR,
            _ => EXIT_USAGE,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "otfs", version, about = "Delay-Doppler channel equalization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equalize one received grid with a known channel.
    Equalize(EqualizeArgs),
    /// Monte-Carlo BER sweep from a JSON config.
    Ber(BerArgs),
    /// Operation counts and wall-clock timings per grid size.
    Bench(BenchArgs),
    /// Fast paths against brute-force references at small sizes.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct EqualizeArgs {
    /// Channel JSON: {"N":..,"M":..,"paths":[{"re","im","k","l"}]}.
    #[arg(long)]
    pub channel: PathBuf,
    /// Received grid CSV (`k,l,re,im`).
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the estimate.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "fft2-mmse")]
    pub method: String,
    /// Noise variance per complex sample (MMSE only).
    #[arg(long, default_value_t = 0.0)]
    pub sigma2: f64,
    /// Significant digits written per value.
    #[arg(long, default_value_t = gridio::MAX_DIGITS as u8,
          value_parser = clap::value_parser!(u8).range(1..=17))]
    pub digits: u8,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Sweep config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV destination (stdout when omitted). A `<output>.json` sidecar
    /// records the effective config and warnings.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Override a config field, e.g. `--set seed=7`. Values are JSON.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Grid sizes: `16` means 16x16, `8x32` means N=8, M=32.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub sizes: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "dense-zf,dense-mmse,fft2-zf,fft2-mmse")]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = otfs_core::bench::MIN_REPETITIONS)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Runs a parsed command, writing its report lines to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    match cli.command {
        Command::Equalize(a) => cmd_equalize(&a, out),
        Command::Ber(a) => cmd_ber(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn say(out: &mut dyn std::io::Write, line: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    s.parse().map_err(|e: Error| CliError::Input(e.to_string()))
}

pub fn cmd_equalize(a: &EqualizeArgs, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let ps = PathSet::from_json(&read(&a.channel)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.channel.display())))?;
    let (n, m) = (ps.n_doppler(), ps.n_delay());
    let y = gridio::read_grid(&read(&a.input)?, n, m)?;
    let method = parse_method(&a.method)?;
    let noise = NoiseModel::new(a.sigma2)?;

    let plan = TransformPlan::new(n, m)?;
    let spec = spectrum(&plan, &ps)?;
    let null_report = || match spec.first_null(DEFAULT_ZF_EPSILON) {
        Some((k, l, mag)) => format!("spectral null at bin ({k}, {l}), |delta| = {mag:e}"),
        None => format!("smallest |delta| = {:e}", spec.min_abs()),
    };
    let result = match method {
        Method::Fft2Zf => zf_fft2(&plan, &spec, &y),
        Method::Fft2Mmse => mmse_fft2(&plan, &spec, &y, noise),
        Method::DenseZf => dense_channel_with_cap(&ps, a.dense_cap).and_then(|h| zf_dense(&h, &y.vec())),
        Method::DenseMmse => {
            dense_channel_with_cap(&ps, a.dense_cap).and_then(|h| mmse_dense(&h, &y.vec(), noise))
        }
    };
    let frame = match result {
        Ok(f) => f,
        Err(e @ (Error::Singular { .. } | Error::SpectralNull { .. })) => {
            return Err(CliError::Singular(format!("{e}; {}", null_report())));
        }
        Err(e) => return Err(e.into()),
    };

    let hx = apply_channel(&ps, &frame.estimate)?;
    let residual = hx.max_abs_diff(&y);
    write(&a.output, &gridio::write_grid(&frame.estimate, a.digits.into()))?;
    say(out, format_args!("method: {method}"))?;
    say(out, format_args!("grid: {n}x{m}"))?;
    say(out, format_args!("complex multiplications: {}", frame.mults))?;
    say(out, format_args!("residual max|H x - y|: {residual:.3e}"))?;
    say(out, format_args!("relative residual: {:.3e}", residual / y.max_abs().max(f64::MIN_POSITIVE)))?;
    say(out, format_args!("min |delta|: {:.3e}", spec.min_abs()))
}

/// Applies `key=value` overrides to the config JSON before parsing it.
pub fn apply_overrides(doc: &mut Value, overrides: &[String]) -> Result<(), CliError> {
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| CliError::Input("config must be a JSON object".into()))?;
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("override `{o}` is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        obj.insert(key.trim().to_string(), value);
    }
    Ok(())
}

pub fn load_sim_config(path: &Path, overrides: &[String]) -> Result<SimConfig, CliError> {
    let mut doc: Value = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    apply_overrides(&mut doc, overrides)?;
    let cfg: SimConfig = serde_json::from_value(doc)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_ber(a: &BerArgs, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let cfg = load_sim_config(&a.config, &a.overrides)?;
    let report = run_ber_sweep(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let csv = report.to_csv();
    match &a.output {
        Some(path) => {
            write(path, &csv)?;
            let mut sidecar = path.clone().into_os_string();
            sidecar.push(".json");
            write(Path::new(&sidecar), &report.sidecar_json())?;
            say(out, format_args!("wrote {} rows to {}", report.rows.len(), path.display()))
        }
        None => out.write_all(csv.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

pub fn parse_size(s: &str) -> Result<(usize, usize), CliError> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| CliError::Input(format!("bad grid size `{s}`")))
    };
    match s.split_once('x') {
        Some((n, m)) => Ok((num(n)?, num(m)?)),
        None => num(s).map(|v| (v, v)),
    }
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let sizes = a.sizes.iter().map(|s| parse_size(s)).collect::<Result<Vec<_>, _>>()?;
    let methods = a.methods.iter().map(|s| parse_method(s)).collect::<Result<Vec<_>, _>>()?;
    let opts = BenchOptions {
        repetitions: a.repetitions,
        warmup: a.warmup,
        dense_cap: a.dense_cap,
    };
    let report = run_bench(&sizes, &methods, &opts)?;
    for s in &report.skipped {
        eprintln!("skipped {} at {}x{}: {}", s.method, s.n_doppler, s.n_delay, s.reason);
    }
    let csv = report.to_csv();
    match &a.output {
        Some(path) => write(path, &csv),
        None => out.write_all(csv.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let checks = run_checks(a.seed)?;
    let mut failed = 0;
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!c.passed);
        say(out, format_args!("{tag}  {}: {}", c.name, c.detail))?;
    }
    if failed > 0 {
        return Err(CliError::Verify(failed));
    }
    say(out, format_args!("all {} checks passed", checks.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_size("16").unwrap(), (16, 16));
        assert_eq!(parse_size("8x32").unwrap(), (8, 32));
        assert!(parse_size("0").is_err());
        assert!(parse_size("8x").is_err());
    }

    #[test]
    fn overrides_patch_json() {
        let mut doc = serde_json::json!({"seed": 1, "N": 4});
        apply_overrides(&mut doc, &["seed=7".into(), "equalizers=[\"fft2-zf\"]".into()]).unwrap();
        assert_eq!(doc["seed"], 7);
        assert_eq!(doc["equalizers"][0], "fft2-zf");
        assert!(apply_overrides(&mut doc, &["seed".into()]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Verify(1).exit_code(), EXIT_VERIFY);
        assert_eq!(CliError::Singular(String::new()).exit_code(), EXIT_SINGULAR);
        assert_eq!(CliError::Input(String::new()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Core(Error::Config("x".into())).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Core(Error::Singular { condition: 1e20 }).exit_code(), EXIT_SINGULAR);
    }
}
