//! Complexity accounting: analytic operation-count models, counted
//! multiplications from the equalizers themselves, and median wall-clock
//! timings.

use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_channel, dense_channel_with_cap, spectrum, DenseChannel, PathSet};
use crate::equalizer::{mmse_dense, mmse_fft2, zf_dense, zf_fft2, EqualizedFrame, Method, NoiseModel};
use crate::error::{Error, Result};
use crate::grid::DdGrid;
use crate::modem::{qpsk_map, BitFrame};
use crate::sim::{add_awgn, draw_channel, SimConfig, Tu6Profile};
use crate::transform::TransformPlan;

pub const MIN_REPETITIONS: usize = 5;

const BENCH_SEED: u64 = 0x0f75;
const BENCH_SIGMA2: f64 = 0.1;

/// Rows of the complexity comparison. `FdZfKronecker` exists only as a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplexityModel {
    DenseZf,
    DenseMmse,
    FdZfKronecker,
    Fft2Zf,
    Fft2Mmse,
}

impl From<Method> for ComplexityModel {
    fn from(m: Method) -> Self {
        match m {
            Method::DenseZf => ComplexityModel::DenseZf,
            Method::DenseMmse => ComplexityModel::DenseMmse,
            Method::Fft2Zf => ComplexityModel::Fft2Zf,
            Method::Fft2Mmse => ComplexityModel::Fft2Mmse,
        }
    }
}

impl fmt::Display for ComplexityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ComplexityModel::DenseZf => "dense-zf",
            ComplexityModel::DenseMmse => "dense-mmse",
            ComplexityModel::FdZfKronecker => "fd-zf-kronecker",
            ComplexityModel::Fft2Zf => "fft2-zf",
            ComplexityModel::Fft2Mmse => "fft2-mmse",
        };
        f.write_str(name)
    }
}

/// Complex multiplications predicted by the model for an `N x M` grid.
///
/// The `fft2` rows use the radix-2 count `(NM/2) log2(NM)` per 2D transform,
/// three transforms, plus `NM` (ZF) or `4 NM` (MMSE) of diagonal work. The
/// dense rows are leading-order `(NM)^3` and `(NM)^2`.
pub fn analytic_count(model: ComplexityModel, n_doppler: usize, n_delay: usize) -> Result<f64> {
    let nm = (n_doppler * n_delay) as f64;
    if nm == 0.0 {
        return Err(Error::ModelDomain("empty grid".into()));
    }
    let fft_rows = |diag: f64| -> Result<f64> {
        if !n_doppler.is_power_of_two() || !n_delay.is_power_of_two() {
            return Err(Error::ModelDomain(format!(
                "radix-2 model needs power-of-two N and M, got {n_doppler}x{n_delay}"
            )));
        }
        Ok(3.0 * (nm / 2.0) * nm.log2() + diag * nm)
    };
    match model {
        ComplexityModel::DenseZf | ComplexityModel::DenseMmse => Ok(nm.powi(3)),
        ComplexityModel::FdZfKronecker => Ok(nm.powi(2)),
        ComplexityModel::Fft2Zf => fft_rows(1.0),
        ComplexityModel::Fft2Mmse => fft_rows(4.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub n_doppler: usize,
    pub n_delay: usize,
    pub mults_counted: u64,
    pub mults_model: f64,
    pub wall_ns_median: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRun {
    pub method: Method,
    pub n_doppler: usize,
    pub n_delay: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub repetitions: usize,
    pub rows: Vec<BenchRow>,
    pub skipped: Vec<SkippedRun>,
}

impl BenchReport {
    pub fn row(&self, method: Method, n_doppler: usize, n_delay: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.n_doppler == n_doppler && r.n_delay == n_delay)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,N,M,mults_counted,mults_model,wall_ns_median\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.method, r.n_doppler, r.n_delay, r.mults_counted, r.mults_model, r.wall_ns_median
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub repetitions: usize,
    pub warmup: usize,
    pub dense_cap: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            repetitions: MIN_REPETITIONS,
            warmup: 1,
            dense_cap: crate::channel::DEFAULT_DENSE_CAP,
        }
    }
}

/// Fixed test frame for one grid size: TU-6 channel, QPSK data and noise.
struct Workload {
    plan: TransformPlan,
    channel: PathSet,
    y: DdGrid,
}

impl Workload {
    fn new(n_doppler: usize, n_delay: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(BENCH_SEED ^ ((n_doppler as u64) << 20) ^ n_delay as u64);
        let cfg = SimConfig::new(n_doppler, n_delay);
        let channel = draw_channel(&cfg, &Tu6Profile::default(), &mut rng)?;
        let x = qpsk_map(&BitFrame::random(n_doppler, n_delay, &mut rng), n_doppler, n_delay)?;
        let mut y = apply_channel(&channel, &x)?;
        add_awgn(&mut y, BENCH_SIGMA2, &mut rng);
        Ok(Workload {
            plan: TransformPlan::new(n_doppler, n_delay)?,
            channel,
            y,
        })
    }

    /// The timed region: channel diagonalization plus equalization for the
    /// `fft2` methods, the solve alone for the dense ones.
    fn run(&self, method: Method, dense: Option<&DenseChannel>) -> Result<EqualizedFrame> {
        let noise = NoiseModel::new(BENCH_SIGMA2)?;
        match method {
            Method::Fft2Zf => {
                let spec = spectrum(&self.plan, &self.channel)?;
                zf_fft2(&self.plan, &spec, &self.y)
            }
            Method::Fft2Mmse => {
                let spec = spectrum(&self.plan, &self.channel)?;
                mmse_fft2(&self.plan, &spec, &self.y, noise)
            }
            Method::DenseZf => zf_dense(dense.expect("dense channel built"), &self.y.vec()),
            Method::DenseMmse => mmse_dense(dense.expect("dense channel built"), &self.y.vec(), noise),
        }
    }
}

pub fn run_bench(sizes: &[(usize, usize)], methods: &[Method], opts: &BenchOptions) -> Result<BenchReport> {
    if opts.repetitions < MIN_REPETITIONS {
        return Err(Error::Config(format!(
            "at least {MIN_REPETITIONS} repetitions required, got {}",
            opts.repetitions
        )));
    }
    let mut report = BenchReport {
        repetitions: opts.repetitions,
        ..Default::default()
    };
    for &(n, m) in sizes {
        let work = Workload::new(n, m)?;
        let needs_dense = methods.iter().any(|m| m.is_dense());
        let dense = if needs_dense {
            dense_channel_with_cap(&work.channel, opts.dense_cap)
        } else {
            Err(Error::Config("dense channel not requested".into()))
        };
        for &method in methods {
            let skip = |reason: String| SkippedRun {
                method,
                n_doppler: n,
                n_delay: m,
                reason,
            };
            let dense_ref = match (&dense, method.is_dense()) {
                (Err(e), true) => {
                    report.skipped.push(skip(e.to_string()));
                    continue;
                }
                (Ok(d), true) => Some(d),
                _ => None,
            };
            match time_method(&work, method, dense_ref, opts) {
                Ok((mults_counted, wall_ns_median)) => {
                    let mults_model = analytic_count(method.into(), n, m).unwrap_or(f64::NAN);
                    report.rows.push(BenchRow {
                        method,
                        n_doppler: n,
                        n_delay: m,
                        mults_counted,
                        mults_model,
                        wall_ns_median,
                    });
                }
                Err(e) => report.skipped.push(skip(e.to_string())),
            }
        }
    }
    Ok(report)
}

fn time_method(
    work: &Workload,
    method: Method,
    dense: Option<&DenseChannel>,
    opts: &BenchOptions,
) -> Result<(u64, u64)> {
    let mut mults = 0;
    for _ in 0..opts.warmup {
        mults = black_box(work.run(method, dense)?).mults;
    }
    let mut times = Vec::with_capacity(opts.repetitions);
    for _ in 0..opts.repetitions {
        let start = Instant::now();
        let frame = black_box(work.run(method, dense)?);
        times.push(start.elapsed().as_nanos() as u64);
        mults = frame.mults;
    }
    times.sort_unstable();
    Ok((mults, times[times.len() / 2]))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_examples() {
        assert_eq!(analytic_count(ComplexityModel::Fft2Zf, 2, 2).unwrap(), 16.0);
        assert_eq!(analytic_count(ComplexityModel::Fft2Mmse, 2, 2).unwrap(), 28.0);
        assert_eq!(analytic_count(ComplexityModel::Fft2Zf, 1, 1).unwrap(), 1.0);
        assert_eq!(analytic_count(ComplexityModel::Fft2Mmse, 1, 1).unwrap(), 4.0);
        assert_eq!(analytic_count(ComplexityModel::DenseMmse, 1, 1).unwrap(), 1.0);
        assert_eq!(analytic_count(ComplexityModel::FdZfKronecker, 4, 4).unwrap(), 256.0);
        assert!(matches!(
            analytic_count(ComplexityModel::Fft2Zf, 3, 4),
            Err(Error::ModelDomain(_))
        ));
        assert!(analytic_count(ComplexityModel::DenseZf, 3, 5).is_ok());
    }

    #[test]
    fn dense_to_fft_ratio_at_64() {
        let dense = analytic_count(ComplexityModel::DenseMmse, 64, 64).unwrap();
        let fft = analytic_count(ComplexityModel::Fft2Zf, 64, 64).unwrap();
        let ratio = dense / fft;
        assert_eq!(ratio, 4096f64.powi(3) / 77_824.0);
        // leading-order (NM)^2 / (1.5 log2 NM)
        let leading = 4096f64.powi(2) / 18.0;
        assert!((ratio / leading - 1.0).abs() < 0.06, "{ratio} vs {leading}");
    }

    #[test]
    fn model_monotone_and_doubling_ratio() {
        for model in [ComplexityModel::Fft2Zf, ComplexityModel::Fft2Mmse] {
            let mut prev = 0.0;
            for p in 1..8 {
                let v = analytic_count(model, 1 << p, 1 << p).unwrap();
                assert!(v > prev);
                prev = v;
            }
        }
        // leading term ratio when NM doubles
        let nm = 256.0f64;
        let lead = |x: f64| x * x.log2();
        let r = lead(2.0 * nm) / lead(nm);
        assert!(r > 2.0 && r < 2.3);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = (1..6).map(|i| (i as f64, 3.0 * (i as f64).powi(3))).collect();
        assert!((loglog_slope(&pts) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_repetitions() {
        let opts = BenchOptions {
            repetitions: 3,
            ..Default::default()
        };
        assert!(run_bench(&[(4, 4)], &[Method::Fft2Zf], &opts).is_err());
    }

    #[test]
    fn dense_over_cap_is_skipped() {
        let opts = BenchOptions {
            dense_cap: 32,
            ..Default::default()
        };
        let report = run_bench(&[(8, 8)], &[Method::DenseMmse, Method::Fft2Mmse], &opts).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.skipped.len(), 1);
        assert!(report.skipped[0].reason.contains("cap"));
    }
}
