//! Monte-Carlo bit error rate harness.
//!
//! Each frame draws random bits, maps them to QPSK on the delay-Doppler grid,
//! passes them through a random TU-6-style channel with integer delay and
//! Doppler taps, adds complex Gaussian noise and runs every selected
//! equalizer on the same received grid (perfect channel knowledge).
//!
//! Randomness: frame `f` of SNR point `s` uses a ChaCha8 generator seeded
//! from the run seed with stream id `(s << 32) | f`. Frames are independent,
//! so parallel and serial execution give identical counts.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, dense_channel_with_cap, spectrum, ChannelPath, PathSet, DEFAULT_DENSE_CAP};
use crate::equalizer::{mmse_dense, mmse_fft2, zf_dense, zf_fft2, Method, NoiseModel};
use crate::error::{Error, Result};
use crate::grid::{wrap, DdGrid};
use crate::modem::{qpsk_demod, qpsk_map, BitFrame};
use crate::transform::TransformPlan;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(rename = "N")]
    pub n_doppler: usize,
    #[serde(rename = "M")]
    pub n_delay: usize,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_subcarrier")]
    pub subcarrier_hz: f64,
    #[serde(default = "default_speed")]
    pub speed_kmph: f64,
    /// Es/N0 in dB. `"inf"` selects a noiseless point.
    #[serde(with = "snr_points")]
    pub snr_db_points: Vec<f64>,
    pub frames_per_point: u64,
    /// Keep adding frames until every method has this many errors, up to
    /// `max_frames_per_point`.
    #[serde(default)]
    pub min_bit_errors: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_frames_per_point: Option<u64>,
    pub seed: u64,
    pub equalizers: Vec<Method>,
    #[serde(default = "default_true")]
    pub normalize_gains: bool,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
}

fn default_carrier() -> f64 {
    4e9
}
fn default_subcarrier() -> f64 {
    15e3
}
fn default_speed() -> f64 {
    200.0
}
fn default_true() -> bool {
    true
}
fn default_dense_cap() -> usize {
    DEFAULT_DENSE_CAP
}

impl SimConfig {
    /// Default link: 4 GHz carrier, 15 kHz subcarriers, 200 km/h, on an `N x M` grid.
    pub fn new(n_doppler: usize, n_delay: usize) -> Self {
        SimConfig {
            n_doppler,
            n_delay,
            carrier_hz: default_carrier(),
            subcarrier_hz: default_subcarrier(),
            speed_kmph: default_speed(),
            snr_db_points: vec![0.0, 5.0, 10.0, 15.0],
            frames_per_point: 10,
            min_bit_errors: 0,
            max_frames_per_point: None,
            seed: 0,
            equalizers: vec![Method::Fft2Zf, Method::Fft2Mmse],
            normalize_gains: true,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_doppler < 2 || self.n_delay < 2 {
            return bad(format!(
                "grid must be at least 2x2, got {}x{}",
                self.n_doppler, self.n_delay
            ));
        }
        if self.frames_per_point == 0 {
            return bad("frames_per_point must be at least 1".into());
        }
        if let Some(max) = self.max_frames_per_point {
            if max < self.frames_per_point {
                return bad("max_frames_per_point is below frames_per_point".into());
            }
        }
        if self.snr_db_points.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return bad("SNR points must be numbers or +inf".into());
        }
        if !(self.carrier_hz > 0.0 && self.subcarrier_hz > 0.0 && self.speed_kmph >= 0.0) {
            return bad("carrier and subcarrier spacing must be positive, speed non-negative".into());
        }
        if self.equalizers.is_empty() {
            return bad("no equalizer selected".into());
        }
        let nm = self.n_doppler * self.n_delay;
        if let Some(m) = self.equalizers.iter().find(|m| m.is_dense()) {
            if nm > self.dense_cap {
                return bad(format!("{m} needs N*M <= {}, got {nm}", self.dense_cap));
            }
        }
        Ok(())
    }

    /// OTFS symbol duration `T = 1/df`.
    pub fn symbol_time(&self) -> f64 {
        1.0 / self.subcarrier_hz
    }

    pub fn max_doppler_hz(&self) -> f64 {
        self.speed_kmph / 3.6 * self.carrier_hz / SPEED_OF_LIGHT
    }
}

/// Six-tap Typical Urban power-delay profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Tu6Profile {
    pub delays_us: [f64; 6],
    pub powers_db: [f64; 6],
}

impl Default for Tu6Profile {
    fn default() -> Self {
        Tu6Profile {
            delays_us: [0.0, 0.2, 0.5, 1.6, 2.3, 5.0],
            powers_db: [-3.0, 0.0, -2.0, -6.0, -8.0, -10.0],
        }
    }
}

impl Tu6Profile {
    /// Linear tap powers summing to one.
    pub fn normalized_powers(&self) -> [f64; 6] {
        let linear = self.powers_db.map(|db| 10f64.powf(db / 10.0));
        let total: f64 = linear.iter().sum();
        linear.map(|p| p / total)
    }
}

/// Integer delay taps `round(tau * M * df)`.
pub fn tu6_delay_taps(profile: &Tu6Profile, n_delay: usize, subcarrier_hz: f64) -> Result<Vec<usize>> {
    let rate = n_delay as f64 * subcarrier_hz;
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::Config("M * df must be positive".into()));
    }
    profile
        .delays_us
        .iter()
        .map(|&d| {
            let tap = (d * 1e-6 * rate).round();
            if tap >= n_delay as f64 {
                Err(Error::Config(format!(
                    "delay {d} us maps to tap {tap}, beyond the {n_delay}-bin delay axis"
                )))
            } else {
                Ok(tap.max(0.0) as usize)
            }
        })
        .collect()
}

/// `round(nu_max * N * T)`.
pub fn max_doppler_tap(cfg: &SimConfig) -> usize {
    let taps = cfg.max_doppler_hz() * cfg.n_doppler as f64 * cfg.symbol_time();
    taps.round() as usize
}

/// True when the largest Doppler tap reaches half the Doppler axis.
pub fn doppler_aliasing_risk(cfg: &SimConfig) -> bool {
    2 * max_doppler_tap(cfg) >= cfg.n_doppler
}

/// One TU-6 realization: Rayleigh gains with the profile's variances and
/// Doppler taps uniform on `[-k_max, k_max]`.
pub fn draw_channel<R: Rng + ?Sized>(cfg: &SimConfig, profile: &Tu6Profile, rng: &mut R) -> Result<PathSet> {
    let delays = tu6_delay_taps(profile, cfg.n_delay, cfg.subcarrier_hz)?;
    let k_max = max_doppler_tap(cfg) as i64;
    let powers = profile.normalized_powers();
    let paths = delays
        .iter()
        .zip(powers)
        .map(|(&delay, power)| {
            let scale = (power / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let doppler = rng.random_range(-k_max..=k_max);
            Ok(ChannelPath::new(
                Complex64::new(re, im) * scale,
                wrap(doppler, cfg.n_doppler)?,
                delay,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let ps = PathSet::new(cfg.n_doppler, cfg.n_delay, paths)?;
    if cfg.normalize_gains {
        ps.normalized()
    } else {
        Ok(ps)
    }
}

/// Adds circularly symmetric Gaussian noise of variance `sigma2` per sample.
pub fn add_awgn<R: Rng + ?Sized>(grid: &mut DdGrid, sigma2: f64, rng: &mut R) {
    if sigma2 == 0.0 {
        return;
    }
    let scale = (sigma2 / 2.0).sqrt();
    for z in grid.as_mut_slice() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += Complex64::new(re, im) * scale;
    }
}

/// Generator for one frame of one SNR point.
pub fn frame_rng(seed: u64, snr_index: usize, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 32) | (frame_index & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRow {
    pub method: Method,
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerReport {
    pub config: SimConfig,
    pub rows: Vec<BerRow>,
    pub warnings: Vec<String>,
}

impl BerReport {
    pub fn row(&self, method: Method, snr_db: f64) -> Option<&BerRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.snr_db == snr_db)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,snr_db,bits,bit_errors,ber,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.method, r.snr_db, r.bits, r.bit_errors, r.ber, self.config.seed
            ));
        }
        out
    }

    /// Config echo written next to the CSV.
    pub fn sidecar_json(&self) -> String {
        let doc = serde_json::json!({
            "config": serde_json::from_str::<serde_json::Value>(&self.config.to_json())
                .expect("config is valid JSON"),
            "warnings": self.warnings,
        });
        serde_json::to_string_pretty(&doc).expect("sidecar serializes")
    }
}

struct FrameContext<'a> {
    cfg: &'a SimConfig,
    profile: Tu6Profile,
    plan: TransformPlan,
}

impl FrameContext<'_> {
    /// Bit errors per selected equalizer for one frame.
    fn run(&self, snr_index: usize, frame: u64, noise: NoiseModel) -> Result<Vec<u64>> {
        let cfg = self.cfg;
        let (n, m) = (cfg.n_doppler, cfg.n_delay);
        let mut rng = frame_rng(cfg.seed, snr_index, frame);

        let bits = BitFrame::random(n, m, &mut rng);
        let x = qpsk_map(&bits, n, m)?;
        let channel = draw_channel(cfg, &self.profile, &mut rng)?;
        let mut y = apply_channel(&channel, &x)?;
        add_awgn(&mut y, noise.sigma2(), &mut rng);

        let spec = if cfg.equalizers.iter().any(|e| !e.is_dense()) {
            Some(spectrum(&self.plan, &channel)?)
        } else {
            None
        };
        let dense = if cfg.equalizers.iter().any(|e| e.is_dense()) {
            Some(dense_channel_with_cap(&channel, cfg.dense_cap)?)
        } else {
            None
        };
        let y_vec = y.vec();

        cfg.equalizers
            .iter()
            .map(|method| {
                let frame = match method {
                    Method::Fft2Zf => zf_fft2(&self.plan, spec.as_ref().unwrap(), &y)?,
                    Method::Fft2Mmse => mmse_fft2(&self.plan, spec.as_ref().unwrap(), &y, noise)?,
                    Method::DenseZf => zf_dense(dense.as_ref().unwrap(), &y_vec)?,
                    Method::DenseMmse => mmse_dense(dense.as_ref().unwrap(), &y_vec, noise)?,
                };
                Ok(qpsk_demod(&frame.estimate).hamming_distance(&bits))
            })
            .collect()
    }
}

pub fn run_ber_sweep(cfg: &SimConfig) -> Result<BerReport> {
    cfg.validate()?;
    let profile = Tu6Profile::default();
    // fail early on a grid too small for the delay spread
    tu6_delay_taps(&profile, cfg.n_delay, cfg.subcarrier_hz)?;
    let mut warnings = Vec::new();
    if doppler_aliasing_risk(cfg) {
        warnings.push(format!(
            "maximum Doppler tap {} reaches half of N = {}; Doppler taps alias",
            max_doppler_tap(cfg),
            cfg.n_doppler
        ));
    }

    let ctx = FrameContext {
        cfg,
        profile,
        plan: TransformPlan::new(cfg.n_doppler, cfg.n_delay)?,
    };
    let bits_per_frame = 2 * (cfg.n_doppler * cfg.n_delay) as u64;
    let max_frames = cfg.max_frames_per_point.unwrap_or(cfg.frames_per_point);
    let mut rows = Vec::new();

    for (snr_index, &snr_db) in cfg.snr_db_points.iter().enumerate() {
        let noise = NoiseModel::from_snr_db(snr_db)?;
        let mut errors = vec![0u64; cfg.equalizers.len()];
        let mut frames = 0u64;
        while frames < max_frames {
            let batch = cfg.frames_per_point.min(max_frames - frames);
            let counts = (frames..frames + batch)
                .into_par_iter()
                .map(|f| ctx.run(snr_index, f, noise))
                .collect::<Result<Vec<_>>>()?;
            for frame_counts in counts {
                for (total, e) in errors.iter_mut().zip(frame_counts) {
                    *total += e;
                }
            }
            frames += batch;
            if errors.iter().all(|&e| e >= cfg.min_bit_errors) {
                break;
            }
        }
        let bits = frames * bits_per_frame;
        for (&method, &bit_errors) in cfg.equalizers.iter().zip(&errors) {
            rows.push(BerRow {
                method,
                snr_db,
                frames,
                bits,
                bit_errors,
                ber: bit_errors as f64 / bits as f64,
            });
        }
    }

    Ok(BerReport {
        config: cfg.clone(),
        rows,
        warnings,
    })
}

mod snr_points {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Point {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(points: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let doc: Vec<Point> = points
            .iter()
            .map(|&p| {
                if p.is_finite() {
                    Point::Number(p)
                } else {
                    Point::Text(p.to_string())
                }
            })
            .collect();
        doc.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Point>::deserialize(d)?
            .into_iter()
            .map(|p| match p {
                Point::Number(v) => Ok(v),
                Point::Text(t) if t == "inf" || t == "+inf" => Ok(f64::INFINITY),
                Point::Text(t) => Err(de::Error::custom(format!("invalid SNR point `{t}`"))),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tu6_taps_at_7_68_mhz() {
        let taps = tu6_delay_taps(&Tu6Profile::default(), 512, 15e3).unwrap();
        assert_eq!(taps, vec![0, 2, 4, 12, 18, 38]);
    }

    #[test]
    fn delay_resolution_examples() {
        let p = Tu6Profile {
            delays_us: [0.0; 6],
            powers_db: [0.0; 6],
        };
        assert_eq!(tu6_delay_taps(&p, 7, 3e3).unwrap(), vec![0; 6]);

        // exactly one delay bin: 1 / (M df) = 1/(64 * 15.625 kHz) = 1 us
        let mut p = p;
        p.delays_us[1] = 1.0;
        assert_eq!(tu6_delay_taps(&p, 64, 15_625.0).unwrap()[1], 1);
    }

    #[test]
    fn delay_spread_beyond_grid() {
        let mut p = Tu6Profile::default();
        p.delays_us[5] = 100.0;
        // 100 us at 240 kHz is tap 24 on a 16-bin axis
        let err = tu6_delay_taps(&p, 16, 15e3).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn doppler_tap_examples() {
        let cfg = SimConfig::new(64, 512);
        assert!((cfg.max_doppler_hz() - 741.26).abs() < 0.01);
        assert_eq!(max_doppler_tap(&cfg), 3);
        assert!(!doppler_aliasing_risk(&cfg));

        let mut still = cfg.clone();
        still.speed_kmph = 0.0;
        assert_eq!(max_doppler_tap(&still), 0);

        let mut wide = cfg.clone();
        wide.n_doppler = 128;
        assert_eq!(max_doppler_tap(&wide), 6);

        let mut tiny = cfg;
        tiny.n_doppler = 8;
        tiny.speed_kmph = 2000.0;
        assert_eq!(max_doppler_tap(&tiny), 4);
        assert!(doppler_aliasing_risk(&tiny));
    }

    #[test]
    fn static_channel_has_zero_doppler() {
        let mut cfg = SimConfig::new(16, 512);
        cfg.speed_kmph = 0.0;
        let mut rng = frame_rng(1, 0, 0);
        for _ in 0..20 {
            let ps = draw_channel(&cfg, &Tu6Profile::default(), &mut rng).unwrap();
            assert!(ps.paths().iter().all(|p| p.doppler_tap == 0));
            assert!((ps.total_power() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let cfg = SimConfig::new(16, 64);
        let profile = Tu6Profile::default();
        let draw = || {
            let mut rng = frame_rng(42, 1, 7);
            (0..5)
                .map(|_| draw_channel(&cfg, &profile, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
        let mut other = frame_rng(42, 1, 8);
        assert_ne!(draw()[0], draw_channel(&cfg, &profile, &mut other).unwrap());
    }

    #[test]
    fn config_json_defaults_and_inf() {
        let cfg = SimConfig::from_json(
            r#"{"N":16,"M":32,"snr_db_points":[0,5.5,"inf"],"frames_per_point":3,"seed":7,"equalizers":["fft2-zf","dense-mmse"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.carrier_hz, 4e9);
        assert_eq!(cfg.subcarrier_hz, 15e3);
        assert_eq!(cfg.speed_kmph, 200.0);
        assert_eq!(cfg.snr_db_points, vec![0.0, 5.5, f64::INFINITY]);
        assert_eq!(cfg.equalizers, vec![Method::Fft2Zf, Method::DenseMmse]);
        assert!(cfg.normalize_gains);
        assert_eq!(SimConfig::from_json(&cfg.to_json()).unwrap(), cfg);

        assert!(SimConfig::from_json(r#"{"N":16}"#).is_err());
        assert!(SimConfig::from_json(
            r#"{"N":16,"M":32,"snr_db_points":["loud"],"frames_per_point":3,"seed":7,"equalizers":[]}"#
        )
        .is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = SimConfig::new(1, 32);
        assert!(cfg.validate().is_err());
        cfg.n_doppler = 16;
        assert!(cfg.validate().is_ok());
        cfg.frames_per_point = 0;
        assert!(cfg.validate().is_err());
        cfg.frames_per_point = 1;
        cfg.snr_db_points.push(f64::NAN);
        assert!(cfg.validate().is_err());
        cfg.snr_db_points.pop();
        cfg.equalizers = vec![Method::DenseZf];
        cfg.n_delay = 512;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn noiseless_zf_is_error_free() {
        let mut cfg = SimConfig::new(8, 32);
        cfg.snr_db_points = vec![f64::INFINITY];
        cfg.frames_per_point = 4;
        cfg.equalizers = vec![Method::Fft2Zf, Method::DenseZf];
        let report = run_ber_sweep(&cfg).unwrap();
        for row in &report.rows {
            assert_eq!(row.bit_errors, 0);
            assert_eq!(row.bits, 4 * 2 * 256);
        }
    }

    #[test]
    fn early_stop_extends_until_error_floor() {
        let mut cfg = SimConfig::new(8, 32);
        cfg.snr_db_points = vec![0.0];
        cfg.frames_per_point = 1;
        cfg.min_bit_errors = 200;
        cfg.max_frames_per_point = Some(50);
        let report = run_ber_sweep(&cfg).unwrap();
        let row = &report.rows[0];
        assert!(row.frames > 1 && row.frames < 50);
        assert!(report.rows.iter().all(|r| r.bit_errors >= 200));
        assert!(report.rows.iter().all(|r| r.ber == r.bit_errors as f64 / r.bits as f64));
    }

    #[test]
    fn csv_layout() {
        let mut cfg = SimConfig::new(8, 32);
        cfg.snr_db_points = vec![10.0];
        cfg.frames_per_point = 1;
        cfg.seed = 9;
        cfg.equalizers = vec![Method::Fft2Mmse];
        let csv = run_ber_sweep(&cfg).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "method,snr_db,bits,bit_errors,ber,seed");
        assert!(lines[1].starts_with("fft2-mmse,10,512,"));
        assert!(lines[1].ends_with(",9"));
    }
}
