//! Delay-Doppler channel: sparse path description, the fast shift-and-add
//! application, the channel eigen-spectrum, and the dense doubly block
//! circulant matrix used as an oracle.
//!
//! Only the fast pieces ([`apply_channel`], [`spectrum`]) are meant for
//! production sizes. Anything that materializes an `NM x NM` matrix goes
//! through a size cap and fails with [`Error::ResourceCap`] above it.

use std::f64::consts::PI;

use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DdGrid, DdVector};
use crate::transform::TransformPlan;

/// Largest `N*M` for which dense `NM x NM` structures may be built.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// `|delta|` at or below this marks a spectral null for zero-forcing.
pub const DEFAULT_ZF_EPSILON: f64 = 1e-12;

/// One propagation path on integer delay and Doppler taps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPath {
    pub gain: Complex64,
    pub doppler_tap: usize,
    pub delay_tap: usize,
}

impl ChannelPath {
    pub fn new(gain: Complex64, doppler_tap: usize, delay_tap: usize) -> Self {
        ChannelPath {
            gain,
            doppler_tap,
            delay_tap,
        }
    }
}

/// Gain after the delay-Doppler phase rotation `exp(-j2pi nu tau)`.
///
/// With integer taps `nu*tau = k*l / (N*M*T*df)` and `T*df = 1`.
pub fn effective_gain(path: &ChannelPath, n_doppler: usize, n_delay: usize) -> Complex64 {
    let nm = (n_doppler * n_delay) as u128;
    // k*l is only needed modulo NM
    let turns = (path.doppler_tap as u128 * path.delay_tap as u128) % nm;
    path.gain * Complex64::from_polar(1.0, -2.0 * PI * turns as f64 / nm as f64)
}

/// Sparse channel on an `N x M` delay-Doppler grid. Paths on the same tap
/// pair superpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathSetDoc", into = "PathSetDoc")]
pub struct PathSet {
    n_doppler: usize,
    n_delay: usize,
    paths: Vec<ChannelPath>,
}

impl PathSet {
    pub fn new(n_doppler: usize, n_delay: usize, paths: Vec<ChannelPath>) -> Result<Self> {
        DdGrid::zeros(n_doppler, n_delay)?;
        if paths.is_empty() {
            return Err(Error::Config("a path set needs at least one path".into()));
        }
        for p in &paths {
            if p.doppler_tap >= n_doppler || p.delay_tap >= n_delay {
                return Err(Error::TapOutOfRange {
                    doppler: p.doppler_tap,
                    delay: p.delay_tap,
                    n_doppler,
                    n_delay,
                });
            }
        }
        Ok(PathSet {
            n_doppler,
            n_delay,
            paths,
        })
    }

    /// Single unit path at the origin.
    pub fn identity(n_doppler: usize, n_delay: usize) -> Result<Self> {
        Self::new(
            n_doppler,
            n_delay,
            vec![ChannelPath::new(Complex64::new(1.0, 0.0), 0, 0)],
        )
    }

    pub fn n_doppler(&self) -> usize {
        self.n_doppler
    }

    pub fn n_delay(&self) -> usize {
        self.n_delay
    }

    pub fn paths(&self) -> &[ChannelPath] {
        &self.paths
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// Copy with gains rescaled to unit total power.
    pub fn normalized(&self) -> Result<Self> {
        let power = self.total_power();
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Config(format!(
                "cannot normalize a path set with total power {power}"
            )));
        }
        let scale = power.sqrt().recip();
        let paths = self
            .paths
            .iter()
            .map(|p| ChannelPath {
                gain: p.gain * scale,
                ..*p
            })
            .collect();
        Ok(PathSet { paths, ..*self })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("path set serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Serialize, Deserialize)]
struct PathSetDoc {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    paths: Vec<PathDoc>,
}

#[derive(Serialize, Deserialize)]
struct PathDoc {
    re: f64,
    im: f64,
    k: usize,
    l: usize,
}

impl TryFrom<PathSetDoc> for PathSet {
    type Error = Error;

    fn try_from(doc: PathSetDoc) -> Result<Self> {
        let paths = doc
            .paths
            .into_iter()
            .map(|p| ChannelPath::new(Complex64::new(p.re, p.im), p.k, p.l))
            .collect();
        PathSet::new(doc.n, doc.m, paths)
    }
}

impl From<PathSet> for PathSetDoc {
    fn from(ps: PathSet) -> Self {
        PathSetDoc {
            n: ps.n_doppler,
            m: ps.n_delay,
            paths: ps
                .paths
                .iter()
                .map(|p| PathDoc {
                    re: p.gain.re,
                    im: p.gain.im,
                    k: p.doppler_tap,
                    l: p.delay_tap,
                })
                .collect(),
        }
    }
}

/// The grid `H'` holding the first column of the channel matrix.
pub fn impulse_grid(ps: &PathSet) -> DdGrid {
    let (n, m) = (ps.n_doppler, ps.n_delay);
    let mut grid = DdGrid::zeros(n, m).expect("path set shape is valid");
    for p in &ps.paths {
        grid[(p.doppler_tap, p.delay_tap)] += effective_gain(p, n, m);
    }
    grid
}

/// Noiseless channel output: one circular shift-and-accumulate pass per path.
pub fn apply_channel(ps: &PathSet, x: &DdGrid) -> Result<DdGrid> {
    let (n, m) = (ps.n_doppler, ps.n_delay);
    x.ensure_shape(n, m)?;
    let mut y = DdGrid::zeros(n, m)?;
    let src = x.as_slice();
    let dst = y.as_mut_slice();
    for p in &ps.paths {
        let h = effective_gain(p, n, m);
        for l in 0..m {
            let sl = (l + m - p.delay_tap) % m;
            let out = &mut dst[n * l..n * (l + 1)];
            let input = &src[n * sl..n * (sl + 1)];
            // out[k] += h * input[k - k_i mod N]
            let (head, tail) = out.split_at_mut(p.doppler_tap);
            let split = n - p.doppler_tap;
            for (o, v) in tail.iter_mut().zip(&input[..split]) {
                *o += h * v;
            }
            for (o, v) in head.iter_mut().zip(&input[split..]) {
                *o += h * v;
            }
        }
    }
    Ok(y)
}

/// Eigenvalues of the doubly block circulant channel matrix, arranged on the
/// grid: `delta = dft2_forward(H')`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpectrum {
    delta: DdGrid,
    min_abs: f64,
    mults: u64,
}

impl ChannelSpectrum {
    pub fn delta(&self) -> &DdGrid {
        &self.delta
    }

    pub fn min_abs(&self) -> f64 {
        self.min_abs
    }

    /// Complex multiplications spent computing the spectrum.
    pub fn mults(&self) -> u64 {
        self.mults
    }

    pub fn shape(&self) -> (usize, usize) {
        self.delta.shape()
    }

    /// First bin (in vectorization order) with `|delta| <= epsilon`.
    pub fn first_null(&self, epsilon: f64) -> Option<(usize, usize, f64)> {
        let n = self.delta.n_doppler();
        self.delta
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, d)| d.norm() <= epsilon)
            .map(|(q, d)| (q % n, q / n, d.norm()))
    }

    pub(crate) fn ensure_invertible(&self, epsilon: f64) -> Result<()> {
        match self.first_null(epsilon) {
            Some((doppler, delay, magnitude)) => Err(Error::SpectralNull {
                doppler,
                delay,
                magnitude,
            }),
            None => Ok(()),
        }
    }
}

pub fn spectrum(plan: &TransformPlan, ps: &PathSet) -> Result<ChannelSpectrum> {
    let delta = plan.dft2_forward(&impulse_grid(ps))?;
    let min_abs = delta
        .as_slice()
        .iter()
        .map(|d| d.norm())
        .fold(f64::INFINITY, f64::min);
    Ok(ChannelSpectrum {
        delta,
        min_abs,
        mults: plan.fft2_mults(),
    })
}

/// Explicit `NM x NM` channel matrix. Oracle use only.
#[derive(Debug, Clone)]
pub struct DenseChannel {
    n_doppler: usize,
    n_delay: usize,
    matrix: Mat<Complex64>,
}

impl DenseChannel {
    pub fn n_doppler(&self) -> usize {
        self.n_doppler
    }

    pub fn n_delay(&self) -> usize {
        self.n_delay
    }

    /// `N*M`, the side of the square matrix.
    pub fn order(&self) -> usize {
        self.n_doppler * self.n_delay
    }

    pub fn matrix(&self) -> MatRef<'_, Complex64> {
        self.matrix.as_ref()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn max_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.order() {
            for i in 0..self.order() {
                best = best.max(self.matrix[(i, j)].norm());
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &DenseChannel) -> f64 {
        assert_eq!(self.order(), other.order());
        let mut best = 0.0f64;
        for j in 0..self.order() {
            for i in 0..self.order() {
                best = best.max((self.matrix[(i, j)] - other.matrix[(i, j)]).norm());
            }
        }
        best
    }

    pub fn first_column(&self) -> DdVector {
        DdVector::new((0..self.order()).map(|i| self.matrix[(i, 0)]).collect())
    }

    pub fn matvec(&self, x: &DdVector) -> Result<DdVector> {
        let n = self.order();
        if x.len() != n {
            return Err(Error::dims(
                format!("vector of length {n}"),
                format!("vector of length {}", x.len()),
            ));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, xj) in x.as_slice().iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(i, j)] * xj;
            }
        }
        Ok(DdVector::new(out))
    }

    /// Largest violation of the doubly block circulant shift invariance
    /// `H[s(r), s(c)] == H[r, c]`, where `s` steps both the Doppler and the
    /// delay index by one (modulo the grid).
    pub fn dbc_defect(&self) -> f64 {
        let (n, m) = (self.n_doppler, self.n_delay);
        let shift = |q: usize| {
            let (k, l) = (q % n, q / n);
            (k + 1) % n + n * ((l + 1) % m)
        };
        let shift_doppler = |q: usize| {
            let (k, l) = (q % n, q / n);
            (k + 1) % n + n * l
        };
        let mut worst = 0.0f64;
        for c in 0..self.order() {
            for r in 0..self.order() {
                let h = self.matrix[(r, c)];
                worst = worst.max((self.matrix[(shift(r), shift(c))] - h).norm());
                worst = worst.max((self.matrix[(shift_doppler(r), shift_doppler(c))] - h).norm());
            }
        }
        worst
    }
}

fn check_cap(order: usize, cap: usize) -> Result<()> {
    if order > cap {
        return Err(Error::ResourceCap { order, cap });
    }
    Ok(())
}

pub fn dense_channel(ps: &PathSet) -> Result<DenseChannel> {
    dense_channel_with_cap(ps, DEFAULT_DENSE_CAP)
}

/// `H` with `H[(k+k_i, l+l_i), (k, l)] += h'_i` for every path.
pub fn dense_channel_with_cap(ps: &PathSet, cap: usize) -> Result<DenseChannel> {
    let (n, m) = (ps.n_doppler, ps.n_delay);
    let order = n * m;
    check_cap(order, cap)?;
    let mut matrix = Mat::<Complex64>::zeros(order, order);
    for p in &ps.paths {
        let h = effective_gain(p, n, m);
        for l in 0..m {
            let rl = (l + p.delay_tap) % m;
            for k in 0..n {
                let rk = (k + p.doppler_tap) % n;
                matrix[(rk + n * rl, k + n * l)] += h;
            }
        }
    }
    Ok(DenseChannel {
        n_doppler: n,
        n_delay: m,
        matrix,
    })
}

pub fn reconstruct_from_spectrum(
    plan: &TransformPlan,
    spec: &ChannelSpectrum,
) -> Result<DenseChannel> {
    reconstruct_from_spectrum_with_cap(plan, spec, DEFAULT_DENSE_CAP)
}

/// Materializes `Xi^{-1} diag(delta) Xi` column by column.
pub fn reconstruct_from_spectrum_with_cap(
    plan: &TransformPlan,
    spec: &ChannelSpectrum,
    cap: usize,
) -> Result<DenseChannel> {
    let (n, m) = plan.shape();
    spec.delta.ensure_shape(n, m)?;
    let order = n * m;
    check_cap(order, cap)?;
    let mut matrix = Mat::<Complex64>::zeros(order, order);
    let mut column = vec![Complex64::new(0.0, 0.0); order];
    for q in 0..order {
        column.fill(Complex64::new(0.0, 0.0));
        column[q] = Complex64::new(1.0, 0.0);
        plan.forward_in_place(&mut column);
        for (v, d) in column.iter_mut().zip(spec.delta.as_slice()) {
            *v *= d;
        }
        plan.inverse_in_place(&mut column);
        for (i, v) in column.iter().enumerate() {
            matrix[(i, q)] = *v;
        }
    }
    Ok(DenseChannel {
        n_doppler: n,
        n_delay: m,
        matrix,
    })
}
