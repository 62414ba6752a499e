//! Two-dimensional DFT pair, the vectorized `vfft2`/`vifft2` operators and the
//! symplectic transforms between the delay-Doppler and time-frequency grids.
//!
//! Conventions:
//!
//! * `dft2_forward` is unnormalized:
//!   `out[p,q] = sum_k sum_l G[k,l] exp(-j2pi(kp/N + lq/M))`.
//! * `dft2_inverse` carries the full `1/(NM)`, so the pair is an exact inverse
//!   and the eigenvalues of a doubly block circulant matrix are exactly the
//!   forward transform of its first column.
//! * `isfft`/`sfft` use `1/sqrt(NM)` each and are unitary.

use num_complex::Complex64;

use crate::error::Result;
use crate::fft::{Direction, Fft1d};
use crate::grid::{DdGrid, DdVector};

/// Reusable FFT state for one `N x M` grid shape. Immutable once built, so a
/// single plan can be shared across worker threads.
#[derive(Debug, Clone)]
pub struct TransformPlan {
    n_doppler: usize,
    n_delay: usize,
    doppler: Fft1d,
    delay: Fft1d,
}

impl TransformPlan {
    pub fn new(n_doppler: usize, n_delay: usize) -> Result<Self> {
        // validates the shape
        DdGrid::zeros(n_doppler, n_delay)?;
        Ok(TransformPlan {
            n_doppler,
            n_delay,
            doppler: Fft1d::new(n_doppler),
            delay: Fft1d::new(n_delay),
        })
    }

    pub fn n_doppler(&self) -> usize {
        self.n_doppler
    }

    pub fn n_delay(&self) -> usize {
        self.n_delay
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_doppler, self.n_delay)
    }

    /// Complex multiplications of one 2D transform (either direction):
    /// `M` column transforms of length `N` plus `N` row transforms of length `M`.
    pub fn fft2_mults(&self) -> u64 {
        self.n_delay as u64 * self.doppler.mults() + self.n_doppler as u64 * self.delay.mults()
    }

    pub fn dft2_forward(&self, grid: &DdGrid) -> Result<DdGrid> {
        let mut out = self.checked_clone(grid)?;
        self.forward_in_place(out.as_mut_slice());
        Ok(out)
    }

    pub fn dft2_inverse(&self, grid: &DdGrid) -> Result<DdGrid> {
        let mut out = self.checked_clone(grid)?;
        self.inverse_in_place(out.as_mut_slice());
        Ok(out)
    }

    /// `vec(F_N A F_M)` with unnormalized DFT matrices.
    pub fn vfft2(&self, grid: &DdGrid) -> Result<DdVector> {
        Ok(self.dft2_forward(grid)?.into_vec())
    }

    pub fn vifft2(&self, grid: &DdGrid) -> Result<DdVector> {
        Ok(self.dft2_inverse(grid)?.into_vec())
    }

    /// Delay-Doppler to time-frequency.
    pub fn isfft(&self, grid: &DdGrid) -> Result<DdGrid> {
        let mut out = self.checked_clone(grid)?;
        self.separable(out.as_mut_slice(), Direction::Inverse, Direction::Forward);
        self.scale(out.as_mut_slice(), 1.0 / (self.len() as f64).sqrt());
        Ok(out)
    }

    /// Time-frequency to delay-Doppler; exact inverse of [`TransformPlan::isfft`].
    pub fn sfft(&self, grid: &DdGrid) -> Result<DdGrid> {
        let mut out = self.checked_clone(grid)?;
        self.separable(out.as_mut_slice(), Direction::Forward, Direction::Inverse);
        self.scale(out.as_mut_slice(), 1.0 / (self.len() as f64).sqrt());
        Ok(out)
    }

    /// Unnormalized forward 2D DFT of a buffer in vectorization order.
    pub(crate) fn forward_in_place(&self, data: &mut [Complex64]) {
        self.separable(data, Direction::Forward, Direction::Forward);
    }

    pub(crate) fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.separable(data, Direction::Inverse, Direction::Inverse);
        self.scale(data, 1.0 / self.len() as f64);
    }

    fn len(&self) -> usize {
        self.n_doppler * self.n_delay
    }

    fn checked_clone(&self, grid: &DdGrid) -> Result<DdGrid> {
        grid.ensure_shape(self.n_doppler, self.n_delay)?;
        Ok(grid.clone())
    }

    fn scale(&self, data: &mut [Complex64], factor: f64) {
        data.iter_mut().for_each(|z| *z *= factor);
    }

    /// Transforms every column (Doppler axis, contiguous) then every row
    /// (delay axis, stride `N`).
    fn separable(&self, data: &mut [Complex64], doppler_dir: Direction, delay_dir: Direction) {
        debug_assert_eq!(data.len(), self.len());
        let n = self.n_doppler;
        let m = self.n_delay;
        let scratch_len = self.doppler.scratch_len().max(self.delay.scratch_len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];

        if n > 1 {
            for column in data.chunks_exact_mut(n) {
                self.doppler
                    .process_with_scratch(column, &mut scratch, doppler_dir);
            }
        }
        if m > 1 {
            let mut row = vec![Complex64::new(0.0, 0.0); m];
            for k in 0..n {
                for (l, r) in row.iter_mut().enumerate() {
                    *r = data[k + n * l];
                }
                self.delay.process_with_scratch(&mut row, &mut scratch, delay_dir);
                for (l, r) in row.iter().enumerate() {
                    data[k + n * l] = *r;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn impulse_and_constant() {
        let plan = TransformPlan::new(2, 2).unwrap();
        let delta = DdGrid::delta(2, 2, 0, 0).unwrap();
        let ones = DdGrid::from_fn(2, 2, |_, _| c(1.0, 0.0)).unwrap();

        assert_eq!(plan.dft2_forward(&delta).unwrap(), ones);

        let f = plan.dft2_forward(&ones).unwrap();
        let mut want = DdGrid::zeros(2, 2).unwrap();
        want[(0, 0)] = c(4.0, 0.0);
        assert_eq!(f, want);

        assert_eq!(plan.dft2_inverse(&ones).unwrap(), delta);
        assert_eq!(plan.vfft2(&delta).unwrap().as_slice(), &[c(1.0, 0.0); 4]);
    }

    #[test]
    fn isfft_of_impulse_is_flat() {
        let plan = TransformPlan::new(4, 2).unwrap();
        let x = plan.isfft(&DdGrid::delta(4, 2, 0, 0).unwrap()).unwrap();
        let level = 1.0 / 8f64.sqrt();
        for z in x.as_slice() {
            assert!((z - c(level, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let plan = TransformPlan::new(4, 4).unwrap();
        let g = DdGrid::zeros(4, 2).unwrap();
        assert!(matches!(plan.dft2_forward(&g), Err(Error::Dimension { .. })));
        assert!(plan.dft2_inverse(&g).is_err());
        assert!(plan.vfft2(&g).is_err());
        assert!(plan.isfft(&g).is_err());
        assert!(plan.sfft(&g).is_err());
    }

    #[test]
    fn fft2_count_is_radix2_model() {
        // (NM/2) log2(NM)
        let plan = TransformPlan::new(8, 16).unwrap();
        assert_eq!(plan.fft2_mults(), 64 * 7);
        assert_eq!(TransformPlan::new(1, 1).unwrap().fft2_mults(), 0);
    }
}
