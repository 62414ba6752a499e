//! Gray-coded QPSK between bit frames and delay-Doppler grids.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::DdGrid;

/// Two bits per grid cell, in vectorization order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitFrame {
    bits: Vec<u8>,
}

impl BitFrame {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Config(format!("bit value {b} is not 0 or 1")));
        }
        Ok(BitFrame { bits })
    }

    pub fn random<R: Rng + ?Sized>(n_doppler: usize, n_delay: usize, rng: &mut R) -> Self {
        let bits = (0..2 * n_doppler * n_delay)
            .map(|_| rng.random::<bool>() as u8)
            .collect();
        BitFrame { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Positions where `self` and `other` differ.
    pub fn hamming_distance(&self, other: &BitFrame) -> u64 {
        assert_eq!(self.len(), other.len(), "frames of different length");
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count() as u64
    }
}

/// `b0` picks the sign of the real part, `b1` the sign of the imaginary part.
pub fn qpsk_symbol(b0: u8, b1: u8) -> Complex64 {
    let re = if b0 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if b1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

pub fn qpsk_map(frame: &BitFrame, n_doppler: usize, n_delay: usize) -> Result<DdGrid> {
    let want = 2 * n_doppler * n_delay;
    if frame.len() != want {
        return Err(Error::dims(
            format!("{want} bits"),
            format!("{} bits", frame.len()),
        ));
    }
    let mut grid = DdGrid::zeros(n_doppler, n_delay)?;
    for (cell, pair) in grid.as_mut_slice().iter_mut().zip(frame.bits.chunks_exact(2)) {
        *cell = qpsk_symbol(pair[0], pair[1]);
    }
    Ok(grid)
}

/// Hard quadrant decisions; an exact zero decides bit 0.
pub fn qpsk_demod(grid: &DdGrid) -> BitFrame {
    let bits = grid
        .as_slice()
        .iter()
        .flat_map(|z| [(z.re < 0.0) as u8, (z.im < 0.0) as u8])
        .collect();
    BitFrame { bits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constellation() {
        let s = FRAC_1_SQRT_2;
        assert_eq!(qpsk_symbol(0, 0), c(s, s));
        assert_eq!(qpsk_symbol(0, 1), c(s, -s));
        assert_eq!(qpsk_symbol(1, 0), c(-s, s));
        assert_eq!(qpsk_symbol(1, 1), c(-s, -s));
        for (b0, b1) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((qpsk_symbol(b0, b1).norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn map_fills_in_vectorization_order() {
        let frame = BitFrame::new(vec![0, 0, 1, 1, 0, 1, 1, 0]).unwrap();
        let g = qpsk_map(&frame, 2, 2).unwrap();
        assert_eq!(g[(0, 0)], qpsk_symbol(0, 0));
        assert_eq!(g[(1, 0)], qpsk_symbol(1, 1));
        assert_eq!(g[(0, 1)], qpsk_symbol(0, 1));
        assert_eq!(g[(1, 1)], qpsk_symbol(1, 0));
    }

    #[test]
    fn wrong_length_or_values_rejected() {
        let frame = BitFrame::new(vec![0; 6]).unwrap();
        assert!(matches!(qpsk_map(&frame, 2, 2), Err(Error::Dimension { .. })));
        assert!(BitFrame::new(vec![0, 2]).is_err());
    }

    #[test]
    fn demod_decisions() {
        let g = DdGrid::from_rows(&[vec![c(0.9, 0.1), c(-0.3, -2.0), c(0.0, 0.0), c(-1.0, 0.0)]])
            .unwrap();
        assert_eq!(qpsk_demod(&g).bits(), &[0, 0, 1, 1, 0, 0, 1, 0]);
    }

    #[test]
    fn exhaustive_roundtrip_2x2() {
        // all 4^4 frames of a 2x2 grid
        for word in 0u32..256 {
            let bits = (0..8).map(|i| ((word >> i) & 1) as u8).collect();
            let frame = BitFrame::new(bits).unwrap();
            assert_eq!(qpsk_demod(&qpsk_map(&frame, 2, 2).unwrap()), frame);
        }
    }

    #[test]
    fn small_perturbation_keeps_decisions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame = BitFrame::random(8, 8, &mut rng);
        let x = qpsk_map(&frame, 8, 8).unwrap();
        let noisy = x.map(|z| z + c(0.7 * (z.im * 13.0).sin(), -0.7 * (z.re * 7.0).cos()) * 0.7);
        assert!(noisy.max_abs_diff(&x) < FRAC_1_SQRT_2);
        assert_eq!(qpsk_demod(&noisy), frame);
    }

    #[test]
    fn average_energy_is_one() {
        // every constellation point has unit energy, so any frame averages to 1
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = qpsk_map(&BitFrame::random(16, 16, &mut rng), 16, 16).unwrap();
        assert!((x.norm_sqr() / 256.0 - 1.0).abs() < 1e-14);
    }
}
