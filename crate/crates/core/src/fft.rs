//! One-dimensional complex FFT with exact multiplication accounting.
//!
//! Power-of-two lengths use an iterative radix-2 decimation-in-time kernel.
//! Other lengths go through Bluestein's chirp-z reformulation on top of a
//! radix-2 convolution. Every plan reports how many complex multiplications
//! one transform performs, so higher layers can account for their cost
//! exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `exp(-j 2 pi n k / L)` kernel, no scaling.
    Forward,
    /// `exp(+j 2 pi n k / L)` kernel, no scaling.
    Inverse,
}

#[derive(Debug, Clone)]
pub struct Fft1d {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

impl Fft1d {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let kind = if len == 1 {
            Kind::Identity
        } else if len.is_power_of_two() {
            Kind::Radix2(Radix2::new(len))
        } else {
            Kind::Bluestein(Bluestein::new(len))
        };
        Fft1d { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Scratch length required by [`Fft1d::process_with_scratch`].
    pub fn scratch_len(&self) -> usize {
        match &self.kind {
            Kind::Bluestein(b) => b.inner.len,
            _ => 0,
        }
    }

    /// Complex multiplications performed by one transform.
    pub fn mults(&self) -> u64 {
        match &self.kind {
            Kind::Identity => 0,
            Kind::Radix2(r) => r.mults(),
            Kind::Bluestein(b) => b.mults(),
        }
    }

    pub fn process(&self, buf: &mut [Complex64], dir: Direction) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.process_with_scratch(buf, &mut scratch, dir);
    }

    pub fn process_with_scratch(
        &self,
        buf: &mut [Complex64],
        scratch: &mut [Complex64],
        dir: Direction,
    ) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        match &self.kind {
            Kind::Identity => {}
            Kind::Radix2(r) => r.process(buf, dir),
            Kind::Bluestein(b) => match dir {
                Direction::Forward => b.forward(buf, scratch),
                Direction::Inverse => {
                    // DFT^{-1}(x) * L = conj(DFT(conj(x)))
                    buf.iter_mut().for_each(|z| *z = z.conj());
                    b.forward(buf, scratch);
                    buf.iter_mut().for_each(|z| *z = z.conj());
                }
            },
        }
    }
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    log2: u32,
    /// `exp(-j 2 pi i / len)` for `i < len / 2`.
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Radix2 {
    fn new(len: usize) -> Self {
        let log2 = len.trailing_zeros();
        let twiddles = (0..len / 2)
            .map(|i| Complex64::from_polar(1.0, -2.0 * PI * i as f64 / len as f64))
            .collect();
        let bitrev = (0..len as u32)
            .map(|i| if log2 == 0 { 0 } else { i.reverse_bits() >> (32 - log2) })
            .collect();
        Radix2 {
            len,
            log2,
            twiddles,
            bitrev,
        }
    }

    /// One twiddle product per butterfly, `L/2` butterflies per stage.
    fn mults(&self) -> u64 {
        (self.len as u64 / 2) * self.log2 as u64
    }

    fn process(&self, buf: &mut [Complex64], dir: Direction) {
        for (i, &j) in self.bitrev.iter().enumerate() {
            let j = j as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.len {
            let half = size / 2;
            let stride = self.len / size;
            for block in buf.chunks_exact_mut(size) {
                let (lo, hi) = block.split_at_mut(half);
                for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let w = self.twiddles[j * stride];
                    let w = match dir {
                        Direction::Forward => w,
                        Direction::Inverse => w.conj(),
                    };
                    let t = w * *b;
                    *b = *a - t;
                    *a += t;
                }
            }
            size *= 2;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    len: usize,
    inner: Radix2,
    /// `exp(-j pi n^2 / len)` for `n < len`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp, pre-scaled by `1/P`.
    kernel: Vec<Complex64>,
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let padded = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(padded);
        let modulus = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|n| {
                let n2 = (n as u128 * n as u128) % modulus;
                Complex64::from_polar(1.0, -PI * n2 as f64 / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); padded];
        kernel[0] = chirp[0].conj();
        for n in 1..len {
            kernel[n] = chirp[n].conj();
            kernel[padded - n] = chirp[n].conj();
        }
        inner.process(&mut kernel, Direction::Forward);
        let scale = 1.0 / padded as f64;
        kernel.iter_mut().for_each(|z| *z *= scale);
        Bluestein {
            len,
            inner,
            chirp,
            kernel,
        }
    }

    /// Chirp in, pointwise kernel, chirp out, plus two padded transforms.
    fn mults(&self) -> u64 {
        2 * self.len as u64 + self.inner.len as u64 + 2 * self.inner.mults()
    }

    fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let work = &mut scratch[..self.inner.len];
        for (w, (x, c)) in work.iter_mut().zip(buf.iter().zip(&self.chirp)) {
            *w = x * c;
        }
        work[self.len..].fill(Complex64::new(0.0, 0.0));
        self.inner.process(work, Direction::Forward);
        for (w, k) in work.iter_mut().zip(&self.kernel) {
            *w *= k;
        }
        self.inner.process(work, Direction::Inverse);
        for (x, (w, c)) in buf.iter_mut().zip(work.iter().zip(&self.chirp)) {
            *x = w * c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(x: &[Complex64], dir: Direction) -> Vec<Complex64> {
        let n = x.len();
        let sign = match dir {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        };
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let ang = sign * 2.0 * PI * ((i * k) % n) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, ang)
                    })
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.13).cos() - 0.2))
            .collect()
    }

    #[test]
    fn matches_direct_sum_for_many_lengths() {
        for n in [1usize, 2, 3, 4, 5, 6, 7, 8, 12, 15, 16, 17, 32, 100] {
            let plan = Fft1d::new(n);
            for dir in [Direction::Forward, Direction::Inverse] {
                let x = signal(n);
                let want = direct(&x, dir);
                let mut got = x.clone();
                plan.process(&mut got, dir);
                let scale = want.iter().map(|z| z.norm()).fold(1.0, f64::max);
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).norm() <= 1e-12 * scale, "n={n} {dir:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn radix2_count() {
        assert_eq!(Fft1d::new(1).mults(), 0);
        assert_eq!(Fft1d::new(2).mults(), 1);
        assert_eq!(Fft1d::new(8).mults(), 12);
        assert_eq!(Fft1d::new(1024).mults(), 512 * 10);
    }

    #[test]
    fn bluestein_count() {
        // len 3 pads to 8: 2*3 + 8 + 2*12
        assert_eq!(Fft1d::new(3).mults(), 38);
    }
}
