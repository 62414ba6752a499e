//! Delay-Doppler grid container and the column-wise vectorization convention.
//!
//! A grid of `N` Doppler bins by `M` delay bins is stored so that entry
//! `(k, l)` lives at linear position `q = k + N*l`. With that layout `vec` is
//! a copy of the backing buffer and `unvec` is a reshape.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Linear position of grid entry `(k, l)` in an `n_doppler x n_delay` grid.
pub fn flatten_index(k: usize, l: usize, n_doppler: usize, n_delay: usize) -> Result<usize> {
    if k >= n_doppler {
        return Err(Error::IndexOutOfRange {
            index: k as i64,
            len: n_doppler,
        });
    }
    if l >= n_delay {
        return Err(Error::IndexOutOfRange {
            index: l as i64,
            len: n_delay,
        });
    }
    Ok(k + n_doppler * l)
}

/// Inverse of [`flatten_index`].
pub fn unflatten_index(q: usize, n_doppler: usize, n_delay: usize) -> Result<(usize, usize)> {
    if n_doppler == 0 || q >= n_doppler * n_delay {
        return Err(Error::IndexOutOfRange {
            index: q as i64,
            len: n_doppler * n_delay,
        });
    }
    Ok((q % n_doppler, q / n_doppler))
}

/// `i mod n` with a result in `[0, n)`.
pub fn wrap(i: i64, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::ZeroModulus);
    }
    Ok(i.rem_euclid(n as i64) as usize)
}

/// `N x M` complex grid indexed by (Doppler bin `k`, delay bin `l`).
#[derive(Debug, Clone, PartialEq)]
pub struct DdGrid {
    n_doppler: usize,
    n_delay: usize,
    data: Vec<Complex64>,
}

impl DdGrid {
    pub fn zeros(n_doppler: usize, n_delay: usize) -> Result<Self> {
        check_shape(n_doppler, n_delay)?;
        Ok(DdGrid {
            n_doppler,
            n_delay,
            data: vec![Complex64::new(0.0, 0.0); n_doppler * n_delay],
        })
    }

    pub fn from_fn(
        n_doppler: usize,
        n_delay: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        check_shape(n_doppler, n_delay)?;
        let mut data = Vec::with_capacity(n_doppler * n_delay);
        for l in 0..n_delay {
            for k in 0..n_doppler {
                data.push(f(k, l));
            }
        }
        Ok(DdGrid {
            n_doppler,
            n_delay,
            data,
        })
    }

    /// Builds a grid from rows, `rows[k][l]` being the entry at `(k, l)`.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_doppler = rows.len();
        let n_delay = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_delay) {
            return Err(Error::dims(
                format!("rows of length {n_delay}"),
                format!("row of length {}", bad.len()),
            ));
        }
        Self::from_fn(n_doppler, n_delay, |k, l| rows[k][l])
    }

    /// Impulse of unit amplitude at `(k, l)`.
    pub fn delta(n_doppler: usize, n_delay: usize, k: usize, l: usize) -> Result<Self> {
        let mut grid = Self::zeros(n_doppler, n_delay)?;
        let q = flatten_index(k, l, n_doppler, n_delay)?;
        grid.data[q] = Complex64::new(1.0, 0.0);
        Ok(grid)
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Entries in vectorization order (`q = k + N*l`).
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, k: usize, l: usize) -> Option<Complex64> {
        flatten_index(k, l, self.n_doppler, self.n_delay)
            .ok()
            .map(|q| self.data[q])
    }

    /// Column-wise vectorization.
    pub fn vec(&self) -> DdVector {
        DdVector(self.data.clone())
    }

    pub fn into_vec(self) -> DdVector {
        DdVector(self.data)
    }

    pub fn ensure_shape(&self, n_doppler: usize, n_delay: usize) -> Result<()> {
        if self.shape() != (n_doppler, n_delay) {
            return Err(Error::dims(
                format!("{n_doppler}x{n_delay} grid"),
                format!("{}x{} grid", self.n_doppler, self.n_delay),
            ));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &DdGrid) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> DdGrid {
        DdGrid {
            n_doppler: self.n_doppler,
            n_delay: self.n_delay,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }
}

impl Index<(usize, usize)> for DdGrid {
    type Output = Complex64;

    fn index(&self, (k, l): (usize, usize)) -> &Complex64 {
        assert!(k < self.n_doppler && l < self.n_delay, "grid index out of range");
        &self.data[k + self.n_doppler * l]
    }
}

impl IndexMut<(usize, usize)> for DdGrid {
    fn index_mut(&mut self, (k, l): (usize, usize)) -> &mut Complex64 {
        assert!(k < self.n_doppler && l < self.n_delay, "grid index out of range");
        &mut self.data[k + self.n_doppler * l]
    }
}

/// Length-`NM` vector in the `q = k + N*l` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct DdVector(Vec<Complex64>);

impl DdVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        DdVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Reshapes into an `n_doppler x n_delay` grid.
    pub fn unvec(self, n_doppler: usize, n_delay: usize) -> Result<DdGrid> {
        check_shape(n_doppler, n_delay)?;
        if self.0.len() != n_doppler * n_delay {
            return Err(Error::dims(
                format!("vector of length {}", n_doppler * n_delay),
                format!("vector of length {}", self.0.len()),
            ));
        }
        Ok(DdGrid {
            n_doppler,
            n_delay,
            data: self.0,
        })
    }
}

impl From<Vec<Complex64>> for DdVector {
    fn from(values: Vec<Complex64>) -> Self {
        DdVector(values)
    }
}

fn check_shape(n_doppler: usize, n_delay: usize) -> Result<()> {
    if n_doppler == 0 || n_delay == 0 {
        return Err(Error::dims(
            "non-empty grid",
            format!("{n_doppler}x{n_delay} grid"),
        ));
    }
    Ok(())
}
