use num_complex::Complex64;

use super::{EqualizedFrame, Method, NoiseModel};
use crate::channel::{ChannelSpectrum, DEFAULT_ZF_EPSILON};
use crate::error::{Error, Result};
use crate::grid::DdGrid;
use crate::transform::TransformPlan;

pub fn zf_fft2(plan: &TransformPlan, spec: &ChannelSpectrum, y: &DdGrid) -> Result<EqualizedFrame> {
    zf_fft2_with_epsilon(plan, spec, y, DEFAULT_ZF_EPSILON)
}

/// `x = vifft2(vfft2(y) / delta)`.
pub fn zf_fft2_with_epsilon(
    plan: &TransformPlan,
    spec: &ChannelSpectrum,
    y: &DdGrid,
    epsilon: f64,
) -> Result<EqualizedFrame> {
    check_shapes(plan, spec, y)?;
    spec.ensure_invertible(epsilon)?;

    let mut estimate = y.clone();
    let buf = estimate.as_mut_slice();
    plan.forward_in_place(buf);
    for (v, d) in buf.iter_mut().zip(spec.delta().as_slice()) {
        *v /= d;
    }
    plan.inverse_in_place(buf);

    let nm = y.len() as u64;
    Ok(EqualizedFrame {
        estimate,
        method: Method::Fft2Zf,
        mults: spec.mults() + 2 * plan.fft2_mults() + nm,
    })
}

pub fn mmse_fft2(
    plan: &TransformPlan,
    spec: &ChannelSpectrum,
    y: &DdGrid,
    noise: NoiseModel,
) -> Result<EqualizedFrame> {
    mmse_fft2_with_epsilon(plan, spec, y, noise, DEFAULT_ZF_EPSILON)
}

/// Per-bin Wiener scaling `conj(delta) Y / (|delta|^2 + sigma^2)` between the
/// forward and inverse 2D transforms. With `sigma^2 = 0` this is zero-forcing
/// and spectral nulls are rejected the same way.
pub fn mmse_fft2_with_epsilon(
    plan: &TransformPlan,
    spec: &ChannelSpectrum,
    y: &DdGrid,
    noise: NoiseModel,
    epsilon: f64,
) -> Result<EqualizedFrame> {
    check_shapes(plan, spec, y)?;
    let sigma2 = noise.sigma2();
    if sigma2 == 0.0 {
        spec.ensure_invertible(epsilon)?;
    }

    let mut estimate = y.clone();
    let buf = estimate.as_mut_slice();
    plan.forward_in_place(buf);
    for (v, d) in buf.iter_mut().zip(spec.delta().as_slice()) {
        // Delta^H Delta, its regularized inverse, the product with Delta^H,
        // and the diagonal matrix-vector product: four per bin.
        let power = d.norm_sqr();
        let inv = (power + sigma2).recip();
        let gain: Complex64 = d.conj() * inv;
        *v *= gain;
    }
    plan.inverse_in_place(buf);

    let nm = y.len() as u64;
    Ok(EqualizedFrame {
        estimate,
        method: Method::Fft2Mmse,
        mults: spec.mults() + 2 * plan.fft2_mults() + 4 * nm,
    })
}

fn check_shapes(plan: &TransformPlan, spec: &ChannelSpectrum, y: &DdGrid) -> Result<()> {
    let (n, m) = plan.shape();
    if spec.shape() != (n, m) {
        return Err(Error::dims(
            format!("{n}x{m} spectrum"),
            format!("{}x{} spectrum", spec.shape().0, spec.shape().1),
        ));
    }
    y.ensure_shape(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, spectrum, ChannelPath, PathSet};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(n: usize, m: usize) -> DdGrid {
        DdGrid::from_fn(n, m, |k, l| {
            c((k as f64 * 0.7 + l as f64).sin(), (k as f64 - 0.3 * l as f64).cos())
        })
        .unwrap()
    }

    #[test]
    fn identity_channel_is_transparent() {
        let plan = TransformPlan::new(4, 8).unwrap();
        let spec = spectrum(&plan, &PathSet::identity(4, 8).unwrap()).unwrap();
        let y = sample(4, 8);
        let out = zf_fft2(&plan, &spec, &y).unwrap();
        assert!(out.estimate.max_abs_diff(&y) < 1e-15);
        assert_eq!(out.method, Method::Fft2Zf);

        let out = mmse_fft2(&plan, &spec, &y, NoiseModel::new(1.0).unwrap()).unwrap();
        assert!(out.estimate.max_abs_diff(&y.map(|z| z / 2.0)) < 1e-15);
    }

    #[test]
    fn scalar_channel_divides() {
        let plan = TransformPlan::new(4, 4).unwrap();
        let ps = PathSet::new(4, 4, vec![ChannelPath::new(c(2.0, 0.0), 0, 0)]).unwrap();
        let spec = spectrum(&plan, &ps).unwrap();
        let y = sample(4, 4);
        let out = zf_fft2(&plan, &spec, &y).unwrap();
        assert!(out.estimate.max_abs_diff(&y.map(|z| z / 2.0)) < 1e-15);
    }

    #[test]
    fn zf_inverts_the_channel() {
        let plan = TransformPlan::new(8, 8).unwrap();
        let ps = PathSet::new(
            8,
            8,
            vec![
                ChannelPath::new(c(0.9, 0.1), 0, 0),
                ChannelPath::new(c(-0.3, 0.2), 1, 3),
                ChannelPath::new(c(0.1, -0.25), 7, 5),
                ChannelPath::new(c(0.05, 0.05), 2, 1),
            ],
        )
        .unwrap();
        let spec = spectrum(&plan, &ps).unwrap();
        let x = sample(8, 8);
        let y = apply_channel(&ps, &x).unwrap();
        let out = zf_fft2(&plan, &spec, &y).unwrap();
        assert!(out.estimate.max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn null_rejected_by_zf_and_noiseless_mmse() {
        let plan = TransformPlan::new(2, 2).unwrap();
        let ps = PathSet::new(
            2,
            2,
            vec![
                ChannelPath::new(c(1.0, 0.0), 0, 0),
                ChannelPath::new(c(1.0, 0.0), 1, 0),
            ],
        )
        .unwrap();
        let spec = spectrum(&plan, &ps).unwrap();
        let y = sample(2, 2);
        let err = zf_fft2(&plan, &spec, &y).unwrap_err();
        assert!(matches!(err, Error::SpectralNull { doppler: 1, delay: 0, .. }));
        assert!(mmse_fft2(&plan, &spec, &y, NoiseModel::noiseless()).is_err());
        assert!(mmse_fft2(&plan, &spec, &y, NoiseModel::new(0.1).unwrap()).is_ok());
    }

    #[test]
    fn operation_counts() {
        let plan = TransformPlan::new(8, 16).unwrap();
        let spec = spectrum(&plan, &PathSet::identity(8, 16).unwrap()).unwrap();
        let y = sample(8, 16);
        let c_fft = plan.fft2_mults();
        assert_eq!(zf_fft2(&plan, &spec, &y).unwrap().mults, 3 * c_fft + 128);
        let mmse = mmse_fft2(&plan, &spec, &y, NoiseModel::new(0.5).unwrap()).unwrap();
        assert_eq!(mmse.mults, 3 * c_fft + 4 * 128);
    }

    #[test]
    fn shape_mismatch() {
        let plan = TransformPlan::new(4, 4).unwrap();
        let spec = spectrum(&plan, &PathSet::identity(4, 4).unwrap()).unwrap();
        assert!(zf_fft2(&plan, &spec, &sample(4, 2)).is_err());
        let other = TransformPlan::new(2, 8).unwrap();
        assert!(zf_fft2(&other, &spec, &sample(2, 8)).is_err());
    }
}
