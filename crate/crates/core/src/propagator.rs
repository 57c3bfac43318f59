//! Position-space slice kernels
//! `C(r) = ∫ α^{-d/2} e^{-α m² - r²/4α} dα` over a band of α, the slice
//! decay fit, and rationalized covariance matrices built from kernels.
//!
//! The Gaussian width is `r²/4α`; a kernel written with `r²/α` is the same
//! integral after `α -> α/4`, which rescales the band and multiplies by
//! `4^{d/2-1}`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{psd_certificate, PsdCertificate, QMatrix};
use crate::rational::{from_f64_rounded, Rational};

pub const KERNEL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Slice {
    /// `j = 0`: `[1, ∞)`; `j ≥ 1`: `[M^{-2j}, M^{-2(j-1)}]`.
    Index { j: u32 },
    /// `[M^{-1}, 1]`.
    SingleScale,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceSpec {
    pub dim: u32,
    pub ratio: f64,
    pub slice: Slice,
    pub mass: f64,
}

impl SliceSpec {
    pub fn new(dim: u32, ratio: f64, slice: Slice, mass: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dimension must be positive"));
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::validation(format!("ratio {ratio} must exceed 1")));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::validation(format!("mass {mass} must be nonnegative")));
        }
        if slice == (Slice::Index { j: 0 }) && mass == 0.0 && dim <= 2 {
            return Err(Error::validation(
                "the j = 0 slice diverges without a mass in dimension ≤ 2",
            ));
        }
        Ok(SliceSpec {
            dim,
            ratio,
            slice,
            mass,
        })
    }

    pub fn slice_index(dim: u32, ratio: f64, j: u32, mass: f64) -> Result<Self> {
        Self::new(dim, ratio, Slice::Index { j }, mass)
    }

    pub fn single_scale(dim: u32, ratio: f64) -> Result<Self> {
        Self::new(dim, ratio, Slice::SingleScale, 0.0)
    }

    /// The α-band; `None` as upper end means `∞`.
    pub fn band(&self) -> (f64, Option<f64>) {
        match self.slice {
            Slice::SingleScale => (1.0 / self.ratio, Some(1.0)),
            Slice::Index { j: 0 } => (1.0, None),
            Slice::Index { j } => (
                self.ratio.powi(-2 * j as i32),
                Some(self.ratio.powi(-2 * (j as i32 - 1))),
            ),
        }
    }
}

fn integrate_checked(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let rough = quadrature::double_exponential::integrate(&f, a, b, 1e-6);
    let target = (KERNEL_TOLERANCE * rough.integral.abs()).max(1e-300);
    let out = quadrature::double_exponential::integrate(&f, a, b, target);
    if !out.integral.is_finite() || out.error_estimate > target {
        return Err(Error::Quadrature {
            tolerance: KERNEL_TOLERANCE,
            estimate: out.error_estimate,
        });
    }
    Ok(out.integral)
}

pub fn slice_kernel(spec: &SliceSpec, r: f64) -> Result<f64> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::validation(format!("distance {r} must be finite and ≥ 0")));
    }
    let d = spec.dim as f64;
    let m2 = spec.mass * spec.mass;
    let r2 = r * r;
    match spec.band() {
        // α = e^s
        (lo, Some(hi)) => integrate_checked(
            |s| {
                let a = s.exp();
                a.powf(1.0 - d / 2.0) * (-a * m2 - r2 / (4.0 * a)).exp()
            },
            lo.ln(),
            hi.ln(),
        ),
        // α = 1/u², u ∈ (0, 1]
        (_, None) => integrate_checked(
            |u| {
                if u <= 0.0 {
                    return 0.0;
                }
                let u2 = u * u;
                2.0 * u.powf(d - 3.0) * (-m2 / u2 - r2 * u2 / 4.0).exp()
            },
            0.0,
            1.0,
        ),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub j: u32,
    pub k: f64,
    pub binding_radius: f64,
    pub prefactor_exponent: f64,
}

/// Smallest `K` with `C^j(r) ≤ K M^{e j} e^{-M^j r/K}` on every radius,
/// for the prefactor exponent `e = d - 2`.
pub fn decay_bound_fit(spec: &SliceSpec, radii: &[f64]) -> Result<DecayFit> {
    decay_bound_fit_with(spec, radii, spec.dim as f64 - 2.0)
}

pub fn decay_bound_fit_with(spec: &SliceSpec, radii: &[f64], exponent: f64) -> Result<DecayFit> {
    let Slice::Index { j } = spec.slice else {
        return Err(Error::validation("decay fit needs an indexed slice"));
    };
    if radii.is_empty() {
        return Err(Error::validation("empty radius grid"));
    }
    let scale = spec.ratio.powi(j as i32);
    let prefactor = spec.ratio.powf(exponent * j as f64);
    let needed: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let c = slice_kernel(spec, r)?;
            Ok((r, minimal_k(c / prefactor, scale * r)?))
        })
        .collect::<Result<_>>()?;
    let (binding_radius, k) = needed
        .into_iter()
        .fold((0.0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(DecayFit {
        j,
        k,
        binding_radius,
        prefactor_exponent: exponent,
    })
}

/// Least `K > 0` with `K e^{-s/K} ≥ target`; `K e^{-s/K}` increases in `K`.
fn minimal_k(target: f64, s: f64) -> Result<f64> {
    if target <= 0.0 {
        return Ok(0.0);
    }
    if s == 0.0 {
        return Ok(target);
    }
    let g = |k: f64| k * (-s / k).exp();
    let mut hi = target.max(s);
    while g(hi) < target {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::FitFailure(format!(
                "no K below 1e15 bounds the kernel value {target:e} at scaled radius {s}"
            )));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecaySweep {
    pub dim: u32,
    pub ratio: f64,
    pub mass: f64,
    pub fits: Vec<DecayFit>,
    /// `max K / min K` over the slices.
    pub spread: f64,
}

/// Fits slices `0..=j_max`; slice `j` is sampled at `grid · M^{-j}`.
pub fn decay_sweep(dim: u32, ratio: f64, mass: f64, j_max: u32, grid: &[f64]) -> Result<DecaySweep> {
    let fits = (0..=j_max)
        .map(|j| {
            let spec = SliceSpec::slice_index(dim, ratio, j, mass)?;
            let radii: Vec<f64> = grid.iter().map(|r| r * ratio.powi(-(j as i32))).collect();
            decay_bound_fit(&spec, &radii)
        })
        .collect::<Result<Vec<_>>>()?;
    let max = fits.iter().map(|f| f.k).fold(f64::MIN, f64::max);
    let min = fits.iter().map(|f| f.k).fold(f64::MAX, f64::min);
    Ok(DecaySweep {
        dim,
        ratio,
        mass,
        fits,
        spread: max / min,
    })
}

/// `{0, 0.5, …, 10}`.
pub fn default_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.5).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratedCovariance {
    pub matrix: QMatrix,
    pub certificate: PsdCertificate,
    /// Diagonal shift added to restore positivity after rounding.
    #[serde(with = "crate::rational::serde_str")]
    pub shift: Rational,
    pub denominator: u64,
}

/// Kernel matrix over box centers, rounded to multiples of `1/denominator`.
/// A small negative eigenvalue left by rounding is removed by a diagonal
/// shift of at most `tolerance`; anything larger is an error.
pub fn covariance_matrix_from_kernel(
    spec: &SliceSpec,
    centers: &[Vec<f64>],
    denominator: u64,
    tolerance: f64,
) -> Result<GeneratedCovariance> {
    let n = centers.len();
    if n == 0 {
        return Err(Error::validation("no box centers"));
    }
    for c in centers {
        if c.len() != spec.dim as usize {
            return Err(Error::validation(format!(
                "center {c:?} does not have {} coordinates",
                spec.dim
            )));
        }
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i..n {
            pairs.push((i, j));
        }
    }
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let r2: f64 = centers[i].iter().zip(&centers[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            if i != j && r2 == 0.0 {
                return Err(Error::validation(format!("centers {} and {} coincide", i, j)));
            }
            slice_kernel(spec, r2.sqrt())
        })
        .collect::<Result<_>>()?;
    let mut matrix = QMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(&values) {
        let q = from_f64_rounded(*v, denominator);
        matrix[(i, j)] = q.clone();
        matrix[(j, i)] = q;
    }

    let mut shift = Rational::zero();
    let mut certificate = psd_certificate(&matrix)?;
    if !certificate.is_psd {
        let float = DMatrix::from_fn(n, n, |i, j| crate::rational::to_f64(&matrix[(i, j)]));
        let min_eig = SymmetricEigen::new(float).eigenvalues.min();
        let mut steps = ((-min_eig) * denominator as f64).ceil().max(1.0) as i64;
        loop {
            shift = Rational::new(steps.into(), denominator.into());
            if crate::rational::to_f64(&shift) > tolerance {
                return Err(Error::Generation(format!(
                    "rounded kernel matrix needs a diagonal shift above {tolerance:e}"
                )));
            }
            let mut shifted = matrix.clone();
            for i in 0..n {
                shifted[(i, i)] += &shift;
            }
            certificate = psd_certificate(&shifted)?;
            if certificate.is_psd {
                matrix = shifted;
                break;
            }
            steps += 1;
        }
    }
    debug_assert!(!shift.is_negative());
    Ok(GeneratedCovariance {
        matrix,
        certificate,
        shift,
        denominator,
    })
}
