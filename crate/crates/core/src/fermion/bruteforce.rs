use num_traits::{One, Zero};
use rayon::prelude::*;

use super::GrassmannModel;
use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::rational::{factorial, Rational};
use crate::symbolic::FormalSeries;

/// Largest number of (site, color) configurations summed at one order.
const MAX_CONFIGURATIONS: u64 = 50_000_000;

/// `⟨∏_v V(x_v)⟩` for fixed sites and loop colors: the `2k` pairs
/// `ψ̄_{v,λ} ψ_{v,λ}` give `det M`, `M[(v,λ),(u,μ)] = δ(c_{vλ}, c_{uμ}) C(x_v, x_u)`.
/// Rows and columns share colors, so `M` splits into one block per color.
fn vertex_expectation(model: &GrassmannModel, sites: &[usize], colors: &[usize]) -> Result<Rational> {
    let mut total = Rational::one();
    for color in 0..model.colors() {
        let slots: Vec<usize> = (0..colors.len()).filter(|&s| colors[s] == color).collect();
        if slots.is_empty() {
            continue;
        }
        let block = QMatrix::from_fn(slots.len(), slots.len(), |i, j| {
            model.c(sites[slots[i] / 2], sites[slots[j] / 2]).clone()
        });
        total *= block.determinant()?;
        if total.is_zero() {
            break;
        }
    }
    Ok(total)
}

/// `Z = ∫ dμ_C e^{±S}` expanded in `λ` by direct Grassmann integration.
pub fn grassmann_partition_series(model: &GrassmannModel) -> Result<FormalSeries> {
    let (l, n) = (model.sites() as u64, model.colors() as u64);
    let mut coeffs = vec![Rational::one()];
    for k in 1..=model.order() {
        let site_count = l.pow(k as u32);
        let color_count = n.pow(2 * k as u32);
        let total = site_count.saturating_mul(color_count);
        if total > MAX_CONFIGURATIONS {
            return Err(Error::SizeLimit {
                what: "grassmann configurations",
                value: total as usize,
                limit: MAX_CONFIGURATIONS as usize,
            });
        }
        let sum = (0..site_count)
            .into_par_iter()
            .map(|code| -> Result<Rational> {
                let sites = digits(code, l, k);
                let mut acc = Rational::zero();
                for ccode in 0..color_count {
                    let colors = digits(ccode, n, 2 * k);
                    acc += vertex_expectation(model, &sites, &colors)?;
                }
                Ok(acc)
            })
            .try_reduce(Rational::zero, |a, b| Ok(a + b))?;
        let norm = Rational::from_integer(factorial(k)) * Rational::from_integer(n.pow(k as u32).into());
        let mut c = sum / norm;
        if model.order_sign(k) {
            c = -c;
        }
        coeffs.push(c);
    }
    Ok(FormalSeries::new(coeffs))
}

/// `(1/L) log Z`.
pub fn pressure_series_bruteforce(model: &GrassmannModel) -> Result<FormalSeries> {
    let z = grassmann_partition_series(model)?;
    let inv = Rational::new(1.into(), (model.sites() as i64).into());
    Ok(z.log()?.scale(&inv))
}

pub(crate) fn digits(mut code: u64, base: u64, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((code % base) as usize);
        code /= base;
    }
    out
}
