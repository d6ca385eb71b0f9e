//! Independent check of the coefficient decay: evolve level-`k` data by the
//! exact Fourier multiplier `e^{−|ξ|^{2m}(t+1)}` from `t = −1` and re-extract
//! coefficients in blow-up variables.
//!
//! With `s = (−t)^{1/2m}`, `û(y) = (−t)^{(2m−1)/2m} u(s y)`, so
//! `⟨û, ṽ⟩ = (−t)^{(2m−1)/2m} s^{−3} ∫ u(x) ṽ(x/s) dx`. The dual at
//! `x/s` is sampled spectrally, and the pairing is taken in Fourier space
//! by Parseval, so the evolved data is never transformed back.
//!
//! The data `ṽ_i` is not a polynomial, so its coordinates at `τ = 0` are
//! `G⁻¹⟨ṽ_i, ṽ_j⟩` rather than `e_i`; only their decay is predicted.

use super::{CoefficientTrajectory, Model};
use crate::error::{Error, Result};
use crate::grid::{dual_field, dual_spectrum, fft3, GridSpec};
use crate::poly::{rat_to_f64, VectorPolyField};
use crate::solenoidal::{weighted_dual, SolenoidalBasis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct SemigroupRun {
    pub trajectory: CoefficientTrajectory,
    pub predicted_rate: f64,
    /// `max |c(τ)/c(0) − e^{rate·τ}|` over coefficients with `c(0) ≠ 0`.
    pub max_rel_error: f64,
}

/// Evolves the weighted data `ṽ` of `data` (equal to `data·F` for `m = 1`)
/// and extracts its coefficients on `basis` at each `τ ≥ 0`.
pub fn semigroup_verify(
    data: &VectorPolyField,
    basis: &SolenoidalBasis,
    taus: &[f64],
    spec: &GridSpec,
) -> Result<SemigroupRun> {
    let mut runs = semigroup_verify_all(std::slice::from_ref(data), basis, taus, spec)?;
    Ok(runs.remove(0))
}

/// [`semigroup_verify`] for several data fields on one basis; the scaled
/// duals are built once per `τ` and shared.
pub fn semigroup_verify_all(
    data: &[VectorPolyField],
    basis: &SolenoidalBasis,
    taus: &[f64],
    spec: &GridSpec,
) -> Result<Vec<SemigroupRun>> {
    let params = basis.params;
    let m = params.m;
    let model = match m {
        1 => Model::Stokes,
        2 => Model::Burnett,
        _ => return Err(Error::Unsupported(format!("no model runs on m = {m}"))),
    };
    for d in data {
        if !d.divergence()?.is_zero() {
            return Err(Error::InvalidInput(
                "data must be divergence-free for the pressure-free reduction".into(),
            ));
        }
    }
    if taus.is_empty()
        || taus.iter().any(|t| !(*t >= 0.0) || !t.is_finite())
        || taus.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidInput(
            "taus must be nonempty, finite, increasing and >= 0 (later rescaled windows leave the grid)".into(),
        ));
    }
    let n = spec.n;
    let nyq = std::f64::consts::PI * (n / 2) as f64 / spec.half_width;
    if (-nyq.powi(2 * m as i32)).exp() > 1e-14 {
        return Err(Error::InvalidInput(format!(
            "grid does not resolve the kernel: e^(-xi_N^{}) = {:e}; increase n or decrease L",
            2 * m,
            (-nyq.powi(2 * m as i32)).exp()
        )));
    }
    let ginv = weighted_dual(basis)?.to_f64();
    let hats: Vec<Vec<Vec<Complex64>>> = data
        .iter()
        .map(|d| {
            let u0 = dual_field(d, basis.level, &params, spec, 1.0)?;
            Ok(u0
                .data
                .iter()
                .map(|c| {
                    let mut b: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                    fft3(&mut b, n);
                    b
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let two_m = 2.0 * m as f64;
    // rows[τ][data] = coefficient vector
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::with_capacity(taus.len());
    for &tau in taus {
        let minus_t = (-tau).exp();
        let t = -minus_t;
        let s = minus_t.powf(1.0 / two_m);
        let mult: Vec<f64> = (0..spec.len())
            .into_par_iter()
            .map(|idx| {
                let xi = [idx / (n * n), (idx / n) % n, idx % n].map(|j| spec.wavenumber(j));
                let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                (-k2.powi(m as i32) * (t + 1.0)).exp()
            })
            .collect();
        // Parseval: the evolved data never leaves Fourier space
        let norm = spec.cell_volume() / spec.len() as f64;
        let pref = minus_t.powf((two_m - 1.0) / two_m) / s.powi(3);
        let mut b = vec![vec![0.0; basis.len()]; data.len()];
        for (j, f) in basis.fields.iter().enumerate() {
            let dual = dual_spectrum(f, basis.level, &params, spec, s)?;
            for (d, hat) in hats.iter().enumerate() {
                b[d][j] = norm
                    * (0..3)
                        .map(|c| {
                            dual[c]
                                .par_iter()
                                .zip(&hat[c])
                                .zip(&mult)
                                .map(|((v, h), w)| (v * h.conj()).re * w)
                                .sum::<f64>()
                        })
                        .sum::<f64>();
            }
        }
        rows.push(
            b.iter()
                .map(|bd| {
                    ginv.iter()
                        .map(|row| pref * row.iter().zip(bd).map(|(g, x)| g * x).sum::<f64>())
                        .collect()
                })
                .collect(),
        );
    }
    let rate = rat_to_f64(&params.rescaled_rate(basis.level));
    Ok((0..data.len())
        .map(|d| {
            let coeffs: Vec<Vec<f64>> = rows.iter().map(|r| r[d].clone()).collect();
            let c0 = &coeffs[0];
            let floor = 1e-10 * c0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut max_rel_error: f64 = 0.0;
            for (row, tau) in coeffs.iter().zip(taus) {
                let predicted = (rate * (tau - taus[0])).exp();
                for (c, c_init) in row.iter().zip(c0) {
                    if c_init.abs() > floor {
                        max_rel_error = max_rel_error.max((c / c_init - predicted).abs());
                    }
                }
            }
            let diagnostic = (floor == 0.0).then(|| "data has no component on the basis".to_string());
            SemigroupRun {
                trajectory: CoefficientTrajectory {
                    model,
                    m,
                    labels: basis.labels.clone(),
                    levels: vec![basis.level; basis.len()],
                    taus: taus.to_vec(),
                    coeffs,
                    duhamel_residual: None,
                    diagnostic,
                },
                predicted_rate: rate,
                max_rel_error,
            }
        })
        .collect())
}
