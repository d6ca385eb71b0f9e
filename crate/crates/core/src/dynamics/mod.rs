//! Coefficient dynamics in the solenoidal Hermite basis and the zero-set
//! diagnostics built on them.
//!
//! In blow-up variables `y = x/(−t)^{1/2m}`, `τ = −ln(−t)` a rescaled field
//! is expanded as `û(y, τ) = Σ c_β(τ) v*_β(y)`, with coefficients read off
//! by pairing against the duals `ṽ_β`. A level-`k` coefficient of the
//! linear flow decays at `−(k + 2m − 1)/(2m)`.
//!
//! For divergence-free data the Stokes pressure is harmonic and decaying,
//! hence constant: taking the divergence of `u_t = Δu − ∇p` with
//! `div u = 0` gives `Δp = 0`. The evolution is therefore the componentwise
//! heat (or, for the fourth-order system, biharmonic) semigroup, which the
//! verifier in [`semigroup`] applies exactly in Fourier space.

mod classify;
mod galerkin;
mod nodal;
mod resonance;
mod semigroup;

pub use classify::{classify_zero, ClassifyOptions, ZeroStatus, ZeroType};
pub use galerkin::{nse_galerkin, GalerkinOptions};
pub use nodal::{nodal_compare, nodal_extract, NodalCloud, NodalSet};
pub use resonance::{
    detect_resonance, unique_continuation_diagnostic, ResonanceOptions, ResonanceReport,
    ResonanceStatus, Verdict,
};
pub use semigroup::{semigroup_verify, semigroup_verify_all, SemigroupRun};

use crate::error::{Error, Result};
use crate::hermite::{hermite_coordinates, OperatorParams};
use crate::linalg::RatMatrix;
use crate::poly::{rat_to_f64, MultiIndex, Rational, VectorPolyField};
use crate::solenoidal::{
    divfree_kernel, field_coordinates, fixture_basis, weighted_dual, SolenoidalBasis,
};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Stokes,
    Nse,
    Burnett,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "stokes" => Ok(Model::Stokes),
            "nse" => Ok(Model::Nse),
            "burnett" => Ok(Model::Burnett),
            _ => Err(Error::InvalidInput(format!(
                "unknown model {s:?}; expected stokes, nse or burnett"
            ))),
        }
    }

    /// Operator order `m` the model runs on.
    pub fn order(self) -> u32 {
        match self {
            Model::Stokes | Model::Nse => 1,
            Model::Burnett => 2,
        }
    }
}

/// Solenoidal fields at levels `0..=K`, flattened in level order, with the
/// per-level dual Gram inverses.
#[derive(Clone, Debug)]
pub struct ExpansionBasis {
    pub params: OperatorParams,
    pub bases: Vec<SolenoidalBasis>,
    ginv: Vec<RatMatrix>,
}

impl ExpansionBasis {
    pub fn new(bases: Vec<SolenoidalBasis>) -> Result<Self> {
        let params = bases
            .first()
            .map(|b| b.params)
            .ok_or_else(|| Error::InvalidInput("empty expansion basis".into()))?;
        if bases.iter().any(|b| b.params != params) {
            return Err(Error::InvalidInput("bases mix operator parameters".into()));
        }
        let ginv = bases.iter().map(weighted_dual).collect::<Result<Vec<_>>>()?;
        Ok(ExpansionBasis { params, bases, ginv })
    }

    /// Fixtures where the catalog has them, the full divergence-free kernel above.
    pub fn standard(params: &OperatorParams, max_level: u32) -> Result<Self> {
        let fixture_top = match params.m {
            1 => Some(2),
            2 => Some(4),
            _ => None,
        };
        let bases = (0..=max_level)
            .map(|k| match fixture_top {
                Some(top) if k <= top && params.dim == 3 => fixture_basis(params, k),
                _ => divfree_kernel(k, params),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bases)
    }

    pub fn len(&self) -> usize {
        self.bases.iter().map(|b| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_level(&self) -> u32 {
        self.bases.iter().map(|b| b.level).max().unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<String> {
        self.bases.iter().flat_map(|b| b.labels.iter().cloned()).collect()
    }

    pub fn levels(&self) -> Vec<u32> {
        self.bases
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.level, b.len()))
            .collect()
    }

    pub fn fields(&self) -> impl Iterator<Item = &VectorPolyField> {
        self.bases.iter().flat_map(|b| b.fields.iter())
    }

    /// Global index of `label`, if present.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| l == label)
    }

    /// `G⁻¹` of each level block, in order.
    pub fn dual_inverses(&self) -> &[RatMatrix] {
        &self.ginv
    }

    /// Linear rates `−(k + 2m − 1)/(2m)` per basis element.
    pub fn rates(&self) -> Vec<f64> {
        self.levels()
            .iter()
            .map(|&k| rat_to_f64(&self.params.rescaled_rate(k)))
            .collect()
    }
}

/// Coefficients of a field in an [`ExpansionBasis`] at one rescaled time.
#[derive(Clone, Debug, Serialize)]
pub struct Expansion {
    pub model: Model,
    pub m: u32,
    pub labels: Vec<String>,
    pub levels: Vec<u32>,
    pub coeffs: Vec<f64>,
    pub tau: f64,
    /// Dual-norm size of the part of the input the basis does not capture.
    pub residual: f64,
}

impl Expansion {
    pub fn new(model: Model, basis: &ExpansionBasis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                left: coeffs.len(),
                right: basis.len(),
            });
        }
        if model.order() != basis.params.m {
            return Err(Error::InvalidInput(format!(
                "model {model:?} runs on m = {}, basis has m = {}",
                model.order(),
                basis.params.m
            )));
        }
        Ok(Expansion {
            model,
            m: basis.params.m,
            labels: basis.labels(),
            levels: basis.levels(),
            coeffs,
            tau: 0.0,
            residual: 0.0,
        })
    }

    /// `Σ c_i v*_i` as a single floating-point evaluator.
    pub fn field_evaluator<'a>(&'a self, basis: &'a ExpansionBasis) -> impl Fn(&[f64; 3]) -> [f64; 3] + Sync + 'a {
        let polys: Vec<(f64, Vec<crate::poly::FloatPoly>)> = basis
            .fields()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(f, c)| (*c, f.components().iter().map(|p| p.to_float()).collect()))
            .collect();
        move |y| {
            let mut out = [0.0; 3];
            for (c, comps) in &polys {
                for (o, p) in out.iter_mut().zip(comps) {
                    *o += c * p.eval(y);
                }
            }
            out
        }
    }
}

/// Exact-rational expansion of a polynomial field.
#[derive(Clone, Debug)]
pub struct ExactExpansion {
    pub coeffs: Vec<Rational>,
    /// `‖û − Σ c v*‖²` in the dual norm `Σ 2^{|β|} β! a_β²`; for `m = 1`
    /// this is `∫ |r|² F`.
    pub residual_sq: Rational,
}

impl ExactExpansion {
    pub fn to_expansion(&self, model: Model, basis: &ExpansionBasis) -> Result<Expansion> {
        let mut e = Expansion::new(model, basis, self.coeffs.iter().map(rat_to_f64).collect())?;
        e.residual = rat_to_f64(&self.residual_sq).sqrt();
        Ok(e)
    }
}

fn dual_weight(beta: &MultiIndex) -> Rational {
    let two = BigInt::from(2u32).pow(beta.order());
    Rational::from_integer(two * beta.factorial())
}

/// Expands `û = p` (meaning the weighted field `p·F` pairs against the
/// duals) exactly: `c = G⁻¹ b`, `b_j = ⟨p, ṽ_j⟩` computed from
/// `ψ*`-coordinates.
pub fn expand_exact(p: &VectorPolyField, basis: &ExpansionBasis) -> Result<ExactExpansion> {
    let params = &basis.params;
    if p.len() != params.dim {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: params.dim,
        });
    }
    let coords: Vec<BTreeMap<MultiIndex, Rational>> = p
        .components()
        .iter()
        .map(|c| hermite_coordinates(c, params))
        .collect::<Result<_>>()?;
    let mut coeffs = Vec::with_capacity(basis.len());
    let mut recon = VectorPolyField::zero(params.dim);
    for (b, ginv) in basis.bases.iter().zip(&basis.ginv) {
        let mut rhs = Vec::with_capacity(b.len());
        for f in &b.fields {
            let fc = field_coordinates(f, b.level, params)?
                .ok_or_else(|| Error::InvalidInput(format!("basis field {f} is off-level")))?;
            let mut s = Rational::zero();
            for (pc, vc) in coords.iter().zip(&fc) {
                for (beta, a) in vc {
                    if let Some(x) = pc.get(beta) {
                        s += a * x * dual_weight(beta);
                    }
                }
            }
            rhs.push(s);
        }
        for i in 0..b.len() {
            let mut c = Rational::zero();
            for (j, r) in rhs.iter().enumerate() {
                c += &ginv[(i, j)] * r;
            }
            recon = recon.add(&b.fields[i].scale(&c))?;
            coeffs.push(c);
        }
    }
    let rest = p.sub(&recon)?;
    let mut residual_sq = Rational::zero();
    for c in rest.components() {
        for (beta, a) in hermite_coordinates(c, params)? {
            residual_sq += &a * &a * dual_weight(&beta);
        }
    }
    Ok(ExactExpansion { coeffs, residual_sq })
}

/// Exact linear decay of every coefficient at its level rate.
pub fn linear_flow(e0: &Expansion, tau: f64) -> Expansion {
    let params = OperatorParams { m: e0.m, dim: 3 };
    let mut e = e0.clone();
    for (c, &k) in e.coeffs.iter_mut().zip(&e0.levels) {
        *c *= (rat_to_f64(&params.rescaled_rate(k)) * tau).exp();
    }
    e.tau = e0.tau + tau;
    e
}

/// `c_β(τ) = c_β(0) e^{−(1+|β|)τ/2}`.
pub fn stokes_flow(e0: &Expansion, tau: f64) -> Result<Expansion> {
    if e0.model != Model::Stokes || e0.m != 1 {
        return Err(Error::InvalidInput("stokes_flow needs a Stokes expansion (m = 1)".into()));
    }
    Ok(linear_flow(e0, tau))
}

/// `c_β(τ) = c_β(0) e^{−(3+|β|)τ/4}`.
pub fn burnett_flow(e0: &Expansion, tau: f64) -> Result<Expansion> {
    if e0.model != Model::Burnett || e0.m != 2 {
        return Err(Error::InvalidInput("burnett_flow needs a Burnett expansion (m = 2)".into()));
    }
    Ok(linear_flow(e0, tau))
}

/// Coefficients on an increasing `τ` grid.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientTrajectory {
    pub model: Model,
    pub m: u32,
    pub labels: Vec<String>,
    pub levels: Vec<u32>,
    pub taus: Vec<f64>,
    /// `coeffs[i][j]`: coefficient `j` at `taus[i]`.
    pub coeffs: Vec<Vec<f64>>,
    /// Relative Duhamel-form residual, when computed.
    pub duhamel_residual: Option<f64>,
    /// Why the trajectory stops early, if it does.
    pub diagnostic: Option<String>,
}

impl CoefficientTrajectory {
    /// Samples a linear flow on `n + 1` uniform points of `[0, tau_end]`.
    pub fn linear(e0: &Expansion, tau_end: f64, n: usize) -> Result<Self> {
        if !(tau_end > 0.0) || n == 0 {
            return Err(Error::InvalidInput("need tau_end > 0 and at least one step".into()));
        }
        let taus: Vec<f64> = (0..=n).map(|i| tau_end * i as f64 / n as f64).collect();
        let coeffs = taus.iter().map(|&t| linear_flow(e0, t).coeffs).collect();
        Ok(CoefficientTrajectory {
            model: e0.model,
            m: e0.m,
            labels: e0.labels.clone(),
            levels: e0.levels.clone(),
            taus,
            coeffs,
            duhamel_residual: None,
            diagnostic: None,
        })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.coeffs.iter().map(|row| row[j]).collect()
    }

    /// The state at row `i` as an [`Expansion`].
    pub fn state(&self, i: usize) -> Expansion {
        Expansion {
            model: self.model,
            m: self.m,
            labels: self.labels.clone(),
            levels: self.levels.clone(),
            coeffs: self.coeffs[i].clone(),
            tau: self.taus[i],
            residual: 0.0,
        }
    }

    /// Header `tau,<label> (k=<level>),...`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau");
        for (l, k) in self.labels.iter().zip(&self.levels) {
            s.push_str(&format!(",{l} (k={k})"));
        }
        s.push('\n');
        for (t, row) in self.taus.iter().zip(&self.coeffs) {
            s.push_str(&t.to_string());
            for c in row {
                s.push(',');
                s.push_str(&c.to_string());
            }
            s.push('\n');
        }
        s
    }

    /// Least-squares slope of `log|c_j|` over `window`, if `c_j` is nonzero there.
    pub fn log_slope(&self, j: usize, window: (f64, f64)) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .taus
            .iter()
            .zip(&self.coeffs)
            .filter(|(t, _)| **t >= window.0 - 1e-12 && **t <= window.1 + 1e-12)
            .map(|(t, row)| (*t, row[j].abs()))
            .filter(|(_, c)| *c > f64::MIN_POSITIVE)
            .map(|(t, c)| (t, c.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

#[cfg(test)]
mod tests;
