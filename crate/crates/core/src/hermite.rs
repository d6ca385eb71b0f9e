//! The operator pair `B*`/`B` of order `2m`, its generalized Hermite
//! polynomial eigenfunctions, and exact bi-orthonormality.
//!
//! `B* = (−1)^{m+1} Δ^m − (1/2m) y·∇` has eigenvalues `−k/2m` on the
//! polynomials `ψ*_β = y^β + Σⱼ (1/j!) (−Δ)^{mj} y^β`. The adjoint `B`
//! has eigenfunctions `ψ_β = (−1)^{|β|} D^β F`, where `F` is the rescaled
//! fundamental-solution kernel. Everything here is stored unnormalized:
//! the `1/√β!` factor is carried as `norm_sq = β!` on the side.

use crate::error::{Error, Result};
use crate::poly::{moment_of, MultiIndex, Polynomial, Rational};
use num_integer::binomial;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Half-order `m` of the diffusion `(−Δ)^m` and space dimension `N`.
///
/// The weighted spaces on which these operators act carry an exponent
/// `a ∈ (0, 2d₀)` in the weight `e^{a|y|^α}`; no computed quantity here
/// depends on it, so it is not stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorParams {
    pub m: u32,
    #[serde(rename = "N")]
    pub dim: usize,
}

impl OperatorParams {
    pub fn new(m: u32, dim: usize) -> Result<Self> {
        if m == 0 || dim == 0 {
            return Err(Error::InvalidInput(format!(
                "operator parameters need m >= 1 and N >= 1, got m={m}, N={dim}"
            )));
        }
        Ok(OperatorParams { m, dim })
    }

    /// The usual second-order case in three dimensions.
    pub fn heat3() -> Self {
        OperatorParams { m: 1, dim: 3 }
    }

    /// Biharmonic (Burnett) case in three dimensions.
    pub fn burnett3() -> Self {
        OperatorParams { m: 2, dim: 3 }
    }

    /// `λ_k = −k/(2m)`.
    pub fn eigenvalue(&self, k: u32) -> Rational {
        Rational::new((-(k as i64)).into(), (2 * self.m as i64).into())
    }

    /// Decay rate of level `k` under the blow-up rescaled linear flow,
    /// `λ_k − (2m−1)/(2m) = −(k + 2m − 1)/(2m)`.
    pub fn rescaled_rate(&self, k: u32) -> Rational {
        Rational::new(
            (-((k + 2 * self.m - 1) as i64)).into(),
            (2 * self.m as i64).into(),
        )
    }

    /// `dim Φ*_k = C(k+N−1, N−1)`.
    pub fn level_multiplicity(&self, k: u32) -> usize {
        let n = self.dim as u64;
        binomial(k as u64 + n - 1, n - 1) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenPair {
    pub beta: MultiIndex,
    pub lambda: Rational,
    pub psi_star: Polynomial,
    pub norm_sq: Rational,
}

/// `(−1)^{m+1} Δ^m p − (1/2m) y·∇p`.
pub fn apply_b_star(p: &Polynomial, params: &OperatorParams) -> Result<Polynomial> {
    if p.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: params.dim,
        });
    }
    let mut lap = p.clone();
    for _ in 0..params.m {
        lap = lap.laplacian();
    }
    if params.m % 2 == 0 {
        lap = -&lap;
    }
    let drift = p
        .euler()
        .scale(&Rational::new(1.into(), (2 * params.m as i64).into()));
    Ok(&lap - &drift)
}

/// For `m = 1`: returns `q` with `B(pF) = qF`, where
/// `B = Δ + ½ y·∇ + N/2` and `F` is the Gaussian kernel.
///
/// Built by the product rule using `∇F = −(y/2)F` and
/// `ΔF = (|y|²/4 − N/2)F`, so it is an independent route to `B* p`.
pub fn apply_b_weighted(p: &Polynomial, params: &OperatorParams) -> Result<Polynomial> {
    if params.m != 1 {
        return Err(Error::Unsupported(format!(
            "weighted conjugation B(pF) = (B*p)F only holds for m = 1 (got m = {})",
            params.m
        )));
    }
    let n = params.dim;
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: n,
        });
    }
    let half = Rational::new(1.into(), 2.into());
    let quarter = Rational::new(1.into(), 4.into());
    let ys: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
    // grad F / F and lap F / F as polynomials
    let grad_f: Vec<Polynomial> = ys.iter().map(|y| y.scale(&-half.clone())).collect();
    let r2 = ys
        .iter()
        .fold(Polynomial::zero(n), |acc, y| &acc + &(y * y));
    let lap_f =
        &r2.scale(&quarter) - &Polynomial::constant(n, Rational::new((n as i64).into(), 2.into()));

    // Δ(pF)/F = Δp + 2∇p·∇F/F + p ΔF/F
    let mut lap_pf = p.laplacian();
    for (i, g) in grad_f.iter().enumerate() {
        lap_pf = &lap_pf + &(&p.partial(i) * g).scale(&Rational::from_integer(2.into()));
    }
    lap_pf = &lap_pf + &(p * &lap_f);

    // ½ y·∇(pF)/F = ½ Σ yᵢ (∂ᵢp + p ∂ᵢF/F)
    let mut drift = Polynomial::zero(n);
    for (i, y) in ys.iter().enumerate() {
        let d = &p.partial(i) + &(p * &grad_f[i]);
        drift = &drift + &(y * &d);
    }
    let drift = drift.scale(&half);

    let mass = p.scale(&Rational::new((n as i64).into(), 2.into()));
    Ok(&(&lap_pf + &drift) + &mass)
}

/// The generalized Hermite polynomial `ψ*_β` with its eigenvalue and `β!`.
pub fn eigenfunction(beta: &MultiIndex, params: &OperatorParams) -> Result<EigenPair> {
    if beta.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            left: beta.dim(),
            right: params.dim,
        });
    }
    let k = beta.order();
    let base = Polynomial::monomial(beta.clone(), Rational::one());
    let mut psi = base.clone();
    let mut power = base;
    let mut jfact = Rational::one();
    for j in 1..=(k / (2 * params.m)) {
        power = power.neg_laplacian_power(params.m);
        jfact *= Rational::from_integer(j.into());
        psi = &psi + &power.scale(&jfact.recip());
    }
    Ok(EigenPair {
        beta: beta.clone(),
        lambda: params.eigenvalue(k),
        psi_star: psi,
        norm_sq: Rational::from_integer(beta.factorial()),
    })
}

/// All eigenpairs of level `k` in graded-lex order.
pub fn level_enumerate(k: u32, params: &OperatorParams) -> Vec<EigenPair> {
    MultiIndex::of_order(params.dim, k)
        .iter()
        .map(|b| eigenfunction(b, params).expect("dims match by construction"))
        .collect()
}

/// `⟨ψ*_A, ψ_B⟩` with `ψ_B = (−1)^{|β_B|} D^{β_B} F`, reduced by parts to
/// `∫ (D^{β_B} ψ*_A) F`.
pub fn pairing(
    psi_a_star: &Polynomial,
    beta_b: &MultiIndex,
    params: &OperatorParams,
) -> Result<Rational> {
    let d = psi_a_star.derive(beta_b)?;
    Ok(moment_of(&d, params.m))
}

/// Coordinates of `p` in the basis `{ψ*_β}` (all levels). Always succeeds:
/// the `ψ*_β` are triangular with leading term `y^β`.
pub fn hermite_coordinates(
    p: &Polynomial,
    params: &OperatorParams,
) -> Result<BTreeMap<MultiIndex, Rational>> {
    if p.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: params.dim,
        });
    }
    let mut rest = p.clone();
    let mut coords = BTreeMap::new();
    while let Some((beta, c)) = rest.leading_term().map(|(b, c)| (b.clone(), c.clone())) {
        let psi = eigenfunction(&beta, params)?.psi_star;
        rest = &rest - &psi.scale(&c);
        coords.insert(beta, c);
    }
    Ok(coords)
}

/// Coordinates of `p` in `Φ*_k = span{ψ*_β : |β| = k}`, or `None` if `p`
/// is not in that span.
pub fn level_coordinates(
    p: &Polynomial,
    k: u32,
    params: &OperatorParams,
) -> Result<Option<BTreeMap<MultiIndex, Rational>>> {
    let coords = hermite_coordinates(p, params)?;
    if coords.keys().all(|b| b.order() == k) {
        Ok(Some(coords))
    } else {
        Ok(None)
    }
}

/// True iff `D^γ ψ*_β` lies in `Φ*_{|β|−|γ|}`.
pub fn derivative_shift_check(
    beta: &MultiIndex,
    gamma: &MultiIndex,
    params: &OperatorParams,
) -> Result<bool> {
    if gamma.order() > beta.order() {
        return Err(Error::InvalidInput(format!(
            "|γ| = {} exceeds |β| = {}",
            gamma.order(),
            beta.order()
        )));
    }
    let psi = eigenfunction(beta, params)?.psi_star;
    let d = psi.derive(gamma)?;
    Ok(level_coordinates(&d, beta.order() - gamma.order(), params)?.is_some())
}

#[derive(Serialize, Deserialize)]
struct RatRepr {
    num: String,
    den: String,
}

impl From<&Rational> for RatRepr {
    fn from(r: &Rational) -> Self {
        RatRepr {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl TryFrom<RatRepr> for Rational {
    type Error = String;
    fn try_from(r: RatRepr) -> std::result::Result<Self, String> {
        let n: num_bigint::BigInt = r.num.parse().map_err(|e| format!("{e}"))?;
        let d: num_bigint::BigInt = r.den.parse().map_err(|e| format!("{e}"))?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rational::new(n, d))
    }
}

/// Serializes a rational as `{"num": "...", "den": "..."}`.
pub mod rational_json {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        RatRepr::from(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        use serde::de::Error as _;
        Rational::try_from(RatRepr::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct EigenPairRepr {
    beta: MultiIndex,
    #[serde(with = "rational_json")]
    lambda: Rational,
    psi_star: Polynomial,
    #[serde(with = "rational_json")]
    norm_sq: Rational,
}

impl Serialize for EigenPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EigenPairRepr {
            beta: self.beta.clone(),
            lambda: self.lambda.clone(),
            psi_star: self.psi_star.clone(),
            norm_sq: self.norm_sq.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EigenPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = EigenPairRepr::deserialize(d)?;
        Ok(EigenPair {
            beta: r.beta,
            lambda: r.lambda,
            psi_star: r.psi_star,
            norm_sq: r.norm_sq,
        })
    }
}
