//! Solenoidal (divergence-free) vector eigenspaces.
//!
//! Two constructions are kept side by side: the explicit fixture vectors
//! (`fixture`) and the full nullspace of the divergence map on
//! `(Φ*_k)^N` (`divfree_kernel`). They have different dimensions (3 vs 8
//! at `k = 1` for `m = 1`); neither is taken as the definitive `S*_k`.

use crate::error::{Error, Result};
use crate::hermite::{level_coordinates, OperatorParams};
use crate::linalg::RatMatrix;
use crate::poly::{moment_of, parse_field, MultiIndex, Polynomial, Rational, VectorPolyField};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisSource {
    Fixture,
    ComputedKernel,
}

/// A set of solenoidal fields at one eigen-level with their dual Gram matrix.
#[derive(Clone, Debug)]
pub struct SolenoidalBasis {
    pub level: u32,
    pub params: OperatorParams,
    pub fields: Vec<VectorPolyField>,
    pub labels: Vec<String>,
    pub source: BasisSource,
    /// `G_ij = ⟨v*_i, ṽ_j⟩`; see [`gram_matrix`].
    pub gram: RatMatrix,
}

impl SolenoidalBasis {
    pub fn new(
        level: u32,
        params: OperatorParams,
        labeled: Vec<(String, VectorPolyField)>,
        source: BasisSource,
    ) -> Result<Self> {
        let (labels, fields): (Vec<_>, Vec<_>) = labeled.into_iter().unzip();
        let gram = gram_matrix(&fields, level, &params)?;
        Ok(SolenoidalBasis {
            level,
            params,
            fields,
            labels,
            source,
            gram,
        })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Checks every documented invariant: exact solenoidality, componentwise
    /// level membership and linear independence.
    pub fn validate(&self) -> Result<()> {
        for (label, f) in self.labels.iter().zip(&self.fields) {
            if !f.divergence()?.is_zero() {
                return Err(Error::InvalidInput(format!(
                    "{label} is not divergence-free"
                )));
            }
            if field_coordinates(f, self.level, &self.params)?.is_none() {
                return Err(Error::InvalidInput(format!(
                    "{label} has a component outside Phi*_{}",
                    self.level
                )));
            }
        }
        let rank = coordinate_matrix(&self.fields, self.level, &self.params)?.rank();
        if rank < self.fields.len() {
            return Err(Error::Singular {
                dependent: dependent_labels(&self.gram, &self.labels),
            });
        }
        Ok(())
    }
}

/// Per-component `ψ*`-coordinates of a field whose components all lie in `Φ*_k`.
pub fn field_coordinates(
    v: &VectorPolyField,
    k: u32,
    params: &OperatorParams,
) -> Result<Option<Vec<BTreeMap<MultiIndex, Rational>>>> {
    let mut out = Vec::with_capacity(v.len());
    for c in v.components() {
        if c.is_zero() {
            out.push(BTreeMap::new());
            continue;
        }
        match level_coordinates(c, k, params)? {
            Some(coords) => out.push(coords),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Flattened coordinates, component-major over the level's multi-indices.
pub fn coordinate_matrix(
    fields: &[VectorPolyField],
    k: u32,
    params: &OperatorParams,
) -> Result<RatMatrix> {
    let level = MultiIndex::of_order(params.dim, k);
    let mut rows = Vec::with_capacity(fields.len());
    for f in fields {
        let coords = field_coordinates(f, k, params)?
            .ok_or_else(|| Error::InvalidInput(format!("field {f} is not at level {k}")))?;
        let mut row = Vec::with_capacity(params.dim * level.len());
        for comp in &coords {
            for b in &level {
                row.push(comp.get(b).cloned().unwrap_or_else(Rational::zero));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Ok(RatMatrix::zeros(0, params.dim * level.len()));
    }
    Ok(RatMatrix::from_rows(rows))
}

/// Dual Gram matrix of a level-`k` family.
///
/// The dual of `ψ*_β` is taken as `2^k (−1)^{|β|} D^β F`, so that
/// `⟨ψ*_α, dual_β⟩ = 2^k β! δ_αβ` for every `m` and, for `m = 1`, the dual
/// of a field is exactly `v* F`. Then `G = A · diag(2^k β!) · Aᵀ` with `A`
/// the coordinate matrix.
pub fn gram_matrix(
    fields: &[VectorPolyField],
    k: u32,
    params: &OperatorParams,
) -> Result<RatMatrix> {
    let a = coordinate_matrix(fields, k, params)?;
    let level = MultiIndex::of_order(params.dim, k);
    let two_k = Rational::from_integer(BigInt::from(2u32).pow(k));
    let weights: Vec<Rational> = (0..params.dim)
        .flat_map(|_| {
            level
                .iter()
                .map(|b| &two_k * Rational::from_integer(b.factorial()))
        })
        .collect();
    let n = fields.len();
    let mut g = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = Rational::zero();
            for (c, w) in weights.iter().enumerate() {
                let (x, y) = (&a[(i, c)], &a[(j, c)]);
                if !x.is_zero() && !y.is_zero() {
                    s += x * y * w;
                }
            }
            g[(i, j)] = s.clone();
            g[(j, i)] = s;
        }
    }
    Ok(g)
}

/// `G_ij = Σ_c ∫ v*_{i,c} v*_{j,c} F` by exact kernel moments; `m = 1` only,
/// where it must agree with [`gram_matrix`].
pub fn gram_by_moments(fields: &[VectorPolyField], params: &OperatorParams) -> Result<RatMatrix> {
    if params.m != 1 {
        return Err(Error::Unsupported(
            "v*F duals coincide with the Hermite duals only for m = 1".into(),
        ));
    }
    let n = fields.len();
    let mut g = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = moment_of(&fields[i].dot(&fields[j])?, 1);
            g[(i, j)] = s.clone();
            g[(j, i)] = s;
        }
    }
    Ok(g)
}

fn dependent_labels(gram: &RatMatrix, labels: &[String]) -> Vec<String> {
    let ns = gram.nullspace();
    let mut out: Vec<String> = labels
        .iter()
        .enumerate()
        .filter(|(i, _)| ns.iter().any(|v| !v[*i].is_zero()))
        .map(|(_, l)| l.clone())
        .collect();
    out.dedup();
    out
}

/// `G⁻¹`, so that `c_i = Σ_j (G⁻¹)_ij ⟨û, ṽ_j⟩` is bi-orthogonal within the level.
pub fn weighted_dual(basis: &SolenoidalBasis) -> Result<RatMatrix> {
    basis.gram.inverse().ok_or_else(|| Error::Singular {
        dependent: dependent_labels(&basis.gram, &basis.labels),
    })
}

/// The explicit solenoidal vectors from the fixture catalog.
///
/// `m = 1`: `k ∈ {0, 1, 2}`; `m = 2`: `k ∈ {0, …, 4}` (N = 3 only).
pub fn fixture(m: u32, k: u32) -> Result<Vec<VectorPolyField>> {
    Ok(fixture_labeled(m, k)?.into_iter().map(|(_, f)| f).collect())
}

pub fn fixture_labeled(m: u32, k: u32) -> Result<Vec<(String, VectorPolyField)>> {
    let table: &[(&str, &str)] = match (m, k) {
        (1, 0) | (2, 0) => &[("v0", "1; 1; 1")],
        (1, 1) => &[
            ("v11", "0; -y3; y2"),
            ("v12", "y3; 0; -y1"),
            ("v13", "-y2; y1; 0"),
        ],
        (1, 2) => &[
            ("v21", "4 - y2^2 - y3^2; y1*y2; -y1*y3"),
            ("v22", "y1*y2; 4 - y1^2 - y3^2; -y2*y3"),
            ("v23", "y1*y3; -y2*y3; 4 - y1^2 - y2^2"),
            ("v24", "0; y1*y3; -y1*y2"),
            ("v25", "-y2*y3; 0; y2*y1"),
            // printed as [-y2y3, y2y3, y1²-y2²], which has div = y3
            ("v26", "-y1*y3; y2*y3; y1^2 - y2^2"),
            ("v27", "y1*y2; y3^2 - y1^2; -y2*y3"),
            ("v28", "y2^2 - y3^2; -y1*y2; y1*y3"),
        ],
        (2, 1) => &[
            ("v11", "y2; -y3; y2"),
            ("v12", "y3; y3; -y1"),
            ("v13", "-y2; y1; y1"),
        ],
        (2, 2) => &[
            ("v21", "-y1^2 - y3^2; y1*y2; y1*y3"),
            ("v22", "y1*y2; -y2^2 - y3^2; y2*y3"),
        ],
        (2, 3) => &[
            ("v31", "y2^3; y3^3; y1^3"),
            ("v32", "y1*y2^2; y2*y1^2; -y3*y1^2 - y3*y2^2"),
        ],
        (2, 4) => &[
            ("v41", "y2^4 + 24; y3^4 + 24; y1^4 + 24"),
            ("v42", "y1*y2^3; y2*y1^3; -y3*y1^3 - y3*y2^3"),
        ],
        _ => {
            return Err(Error::InvalidInput(format!(
                "no fixture for (m, k) = ({m}, {k}); catalog has m=1 k<=2 and m=2 k<=4"
            )))
        }
    };
    Ok(table
        .iter()
        .map(|(l, s)| (l.to_string(), parse_field(s)))
        .collect())
}

/// The `v26*` vector exactly as printed in the source tables (not solenoidal).
pub fn fixture_v26_as_printed() -> VectorPolyField {
    parse_field("-y2*y3; y2*y3; y1^2 - y2^2")
}

pub fn fixture_basis(params: &OperatorParams, k: u32) -> Result<SolenoidalBasis> {
    if params.dim != 3 {
        return Err(Error::Unsupported("fixtures exist for N = 3 only".into()));
    }
    SolenoidalBasis::new(
        k,
        *params,
        fixture_labeled(params.m, k)?,
        BasisSource::Fixture,
    )
}

/// Exact nullspace of `div : (Φ*_k)^N → Φ*_{k−1}` with deterministic pivoting.
pub fn divfree_kernel(k: u32, params: &OperatorParams) -> Result<SolenoidalBasis> {
    let n = params.dim;
    let level = MultiIndex::of_order(n, k);
    let psis: Vec<Polynomial> = level
        .iter()
        .map(|b| crate::hermite::eigenfunction(b, params).map(|e| e.psi_star))
        .collect::<Result<_>>()?;
    let cols = n * level.len();
    let fields: Vec<VectorPolyField> = if k == 0 {
        (0..n)
            .map(|c| {
                let mut comps = vec![Polynomial::zero(n); n];
                comps[c] = Polynomial::one(n);
                VectorPolyField::new(comps)
            })
            .collect::<Result<_>>()?
    } else {
        let lower = MultiIndex::of_order(n, k - 1);
        let mut m = RatMatrix::zeros(lower.len(), cols);
        for c in 0..n {
            for (bi, psi) in psis.iter().enumerate() {
                let d = psi.partial(c);
                let coords = level_coordinates(&d, k - 1, params)?
                    .expect("derivatives of level-k eigenfunctions lie in level k-1");
                for (ri, b) in lower.iter().enumerate() {
                    if let Some(v) = coords.get(b) {
                        m[(ri, c * level.len() + bi)] = v.clone();
                    }
                }
            }
        }
        m.nullspace()
            .into_iter()
            .map(|vec| {
                let comps = (0..n)
                    .map(|c| {
                        let mut p = Polynomial::zero(n);
                        for (bi, psi) in psis.iter().enumerate() {
                            let a = &vec[c * level.len() + bi];
                            if !a.is_zero() {
                                p = &p + &psi.scale(a);
                            }
                        }
                        p
                    })
                    .collect();
                VectorPolyField::new(comps)
            })
            .collect::<Result<_>>()?
    };
    let labeled = fields
        .into_iter()
        .enumerate()
        .map(|(i, f)| (format!("k{k}_{i}"), f))
        .collect();
    SolenoidalBasis::new(k, *params, labeled, BasisSource::ComputedKernel)
}

/// True iff `div v ∈ Φ*_{k−1}` for a field with components in `Φ*_k`.
pub fn shift_check(v: &VectorPolyField, k: u32, params: &OperatorParams) -> Result<bool> {
    if field_coordinates(v, k, params)?.is_none() {
        return Err(Error::InvalidInput(format!(
            "components of {v} are not in Phi*_{k}"
        )));
    }
    let div = v.divergence()?;
    if div.is_zero() {
        return Ok(true);
    }
    if k == 0 {
        return Ok(false);
    }
    Ok(level_coordinates(&div, k - 1, params)?.is_some())
}

/// True iff every field of `inner` lies in the span of `outer` (same level).
pub fn span_contains(outer: &SolenoidalBasis, inner: &SolenoidalBasis) -> Result<bool> {
    let a = coordinate_matrix(&outer.fields, outer.level, &outer.params)?;
    let mut all = outer.fields.clone();
    all.extend(inner.fields.iter().cloned());
    let b = coordinate_matrix(&all, outer.level, &outer.params)?;
    Ok(a.rank() == b.rank())
}

#[derive(Serialize)]
struct BasisExport<'a> {
    schema: &'static str,
    level: u32,
    m: u32,
    #[serde(rename = "N")]
    dim: usize,
    source: BasisSource,
    labels: &'a [String],
    fields: &'a [VectorPolyField],
    gram: Vec<Vec<GramEntry>>,
}

#[derive(Serialize)]
struct GramEntry {
    num: String,
    den: String,
}

/// JSON export: the fields, their labels and the exact Gram matrix.
pub fn basis_json(basis: &SolenoidalBasis) -> serde_json::Value {
    let gram = (0..basis.gram.rows())
        .map(|i| {
            basis
                .gram
                .row(i)
                .iter()
                .map(|r| GramEntry {
                    num: r.numer().to_string(),
                    den: r.denom().to_string(),
                })
                .collect()
        })
        .collect();
    serde_json::to_value(BasisExport {
        schema: crate::SCHEMA,
        level: basis.level,
        m: basis.params.m,
        dim: basis.params.dim,
        source: basis.source,
        labels: &basis.labels,
        fields: &basis.fields,
        gram,
    })
    .expect("basis serializes")
}

/// True if every off-diagonal entry is zero.
pub fn is_diagonal(g: &RatMatrix) -> bool {
    (0..g.rows()).all(|i| (0..g.cols()).all(|j| i == j || g[(i, j)].is_zero()))
}
