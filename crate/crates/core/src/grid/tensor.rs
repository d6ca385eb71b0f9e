//! The quadratic interaction tensor `d_{αγβ} = −⟨𝕡(v*_α·∇)v*_γ, ṽ_β⟩`.
//!
//! The discrete projector is a real symmetric operator on grid arrays, so
//! `⟨𝕡w, ṽ⟩ = ⟨w, 𝕡ṽ⟩`. Each dual is projected once and reduced to its
//! grid moments; every product `(v*_α·∇)v*_γ` is an exact polynomial, and
//! its pairing is a dot product of coefficients with those moments.

use super::{dual_field, project, GridMoments, GridSpec};
use crate::error::{Error, Result};
use crate::poly::VectorPolyField;
use crate::solenoidal::{weighted_dual, SolenoidalBasis};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug)]
pub struct TensorOptions {
    pub spec: GridSpec,
    /// Recompute at `n → 3n/2` for the error estimate.
    pub refine_n: bool,
    /// Recompute at `L → 2L` (same spacing) for the error estimate.
    pub refine_box: bool,
    /// Entries whose estimated error exceeds `tol·(1 + |d|)` are flagged.
    pub tol: f64,
}

impl TensorOptions {
    pub fn fast(spec: GridSpec) -> Self {
        TensorOptions {
            spec,
            refine_n: false,
            refine_box: false,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorEntry {
    pub alpha: usize,
    pub gamma: usize,
    pub beta: usize,
    pub value: f64,
    pub error: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug)]
struct IndexSet {
    labels: Vec<String>,
    levels: Vec<u32>,
    fields: Vec<VectorPolyField>,
}

impl IndexSet {
    fn from_bases(bases: &[SolenoidalBasis]) -> Self {
        let mut s = IndexSet {
            labels: Vec::new(),
            levels: Vec::new(),
            fields: Vec::new(),
        };
        for b in bases {
            s.labels.extend(b.labels.iter().cloned());
            s.levels.extend(std::iter::repeat_n(b.level, b.len()));
            s.fields.extend(b.fields.iter().cloned());
        }
        s
    }
}

/// Dense tensor over `(α, γ, β)` with per-entry error estimates.
#[derive(Clone, Debug)]
pub struct InteractionTensor {
    pub m: u32,
    pub spec: GridSpec,
    pub refinements: Vec<GridSpec>,
    pub tol: f64,
    alpha: IndexSet,
    gamma: IndexSet,
    beta: IndexSet,
    values: Vec<f64>,
    errors: Vec<f64>,
}

impl InteractionTensor {
    /// All-zero tensor over one index set, for the linear limit.
    pub fn zero(bases: &[SolenoidalBasis], spec: GridSpec) -> Self {
        let set = IndexSet::from_bases(bases);
        let n = set.labels.len();
        InteractionTensor {
            m: bases.first().map_or(1, |b| b.params.m),
            spec,
            refinements: Vec::new(),
            tol: 0.0,
            alpha: set.clone(),
            gamma: set.clone(),
            beta: set,
            values: vec![0.0; n * n * n],
            errors: vec![0.0; n * n * n],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (
            self.alpha.labels.len(),
            self.gamma.labels.len(),
            self.beta.labels.len(),
        )
    }

    fn flat(&self, a: usize, g: usize, b: usize) -> usize {
        let (_, ng, nb) = self.shape();
        (a * ng + g) * nb + b
    }

    pub fn get(&self, a: usize, g: usize, b: usize) -> f64 {
        self.values[self.flat(a, g, b)]
    }

    pub fn error(&self, a: usize, g: usize, b: usize) -> f64 {
        self.errors[self.flat(a, g, b)]
    }

    pub fn set(&mut self, a: usize, g: usize, b: usize, v: f64) {
        let i = self.flat(a, g, b);
        self.values[i] = v;
    }

    pub fn labels(&self) -> (&[String], &[String], &[String]) {
        (&self.alpha.labels, &self.gamma.labels, &self.beta.labels)
    }

    pub fn levels(&self) -> (&[u32], &[u32], &[u32]) {
        (&self.alpha.levels, &self.gamma.levels, &self.beta.levels)
    }

    /// Whether the three index sets coincide, as the Galerkin system requires.
    pub fn is_square(&self) -> bool {
        self.alpha.labels == self.beta.labels && self.gamma.labels == self.beta.labels
    }

    pub fn entries(&self) -> Vec<TensorEntry> {
        let (na, ng, nb) = self.shape();
        let mut out = Vec::with_capacity(na * ng * nb);
        for a in 0..na {
            for g in 0..ng {
                for b in 0..nb {
                    let i = self.flat(a, g, b);
                    let (v, e) = (self.values[i], self.errors[i]);
                    out.push(TensorEntry {
                        alpha: a,
                        gamma: g,
                        beta: b,
                        value: v,
                        error: e,
                        flagged: e > self.tol * (1.0 + v.abs()),
                    });
                }
            }
        }
        out
    }

    pub fn flagged(&self) -> usize {
        self.entries().iter().filter(|e| e.flagged).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().fold(0.0f64, |a, v| a.max(*v))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": crate::SCHEMA,
            "m": self.m,
            "grid": self.spec,
            "refinements": self.refinements,
            "tol": self.tol,
            "alpha": {"labels": self.alpha.labels, "levels": self.alpha.levels},
            "gamma": {"labels": self.gamma.labels, "levels": self.gamma.levels},
            "beta": {"labels": self.beta.labels, "levels": self.beta.levels},
            "flagged": self.flagged(),
            "entries": self.entries(),
        })
    }
}

fn tensor_values(
    products: &[VectorPolyField],
    targets: &[SolenoidalBasis],
    spec: &GridSpec,
    max_degree: u32,
) -> Result<Vec<Vec<f64>>> {
    // per target basis: G⁻¹ and the projected-dual moments
    let mut per_pair: Vec<Vec<f64>> = vec![Vec::new(); products.len()];
    for basis in targets {
        let ginv = weighted_dual(basis)?.to_f64();
        let moments = basis
            .fields
            .par_iter()
            .map(|f| {
                let dual = dual_field(f, basis.level, &basis.params, spec, 1.0)?;
                Ok(GridMoments::new(&project(&dual), max_degree))
            })
            .collect::<Result<Vec<_>>>()?;
        let block: Vec<Vec<f64>> = products
            .par_iter()
            .map(|w| {
                let b = moments
                    .iter()
                    .map(|mo| mo.pair(w))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(ginv
                    .iter()
                    .map(|row| -row.iter().zip(&b).map(|(g, x)| g * x).sum::<f64>())
                    .collect())
            })
            .collect::<Result<_>>()?;
        for (acc, part) in per_pair.iter_mut().zip(block) {
            acc.extend(part);
        }
    }
    Ok(per_pair)
}

/// Builds `d_{αγβ}` on `opts.spec` with optional refinement-based error bars.
pub fn interaction_tensor(
    basis_a: &[SolenoidalBasis],
    basis_g: &[SolenoidalBasis],
    targets: &[SolenoidalBasis],
    opts: &TensorOptions,
) -> Result<InteractionTensor> {
    let m = targets
        .first()
        .map(|b| b.params.m)
        .ok_or_else(|| Error::InvalidInput("no target basis".into()))?;
    if basis_a
        .iter()
        .chain(basis_g)
        .chain(targets)
        .any(|b| b.params.m != m || b.params.dim != 3)
    {
        return Err(Error::InvalidInput(
            "all bases must share m and have N = 3".into(),
        ));
    }
    let alpha = IndexSet::from_bases(basis_a);
    let gamma = IndexSet::from_bases(basis_g);
    let beta = IndexSet::from_bases(targets);
    let mut products = Vec::with_capacity(alpha.fields.len() * gamma.fields.len());
    for va in &alpha.fields {
        for vg in &gamma.fields {
            products.push(va.convect(vg)?);
        }
    }
    let max_degree = products
        .iter()
        .filter_map(|p| p.degree())
        .max()
        .unwrap_or(0);

    let flatten = |rows: Vec<Vec<f64>>| rows.into_iter().flatten().collect::<Vec<f64>>();
    let values = flatten(tensor_values(&products, targets, &opts.spec, max_degree)?);
    let mut refinements = Vec::new();
    if opts.refine_n {
        refinements.push(opts.spec.refined());
    }
    if opts.refine_box {
        refinements.push(opts.spec.doubled_box());
    }
    let mut errors = vec![0.0f64; values.len()];
    for spec in &refinements {
        let other = flatten(tensor_values(&products, targets, spec, max_degree)?);
        for ((e, a), b) in errors.iter_mut().zip(&values).zip(&other) {
            *e = f64::max(*e, (a - b).abs());
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence {
            what: "interaction tensor quadrature".into(),
            achieved: f64::INFINITY,
            wanted: opts.tol,
        });
    }
    Ok(InteractionTensor {
        m,
        spec: opts.spec,
        refinements,
        tol: opts.tol,
        alpha,
        gamma,
        beta,
        values,
        errors,
    })
}
