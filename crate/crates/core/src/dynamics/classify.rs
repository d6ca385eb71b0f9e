//! Spatial and temporal vanishing orders of a field at `(x, t) = (0, 0⁻)`.

use crate::error::{Error, Result};
use crate::linalg::lstsq_f64;
use crate::poly::Rational;
use serde::Serialize;

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub max_order: u32,
    /// Normalized coefficients above this count as nonzero.
    pub threshold: f64,
    /// Half-width of the spatial sampling segment.
    pub spatial_radius: f64,
    /// Length of the one-sided temporal window `t ∈ [−δ, 0]`.
    pub temporal_window: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            max_order: 8,
            threshold: 1e-7,
            spatial_radius: 0.5,
            temporal_window: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroStatus {
    Finite,
    /// Every spatial order up to the bound vanishes.
    SpatialOrderExceedsBound,
    /// Every temporal order up to the bound vanishes (e.g. `u(0, t) ≡ 0`).
    TemporalOrderExceedsBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroType {
    pub schema: &'static str,
    pub status: ZeroStatus,
    #[serde(rename = "M")]
    pub spatial_order: Option<u32>,
    #[serde(rename = "K")]
    pub temporal_order: Option<u32>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub gamma: Option<Rational>,
    /// `z = x/(−t)^γ`.
    pub rescale: Option<String>,
}

fn ser_opt_rat<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        None => s.serialize_none(),
        Some(r) => s.serialize_str(&r.to_string()),
    }
}

/// Fixed generic directions (normalized on use); none lies in a coordinate plane.
const DIRECTIONS: [[f64; 3]; 5] = [
    [1.0, 1.224_744_871, 0.707_106_781],
    [-0.64, 0.27, 1.0],
    [0.15, -0.9, 0.52],
    [1.5, 0.5, -1.0],
    [-0.4, -0.6, -1.0],
];

fn chebyshev_nodes(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| -((2 * i + 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos())
        .collect()
}

/// Monomial coefficients of a degree-`deg` fit in the scaled variable `s ∈ nodes`.
fn fit(nodes: &[f64], values: &[f64], deg: u32) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&s| (0..=deg).map(|j| s.powi(j as i32)).collect())
        .collect();
    lstsq_f64(&rows, values).ok_or_else(|| Error::NonConvergence {
        what: "polynomial fit for vanishing orders".into(),
        achieved: f64::NAN,
        wanted: 0.0,
    })
}

/// `M`: smallest spatial order with a nonzero coefficient of `u(·, 0)` along
/// any sample direction; `K`: smallest temporal order of `u(0, ·)` from the
/// past. Coefficients are normalized by the largest one found anywhere.
pub fn classify_zero<F>(sampler: F, opts: &ClassifyOptions) -> Result<ZeroType>
where
    F: Fn(&[f64; 3], f64) -> Vec<f64>,
{
    let deg = opts.max_order;
    let count = 3 * (deg as usize + 1);
    let sym = chebyshev_nodes(count);
    let mut spatial: Vec<Vec<f64>> = Vec::new();
    for raw in DIRECTIONS {
        let len = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
        let d = raw.map(|x| x / len);
        let samples: Vec<Vec<f64>> = sym
            .iter()
            .map(|&s| {
                let r = s * opts.spatial_radius;
                sampler(&[r * d[0], r * d[1], r * d[2]], 0.0)
            })
            .collect();
        let ncomp = samples.first().map_or(0, |v| v.len());
        for c in 0..ncomp {
            let vals: Vec<f64> = samples.iter().map(|v| v[c]).collect();
            spatial.push(fit(&sym, &vals, deg)?);
        }
    }
    // one-sided in σ = −t ∈ [0, δ]: map Chebyshev nodes to [0, 1]
    let one_sided: Vec<f64> = sym.iter().map(|s| 0.5 * (s + 1.0)).collect();
    let tsamples: Vec<Vec<f64>> = one_sided
        .iter()
        .map(|&s| sampler(&[0.0; 3], -s * opts.temporal_window))
        .collect();
    let ncomp = tsamples.first().map_or(0, |v| v.len());
    let temporal: Vec<Vec<f64>> = (0..ncomp)
        .map(|c| {
            let vals: Vec<f64> = tsamples.iter().map(|v| v[c]).collect();
            fit(&one_sided, &vals, deg)
        })
        .collect::<Result<_>>()?;

    let scale = spatial
        .iter()
        .chain(&temporal)
        .flatten()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let first_order = |fits: &[Vec<f64>]| -> Option<u32> {
        (0..=deg).find(|&j| {
            fits.iter()
                .any(|f| scale > 0.0 && f[j as usize].abs() / scale > opts.threshold)
        })
    };
    let m = first_order(&spatial);
    let k = first_order(&temporal);
    if m == Some(0) || k == Some(0) {
        return Err(Error::InvalidInput("u(0, 0) != 0: the point is not a zero".into()));
    }
    let (status, gamma, rescale) = match (m, k) {
        (None, _) => (ZeroStatus::SpatialOrderExceedsBound, None, None),
        (Some(_), None) => (ZeroStatus::TemporalOrderExceedsBound, None, None),
        (Some(m), Some(k)) => {
            let g = Rational::new((k as i64).into(), (m as i64).into());
            let z = format!("z = x/(-t)^({g})");
            (ZeroStatus::Finite, Some(g), Some(z))
        }
    };
    Ok(ZeroType {
        schema: crate::SCHEMA,
        status,
        spatial_order: m,
        temporal_order: k,
        gamma,
        rescale,
    })
}
