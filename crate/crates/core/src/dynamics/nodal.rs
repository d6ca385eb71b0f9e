//! Zero sets of expansion fields on a ball and their Hausdorff distance.

use super::{Expansion, ExpansionBasis};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Zero-set samples of one component. Points up to two cells outside the
/// ball are kept as a halo so that comparisons near the rim are not biased
/// by the clipping.
#[derive(Clone, Debug, Serialize)]
pub struct NodalCloud {
    pub component: usize,
    pub radius: f64,
    pub cell: f64,
    pub points: Vec<[f64; 3]>,
    /// The component vanishes at every grid node.
    pub identically_zero: bool,
}

impl NodalCloud {
    pub fn interior(&self) -> impl Iterator<Item = &[f64; 3]> {
        let r2 = self.radius * self.radius;
        self.points.iter().filter(move |p| norm2(p) <= r2 * (1.0 + 1e-12))
    }

    pub fn is_empty(&self) -> bool {
        self.interior().next().is_none()
    }

    /// CSV `x,y,z`, interior points only.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,z\n");
        for p in self.interior() {
            s.push_str(&format!("{},{},{}\n", p[0], p[1], p[2]));
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NodalSet {
    pub components: Vec<NodalCloud>,
}

fn norm2(p: &[f64; 3]) -> f64 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
}

/// Nodal clouds of `f` on `|y| ≤ radius`: sign changes along cube-grid
/// edges (linear interpolation) plus nodes where a component is exactly 0.
pub fn nodal_extract_fn<F>(f: F, radius: f64, cell: f64) -> Result<NodalSet>
where
    F: Fn(&[f64; 3]) -> [f64; 3] + Sync,
{
    if !(radius > 0.0) || !(cell > 0.0) || cell > radius {
        return Err(Error::InvalidInput(format!(
            "need 0 < cell <= radius, got cell {cell}, radius {radius}"
        )));
    }
    let half = (radius / cell).ceil() as i64 + 2;
    let side = (2 * half + 1) as usize;
    let coord = |i: usize| (i as i64 - half) as f64 * cell;
    let keep = (radius + 2.0 * cell).powi(2);
    let values: Vec<[f64; 3]> = (0..side * side * side)
        .into_par_iter()
        .map(|idx| f(&[coord(idx / (side * side)), coord((idx / side) % side), coord(idx % side)]))
        .collect();
    let at = |i: usize, j: usize, k: usize| (i * side + j) * side + k;
    let components = (0..3)
        .map(|c| {
            let identically_zero = values.iter().all(|v| v[c] == 0.0);
            let mut points = Vec::new();
            if !identically_zero {
                for i in 0..side {
                    for j in 0..side {
                        for k in 0..side {
                            let p = [coord(i), coord(j), coord(k)];
                            let v = values[at(i, j, k)][c];
                            if v == 0.0 {
                                if norm2(&p) <= keep {
                                    points.push(p);
                                }
                                continue;
                            }
                            let nbrs = [(i + 1, j, k, 0), (i, j + 1, k, 1), (i, j, k + 1, 2)];
                            for (a, b, d, axis) in nbrs {
                                if a >= side || b >= side || d >= side {
                                    continue;
                                }
                                let w = values[at(a, b, d)][c];
                                if w != 0.0 && (v < 0.0) != (w < 0.0) {
                                    let t = v / (v - w);
                                    let mut q = p;
                                    q[axis] += t * cell;
                                    if norm2(&q) <= keep {
                                        points.push(q);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            NodalCloud {
                component: c,
                radius,
                cell,
                points,
                identically_zero,
            }
        })
        .collect();
    Ok(NodalSet { components })
}

/// Nodal clouds of `Σ c_i v*_i`.
pub fn nodal_extract(e: &Expansion, basis: &ExpansionBasis, radius: f64, cell: f64) -> Result<NodalSet> {
    if e.coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            left: e.coeffs.len(),
            right: basis.len(),
        });
    }
    if e.coeffs.iter().all(|c| *c == 0.0) {
        return Err(Error::InvalidInput("expansion has no nonzero coefficient".into()));
    }
    nodal_extract_fn(e.field_evaluator(basis), radius, cell)
}

struct Bins<'a> {
    size: f64,
    map: HashMap<[i64; 3], Vec<&'a [f64; 3]>>,
    reach: i64,
}

impl<'a> Bins<'a> {
    fn new(points: &'a [[f64; 3]], size: f64) -> Self {
        let mut map: HashMap<[i64; 3], Vec<&[f64; 3]>> = HashMap::new();
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for p in points {
            let key = p.map(|x| (x / size).floor() as i64);
            for a in 0..3 {
                lo[a] = lo[a].min(key[a]);
                hi[a] = hi[a].max(key[a]);
            }
            map.entry(key).or_default().push(p);
        }
        let reach = (0..3).map(|a| hi[a] - lo[a]).max().unwrap_or(0) + 2;
        Bins { size, map, reach }
    }

    /// Distance to the nearest stored point, searching shells of bins outward.
    fn nearest(&self, q: &[f64; 3]) -> f64 {
        let key = q.map(|x| (x / self.size).floor() as i64);
        let mut best = f64::INFINITY;
        for r in 0..=self.reach {
            // any point in shell r is at least (r − 1)·size away
            if best.is_finite() && best <= (r - 1) as f64 * self.size {
                break;
            }
            for dx in -r..=r {
                for dy in -r..=r {
                    for dz in -r..=r {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        if let Some(v) = self.map.get(&[key[0] + dx, key[1] + dy, key[2] + dz]) {
                            for p in v {
                                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                                best = best.min(d);
                            }
                        }
                    }
                }
            }
        }
        best
    }
}

fn directed(from: &NodalCloud, to: &NodalCloud) -> f64 {
    let bins = Bins::new(&to.points, to.cell.max(1e-9) * 2.0);
    let pts: Vec<&[f64; 3]> = from.interior().collect();
    pts.par_iter().map(|p| bins.nearest(p)).reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between the in-ball parts of two clouds
/// (each measured against the other's full cloud, halo included).
pub fn nodal_compare(a: &NodalCloud, b: &NodalCloud) -> Result<f64> {
    if (a.radius - b.radius).abs() > 1e-12 * a.radius {
        return Err(Error::InvalidInput("clouds were extracted on different balls".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "Hausdorff distance undefined: a nodal cloud is empty".into(),
        ));
    }
    Ok(directed(a, b).max(directed(b, a)))
}
