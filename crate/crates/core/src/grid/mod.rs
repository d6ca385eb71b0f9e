//! Periodic-box Fourier machinery on `[−L, L)³`.
//!
//! Whole-space integrals are approximated on the box; decaying fields are
//! periodized with error `~ e^{−L²/4}` for Gaussian weights. Polynomial
//! (non-decaying) samples use the Fourier convention at the box jump: on
//! the planes `x_i = −L` the value is the average of the limits from
//! `−L` and `+L`, so odd monomials sample to grid-odd arrays.

mod fft;
mod io;
mod tensor;

pub use fft::{fft3, ifft3};
pub use io::{dump_binary, GridSidecar};
pub use tensor::{interaction_tensor, InteractionTensor, TensorEntry, TensorOptions};

use crate::error::{Error, Result};
use crate::hermite::OperatorParams;
use crate::kernel::{gaussian_kernel, KernelTable};
use crate::poly::{rat_to_f64, FloatPoly, MultiIndex, VectorPolyField};
use crate::solenoidal::field_coordinates;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
    pub dealias: bool,
}

impl GridSpec {
    pub fn new(half_width: f64, n: usize, dealias: bool) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidInput(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "n must be even and >= 16, got {n}"
            )));
        }
        Ok(GridSpec {
            half_width,
            n,
            dealias,
        })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(3)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    /// Signed mode number of FFT index `j`.
    pub fn mode(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Angular wavenumber `π j / L`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        std::f64::consts::PI * self.mode(j) as f64 / self.half_width
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// `n → 3n/2`, rounded up to even.
    pub fn refined(&self) -> GridSpec {
        let n = (3 * self.n).div_ceil(2);
        GridSpec {
            n: n + n % 2,
            ..*self
        }
    }

    /// `L → 2L` at fixed spacing.
    pub fn doubled_box(&self) -> GridSpec {
        GridSpec {
            half_width: 2.0 * self.half_width,
            n: 2 * self.n,
            ..*self
        }
    }

    /// Flat row-major index of grid point `(i, j, k)`.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }
}

/// Three real component arrays in row-major `(i, j, k)` order, `i` along `y₁`.
#[derive(Clone, Debug)]
pub struct GridVectorField {
    pub spec: GridSpec,
    pub data: [Vec<f64>; 3],
}

impl GridVectorField {
    pub fn zeros(spec: GridSpec) -> Self {
        let z = vec![0.0; spec.len()];
        GridVectorField {
            spec,
            data: [z.clone(), z.clone(), z],
        }
    }

    /// `∫ u·v` by the trapezoid (periodic) rule.
    pub fn dot(&self, other: &GridVectorField) -> f64 {
        let s: f64 = (0..3)
            .map(|c| {
                self.data[c]
                    .par_iter()
                    .zip(&other.data[c])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .sum();
        s * self.spec.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn means(&self) -> [f64; 3] {
        let n = self.spec.len() as f64;
        [0, 1, 2].map(|c| self.data[c].iter().sum::<f64>() / n)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    pub fn axpy(&self, a: f64, other: &GridVectorField) -> GridVectorField {
        let mut out = self.clone();
        for c in 0..3 {
            out.data[c]
                .par_iter_mut()
                .zip(&other.data[c])
                .for_each(|(x, y)| *x += a * y);
        }
        out
    }

    pub fn scaled(&self, a: f64) -> GridVectorField {
        let mut out = self.clone();
        for c in &mut out.data {
            c.par_iter_mut().for_each(|x| *x *= a);
        }
        out
    }
}

/// Pointwise weight applied when sampling a polynomial field.
#[derive(Clone, Copy, Debug)]
pub enum Weight<'a> {
    None,
    /// The kernel `F` of order `m`; `m = 1` is the closed-form Gaussian,
    /// `m ≥ 2` needs a tabulated kernel.
    Kernel {
        m: u32,
        table: Option<&'a KernelTable>,
    },
}

/// Calls `f(i, j, k, y)` over the grid, averaging over `±L` on the jump planes.
fn sample_with<F>(spec: &GridSpec, f: F) -> Vec<[f64; 3]>
where
    F: Fn(&[f64; 3]) -> [f64; 3] + Sync,
{
    let n = spec.n;
    let l = spec.half_width;
    (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let ijk = [idx / (n * n), (idx / n) % n, idx % n];
            let base = ijk.map(|i| spec.coord(i));
            let jumps: Vec<usize> = (0..3).filter(|&a| ijk[a] == 0).collect();
            if jumps.is_empty() {
                return f(&base);
            }
            let combos = 1usize << jumps.len();
            let mut acc = [0.0; 3];
            for mask in 0..combos {
                let mut y = base;
                for (b, &axis) in jumps.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        y[axis] = l;
                    }
                }
                let v = f(&y);
                for c in 0..3 {
                    acc[c] += v[c];
                }
            }
            acc.map(|a| a / combos as f64)
        })
        .collect()
}

fn from_points(spec: GridSpec, pts: Vec<[f64; 3]>) -> GridVectorField {
    let mut out = GridVectorField::zeros(spec);
    for (idx, p) in pts.into_iter().enumerate() {
        for c in 0..3 {
            out.data[c][idx] = p[c];
        }
    }
    out
}

/// Pointwise samples of `v` (optionally times the kernel) on the grid.
pub fn sample(v: &VectorPolyField, weight: Weight<'_>, spec: &GridSpec) -> Result<GridVectorField> {
    if v.dim() != 3 || v.len() != 3 {
        return Err(Error::DimensionMismatch {
            left: 3,
            right: v.dim(),
        });
    }
    let weight_fn: Box<dyn Fn(f64) -> f64 + Sync> = match weight {
        Weight::None => Box::new(|_| 1.0),
        Weight::Kernel { m: 1, .. } => Box::new(gaussian_kernel),
        Weight::Kernel { m, table: Some(t) } => {
            if t.m != m {
                return Err(Error::InvalidInput(format!(
                    "kernel table is for m = {}, requested m = {m}",
                    t.m
                )));
            }
            Box::new(move |r| t.value_at(r))
        }
        Weight::Kernel { m, table: None } => {
            return Err(Error::InvalidInput(format!(
                "the m = {m} kernel has no closed form; supply a kernel table"
            )))
        }
    };
    let comps: Vec<FloatPoly> = v.components().iter().map(|p| p.to_float()).collect();
    let pts = sample_with(spec, |y| {
        let w = weight_fn((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt());
        [0, 1, 2].map(|c| comps[c].eval(y) * w)
    });
    Ok(from_points(*spec, pts))
}

/// Samples a scalar function into every component slot selected by `f`.
pub fn sample_fn<F>(spec: &GridSpec, f: F) -> GridVectorField
where
    F: Fn(&[f64; 3]) -> [f64; 3] + Sync,
{
    from_points(*spec, sample_with(spec, f))
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.par_iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn to_real(v: &[Complex64]) -> Vec<f64> {
    v.par_iter().map(|z| z.re).collect()
}

fn spectra(u: &GridVectorField) -> [Vec<Complex64>; 3] {
    let n = u.spec.n;
    [0, 1, 2].map(|c| {
        let mut buf = to_complex(&u.data[c]);
        fft3(&mut buf, n);
        buf
    })
}

fn from_spectra(spec: GridSpec, mut hat: [Vec<Complex64>; 3]) -> GridVectorField {
    let mut out = GridVectorField::zeros(spec);
    for c in 0..3 {
        ifft3(&mut hat[c], spec.n);
        out.data[c] = to_real(&hat[c]);
    }
    out
}

/// Wavevector with Nyquist components zeroed: the Nyquist index stands for
/// both `±ξ_N`, so only a zero component keeps real fields real.
fn xi_symmetric(spec: &GridSpec, idx: usize) -> [f64; 3] {
    let n = spec.n;
    [idx / (n * n), (idx / n) % n, idx % n].map(|j| {
        if spec.is_nyquist(j) {
            0.0
        } else {
            spec.wavenumber(j)
        }
    })
}

/// Leray projection with symbol `I − ξξᵀ/|ξ|²`; the zero mode passes through.
///
/// Nyquist components of `ξ` are treated as zero (see [`xi_symmetric`]), so
/// the discrete operator is real, symmetric and idempotent.
pub fn project(u: &GridVectorField) -> GridVectorField {
    let spec = u.spec;
    let mut hat = spectra(u);
    let [h0, h1, h2] = &mut hat;
    h0.par_iter_mut()
        .zip(h1.par_iter_mut())
        .zip(h2.par_iter_mut())
        .enumerate()
        .for_each(|(idx, ((a, b), c))| {
            let xi = xi_symmetric(&spec, idx);
            let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            if k2 == 0.0 {
                return;
            }
            let proj = (*a * xi[0] + *b * xi[1] + *c * xi[2]) / k2;
            *a -= proj * xi[0];
            *b -= proj * xi[1];
            *c -= proj * xi[2];
        });
    from_spectra(spec, hat)
}

/// `∂_axis` of each spectrum, Nyquist modes zeroed (odd derivative).
fn spectral_partial(spec: &GridSpec, hat: &[Complex64], axis: usize) -> Vec<Complex64> {
    let n = spec.n;
    hat.par_iter()
        .enumerate()
        .map(|(idx, z)| {
            let j = [idx / (n * n), (idx / n) % n, idx % n][axis];
            if spec.is_nyquist(j) {
                Complex64::new(0.0, 0.0)
            } else {
                z * Complex64::new(0.0, spec.wavenumber(j))
            }
        })
        .collect()
}

/// Spectral divergence `Σ ∂ᵢuᵢ`.
pub fn spectral_divergence(u: &GridVectorField) -> Vec<f64> {
    let spec = u.spec;
    let hat = spectra(u);
    let mut acc = vec![Complex64::new(0.0, 0.0); spec.len()];
    for (c, h) in hat.iter().enumerate() {
        let d = spectral_partial(&spec, h, c);
        acc.par_iter_mut().zip(&d).for_each(|(a, b)| *a += b);
    }
    ifft3(&mut acc, spec.n);
    to_real(&acc)
}

/// `‖div u‖₂ / ‖u‖₂` (zero for the zero field).
pub fn relative_divergence(u: &GridVectorField) -> f64 {
    let norm = u.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let d = spectral_divergence(u);
    (d.iter().map(|x| x * x).sum::<f64>() * u.spec.cell_volume()).sqrt() / norm
}

fn dealias_mask(spec: &GridSpec, hat: &mut [Complex64]) {
    let n = spec.n;
    let cut = (n / 3) as i64;
    hat.par_iter_mut().enumerate().for_each(|(idx, z)| {
        let modes = [idx / (n * n), (idx / n) % n, idx % n].map(|j| spec.mode(j).abs());
        if modes.iter().any(|&m| m > cut) {
            *z = Complex64::new(0.0, 0.0);
        }
    });
}

/// `(u·∇)u` with spectral derivatives; optional 2/3-rule truncation of the
/// input and output spectra.
pub fn convection(u: &GridVectorField) -> GridVectorField {
    let spec = u.spec;
    let mut hat = spectra(u);
    if spec.dealias {
        for h in &mut hat {
            dealias_mask(&spec, h);
        }
    }
    let filtered = from_spectra(spec, hat.clone());
    let mut out = GridVectorField::zeros(spec);
    for i in 0..3 {
        for (j, uj) in filtered.data.iter().enumerate() {
            let mut d = spectral_partial(&spec, &hat[i], j);
            ifft3(&mut d, spec.n);
            out.data[i]
                .par_iter_mut()
                .zip(uj.par_iter().zip(&d))
                .for_each(|(o, (a, b))| *o += a * b.re);
        }
    }
    if spec.dealias {
        let mut h = spectra(&out);
        for c in &mut h {
            dealias_mask(&spec, c);
        }
        out = from_spectra(spec, h);
    }
    out
}

/// Samples a field from its whole-space Fourier transform
/// `φ̂(ξ) = ∫ φ(x) e^{−iξ·x} dx`, one closure per component.
pub fn from_fourier<F>(spec: &GridSpec, symbol: F) -> GridVectorField
where
    F: Fn(&[f64; 3]) -> [Complex64; 3] + Sync,
{
    from_spectra(*spec, fourier_samples(spec, symbol))
}

/// The DFT arrays (unnormalized forward convention) that [`from_fourier`]
/// inverts: the whole-space transform with grid phase and amplitude applied.
pub fn fourier_samples<F>(spec: &GridSpec, symbol: F) -> [Vec<Complex64>; 3]
where
    F: Fn(&[f64; 3]) -> [Complex64; 3] + Sync,
{
    let n = spec.n;
    let scale = (n as f64 / (2.0 * spec.half_width)).powi(3);
    let vals: Vec<[Complex64; 3]> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let modes = [idx / (n * n), (idx / n) % n, idx % n];
            // grid starts at −L: phase e^{−iξL} = (−1)^j
            let sign = if modes.iter().map(|&j| spec.mode(j)).sum::<i64>() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let xi = modes.map(|j| spec.wavenumber(j));
            symbol(&xi).map(|z| z * scale * sign)
        })
        .collect();
    [0, 1, 2].map(|c| vals.iter().map(|v| v[c]).collect::<Vec<_>>())
}

/// `F_m` sampled spectrally from `e^{−|ξ|^{2m}}` (first component slot only used).
pub fn kernel_on_grid(m: u32, spec: &GridSpec) -> Vec<f64> {
    let f = from_fourier(spec, |xi| {
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let v = Complex64::new((-k2.powi(m as i32)).exp(), 0.0);
        [v, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
    });
    let [a, _, _] = f.data;
    a
}

/// The dual of a level-`k` solenoidal field, `ṽ = 2^k Σ_β a_β (−1)^k D^β F`,
/// evaluated at `x / s`: its transform is `s³ 2^k Σ a_β (−1)^k (i s ξ)^β e^{−|sξ|^{2m}}`.
pub fn dual_field(
    v: &VectorPolyField,
    k: u32,
    params: &OperatorParams,
    spec: &GridSpec,
    scale: f64,
) -> Result<GridVectorField> {
    Ok(from_spectra(*spec, dual_spectrum(v, k, params, spec, scale)?))
}

/// DFT arrays of [`dual_field`] before the inverse transform. Pairing a real
/// grid field `u` with the dual is `h³ n⁻³ Re Σ B·conj(fft u)`.
pub fn dual_spectrum(
    v: &VectorPolyField,
    k: u32,
    params: &OperatorParams,
    spec: &GridSpec,
    scale: f64,
) -> Result<[Vec<Complex64>; 3]> {
    if params.dim != 3 {
        return Err(Error::Unsupported(
            "grid duals are three-dimensional".into(),
        ));
    }
    let coords = field_coordinates(v, k, params)?
        .ok_or_else(|| Error::InvalidInput(format!("field {v} is not at level {k}")))?;
    let pref = 2f64.powi(k as i32) * if k % 2 == 0 { 1.0 } else { -1.0 } * scale.powi(3);
    let terms: Vec<Vec<(MultiIndex, f64)>> = coords
        .iter()
        .map(|c| {
            c.iter()
                .map(|(b, a)| (b.clone(), rat_to_f64(a) * pref))
                .collect()
        })
        .collect();
    // (i)^k for the monomial (iξ)^β
    let ik = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][(k % 4) as usize];
    let m = params.m as i32;
    let odd = k % 2 == 1;
    let n = spec.n;
    let nyq = std::f64::consts::PI * (n / 2) as f64 / spec.half_width;
    Ok(fourier_samples(spec, |xi| {
        // odd symbols have no real Nyquist representation
        if odd && xi.iter().any(|x| (x.abs() - nyq).abs() < 1e-9 * nyq) {
            return [Complex64::new(0.0, 0.0); 3];
        }
        let sxi = xi.map(|x| x * scale);
        let k2 = sxi[0] * sxi[0] + sxi[1] * sxi[1] + sxi[2] * sxi[2];
        let env = (-k2.powi(m)).exp();
        [0, 1, 2].map(|c| {
            let s: f64 = terms[c]
                .iter()
                .map(|(b, a)| {
                    let e = b.entries();
                    a * sxi[0].powi(e[0] as i32)
                        * sxi[1].powi(e[1] as i32)
                        * sxi[2].powi(e[2] as i32)
                })
                .sum();
            ik * s * env
        })
    }))
}

/// Grid moments `Σ_x y^γ u_c(x) h³` for all `|γ| ≤ max_degree`, using the
/// jump-averaged monomial samples. Pairing a polynomial field with `u`
/// is then a dot product with its coefficients.
#[derive(Clone, Debug)]
pub struct GridMoments {
    pub max_degree: u32,
    /// Per component, `[a][b][c]` flattened with stride `max_degree + 1`.
    values: [Vec<f64>; 3],
}

impl GridMoments {
    pub fn new(u: &GridVectorField, max_degree: u32) -> Self {
        let spec = u.spec;
        let n = spec.n;
        let d = max_degree as usize + 1;
        // 1-D jump-averaged powers
        let pow: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                (0..n)
                    .map(|i| {
                        if i == 0 {
                            let l = spec.half_width;
                            0.5 * ((-l).powi(a as i32) + l.powi(a as i32))
                        } else {
                            spec.coord(i).powi(a as i32)
                        }
                    })
                    .collect()
            })
            .collect();
        let dv = spec.cell_volume();
        let values = [0, 1, 2].map(|comp| {
            let data = &u.data[comp];
            // contract k (z), then j (y), then i (x)
            let by_ij: Vec<Vec<f64>> = (0..n * n)
                .into_par_iter()
                .map(|ij| {
                    let row = &data[ij * n..(ij + 1) * n];
                    (0..d)
                        .map(|c| row.iter().zip(&pow[c]).map(|(a, b)| a * b).sum())
                        .collect()
                })
                .collect();
            let mut by_i = vec![0.0; n * d * d];
            for i in 0..n {
                for j in 0..n {
                    let zc = &by_ij[i * n + j];
                    for b in 0..d {
                        let pj = pow[b][j];
                        for c in 0..d {
                            by_i[(i * d + b) * d + c] += pj * zc[c];
                        }
                    }
                }
            }
            let mut out = vec![0.0; d * d * d];
            for a in 0..d {
                for i in 0..n {
                    let pi = pow[a][i];
                    for bc in 0..d * d {
                        out[a * d * d + bc] += pi * by_i[i * d * d + bc];
                    }
                }
            }
            out.iter_mut().for_each(|x| *x *= dv);
            out
        });
        GridMoments { max_degree, values }
    }

    pub fn get(&self, comp: usize, gamma: &MultiIndex) -> f64 {
        let d = self.max_degree as usize + 1;
        let e = gamma.entries();
        self.values[comp][(e[0] as usize * d + e[1] as usize) * d + e[2] as usize]
    }

    /// `∫ p · u` for a polynomial field sampled with the jump convention.
    pub fn pair(&self, p: &VectorPolyField) -> Result<f64> {
        if p.degree().unwrap_or(0) > self.max_degree {
            return Err(Error::InvalidInput(format!(
                "field degree exceeds moment table degree {}",
                self.max_degree
            )));
        }
        Ok(p.components()
            .iter()
            .enumerate()
            .map(|(c, poly)| {
                poly.terms()
                    .map(|(g, a)| rat_to_f64(a) * self.get(c, g))
                    .sum::<f64>()
            })
            .sum())
    }
}
