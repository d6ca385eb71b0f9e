//! The rescaled fundamental-solution kernel `F` of `∂ₜ + (−Δ)^m` in `ℝ³`,
//! its WKBJ decay constants, and numerical checks of both.
//!
//! For radial `F` in three dimensions the Fourier inversion of
//! `F̂(ξ) = e^{−|ξ|^{2m}}` reduces to a sine transform,
//! `F(r) = (2π² r)⁻¹ ∫₀^∞ e^{−s^{2m}} s sin(sr) ds`.
//! For `m ≥ 2` the kernel oscillates with a stretched-exponential envelope
//! `r^{−δ₀} e^{−d₀ r^α}`, `α = 2m/(2m−1)`.

use crate::error::{Error, Result};
use crate::poly::Rational;
use crate::quad::{gk15, integrate};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Leading-order WKBJ constants of the kernel tail.
#[derive(Clone, Debug, Serialize)]
pub struct WkbjConstants {
    pub m: u32,
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(serialize_with = "ser_rat")]
    pub alpha: Rational,
    pub a_re: f64,
    pub a_im: f64,
    pub d0: f64,
    pub b0: f64,
    #[serde(serialize_with = "ser_rat")]
    pub delta0: Rational,
    /// `|(−1)^m (α a)^{2m−1} − 1/(2m)|`.
    pub root_residual: f64,
}

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(3))?;
    map.serialize_entry("num", &r.numer().to_string())?;
    map.serialize_entry("den", &r.denom().to_string())?;
    map.serialize_entry("value", &crate::poly::rat_to_f64(r))?;
    map.end()
}

impl WkbjConstants {
    pub fn alpha_f64(&self) -> f64 {
        crate::poly::rat_to_f64(&self.alpha)
    }

    pub fn delta0_f64(&self) -> f64 {
        crate::poly::rat_to_f64(&self.delta0)
    }

    pub fn a(&self) -> Complex64 {
        Complex64::new(self.a_re, self.a_im)
    }
}

/// Closed-form root `a = ((2m−1)/(2m)^α) [−sin θ + i cos θ]`, `θ = π/(2(2m−1))`.
pub fn wkbj_constants(m: u32, dim: usize) -> Result<WkbjConstants> {
    if m < 2 {
        return Err(Error::Unsupported(
            "WKBJ balance degenerates for m = 1 (the kernel is exactly Gaussian)".into(),
        ));
    }
    if dim == 0 {
        return Err(Error::InvalidInput("N must be >= 1".into()));
    }
    let (mi, ni) = (m as i64, dim as i64);
    let alpha = Rational::new((2 * mi).into(), (2 * mi - 1).into());
    let alpha_f = 2.0 * m as f64 / (2.0 * m as f64 - 1.0);
    let theta = PI / (2.0 * (2.0 * m as f64 - 1.0));
    let amp = (2.0 * m as f64 - 1.0) / (2.0 * m as f64).powf(alpha_f);
    let a = Complex64::new(-amp * theta.sin(), amp * theta.cos());
    let delta0 = Rational::new((mi * (2 * ni - 1) - ni).into(), (2 * mi - 1).into());
    Ok(WkbjConstants {
        m,
        dim,
        alpha,
        a_re: a.re,
        a_im: a.im,
        d0: -a.re,
        b0: a.im,
        delta0,
        root_residual: wkbj_root_residual(m, a),
    })
}

/// `|(−1)^m (α a)^{2m−1} − 1/(2m)|`.
pub fn wkbj_root_residual(m: u32, a: Complex64) -> f64 {
    let alpha = 2.0 * m as f64 / (2.0 * m as f64 - 1.0);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let lhs = (a * alpha).powu(2 * m - 1) * sign;
    (lhs - Complex64::new(1.0 / (2.0 * m as f64), 0.0)).norm()
}

/// All `2m−1` roots of the balance equation, for cross-checking the
/// closed-form selection.
pub fn wkbj_all_roots(m: u32) -> Vec<Complex64> {
    let n = 2 * m - 1;
    let alpha = 2.0 * m as f64 / (2.0 * m as f64 - 1.0);
    // (α a)^n = (−1)^m / (2m)
    let rhs_arg = if m % 2 == 0 { 0.0 } else { PI };
    let modulus = (1.0 / (2.0 * m as f64)).powf(1.0 / n as f64) / alpha;
    (0..n)
        .map(|j| Complex64::from_polar(modulus, (rhs_arg + 2.0 * PI * j as f64) / n as f64))
        .collect()
}

/// Tabulated radial kernel values.
#[derive(Clone, Debug, Serialize)]
pub struct KernelTable {
    pub m: u32,
    #[serde(rename = "N")]
    pub dim: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// `|∫ F − 1|` by radial quadrature over the table.
    pub mass_error: f64,
}

const TAIL_EXPONENT: f64 = 45.0;

/// `F(r)` for `N = 3` by piecewise Gauss–Kronrod quadrature of the sine transform.
///
/// For `r < 1` the integrand is smooth and integrated adaptively on
/// `[0, S]`; otherwise the range is split at the zeros `jπ/r` of `sin(sr)`.
/// `S = 45^{1/(2m)}` bounds the tail by `e^{−45}`.
pub fn kernel_value(m: u32, r: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be >= 1".into()));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!(
            "radius must be finite and >= 0, got {r}"
        )));
    }
    let two_m = 2 * m as i32;
    let s_max = TAIL_EXPONENT.powf(1.0 / two_m as f64);
    // s² sinc(sr) form is regular at r = 0
    let integrand = |s: f64| {
        let x = s * r;
        let sinc = if x.abs() < 1e-4 {
            1.0 - x * x / 6.0
        } else {
            x.sin() / x
        };
        (-s.powi(two_m)).exp() * s * s * sinc
    };
    let pref = 1.0 / (2.0 * PI * PI);
    if r < 1.0 {
        let (v, _) = integrate(&integrand, 0.0, s_max, 1e-17, 1e-15)?;
        return Ok(pref * v);
    }
    let mut total = 0.0;
    let step = PI / r;
    let mut lo = 0.0;
    while lo < s_max {
        let hi = (lo + step).min(s_max);
        // panels are short and smooth; one adaptive pass each
        let (v, e) = gk15(&integrand, lo, hi);
        let v = if e > 1e-18 {
            integrate(&integrand, lo, hi, 1e-19, 1e-15)?.0
        } else {
            v
        };
        total += v;
        lo = hi;
    }
    Ok(pref * total)
}

/// `(4π)^{−3/2} e^{−r²/4}`.
pub fn gaussian_kernel(r: f64) -> f64 {
    (4.0 * PI).powf(-1.5) * (-r * r / 4.0).exp()
}

/// Evaluates `F` on the given radii (parallel over radii).
pub fn kernel_values(m: u32, dim: usize, radii: &[f64]) -> Result<KernelTable> {
    if dim != 3 {
        return Err(Error::Unsupported(
            "kernel quadrature is implemented for N = 3 (radial sine transform)".into(),
        ));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "radii must be strictly increasing".into(),
        ));
    }
    let values = radii
        .par_iter()
        .map(|&r| kernel_value(m, r))
        .collect::<Result<Vec<f64>>>()?;
    let mass = radial_mass(radii, &values);
    Ok(KernelTable {
        m,
        dim,
        radii: radii.to_vec(),
        values,
        mass_error: (mass - 1.0).abs(),
    })
}

/// Uniform table on `[0, r_max]` with spacing `h`.
pub fn kernel_table_uniform(m: u32, r_max: f64, h: f64) -> Result<KernelTable> {
    let n = (r_max / h).round() as usize;
    let radii: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    kernel_values(m, 3, &radii)
}

/// `∫ 4π r² F dr`, composite Simpson when uniform, trapezoid otherwise.
fn radial_mass(radii: &[f64], values: &[f64]) -> f64 {
    if radii.len() < 2 {
        return f64::NAN;
    }
    let g: Vec<f64> = radii
        .iter()
        .zip(values)
        .map(|(r, f)| 4.0 * PI * r * r * f)
        .collect();
    let h = radii[1] - radii[0];
    let uniform = radii
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() < 1e-9 * h.max(1.0));
    if uniform && radii.len() >= 3 {
        let n = if (radii.len() - 1) % 2 == 0 {
            radii.len() - 1
        } else {
            radii.len() - 2
        };
        let mut s = g[0] + g[n];
        for (i, gi) in g.iter().enumerate().take(n).skip(1) {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * gi;
        }
        let mut total = s * h / 3.0;
        if n < radii.len() - 1 {
            total += 0.5 * h * (g[n] + g[n + 1]);
        }
        total
    } else {
        radii
            .windows(2)
            .zip(g.windows(2))
            .map(|(r, v)| 0.5 * (r[1] - r[0]) * (v[0] + v[1]))
            .sum()
    }
}

impl KernelTable {
    /// Four-point Lagrange interpolation on the table; zero beyond the last radius.
    pub fn value_at(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if n == 0 || r > *self.radii.last().unwrap() {
            return 0.0;
        }
        if r <= self.radii[0] {
            return self.values[0];
        }
        let i = self.radii.partition_point(|&x| x <= r).saturating_sub(1);
        let lo = i.saturating_sub(1).min(n.saturating_sub(4));
        let idx: Vec<usize> = (lo..(lo + 4).min(n)).collect();
        let mut acc = 0.0;
        for &a in &idx {
            let mut w = 1.0;
            for &b in &idx {
                if a != b {
                    w *= (r - self.radii[b]) / (self.radii[a] - self.radii[b]);
                }
            }
            acc += w * self.values[a];
        }
        acc
    }

    /// CSV with header `r,F`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,F\n");
        for (r, f) in self.radii.iter().zip(&self.values) {
            s.push_str(&format!("{r},{f}\n"));
        }
        s
    }

    fn uniform_step(&self) -> Option<f64> {
        if self.radii.len() < 3 {
            return None;
        }
        let h = self.radii[1] - self.radii[0];
        self.radii
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() < 1e-9 * h)
            .then_some(h)
    }
}

/// Result of fitting `log|F_ext| ≈ C − δ₀ log r − d₀ r^α + c₁ r^{−α}` to the extrema.
///
/// `c₁` is the first amplitude correction of the WKBJ series. The plain
/// three-term model (`c₁ = 0`) is reported alongside as `plain_*`.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeFit {
    pub extrema: usize,
    pub r_range: (f64, f64),
    pub c_hat: f64,
    pub d0_hat: f64,
    pub alpha_hat: f64,
    pub delta0_hat: f64,
    pub c1_hat: f64,
    pub rms_residual: f64,
    pub plain_d0_hat: f64,
    pub plain_alpha_hat: f64,
    pub plain_delta0_hat: f64,
    /// Refit with `α` pinned to its analytic value.
    pub d0_constrained: f64,
    pub delta0_constrained: f64,
    pub d0_rel_dev: f64,
    pub alpha_rel_dev: f64,
    /// Relative to the closed-form `δ₀` of [`WkbjConstants`].
    pub delta0_rel_dev: f64,
    pub d0_constrained_rel_dev: f64,
}

/// Window on `|F|` used to select extrema for the fit.
pub const FIT_WINDOW: (f64, f64) = (1e-12, 1e-2);

/// Local maxima of `|F|` in the table, refined by a parabola through three samples.
pub fn local_extrema(table: &KernelTable) -> Vec<(f64, f64)> {
    let v = &table.values;
    let r = &table.radii;
    let mut out = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        let (a, b, c) = (v[i - 1].abs(), v[i].abs(), v[i + 1].abs());
        if b > a && b >= c {
            let h = r[i + 1] - r[i];
            let denom = a - 2.0 * b + c;
            let (dr, peak) = if denom.abs() > 0.0 {
                let t = 0.5 * (a - c) / denom;
                (t * h, b - 0.25 * (a - c) * t)
            } else {
                (0.0, b)
            };
            out.push((r[i] + dr, peak));
        }
    }
    out
}

/// Linear least squares for `y ≈ X β` (small, normal equations with pivoting).
fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let p = rows.first()?.len();
    let mut ata = vec![vec![0.0; p + 1]; p];
    for (row, yi) in rows.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                ata[i][j] += row[i] * row[j];
            }
            ata[i][p] += row[i] * yi;
        }
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&a, &b| ata[a][c].abs().total_cmp(&ata[b][c].abs()))?;
        ata.swap(c, piv);
        if ata[c][c].abs() < 1e-300 {
            return None;
        }
        for r in 0..p {
            if r != c {
                let f = ata[r][c] / ata[c][c];
                for k in c..=p {
                    ata[r][k] -= f * ata[c][k];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..p).map(|i| ata[i][p] / ata[i][i]).collect();
    let ss: f64 = rows
        .iter()
        .zip(y)
        .map(|(row, yi)| {
            let pred: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (yi - pred).powi(2)
        })
        .sum();
    Some((beta, ss))
}

fn envelope_design(pts: &[(f64, f64)], alpha: f64, corrected: bool) -> Vec<Vec<f64>> {
    pts.iter()
        .map(|(r, _)| {
            let mut row = vec![1.0, -r.ln(), -r.powf(alpha)];
            if corrected {
                row.push(r.powf(-alpha));
            }
            row
        })
        .collect()
}

/// Variable projection: scan then golden-section on `α ∈ [1, 2]`, linear LS inside.
fn fit_free_alpha(pts: &[(f64, f64)], y: &[f64], corrected: bool) -> Option<(f64, Vec<f64>, f64)> {
    let objective = |alpha: f64| {
        lstsq(&envelope_design(pts, alpha, corrected), y).map_or(f64::INFINITY, |(_, ss)| ss)
    };
    // coarse scan guards against a non-unimodal residual
    let grid = 200;
    let best = (0..=grid)
        .map(|i| 1.0 + i as f64 / grid as f64)
        .min_by(|a, b| objective(*a).total_cmp(&objective(*b)))?;
    let (mut lo, mut hi) = ((best - 0.005).max(1.0), (best + 0.005).min(2.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = objective(x2);
        }
    }
    let alpha = 0.5 * (lo + hi);
    let (beta, ss) = lstsq(&envelope_design(pts, alpha, corrected), y)?;
    Some((alpha, beta, ss))
}

fn fit_failed(what: &str) -> Error {
    Error::NonConvergence {
        what: what.into(),
        achieved: f64::NAN,
        wanted: 0.0,
    }
}

/// Fits the two-scale envelope to the extrema of `|F|` inside [`FIT_WINDOW`].
pub fn envelope_fit(table: &KernelTable, constants: &WkbjConstants) -> Result<EnvelopeFit> {
    if table.m < 2 {
        return Err(Error::Unsupported(
            "envelope fit needs an oscillatory kernel (m >= 2)".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = local_extrema(table)
        .into_iter()
        .filter(|(_, f)| *f > FIT_WINDOW.0 && *f < FIT_WINDOW.1)
        .collect();
    if pts.len() < 6 {
        return Err(Error::InvalidInput(format!(
            "only {} extrema resolved in the fit window; extend the radius range or refine the table",
            pts.len()
        )));
    }
    let y: Vec<f64> = pts.iter().map(|(_, f)| f.ln()).collect();
    let (alpha_hat, beta, ss) =
        fit_free_alpha(&pts, &y, true).ok_or_else(|| fit_failed("envelope least squares"))?;
    let (plain_alpha, plain, _) =
        fit_free_alpha(&pts, &y, false).ok_or_else(|| fit_failed("envelope least squares"))?;
    let alpha = constants.alpha_f64();
    let (cbeta, _) = lstsq(&envelope_design(&pts, alpha, true), &y)
        .ok_or_else(|| fit_failed("constrained envelope least squares"))?;

    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    Ok(EnvelopeFit {
        extrema: pts.len(),
        r_range: (pts[0].0, pts[pts.len() - 1].0),
        c_hat: beta[0],
        delta0_hat: beta[1],
        d0_hat: beta[2],
        c1_hat: beta[3],
        alpha_hat,
        rms_residual: (ss / pts.len() as f64).sqrt(),
        plain_d0_hat: plain[2],
        plain_alpha_hat: plain_alpha,
        plain_delta0_hat: plain[1],
        d0_constrained: cbeta[2],
        delta0_constrained: cbeta[1],
        d0_rel_dev: rel(beta[2], constants.d0),
        alpha_rel_dev: rel(alpha_hat, alpha),
        delta0_rel_dev: rel(beta[1], constants.delta0_f64()),
        d0_constrained_rel_dev: rel(cbeta[2], constants.d0),
    })
}

/// Max of `|−(−Δ)^m F + (1/2m) r F' + (N/2m) F|` over `window`, by finite
/// differences on a uniform table. Uses `Δ^m F = r⁻¹ (d²/dr²)^m (rF)` for
/// radial functions in three dimensions.
pub fn ode_residual(table: &KernelTable, window: (f64, f64)) -> Result<f64> {
    let h = table
        .uniform_step()
        .ok_or_else(|| Error::InvalidInput("ode_residual needs a uniform radial grid".into()))?;
    if table.dim != 3 {
        return Err(Error::Unsupported(
            "radial residual implemented for N = 3".into(),
        ));
    }
    let m = table.m as usize;
    let r = &table.radii;
    let f = &table.values;
    // 7-point, sixth-order central second derivative
    const D2: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
    const D1: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -0.75,
        0.0,
        0.75,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];
    let mut g: Vec<Option<f64>> = r.iter().zip(f).map(|(ri, fi)| Some(ri * fi)).collect();
    for _ in 0..m {
        let prev = g.clone();
        for i in 0..g.len() {
            g[i] = if i >= 3 && i + 3 < g.len() {
                let mut acc = 0.0;
                let mut ok = true;
                for (k, w) in D2.iter().enumerate() {
                    match prev[i + k - 3] {
                        Some(v) => acc += w * v,
                        None => ok = false,
                    }
                }
                ok.then_some(acc / (180.0 * h * h))
            } else {
                None
            };
        }
    }
    let n = 3.0;
    let two_m = 2.0 * m as f64;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mut worst: f64 = 0.0;
    let mut any = false;
    for i in 3..r.len().saturating_sub(3) {
        if r[i] < window.0 || r[i] > window.1 || r[i] == 0.0 {
            continue;
        }
        let Some(g2m) = g[i] else { continue };
        let df: f64 = D1
            .iter()
            .enumerate()
            .map(|(k, w)| w * f[i + k - 3])
            .sum::<f64>()
            / h;
        // −(−Δ)^m F = −(−1)^m Δ^m F
        let res = -sign * g2m / r[i] + r[i] * df / two_m + n / two_m * f[i];
        worst = worst.max(res.abs());
        any = true;
    }
    if !any {
        return Err(Error::InvalidInput(
            "residual window contains no interior points".into(),
        ));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burnett_constants() {
        let c = wkbj_constants(2, 3).unwrap();
        assert_eq!(c.alpha, Rational::new(4.into(), 3.into()));
        assert!((c.d0 - 3.0 * 2f64.powf(-11.0 / 3.0)).abs() < 1e-12);
        assert!((c.b0 - 3f64.powf(1.5) * 2f64.powf(-11.0 / 3.0)).abs() < 1e-12);
        assert!((c.d0 - 0.23623).abs() < 1e-5);
        assert!((c.b0 - 0.40918).abs() < 1e-5);
        assert_eq!(c.delta0, Rational::new(7.into(), 3.into()));
        assert!(c.root_residual < 1e-12);
    }

    #[test]
    fn higher_order_roots() {
        for m in 2..=4 {
            let c = wkbj_constants(m, 3).unwrap();
            assert!(c.root_residual < 1e-12, "m={m}");
            assert!(c.d0 > 0.0);
            let alpha = c.alpha_f64();
            assert!(alpha > 1.0 && alpha < 2.0);
            // closed form is the root with the least negative real part among Re a < 0, Im a > 0
            let roots = wkbj_all_roots(m);
            assert!(roots.iter().all(|z| wkbj_root_residual(m, *z) < 1e-12));
            let best = roots
                .iter()
                .filter(|z| z.re < 0.0)
                .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
                .unwrap();
            assert!((best - c.a()).norm() < 1e-12, "m={m}");
        }
        assert_eq!(
            wkbj_constants(3, 3).unwrap().alpha,
            Rational::new(6.into(), 5.into())
        );
    }

    #[test]
    fn heat_kernel_is_rejected_for_wkbj() {
        assert!(matches!(wkbj_constants(1, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn gaussian_reproduced() {
        assert!((gaussian_kernel(0.0) - 0.022_448).abs() < 1e-6);
        for &r in &[0.0, 0.3, 0.99, 1.0, 2.5, 5.0, 9.0, 14.0] {
            let v = kernel_value(1, r).unwrap();
            assert!(
                (v - gaussian_kernel(r)).abs() < 1e-10,
                "r={r}: {v} vs {}",
                gaussian_kernel(r)
            );
        }
    }

    #[test]
    fn biharmonic_kernel_oscillates_with_unit_mass() {
        let t = kernel_table_uniform(2, 30.0, 0.01).unwrap();
        let changes = t
            .values
            .windows(2)
            .zip(t.radii.windows(2))
            .filter(|(v, r)| r[1] < 10.0 && v[0] * v[1] < 0.0)
            .count();
        assert!(changes >= 1);
        assert!(t.mass_error < 1e-6, "mass error {}", t.mass_error);
    }

    #[test]
    fn residuals() {
        let radii: Vec<f64> = (0..=600).map(|i| i as f64 * 0.01).collect();
        let exact = KernelTable {
            m: 1,
            dim: 3,
            values: radii.iter().map(|&r| gaussian_kernel(r)).collect(),
            radii: radii.clone(),
            mass_error: 0.0,
        };
        assert!(ode_residual(&exact, (0.5, 4.0)).unwrap() < 1e-6);
        let t1 = kernel_values(1, 3, &radii).unwrap();
        assert!(ode_residual(&t1, (0.5, 4.0)).unwrap() < 1e-6);
        let t2 = kernel_values(2, 3, &radii).unwrap();
        assert!(ode_residual(&t2, (0.5, 4.0)).unwrap() < 1e-3);
        let constant = KernelTable {
            values: vec![2.0; radii.len()],
            ..exact
        };
        let res = ode_residual(&constant, (0.5, 4.0)).unwrap();
        assert!((res - 1.5 * 2.0).abs() < 1e-9);
    }

    #[test]
    fn envelope_fit_recovers_constants() {
        let t = kernel_table_uniform(2, 32.0, 0.01).unwrap();
        let c = wkbj_constants(2, 3).unwrap();
        let fit = envelope_fit(&t, &c).unwrap();
        assert!(fit.d0_rel_dev < 0.02, "{fit:?}");
        assert!(fit.alpha_rel_dev < 0.01, "{fit:?}");
        assert!(fit.d0_constrained_rel_dev < 0.01, "{fit:?}");
        assert!(fit.d0_constrained_rel_dev <= fit.d0_rel_dev.max(1e-3));
        assert!(fit.alpha_hat > 1.0 && fit.alpha_hat < 2.0);
        // the measured algebraic prefactor of the tail is r^{-1}
        assert!((fit.delta0_constrained - 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn envelope_fit_rejects_heat_kernel() {
        let t = kernel_table_uniform(1, 5.0, 0.1).unwrap();
        let c = wkbj_constants(2, 3).unwrap();
        assert!(envelope_fit(&t, &c).is_err());
    }

    #[test]
    fn interpolation() {
        let radii: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let t = kernel_values(1, 3, &radii).unwrap();
        for &r in &[0.01, 0.77, 2.345, 4.9] {
            assert!((t.value_at(r) - gaussian_kernel(r)).abs() < 1e-7);
        }
        assert_eq!(t.value_at(6.0), 0.0);
    }
}
