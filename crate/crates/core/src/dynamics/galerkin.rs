//! Truncated Galerkin system `ċ_β = r_β c_β + Σ d_{αγβ} c_α c_γ` integrated
//! with an embedded Dormand–Prince 5(4) pair.

use super::{CoefficientTrajectory, Expansion};
use crate::error::{Error, Result};
use crate::grid::InteractionTensor;
use crate::hermite::OperatorParams;
use crate::poly::rat_to_f64;

#[derive(Clone, Copy, Debug)]
pub struct GalerkinOptions {
    pub tau_end: f64,
    /// Uniform output intervals; must be even for the Simpson-rule check.
    pub outputs: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Minimum step before the run is declared stiff or blowing up.
    pub min_step: f64,
}

impl Default for GalerkinOptions {
    fn default() -> Self {
        GalerkinOptions {
            tau_end: 4.0,
            outputs: 200,
            rtol: 1e-9,
            atol: 1e-15,
            min_step: 1e-12,
        }
    }
}

struct System<'a> {
    rates: Vec<f64>,
    tensor: &'a InteractionTensor,
}

impl System<'_> {
    fn nonlinear(&self, c: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let n = c.len();
        for a in 0..n {
            if c[a] == 0.0 {
                continue;
            }
            for g in 0..n {
                let cg = c[a] * c[g];
                if cg == 0.0 {
                    continue;
                }
                for (b, o) in out.iter_mut().enumerate() {
                    *o += self.tensor.get(a, g, b) * cg;
                }
            }
        }
    }

    fn rhs(&self, c: &[f64], out: &mut [f64]) {
        self.nonlinear(c, out);
        for ((o, r), x) in out.iter_mut().zip(&self.rates).zip(c) {
            *o += r * x;
        }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One DP45 step of the autonomous system; returns `(y_new, error_norm)`.
fn dp_step(sys: &System<'_>, y: &[f64], h: f64, opts: &GalerkinOptions) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    sys.rhs(y, &mut k[0]);
    for s in 1..7 {
        for i in 0..n {
            tmp[i] = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
        }
        let mut stage = vec![0.0; n];
        sys.rhs(&tmp, &mut stage);
        k[s] = stage;
    }
    // row 6 of A is the fifth-order solution (FSAL)
    let y5 = tmp;
    let mut err: f64 = 0.0;
    for i in 0..n {
        let y4 = y[i] + h * (0..7).map(|j| B4[j] * k[j][i]).sum::<f64>();
        let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
        err = err.max((y5[i] - y4).abs() / sc);
    }
    (y5, err)
}

/// Integrates the Galerkin system from `e0` and checks it against its
/// Duhamel (integral) form.
pub fn nse_galerkin(
    e0: &Expansion,
    tensor: &InteractionTensor,
    opts: &GalerkinOptions,
) -> Result<CoefficientTrajectory> {
    let n = e0.coeffs.len();
    let (na, ng, nb) = tensor.shape();
    if !tensor.is_square() || na != n || ng != n || nb != n {
        return Err(Error::InvalidInput(format!(
            "tensor shape ({na}, {ng}, {nb}) does not cover the {n} expansion coefficients"
        )));
    }
    if tensor.labels().2 != e0.labels.as_slice() {
        return Err(Error::InvalidInput("tensor and expansion index sets differ".into()));
    }
    if !(opts.tau_end > 0.0) || opts.outputs < 2 || opts.outputs % 2 != 0 {
        return Err(Error::InvalidInput("need tau_end > 0 and an even number of outputs".into()));
    }
    if e0.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("initial coefficients must be finite".into()));
    }
    let params = OperatorParams { m: e0.m, dim: 3 };
    let sys = System {
        rates: e0
            .levels
            .iter()
            .map(|&k| rat_to_f64(&params.rescaled_rate(k)))
            .collect(),
        tensor,
    };
    let dt_out = opts.tau_end / opts.outputs as f64;
    let mut taus = vec![0.0];
    let mut states = vec![e0.coeffs.clone()];
    let mut y = e0.coeffs.clone();
    let mut t = 0.0;
    let mut h = dt_out.min(0.05);
    let mut diagnostic = None;
    'outer: for i in 1..=opts.outputs {
        let target = dt_out * i as f64;
        while t < target - 1e-14 * target.max(1.0) {
            let step = h.min(target - t);
            let (y_new, err) = dp_step(&sys, &y, step, opts);
            if err <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
                t += step;
                y = y_new;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // do not let a short landing step shrink the running step
                h = h.max(step) * fac;
            } else {
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
                h = step * fac;
                if h < opts.min_step {
                    diagnostic = Some(format!(
                        "step size underflow at tau = {t}: below {:e}; trajectory truncated",
                        opts.min_step
                    ));
                    break 'outer;
                }
            }
        }
        t = target;
        taus.push(target);
        states.push(y.clone());
    }
    let duhamel = (taus.len() >= 3).then(|| duhamel_residual(&sys, &taus, &states));
    Ok(CoefficientTrajectory {
        model: e0.model,
        m: e0.m,
        labels: e0.labels.clone(),
        levels: e0.levels.clone(),
        taus,
        coeffs: states,
        duhamel_residual: duhamel,
        diagnostic,
    })
}

/// `max_τ |c(τ) − e^{Rτ}c(0) − ∫₀^τ e^{R(τ−s)} N(c(s)) ds| / max|c(0)|`, the
/// integral by composite Simpson on the output grid (even nodes only).
fn duhamel_residual(sys: &System<'_>, taus: &[f64], states: &[Vec<f64>]) -> f64 {
    let n = states[0].len();
    let nl: Vec<Vec<f64>> = states
        .iter()
        .map(|c| {
            let mut out = vec![0.0; n];
            sys.nonlinear(c, &mut out);
            out
        })
        .collect();
    let scale = states[0].iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let h = taus[1] - taus[0];
    let mut worst: f64 = 0.0;
    for end in (2..taus.len()).step_by(2) {
        let te = taus[end];
        for b in 0..n {
            let r = sys.rates[b];
            let mut integral = 0.0;
            for (i, row) in nl.iter().enumerate().take(end + 1) {
                let w = if i == 0 || i == end {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                integral += w * (r * (te - taus[i])).exp() * row[b];
            }
            integral *= h / 3.0;
            let lhs = states[end][b];
            let rhs = (r * te).exp() * states[0][b] + integral;
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    worst
}
