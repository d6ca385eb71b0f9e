//! Subcommand bodies. Each returns the summary line and writes artifacts.

use crate::*;
use hermflow::dynamics::{
    classify_zero, detect_resonance, expand_exact, linear_flow, nodal_compare, nodal_extract,
    nse_galerkin, unique_continuation_diagnostic, ClassifyOptions, CoefficientTrajectory,
    Expansion, ExpansionBasis, GalerkinOptions, Model, ResonanceOptions, ZeroStatus,
};
use hermflow::grid::{
    interaction_tensor, project, relative_divergence, sample_fn, GridSpec, InteractionTensor,
    TensorOptions,
};
use hermflow::hermite::{apply_b_star, level_enumerate, pairing, OperatorParams};
use hermflow::kernel::{envelope_fit, kernel_table_uniform, wkbj_constants};
use hermflow::poly::{
    rat, try_parse_field, try_parse_poly, MultiIndex, Polynomial, Rational, VectorPolyField,
};
use hermflow::solenoidal::{
    basis_json, divfree_kernel, fixture_basis, fixture_labeled, span_contains,
};
use hermflow::{Result, SCHEMA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::Path;

pub fn run(cmd: Command, out: &Path) -> Result<Outcome> {
    match cmd {
        Command::Basis(a) => basis(a, out),
        Command::EigCheck(a) => eig_check(a, out),
        Command::Biortho(a) => biortho(a, out),
        Command::Solenoidal(a) => solenoidal(a, out),
        Command::Kernel(a) => kernel(a, out),
        Command::Wkbj(a) => wkbj(a, out),
        Command::DTensor(a) => d_tensor(a, out),
        Command::Evolve(a) => evolve(a, out),
        Command::Nodal(a) => nodal(a, out),
        Command::Classify(a) => classify(a, out),
        Command::Verify(a) => verify(a, out),
    }
}

fn summary(command: &str, pass: bool, body: Value) -> Value {
    let mut v = json!({"schema": SCHEMA, "command": command, "pass": pass});
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

fn write_json(out: &Path, name: &str, v: &Value) -> Result<String> {
    let path = out.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v)? + "\n")?;
    Ok(path.display().to_string())
}

fn write_text(out: &Path, name: &str, text: &str) -> Result<String> {
    let path = out.join(name);
    std::fs::write(&path, text)?;
    Ok(path.display().to_string())
}

fn outcome(command: &str, pass: bool, body: Value) -> Result<Outcome> {
    Ok(Outcome {
        summary: summary(command, pass, body),
        pass,
    })
}

fn basis(a: BasisArgs, out: &Path) -> Result<Outcome> {
    let params = OperatorParams::new(a.m, 3)?;
    let b = match a.source.as_str() {
        "fixture" => fixture_basis(&params, a.level)?,
        "kernel" => divfree_kernel(a.level, &params)?,
        s => {
            return Err(hermflow::Error::InvalidInput(format!(
                "unknown source {s:?}; use fixture or kernel"
            )))
        }
    };
    b.validate()?;
    let path = write_json(
        out,
        &format!("basis_m{}_k{}_{}.json", a.m, a.level, a.source),
        &basis_json(&b),
    )?;
    outcome(
        "basis",
        true,
        json!({"m": a.m, "level": a.level, "count": b.len(), "labels": b.labels, "artifact": path}),
    )
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}

fn eig_check(a: EigArgs, out: &Path) -> Result<Outcome> {
    let mut levels = Vec::new();
    let mut failures = Vec::new();
    for &m in &a.m {
        let params = OperatorParams::new(m, a.dim)?;
        for k in 0..=a.max_level {
            let pairs = level_enumerate(k, &params);
            let expected = binomial(k as u64 + a.dim as u64 - 1, a.dim as u64 - 1) as usize;
            let lambda = rat(-(k as i64), 2 * m as i64);
            let mut bad = 0;
            for e in &pairs {
                let lhs = apply_b_star(&e.psi_star, &params)?;
                if e.lambda != lambda || lhs != e.psi_star.scale(&lambda) {
                    bad += 1;
                    failures.push(format!("m={m} beta={}", e.beta));
                }
            }
            if pairs.len() != expected {
                failures.push(format!("m={m} k={k}: {} polynomials, expected {expected}", pairs.len()));
            }
            levels.push(json!({
                "m": m, "k": k, "count": pairs.len(), "expected": expected,
                "eigenvalue": lambda.to_string(), "failures": bad,
            }));
        }
    }
    let pass = failures.is_empty();
    let path = write_json(out, "eig_check.json", &json!({"schema": SCHEMA, "levels": levels, "failures": failures}))?;
    outcome(
        "eig-check",
        pass,
        json!({"m": a.m, "N": a.dim, "max_level": a.max_level, "checked_levels": levels.len(), "failures": failures.len(), "artifact": path}),
    )
}

fn biortho(a: EigArgs, out: &Path) -> Result<Outcome> {
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for &m in &a.m {
        let params = OperatorParams::new(m, a.dim)?;
        let betas = MultiIndex::up_to_order(a.dim, a.max_level);
        for b in &betas {
            let psi = hermflow::hermite::eigenfunction(b, &params)?.psi_star;
            for g in &betas {
                let want = if b == g {
                    Rational::from_integer(b.factorial())
                } else {
                    rat(0, 1)
                };
                let got = pairing(&psi, g, &params)?;
                checked += 1;
                if got != want {
                    failures.push(format!("m={m} beta={b} gamma={g}: {got}"));
                }
            }
        }
    }
    let pass = failures.is_empty();
    let path = write_json(out, "biortho.json", &json!({"schema": SCHEMA, "pairs": checked, "failures": failures}))?;
    outcome(
        "biortho",
        pass,
        json!({"m": a.m, "N": a.dim, "max_level": a.max_level, "pairs": checked, "failures": failures.len(), "artifact": path}),
    )
}

fn solenoidal(a: SolenoidalArgs, out: &Path) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut pass = true;
    for &m in &a.m {
        let params = OperatorParams::new(m, 3)?;
        let kmax = match m {
            1 => 2,
            2 => 4,
            _ => {
                return Err(hermflow::Error::InvalidInput(format!(
                    "fixtures exist for m = 1, 2 only, not {m}"
                )))
            }
        };
        for k in 0..=kmax {
            let fb = fixture_basis(&params, k)?;
            let valid = fb.validate().is_ok();
            let kernel = divfree_kernel(k, &params)?;
            let inside = span_contains(&kernel, &fb)?;
            let count_ok = m != 1 || k == 0 || fb.len() as u32 == k * (k + 2);
            pass &= valid && inside && count_ok;
            rows.push(json!({
                "m": m, "k": k, "fixtures": fb.len(), "kernel_dim": kernel.len(),
                "valid": valid, "in_kernel": inside, "count_matches_k(k+2)": count_ok,
            }));
        }
    }
    let path = write_json(out, "solenoidal.json", &json!({"schema": SCHEMA, "levels": rows}))?;
    outcome("solenoidal", pass, json!({"levels": rows, "artifact": path}))
}

fn kernel(a: KernelArgs, out: &Path) -> Result<Outcome> {
    if a.dim != 3 {
        return Err(hermflow::Error::Unsupported("kernel tables are computed for N = 3".into()));
    }
    let table = kernel_table_uniform(a.m, a.r_max, a.h)?;
    let csv = write_text(out, &format!("kernel_m{}.csv", a.m), &table.to_csv())?;
    let mass_ok = table.mass_error <= 1e-6;
    let mut body = json!({
        "m": a.m, "N": a.dim, "points": table.radii.len(), "F0": table.values[0],
        "mass_error": table.mass_error, "artifact": csv,
    });
    let mut pass = mass_ok;
    if a.fit {
        let constants = wkbj_constants(a.m, a.dim)?;
        let fit = envelope_fit(&table, &constants)?;
        pass &= fit.d0_rel_dev < 0.02 && fit.alpha_rel_dev < 0.01;
        let v = json!({"schema": SCHEMA, "constants": constants, "fit": fit});
        body["fit_artifact"] = json!(write_json(out, &format!("envelope_m{}.json", a.m), &v)?);
        body["d0_rel_dev"] = json!(fit.d0_rel_dev);
        body["alpha_rel_dev"] = json!(fit.alpha_rel_dev);
        body["delta0_fitted"] = json!(fit.delta0_constrained);
    }
    outcome("kernel", pass, body)
}

fn wkbj(a: WkbjArgs, out: &Path) -> Result<Outcome> {
    let c = wkbj_constants(a.m, a.dim)?;
    let v = serde_json::to_value(&c)?;
    let path = write_json(out, &format!("wkbj_m{}_N{}.json", a.m, a.dim), &v)?;
    let mut body = v;
    body["artifact"] = json!(path);
    outcome("wkbj", c.root_residual < 1e-12, body)
}

fn grid_spec(g: &GridArgs) -> Result<GridSpec> {
    GridSpec::new(g.half_width, g.n, g.dealias)
}

fn rel_diff(a: &hermflow::grid::GridVectorField, b: &hermflow::grid::GridVectorField) -> f64 {
    a.axpy(-1.0, b).norm() / b.norm()
}

fn d_tensor(a: TensorArgs, out: &Path) -> Result<Outcome> {
    let params = OperatorParams::new(a.m, 3)?;
    let spec = grid_spec(&a.grid)?;
    let basis = ExpansionBasis::standard(&params, a.max_level)?;
    let opts = TensorOptions {
        spec,
        refine_n: a.refine,
        refine_box: false,
        tol: 1e-6,
    };
    let tensor = interaction_tensor(&basis.bases, &basis.bases, &basis.bases, &opts)?;
    let path = write_json(out, &format!("d_tensor_m{}_K{}.json", a.m, a.max_level), &tensor.to_json())?;
    let (na, ng, nb) = tensor.shape();
    let mut body = json!({
        "m": a.m, "max_level": a.max_level, "shape": [na, ng, nb],
        "max_abs": tensor.max_abs(), "max_error": tensor.max_error(),
        "flagged": tensor.flagged(), "artifact": path,
    });
    let mut pass = true;
    if a.projector_check {
        let checks = projector_checks(&params, spec, a.seed)?;
        pass = checks["pass"].as_bool().unwrap_or(false);
        body["projector"] = checks;
    }
    outcome("d-tensor", pass, body)
}

fn projector_checks(params: &OperatorParams, spec: GridSpec, seed: u64) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut idem, mut div) = (0f64, 0f64);
    for _ in 0..3 {
        let c: Vec<f64> = (0..9).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let u = sample_fn(&spec, |y| {
            let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 4.0).exp();
            [0, 1, 2].map(|i| g * (c[3 * i] + c[3 * i + 1] * y[(i + 1) % 3] + c[3 * i + 2] * y[i] * y[i]))
        });
        let p = project(&u);
        idem = idem.max(rel_diff(&project(&p), &p));
        div = div.max(relative_divergence(&p));
    }
    let rotation = if params.m == 1 {
        let targets: Vec<_> = (0..=2).map(|k| fixture_basis(params, k)).collect::<Result<_>>()?;
        let rot = fixture_basis(params, 1)?;
        let t = interaction_tensor(
            std::slice::from_ref(&rot),
            std::slice::from_ref(&rot),
            &targets,
            &TensorOptions::fast(spec),
        )?;
        Some(self_interaction(&t))
    } else {
        None
    };
    let pass = idem <= 1e-10 && div <= 1e-8 && rotation.map_or(true, |r| r <= 1e-8);
    Ok(json!({
        "idempotence": idem, "divergence": div, "rotation_self_interaction": rotation, "pass": pass,
    }))
}

fn self_interaction(t: &InteractionTensor) -> f64 {
    let (na, _, nb) = t.shape();
    (0..na)
        .flat_map(|a| (0..nb).map(move |b| (a, b)))
        .map(|(a, b)| t.get(a, a, b).abs())
        .fold(0.0, f64::max)
}

/// A data field and the basis level it needs.
fn resolve_field(spec: &str, m: u32) -> Result<(VectorPolyField, u32)> {
    if let Some(rest) = spec.strip_prefix("fixture:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| hermflow::Error::InvalidInput(format!("bad fixture spec {spec:?}; use fixture:K:I")))
        };
        if parts.len() != 2 {
            return Err(hermflow::Error::InvalidInput(format!("bad fixture spec {spec:?}; use fixture:K:I")));
        }
        let (k, i) = (parse(parts[0])?, parse(parts[1])? as usize);
        let fields = fixture_labeled(m, k)?;
        let n = fields.len();
        let (_, f) = fields.into_iter().nth(i).ok_or_else(|| {
            hermflow::Error::InvalidInput(format!("fixture level {k} has {n} fields, index {i} is out of range"))
        })?;
        return Ok((f, k));
    }
    let f = try_parse_field(spec)?;
    let level = f.degree().unwrap_or(0);
    Ok((f, level))
}

fn initial_expansion(
    model: Model,
    data: &str,
    max_level: Option<u32>,
    amplitude: f64,
    seed: u64,
) -> Result<(Expansion, ExpansionBasis)> {
    let params = OperatorParams::new(model.order(), 3)?;
    if data == "random" {
        let basis = ExpansionBasis::standard(&params, max_level.unwrap_or(2))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let coeffs = raw.iter().map(|x| amplitude * x / norm).collect();
        let e = Expansion::new(model, &basis, coeffs)?;
        return Ok((e, basis));
    }
    let (field, level) = resolve_field(data, params.m)?;
    let basis = ExpansionBasis::standard(&params, max_level.unwrap_or(level.max(2)))?;
    let e = expand_exact(&field, &basis)?.to_expansion(model, &basis)?;
    Ok((e, basis))
}

fn evolve(a: EvolveArgs, out: &Path) -> Result<Outcome> {
    let model = Model::parse(&a.model)?;
    let (e0, basis) = initial_expansion(model, &a.data, a.max_level, a.amplitude, a.seed)?;
    let mut body = json!({"model": a.model, "data": a.data, "tau": a.tau, "basis_size": basis.len(), "expansion_residual": e0.residual});
    let mut pass = true;
    let traj = if model == Model::Nse {
        let spec = grid_spec(&a.grid)?;
        let opts = TensorOptions {
            spec,
            refine_n: a.refine,
            refine_box: false,
            tol: 1e-6,
        };
        let tensor = interaction_tensor(&basis.bases, &basis.bases, &basis.bases, &opts)?;
        let gopts = GalerkinOptions {
            tau_end: a.tau,
            outputs: a.outputs,
            ..GalerkinOptions::default()
        };
        let traj = nse_galerkin(&e0, &tensor, &gopts)?;
        if let Some(d) = &traj.diagnostic {
            return Err(hermflow::Error::NonConvergence {
                what: format!("Galerkin integration stopped early: {d}"),
                achieved: *traj.taus.last().unwrap_or(&0.0),
                wanted: a.tau,
            });
        }
        body["duhamel_residual"] = json!(traj.duhamel_residual);
        if a.consistency {
            let zero = InteractionTensor::zero(&basis.bases, spec);
            let lin = nse_galerkin(&e0, &zero, &gopts)?;
            let mut worst = 0f64;
            for (tau, c) in lin.taus.iter().zip(&lin.coeffs) {
                let exact = linear_flow(&e0, *tau);
                for (x, y) in c.iter().zip(&exact.coeffs) {
                    let err = if *y == 0.0 { x.abs() } else { (x - y).abs() / y.abs() };
                    worst = worst.max(err);
                }
            }
            let duhamel = traj.duhamel_residual.unwrap_or(f64::INFINITY);
            pass = worst <= 1e-9 && duhamel <= 1e-6;
            body["linear_limit_rel_error"] = json!(worst);
        }
        traj
    } else {
        CoefficientTrajectory::linear(&e0, a.tau, a.outputs)?
    };
    let report = detect_resonance(&traj, &ResonanceOptions::default())?;
    body["trajectory"] = json!(write_text(out, &format!("trajectory_{}.csv", a.model), &traj.to_csv())?);
    body["resonance_artifact"] = json!(write_json(out, &format!("resonance_{}.json", a.model), &serde_json::to_value(&report)?)?);
    body["status"] = json!(report.status);
    body["dominant"] = json!(report.dominant_labels);
    body["level"] = json!(report.level);
    body["fitted_rate"] = json!(report.fitted_rate);
    body["predicted_rate"] = json!(report.predicted_rate);
    outcome("evolve", pass, body)
}

fn nodal(a: NodalArgs, out: &Path) -> Result<Outcome> {
    let model = Model::parse(&a.model)?;
    if model == Model::Nse {
        return Err(hermflow::Error::Unsupported("nodal tracking runs on the linear models".into()));
    }
    if a.component == 0 || a.component > 3 {
        return Err(hermflow::Error::InvalidInput("--component is 1, 2 or 3".into()));
    }
    let m = model.order();
    let params = OperatorParams::new(m, 3)?;
    let (data, dl) = resolve_field(&a.data, m)?;
    let (reference, rl) = resolve_field(&a.reference, m)?;
    let basis = ExpansionBasis::standard(&params, a.max_level.unwrap_or(dl.max(rl).max(1)))?;
    let e0 = expand_exact(&data, &basis)?.to_expansion(model, &basis)?;
    let r0 = expand_exact(&reference, &basis)?.to_expansion(model, &basis)?;
    let c = a.component - 1;
    let target = nodal_extract(&r0, &basis, a.radius, a.cell)?.components.swap_remove(c);
    write_text(out, "nodal_reference.csv", &target.to_csv())?;
    let mut distances = Vec::new();
    for &tau in &a.taus {
        let e = linear_flow(&e0, tau);
        let cloud = nodal_extract(&e, &basis, a.radius, a.cell)?.components.swap_remove(c);
        write_text(out, &format!("nodal_tau{tau}.csv"), &cloud.to_csv())?;
        distances.push((tau, nodal_compare(&cloud, &target)?));
    }
    let decreasing = distances.windows(2).all(|w| w[1].1 < w[0].1);
    let last = distances.last().map_or(f64::INFINITY, |d| d.1);
    let pass = decreasing && last <= a.tol;
    let tau_end = a.taus.iter().copied().fold(0.0, f64::max).max(1.0);
    let traj = CoefficientTrajectory::linear(&e0, tau_end, 40)?;
    let report = detect_resonance(&traj, &ResonanceOptions::default())?;
    let verdict = unique_continuation_diagnostic(&report, &distances, a.tol, 0.0);
    let rows: Vec<Value> = distances.iter().map(|(t, d)| json!({"tau": t, "distance": d})).collect();
    let path = write_json(out, "nodal.json", &json!({"schema": SCHEMA, "component": a.component, "distances": rows, "verdict": verdict}))?;
    outcome(
        "nodal",
        pass,
        json!({"distances": rows, "decreasing": decreasing, "final": last, "verdict": verdict, "artifact": path}),
    )
}

/// Reads `x1, x2, x3, t` expressions as polynomials in four variables.
fn parse_spacetime(src: &str) -> Result<Vec<Polynomial>> {
    src.split(';')
        .map(|c| try_parse_poly(4, &c.replace('x', "y").replace('t', "y4")))
        .collect()
}

fn classify(a: ClassifyArgs, out: &Path) -> Result<Outcome> {
    let opts = ClassifyOptions {
        max_order: a.max_order,
        threshold: a.threshold,
        ..ClassifyOptions::default()
    };
    if let Some(bound) = a.sweep {
        let mut rows = Vec::new();
        let mut pass = true;
        for m in 1..=bound {
            for k in 1..=bound {
                let sigma = [m.div_ceil(2) as i32, (m / 2) as i32];
                let z = classify_zero(
                    |x, t| vec![x[0].powi(sigma[0]) * x[1].powi(sigma[1]) - (-t).powi(k as i32)],
                    &opts,
                )?;
                let ok = z.spatial_order == Some(m)
                    && z.temporal_order == Some(k)
                    && z.gamma == Some(rat(k as i64, m as i64));
                pass &= ok;
                rows.push(json!({"M": m, "K": k, "result": z, "ok": ok}));
            }
        }
        let path = write_json(out, "classify_sweep.json", &json!({"schema": SCHEMA, "cases": rows}))?;
        return outcome("classify", pass, json!({"cases": rows.len(), "artifact": path}));
    }
    let Some(src) = a.field else {
        return Err(hermflow::Error::InvalidInput("give --field or --sweep".into()));
    };
    let comps: Vec<_> = parse_spacetime(&src)?.iter().map(Polynomial::to_float).collect();
    let z = classify_zero(
        |x, t| comps.iter().map(|p| p.eval(&[x[0], x[1], x[2], t])).collect(),
        &opts,
    )?;
    let v = serde_json::to_value(&z)?;
    let path = write_json(out, "zero_type.json", &v)?;
    let mut body = v;
    body["artifact"] = json!(path);
    outcome("classify", z.status == ZeroStatus::Finite, body)
}

fn verify(a: VerifyArgs, out: &Path) -> Result<Outcome> {
    let params = OperatorParams::new(a.m, 3)?;
    let spec = GridSpec::new(a.half_width, a.n, false)?;
    if a.steps == 0 || !(a.tau > 0.0) {
        return Err(hermflow::Error::InvalidInput("need --steps >= 1 and --tau > 0".into()));
    }
    let taus: Vec<f64> = (0..=a.steps).map(|i| a.tau * i as f64 / a.steps as f64).collect();
    let mut rows = Vec::new();
    let mut worst = 0f64;
    for &k in &a.levels {
        let basis = fixture_basis(&params, k)?;
        let runs = hermflow::dynamics::semigroup_verify_all(&basis.fields, &basis, &taus, &spec)?;
        for (i, (label, run)) in basis.labels.iter().zip(&runs).enumerate() {
            write_text(out, &format!("verify_m{}_{label}.csv", a.m), &run.trajectory.to_csv())?;
            worst = worst.max(run.max_rel_error);
            rows.push(json!({
                "level": k, "field": label, "predicted_rate": run.predicted_rate,
                "fitted_rate": run.trajectory.log_slope(i, (0.0, a.tau)),
                "max_rel_error": run.max_rel_error,
            }));
        }
    }
    let pass = worst <= a.tol;
    let path = write_json(out, &format!("verify_m{}.json", a.m), &json!({"schema": SCHEMA, "runs": rows}))?;
    outcome(
        "verify",
        pass,
        json!({"m": a.m, "levels": a.levels, "max_rel_error": worst, "runs": rows.len(), "artifact": path}),
    )
}
