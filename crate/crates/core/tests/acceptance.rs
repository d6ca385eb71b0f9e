//! End-to-end acceptance run: one PASS/FAIL line per criterion, exit status
//! nonzero if any criterion fails.

use hermflow::dynamics::{
    classify_zero, expand_exact, linear_flow, nodal_compare, nodal_extract, nse_galerkin,
    semigroup_verify_all, ClassifyOptions, Expansion, ExpansionBasis, GalerkinOptions, Model,
};
use hermflow::grid::{
    interaction_tensor, project, relative_divergence, sample_fn, GridSpec, GridVectorField,
    InteractionTensor, TensorOptions,
};
use hermflow::hermite::{eigenfunction, level_enumerate, OperatorParams};
use hermflow::kernel::{envelope_fit, kernel_table_uniform, wkbj_constants};
use hermflow::poly::{parse_field, rat, rat_to_f64, MultiIndex, Polynomial, Rational, VectorPolyField};
use hermflow::solenoidal::{fixture, fixture_basis};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::time::{Duration, Instant};

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn fact(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, i| a * i)
}

/// `B*p = (−1)^{m+1} Δ^m p − (1/2m) y·∇p`, assembled from raw derivatives.
fn b_star(p: &Polynomial, m: u32) -> Polynomial {
    let dim = p.dim();
    let mut lap = p.clone();
    for _ in 0..m {
        let mut next = Polynomial::zero(dim);
        for i in 0..dim {
            next = &next + &lap.partial(i).partial(i);
        }
        lap = next;
    }
    if m % 2 == 0 {
        lap = -&lap;
    }
    let mut euler = Polynomial::zero(dim);
    for i in 0..dim {
        euler = &euler + &(&Polynomial::var(dim, i) * &p.partial(i));
    }
    &lap - &euler.scale(&rat(1, 2 * m as i64))
}

/// `∫ y^β F` from the Taylor series of `F̂(ξ) = e^{−|ξ|^{2m}}`:
/// `∫ y^β F = i^{|β|} β! [ξ^β] F̂`.
fn moment(beta: &[u32], m: u32) -> Rational {
    let order: u32 = beta.iter().sum();
    if beta.iter().any(|b| b % 2 == 1) || order % (2 * m) != 0 {
        return Rational::zero();
    }
    let j = order / (2 * m);
    let halves: BigInt = beta.iter().map(|b| fact(b / 2)).product();
    let beta_fact: BigInt = beta.iter().map(|&b| fact(b)).product();
    let coeff = Rational::new(fact(m * j), halves * fact(j));
    let sign = if (order / 2 + j) % 2 == 0 { 1 } else { -1 };
    coeff * Rational::from_integer(beta_fact) * rat(sign, 1)
}

fn integrate(p: &Polynomial, m: u32) -> Rational {
    p.terms()
        .map(|(b, c)| c * moment(b.entries(), m))
        .fold(Rational::zero(), |a, x| a + x)
}

fn spectrum_multiplicity() -> Check {
    let p = OperatorParams::heat3();
    for k in 0..=10u32 {
        let n = level_enumerate(k, &p).len();
        let want = ((k + 1) * (k + 2) / 2) as usize;
        if n != want {
            return check(false, format!("level {k}: {n} polynomials, expected {want}"));
        }
    }
    check(true, "levels 0..=10 have (k+1)(k+2)/2 members")
}

fn eigen_relations() -> Check {
    let mut count = 0;
    for m in 1..=3u32 {
        let p = OperatorParams::new(m, 3).unwrap();
        for beta in MultiIndex::up_to_order(3, 5) {
            let psi = eigenfunction(&beta, &p).unwrap().psi_star;
            let lambda = rat(-(beta.order() as i64), 2 * m as i64);
            if b_star(&psi, m) != psi.scale(&lambda) {
                return check(false, format!("m={m} beta={beta}"));
            }
            count += 1;
        }
    }
    check(true, format!("{count} exact eigen-relations"))
}

fn bi_orthonormality() -> Check {
    let mut count = 0;
    for m in 1..=2u32 {
        let p = OperatorParams::new(m, 3).unwrap();
        let betas = MultiIndex::up_to_order(3, 4);
        for b in &betas {
            let psi = eigenfunction(b, &p).unwrap().psi_star;
            for g in &betas {
                let got = integrate(&psi.derive(g).unwrap(), m);
                let want = if b == g {
                    Rational::from_integer(b.factorial())
                } else {
                    Rational::zero()
                };
                if got != want {
                    return check(false, format!("m={m} beta={b} gamma={g}: {got}"));
                }
                count += 1;
            }
        }
    }
    check(true, format!("{count} pairings equal beta! delta"))
}

fn fixtures() -> Check {
    let mut count = 0;
    for (m, kmax) in [(1u32, 2u32), (2, 4)] {
        for k in 0..=kmax {
            let lambda = rat(-(k as i64), 2 * m as i64);
            for f in fixture(m, k).unwrap() {
                if !f.divergence().unwrap().is_zero() {
                    return check(false, format!("m={m} k={k}: {f} has nonzero divergence"));
                }
                for c in f.components() {
                    if b_star(c, m) != c.scale(&lambda) {
                        return check(false, format!("m={m} k={k}: {f} is not eigen"));
                    }
                }
                count += 1;
            }
        }
    }
    let n1 = fixture(1, 1).unwrap().len();
    let n2 = fixture(1, 2).unwrap().len();
    check(
        n1 == 3 && n2 == 8,
        format!("{count} fields solenoidal and eigen; m=1 counts {n1}, {n2}"),
    )
}

fn wkbj_and_kernel() -> Check {
    let c = wkbj_constants(2, 3).unwrap();
    let d0 = 3.0 * 2f64.powf(-11.0 / 3.0);
    let b0 = 3f64.powf(1.5) * 2f64.powf(-11.0 / 3.0);
    let closed = c.alpha == rat(4, 3)
        && c.delta0 == rat(7, 3)
        && (c.d0 - d0).abs() < 1e-12
        && (c.b0 - b0).abs() < 1e-12;
    let table = kernel_table_uniform(2, 32.0, 0.01).unwrap();
    let fit = envelope_fit(&table, &c).unwrap();
    let pass = closed && fit.d0_rel_dev < 0.02 && fit.alpha_rel_dev < 0.01 && table.mass_error <= 1e-6;
    check(
        pass,
        format!(
            "closed forms {}; fit d0 dev {:.2e}, alpha dev {:.2e}; mass error {:.1e}",
            if closed { "exact" } else { "off" },
            fit.d0_rel_dev,
            fit.alpha_rel_dev,
            table.mass_error
        ),
    )
}

fn rel_diff(a: &GridVectorField, b: &GridVectorField) -> f64 {
    a.axpy(-1.0, b).norm() / b.norm()
}

fn projector() -> Check {
    let spec = GridSpec::new(8.0, 64, false).unwrap();
    let (mut idem, mut div) = (0f64, 0f64);
    for shift in 0..3 {
        let w = [0.3, -0.7, 0.45, 0.2, -0.15, 0.6, -0.35, 0.5, 0.1];
        let u = sample_fn(&spec, |y| {
            let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 4.0).exp();
            [0, 1, 2].map(|c| {
                let a = |i: usize| w[(3 * c + i + shift) % 9];
                g * (a(0) + a(1) * y[(c + 1) % 3] + a(2) * y[c] * y[c])
            })
        });
        let p = project(&u);
        idem = idem.max(rel_diff(&project(&p), &p));
        div = div.max(relative_divergence(&p));
    }
    let params = OperatorParams::heat3();
    let targets: Vec<_> = (0..=2).map(|k| fixture_basis(&params, k).unwrap()).collect();
    let rot = fixture_basis(&params, 1).unwrap();
    let t = interaction_tensor(
        std::slice::from_ref(&rot),
        std::slice::from_ref(&rot),
        &targets,
        &TensorOptions::fast(spec),
    )
    .unwrap();
    let mut selfint = 0f64;
    for a in 0..3 {
        for b in 0..t.shape().2 {
            selfint = selfint.max(t.get(a, a, b).abs());
        }
    }
    check(
        idem <= 1e-10 && div <= 1e-8 && selfint <= 1e-8,
        format!("idempotence {idem:.1e}, divergence {div:.1e}, rotation self-interaction {selfint:.1e}"),
    )
}

/// `E[p(Y)]` for `Y ~ N(0, var·I)`.
fn gaussian_mean(p: &Polynomial, var: f64) -> f64 {
    p.terms()
        .map(|(b, c)| {
            let e = b.entries();
            if e.iter().any(|x| x % 2 == 1) {
                return 0.0;
            }
            let m: f64 = e
                .iter()
                .map(|&x| (1..x).step_by(2).map(|j| j as f64).product::<f64>() * var.powi(x as i32 / 2))
                .product();
            rat_to_f64(c) * m
        })
        .sum()
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Heat-kernel coordinates of the data `v_i F` at `τ = 0`:
/// `G c = b` with `G_ij = ∫ v_i·v_j F` and `b_j = ∫ v_i·v_j F²`.
fn gaussian_initial_coordinates(fields: &[VectorPolyField], i: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let f_sq = (2.0 * pi).powf(1.5) / (4.0 * pi).powi(3);
    let gram: Vec<Vec<f64>> = fields
        .iter()
        .map(|a| fields.iter().map(|b| gaussian_mean(&a.dot(b).unwrap(), 2.0)).collect())
        .collect();
    let b: Vec<f64> = fields
        .iter()
        .map(|f| f_sq * gaussian_mean(&fields[i].dot(f).unwrap(), 1.0))
        .collect();
    solve(gram, b)
}

/// Evolves every fixture field at each level and compares each coefficient
/// with `c(0) e^{rate τ}`; for the heat kernel `c(0)` is also checked
/// against Gaussian moments.
fn semigroup_rates(m: u32, levels: &[u32], spec: GridSpec, rate: impl Fn(u32) -> f64) -> Check {
    let params = OperatorParams::new(m, 3).unwrap();
    let taus: Vec<f64> = (0..=6).map(|i| 0.5 * i as f64).collect();
    let (mut worst, mut start) = (0f64, 0f64);
    for &k in levels {
        let basis = fixture_basis(&params, k).unwrap();
        let runs = semigroup_verify_all(&basis.fields, &basis, &taus, &spec).unwrap();
        for (i, run) in runs.iter().enumerate() {
            let c0 = &run.trajectory.coeffs[0];
            if m == 1 {
                let want = gaussian_initial_coordinates(&basis.fields, i);
                let scale = want.iter().fold(0f64, |a, x| a.max(x.abs()));
                for (c, w) in c0.iter().zip(&want) {
                    start = start.max((c - w).abs() / scale);
                }
            }
            let floor = 1e-8 * c0.iter().fold(0f64, |a, x| a.max(x.abs()));
            for (row, tau) in run.trajectory.coeffs.iter().zip(&taus) {
                let decay = (rate(k) * tau).exp();
                for (c, c_init) in row.iter().zip(c0).filter(|(_, c)| c.abs() > floor) {
                    worst = worst.max((c / c_init / decay - 1.0).abs());
                }
            }
        }
    }
    let detail = if m == 1 {
        format!("decay deviation {worst:.2e}; initial coordinates vs Gaussian moments {start:.1e}")
    } else {
        format!("decay deviation {worst:.2e}")
    };
    check(worst <= 1e-3 && start <= 1e-6, detail)
}

fn nodal_convergence() -> Check {
    let params = OperatorParams::heat3();
    let basis = ExpansionBasis::standard(&params, 3).unwrap();
    let data = parse_field("0; -y3; y2")
        .add(&parse_field("0; y1*y3^2 - 2*y1; 0").scale(&rat(1, 2)))
        .unwrap();
    let e0 = expand_exact(&data, &basis).unwrap().to_expansion(Model::Stokes, &basis).unwrap();
    let reference = expand_exact(&parse_field("0; -y3; y2"), &basis)
        .unwrap()
        .to_expansion(Model::Stokes, &basis)
        .unwrap();
    let plane = nodal_extract(&reference, &basis, 2.0, 0.05).unwrap().components.swap_remove(1);
    let plane_ok = plane.interior().all(|p| p[2].abs() < 1e-12);
    let mut dists = Vec::new();
    let mut slab = 0f64;
    for tau in [0.0, 1.0, 2.0, 3.0, 4.0] {
        let cloud = nodal_extract(&linear_flow(&e0, tau), &basis, 2.0, 0.05)
            .unwrap()
            .components
            .swap_remove(1);
        dists.push(nodal_compare(&cloud, &plane).unwrap());
        slab = cloud.interior().map(|p| p[2].abs()).fold(0.0, f64::max);
    }
    let decreasing = dists.windows(2).all(|w| w[1] < w[0]);
    let last = *dists.last().unwrap();
    check(
        plane_ok && decreasing && last < 0.05 && slab < 0.05,
        format!(
            "distances {} (final interior |y3| <= {slab:.3})",
            dists.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn zero_classification() -> Check {
    let opts = ClassifyOptions::default();
    for m in 1..=4u32 {
        for k in 1..=4u32 {
            let z = classify_zero(
                |x, t| {
                    let sigma = [m.div_ceil(2) as i32, (m / 2) as i32];
                    vec![x[0].powi(sigma[0]) * x[1].powi(sigma[1]) - (-t).powi(k as i32)]
                },
                &opts,
            )
            .unwrap();
            if z.spatial_order != Some(m) || z.temporal_order != Some(k) || z.gamma != Some(rat(k as i64, m as i64)) {
                return check(false, format!("M={m} K={k}: {z:?}"));
            }
        }
    }
    check(true, "all 16 (M, K) pairs recovered with gamma = K/M")
}

fn galerkin_consistency() -> Check {
    let params = OperatorParams::heat3();
    let basis = ExpansionBasis::standard(&params, 2).unwrap();
    let spec = GridSpec::new(8.0, 32, false).unwrap();
    let raw: Vec<f64> = (0..basis.len()).map(|i| ((3 * i + 1) as f64).cos()).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let coeffs: Vec<f64> = raw.iter().map(|x| 1e-2 * x / norm).collect();
    let e0 = Expansion::new(Model::Nse, &basis, coeffs.clone()).unwrap();
    let opts = GalerkinOptions::default();
    let zero = InteractionTensor::zero(&basis.bases, spec);
    let lin = nse_galerkin(&e0, &zero, &opts).unwrap();
    let mut worst = 0f64;
    for (tau, row) in lin.taus.iter().zip(&lin.coeffs) {
        for ((c, c0), k) in row.iter().zip(&coeffs).zip(&basis.levels()) {
            let exact = c0 * (-(1.0 + *k as f64) / 2.0 * tau).exp();
            worst = worst.max((c - exact).abs() / exact.abs());
        }
    }
    let tensor = interaction_tensor(&basis.bases, &basis.bases, &basis.bases, &TensorOptions::fast(spec)).unwrap();
    let traj = nse_galerkin(&e0, &tensor, &opts).unwrap();
    let duhamel = traj.duhamel_residual.unwrap_or(f64::INFINITY);
    check(
        worst <= 1e-9 && duhamel <= 1e-6 && traj.diagnostic.is_none(),
        format!("linear limit deviation {worst:.1e}, Duhamel residual {duhamel:.1e}"),
    )
}

fn main() {
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Check>)> = vec![
        ("level multiplicities", Duration::from_secs(1), Box::new(spectrum_multiplicity)),
        ("exact eigen-relations", Duration::from_secs(10), Box::new(eigen_relations)),
        ("bi-orthonormal pairing", Duration::from_secs(30), Box::new(bi_orthonormality)),
        ("solenoidal fixtures", Duration::from_secs(5), Box::new(fixtures)),
        ("kernel tail constants", Duration::from_secs(120), Box::new(wkbj_and_kernel)),
        ("Leray projector", Duration::from_secs(120), Box::new(projector)),
        (
            "heat semigroup decay",
            Duration::from_secs(120),
            Box::new(|| semigroup_rates(1, &[1, 2], GridSpec::new(12.0, 96, false).unwrap(), |k| -(1.0 + k as f64) / 2.0)),
        ),
        (
            "biharmonic semigroup decay",
            Duration::from_secs(120),
            Box::new(|| semigroup_rates(2, &[0, 1], GridSpec::new(12.0, 64, false).unwrap(), |k| -(3.0 + k as f64) / 4.0)),
        ),
        ("nodal set convergence", Duration::from_secs(120), Box::new(nodal_convergence)),
        ("zero classification", Duration::from_secs(10), Box::new(zero_classification)),
        ("Galerkin consistency", Duration::from_secs(60), Box::new(galerkin_consistency)),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = run();
        let elapsed = start.elapsed();
        let pass = c.pass && elapsed <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.2}s of {}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            c.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
