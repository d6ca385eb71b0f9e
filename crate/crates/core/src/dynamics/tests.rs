use super::*;
use crate::grid::{interaction_tensor, GridSpec, InteractionTensor, TensorOptions};
use crate::poly::{moment_of, parse_field, rat};
use crate::solenoidal::fixture;
use proptest::prelude::*;

fn heat_basis(k: u32) -> ExpansionBasis {
    ExpansionBasis::standard(&OperatorParams::heat3(), k).unwrap()
}

fn unit(basis: &ExpansionBasis, label: &str, model: Model) -> Expansion {
    let mut c = vec![0.0; basis.len()];
    c[basis.index_of(label).unwrap()] = 1.0;
    Expansion::new(model, basis, c).unwrap()
}

#[test]
fn expand_single_rotation() {
    let b = heat_basis(2);
    let e = expand_exact(&parse_field("0; -y3; y2"), &b).unwrap();
    let i = b.index_of("v11").unwrap();
    for (j, c) in e.coeffs.iter().enumerate() {
        assert_eq!(*c, if j == i { rat(1, 1) } else { rat(0, 1) });
    }
    assert!(e.residual_sq.is_zero());
}

#[test]
fn expand_mixed_levels() {
    let b = heat_basis(2);
    let v0 = fixture(1, 0).unwrap().remove(0);
    let v21 = fixture(1, 2).unwrap().remove(0);
    let u = v0.scale(&rat(2, 1)).add(&v21.scale(&rat(3, 1))).unwrap();
    let e = expand_exact(&u, &b).unwrap();
    assert_eq!(e.coeffs[b.index_of("v0").unwrap()], rat(2, 1));
    assert_eq!(e.coeffs[b.index_of("v21").unwrap()], rat(3, 1));
    assert_eq!(e.coeffs.iter().filter(|c| !c.is_zero()).count(), 2);
}

#[test]
fn expand_with_tail() {
    let b = heat_basis(2);
    let tail = parse_field("0; y1*y3^2 - 2*y1; 0").scale(&rat(1, 1000));
    let u = parse_field("0; -y3; y2").add(&tail).unwrap();
    let e = expand_exact(&u, &b).unwrap().to_expansion(Model::Stokes, &b).unwrap();
    assert!((e.coeffs[b.index_of("v11").unwrap()] - 1.0).abs() < 1e-12);
    // ‖ψ*_(1,0,2)‖² = 2³·2! = 16
    assert!((e.residual - 4e-3).abs() < 1e-12, "{}", e.residual);
    // the dual norm is the Gaussian-weighted L² norm for m = 1
    let ex = expand_exact(&u, &b).unwrap();
    assert_eq!(ex.residual_sq, moment_of(&tail.dot(&tail).unwrap(), 1));
}

#[test]
fn exact_pairing_matches_gaussian_moments() {
    let b = heat_basis(2);
    let p = parse_field("y1*y2 + 3; y3^2 - 1/2*y1; 7*y2*y3 - y1^2");
    let e = expand_exact(&p, &b).unwrap();
    // b_j = ∫ p·v*_j F must equal G c
    let mut offset = 0;
    for basis in &b.bases {
        for (j, f) in basis.fields.iter().enumerate() {
            let direct = moment_of(&p.dot(f).unwrap(), 1);
            let mut via_gram = rat(0, 1);
            for i in 0..basis.len() {
                via_gram += &basis.gram.row(j)[i] * &e.coeffs[offset + i];
            }
            assert_eq!(direct, via_gram);
        }
        offset += basis.len();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn expansion_round_trip(coeffs in proptest::collection::vec(-20i64..20, 12), m in 1u32..=2) {
        let params = OperatorParams::new(m, 3).unwrap();
        let b = ExpansionBasis::standard(&params, 2).unwrap();
        let mut u = VectorPolyField::zero(3);
        for (f, c) in b.fields().zip(&coeffs) {
            u = u.add(&f.scale(&rat(*c, 3))).unwrap();
        }
        let e = expand_exact(&u, &b).unwrap();
        prop_assert!(e.residual_sq.is_zero());
        for (got, want) in e.coeffs.iter().zip(coeffs.iter().take(b.len())) {
            prop_assert_eq!(got.clone(), rat(*want, 3));
        }
    }
}

#[test]
fn stokes_examples() {
    let b = heat_basis(2);
    let e0 = unit(&b, "v0", Model::Stokes);
    let e = stokes_flow(&e0, 2.0).unwrap();
    assert!((e.coeffs[0] - (-1f64).exp()).abs() < 1e-15);
    let e1 = unit(&b, "v12", Model::Stokes);
    let i = b.index_of("v12").unwrap();
    assert!((stokes_flow(&e1, 2.0).unwrap().coeffs[i] - (-2f64).exp()).abs() < 1e-15);
    assert_eq!(stokes_flow(&e1, 0.0).unwrap().coeffs, e1.coeffs);
    assert!(burnett_flow(&e1, 1.0).is_err());
}

#[test]
fn burnett_examples() {
    let b = ExpansionBasis::standard(&OperatorParams::burnett3(), 1).unwrap();
    let e0 = unit(&b, "v0", Model::Burnett);
    assert!((burnett_flow(&e0, 4.0).unwrap().coeffs[0] - (-3f64).exp()).abs() < 1e-15);
    let e1 = unit(&b, "v11", Model::Burnett);
    let i = b.index_of("v11").unwrap();
    assert!((burnett_flow(&e1, 4.0).unwrap().coeffs[i] - (-4f64).exp()).abs() < 1e-15);
    assert_eq!(burnett_flow(&e1, 0.0).unwrap().coeffs, e1.coeffs);
}

#[test]
fn stokes_rates_through_level_four() {
    let b = heat_basis(4);
    let e0 = Expansion::new(Model::Stokes, &b, vec![1.0; b.len()]).unwrap();
    let traj = CoefficientTrajectory::linear(&e0, 3.0, 30).unwrap();
    for (j, &k) in traj.levels.iter().enumerate() {
        let slope = traj.log_slope(j, (0.0, 3.0)).unwrap();
        assert!((slope + (1.0 + k as f64) / 2.0).abs() < 1e-12, "k={k} slope={slope}");
    }
    let csv = traj.to_csv();
    assert!(csv.starts_with("tau,v0 (k=0),v11 (k=1)"));
}

fn fast_tensor(b: &ExpansionBasis) -> InteractionTensor {
    let opts = TensorOptions::fast(GridSpec::new(8.0, 32, false).unwrap());
    interaction_tensor(&b.bases, &b.bases, &b.bases, &opts).unwrap()
}

#[test]
fn galerkin_linear_limit_and_rotation() {
    let b = heat_basis(2);
    let coeffs: Vec<f64> = (0..b.len()).map(|i| 0.01 * ((i as f64) * 0.7).sin()).collect();
    let e0 = Expansion::new(Model::Nse, &b, coeffs).unwrap();
    let zero = InteractionTensor::zero(&b.bases, GridSpec::new(8.0, 32, false).unwrap());
    let opts = GalerkinOptions::default();
    let traj = nse_galerkin(&e0, &zero, &opts).unwrap();
    for (i, &tau) in traj.taus.iter().enumerate() {
        let exact = linear_flow(&e0, tau);
        for (a, b) in traj.coeffs[i].iter().zip(&exact.coeffs) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300) + 1e-18, "tau={tau}");
        }
    }

    let tensor = fast_tensor(&b);
    let rot = unit(&b, "v13", Model::Nse);
    let traj = nse_galerkin(&rot, &tensor, &opts).unwrap();
    let last = traj.coeffs.last().unwrap();
    let exact = linear_flow(&rot, opts.tau_end);
    for (a, b) in last.iter().zip(&exact.coeffs) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn galerkin_duhamel_consistency() {
    let b = heat_basis(2);
    let tensor = fast_tensor(&b);
    let raw: Vec<f64> = (0..b.len()).map(|i| ((i * 7 + 3) as f64).sin()).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let e0 = Expansion::new(Model::Nse, &b, raw.iter().map(|x| 1e-2 * x / norm).collect()).unwrap();
    let traj = nse_galerkin(&e0, &tensor, &GalerkinOptions::default()).unwrap();
    assert!(traj.diagnostic.is_none());
    let r = traj.duhamel_residual.unwrap();
    assert!(r <= 1e-6, "{r}");
}

#[test]
fn galerkin_blow_up_is_truncated() {
    let b = heat_basis(1);
    let mut tensor = InteractionTensor::zero(&b.bases, GridSpec::new(8.0, 32, false).unwrap());
    // ċ = −½c + 10c² blows up in finite time from c = 1
    tensor.set(0, 0, 0, 10.0);
    let e0 = unit(&b, "v0", Model::Nse);
    let traj = nse_galerkin(&e0, &tensor, &GalerkinOptions::default()).unwrap();
    assert!(traj.diagnostic.is_some());
    assert!(traj.taus.last().unwrap() < &1.0);
}

#[test]
fn resonance_examples() {
    let b = heat_basis(2);
    let opts = ResonanceOptions::default();
    let e1 = unit(&b, "v11", Model::Stokes);
    let r = detect_resonance(&CoefficientTrajectory::linear(&e1, 5.0, 50).unwrap(), &opts).unwrap();
    assert_eq!(r.status, ResonanceStatus::Resonant);
    assert_eq!(r.level, Some(1));
    assert!((r.fitted_rate.unwrap() + 1.0).abs() < 1e-9);

    let mut mixed = e1.clone();
    mixed.coeffs[b.index_of("v22").unwrap()] = 5.0;
    mixed.coeffs[b.index_of("v12").unwrap()] = 1e-3;
    let r = detect_resonance(&CoefficientTrajectory::linear(&mixed, 5.0, 50).unwrap(), &opts).unwrap();
    assert_eq!(r.status, ResonanceStatus::Resonant);
    assert_eq!(r.level, Some(1));
    assert_eq!(r.dominant.len(), 2);
    assert!((r.subdominant_gap.unwrap() - 0.5).abs() < 1e-9);

    let mut with_mean = e1.clone();
    with_mean.coeffs[0] = 1e-6;
    let r = detect_resonance(&CoefficientTrajectory::linear(&with_mean, 5.0, 50).unwrap(), &opts).unwrap();
    assert_eq!(r.status, ResonanceStatus::NonDegenerate);

    let short = detect_resonance(&CoefficientTrajectory::linear(&e1, 1.0, 10).unwrap(), &opts).unwrap();
    assert_eq!(short.status, ResonanceStatus::Inconclusive);
}

#[test]
fn nodal_examples() {
    let b = heat_basis(2);
    let rot = unit(&b, "v11", Model::Stokes);
    let set = nodal_extract(&rot, &b, 2.0, 0.1).unwrap();
    assert!(set.components[0].identically_zero);
    assert!(set.components[0].is_empty());
    assert!(set.components[1].interior().all(|p| p[2].abs() < 1e-12));
    assert!(!set.components[1].is_empty());

    let v21 = unit(&b, "v21", Model::Stokes);
    let cyl = nodal_extract(&v21, &b, 3.0, 0.1).unwrap();
    for p in cyl.components[0].interior() {
        let r = (p[1] * p[1] + p[2] * p[2]).sqrt();
        assert!((r - 2.0).abs() < 0.01, "{p:?}");
    }

    let c = unit(&b, "v0", Model::Stokes);
    let flat = nodal_extract(&c, &b, 2.0, 0.1).unwrap();
    assert!(flat.components.iter().all(|c| c.is_empty() && !c.identically_zero));
}

#[test]
fn hausdorff_examples() {
    let plane = nodal::nodal_extract_fn(|y| [y[2], 0.0, 0.0], 2.0, 0.05).unwrap();
    let a = &plane.components[0];
    assert_eq!(nodal_compare(a, a).unwrap(), 0.0);
    let shifted = nodal::nodal_extract_fn(|y| [y[2] - 0.1, 0.0, 0.0], 2.0, 0.05).unwrap();
    let d = nodal_compare(a, &shifted.components[0]).unwrap();
    assert!((d - 0.1).abs() < 1e-9, "{d}");
    assert!(nodal_compare(a, &plane.components[1]).is_err());
}

#[test]
fn perturbed_rotation_nodal_set_converges() {
    let b = heat_basis(3);
    let pert = expand_exact(
        &parse_field("0; -y3; y2")
            .add(&parse_field("0; y1*y3^2 - 2*y1; 0").scale(&rat(1, 2)))
            .unwrap(),
        &b,
    )
    .unwrap()
    .to_expansion(Model::Stokes, &b)
    .unwrap();
    let plane = nodal_extract(&unit(&b, "v11", Model::Stokes), &b, 2.0, 0.05).unwrap();
    let mut last = f64::INFINITY;
    for tau in [0.0, 1.0, 2.0, 3.0, 4.0] {
        let e = stokes_flow(&pert, tau).unwrap();
        let set = nodal_extract(&e, &b, 2.0, 0.05).unwrap();
        let d = nodal_compare(&set.components[1], &plane.components[1]).unwrap();
        assert!(d <= last + 0.1, "tau={tau}: {d} after {last}");
        last = d;
    }
    assert!(last < 0.05, "{last}");
}

#[test]
fn classify_examples() {
    let opts = ClassifyOptions::default();
    let z = classify_zero(|x, t| vec![x[0] * x[1] - t * t], &opts).unwrap();
    assert_eq!((z.spatial_order, z.temporal_order), (Some(2), Some(2)));
    assert_eq!(z.gamma, Some(rat(1, 1)));
    let z = classify_zero(|x, t| vec![x[0].powi(3) + t], &opts).unwrap();
    assert_eq!((z.spatial_order, z.temporal_order), (Some(3), Some(1)));
    assert_eq!(z.gamma, Some(rat(1, 3)));
    assert_eq!(z.rescale.as_deref(), Some("z = x/(-t)^(1/3)"));
    // heat polynomial x1² + 2t
    let z = classify_zero(|x, t| vec![x[0] * x[0] + 2.0 * t], &opts).unwrap();
    assert_eq!((z.spatial_order, z.temporal_order), (Some(2), Some(1)));
    // the rotation is a stationary harmonic field: u(0, t) ≡ 0
    let z = classify_zero(|x, _| vec![0.0, -x[2], x[1]], &opts).unwrap();
    assert_eq!(z.spatial_order, Some(1));
    assert_eq!(z.status, ZeroStatus::TemporalOrderExceedsBound);
    assert!(classify_zero(|_, _| vec![0.0], &opts).unwrap().status == ZeroStatus::SpatialOrderExceedsBound);
    assert!(classify_zero(|x, _| vec![1.0 + x[0]], &opts).is_err());
}

#[test]
fn classify_sweep() {
    let opts = ClassifyOptions::default();
    for m in 1..=4u32 {
        for k in 1..=4u32 {
            // split the spatial order across coordinates
            let sigma = [m.div_ceil(2), m / 2, 0];
            let z = classify_zero(
                |x, t| {
                    vec![x[0].powi(sigma[0] as i32) * x[1].powi(sigma[1] as i32) - (-t).powi(k as i32)]
                },
                &opts,
            )
            .unwrap();
            assert_eq!(z.spatial_order, Some(m));
            assert_eq!(z.temporal_order, Some(k));
            assert_eq!(z.gamma, Some(rat(k as i64, m as i64)));
        }
    }
}

#[test]
fn semigroup_heat_rates() {
    let p = OperatorParams::heat3();
    let spec = GridSpec::new(12.0, 96, false).unwrap();
    let taus = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    for (k, label) in [(1, "v11"), (2, "v21")] {
        let basis = fixture_basis(&p, k).unwrap();
        let i = basis.labels.iter().position(|l| l == label).unwrap();
        let run = semigroup_verify(&basis.fields[i], &basis, &taus, &spec).unwrap();
        assert!(run.max_rel_error < 1e-3, "k={k}: {}", run.max_rel_error);
        assert!(run.trajectory.coeffs[0][i].abs() > 1e-6);
        assert!((run.predicted_rate + (1.0 + k as f64) / 2.0).abs() < 1e-15);
    }
}

#[test]
fn semigroup_biharmonic_rate() {
    let p = OperatorParams::burnett3();
    let spec = GridSpec::new(12.0, 64, false).unwrap();
    let taus = [0.0, 1.0, 2.0, 3.0];
    for k in 0..=1 {
        let basis = fixture_basis(&p, k).unwrap();
        let run = semigroup_verify(&basis.fields[0], &basis, &taus, &spec).unwrap();
        assert!(run.max_rel_error < 1e-3, "k={k}: {}", run.max_rel_error);
    }
}

#[test]
fn semigroup_rejects_bad_input() {
    let p = OperatorParams::heat3();
    let basis = fixture_basis(&p, 1).unwrap();
    let spec = GridSpec::new(12.0, 96, false).unwrap();
    assert!(semigroup_verify(&basis.fields[0], &basis, &[-1.0, 0.0], &spec).is_err());
    let coarse = GridSpec::new(12.0, 16, false).unwrap();
    assert!(semigroup_verify(&basis.fields[0], &basis, &[0.0], &coarse).is_err());
}

#[test]
fn unique_continuation_verdicts() {
    let b = heat_basis(2);
    let e1 = unit(&b, "v11", Model::Stokes);
    let traj = CoefficientTrajectory::linear(&e1, 5.0, 50).unwrap();
    let rep = detect_resonance(&traj, &ResonanceOptions::default()).unwrap();
    assert_eq!(unique_continuation_diagnostic(&rep, &[(0.0, 0.2), (4.0, 0.01)], 0.05, 0.1), Verdict::Pass);
    // resonant rates but the nodal set stays away
    assert_eq!(
        unique_continuation_diagnostic(&rep, &[(0.0, 0.5), (4.0, 0.6)], 0.05, 0.1),
        Verdict::Inconsistent
    );
    let zero = Expansion::new(Model::Stokes, &b, vec![0.0; b.len()]).unwrap();
    let rep0 = detect_resonance(&CoefficientTrajectory::linear(&zero, 5.0, 50).unwrap(), &ResonanceOptions::default()).unwrap();
    assert_eq!(unique_continuation_diagnostic(&rep0, &[], 0.05, 0.1), Verdict::Vacuous);
}
