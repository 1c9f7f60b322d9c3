use super::*;
use crate::circuits::{trotterize, FhmParams, Placement};
use crate::classify::partition;
use crate::dense::DenseMatrix;
use crate::encodings::{build_encoding, EncodingKind, LatticeSpec};
use crate::engine::{alternating_occupation, prepare_initial_state, run, BackendKind, EngineConfig};
use crate::noise::{local_noise_model, LayerNoiseChannel};
use crate::pauli::PauliOperator;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn layer(masses: &[f64]) -> LayerPlan {
    LayerPlan { targets: masses.iter().copied().enumerate().collect(), mass: masses.iter().sum() }
}

#[test]
fn trivial_plan_costs_nothing() {
    let plan = QuasiProbabilityPlan::identity(5);
    assert_eq!(plan.cost(), 1.0);
    assert_eq!(plan.p_zero(), 1.0);
    let s = sample_instances(&plan, &ShotBudget::plain(1000, 10), 1).unwrap();
    assert_eq!(s.instances.len(), 1);
    assert_eq!(s.instances[0].shots, 1000);
}

#[test]
fn cost_is_product_of_layer_gammas() {
    let plan = QuasiProbabilityPlan { layers: (0..10).map(|_| layer(&[0.004, 0.006])).collect() };
    assert!((plan.total_mass() - 0.1).abs() < 1e-12);
    assert!((plan.cost() - 1.02f64.powi(10)).abs() < 1e-12);
    assert!((plan.cost() - 0.2f64.exp()).abs() < 5e-3);
}

fn apply_channel(rho: &DenseMatrix<f64>, id_weight: f64, terms: &[(PauliOperator, f64)]) -> DenseMatrix<f64> {
    let mut out = rho.scale(Complex::new(id_weight, 0.0));
    for (p, w) in terms {
        let m = DenseMatrix::from_pauli(p);
        out = out.add(&m.mul(rho).mul(&m).scale(Complex::new(*w, 0.0)));
    }
    out
}

#[test]
fn inverse_map_cancels_noise_to_first_order() {
    // two-qubit toy layer: noise then the sampled inverse, as superoperators
    let paulis: Vec<PauliOperator> = ["XI", "ZZ", "YX", "IZ"].iter().map(|s| s.parse().unwrap()).collect();
    let rel = [0.4, 0.3, 0.2, 0.1];
    let mut rho = DenseMatrix::<f64>::zeros(4);
    let amps = [0.5, -0.3, 0.6, 0.2];
    let norm: f64 = amps.iter().map(|a| a * a).sum();
    for r in 0..4 {
        for c in 0..4 {
            rho.set(r, c, Complex::new(amps[r] * amps[c] / norm, 0.0));
        }
    }
    let residual = |eps: f64| {
        let terms: Vec<(PauliOperator, f64)> = paulis.iter().cloned().zip(rel.iter().map(|r| r * eps)).collect();
        let inv = apply_channel(&rho, 1.0 + eps, &terms.iter().map(|(p, w)| (p.clone(), -w)).collect::<Vec<_>>());
        apply_channel(&inv, 1.0 - eps, &terms).max_abs_diff(&rho)
    };
    let noisy = {
        let terms: Vec<(PauliOperator, f64)> = paulis.iter().cloned().zip(rel.iter().map(|r| r * 0.02)).collect();
        apply_channel(&rho, 0.98, &terms).max_abs_diff(&rho)
    };
    let (r1, r2) = (residual(0.02), residual(0.01));
    assert!(r1 < 0.05 * noisy, "residual {r1} vs uncorrected {noisy}");
    assert!((r1 / r2 - 4.0).abs() < 0.2, "second-order scaling, ratio {}", r1 / r2);

    // the sampled plan reproduces the inverse map in expectation
    let lp = layer(&rel.map(|r| r * 0.02));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200_000;
    let mut counts = [0f64; 5];
    for _ in 0..n {
        match lp.sample(&mut rng) {
            None => counts[4] += 1.0,
            Some(e) => counts[e] += 1.0,
        }
    }
    let g = lp.gamma();
    assert!((counts[4] / n as f64 * g - 1.02).abs() < 4.0 * g * (0.98f64 * 0.02 / n as f64).sqrt() * 1.02 + 1e-3);
    for i in 0..4 {
        let want = rel[i] * 0.02 / g;
        let sigma = (want * (1.0 - want) / n as f64).sqrt();
        assert!((counts[i] / n as f64 - want).abs() < 4.0 * sigma);
    }
}

fn jw(steps: usize) -> (crate::encodings::EncodingInstance, crate::circuits::LayeredCircuit) {
    let enc = build_encoding(EncodingKind::Jw, LatticeSpec::chain(2)).unwrap();
    let c = trotterize(&enc, &FhmParams { n_trotter: steps, ..FhmParams::default() }).unwrap().clifford_round();
    (enc, c)
}

#[test]
fn plans_follow_the_partition() {
    let (_, c) = jw(3);
    let model = local_noise_model(&c, 0.99).unwrap();
    let part = partition(&c, &model).unwrap();
    let snt = build_quasiprobability(&model, &part, PecMode::UndetectableOnly).unwrap();
    let pec = build_quasiprobability(&model, &part, PecMode::All).unwrap();
    for (l, lp) in part.layers.iter().enumerate() {
        assert!((snt.layers[l].mass - lp.eta).abs() < 1e-12);
        assert!((pec.layers[l].mass - model.channel(l).epsilon()).abs() < 1e-12);
    }
    assert!(snt.cost() <= pec.cost());
    assert!(snt.p_zero() >= pec.p_zero());
    let other = trotterize(&build_encoding(EncodingKind::Jw, LatticeSpec::chain(2)).unwrap(), &FhmParams::default()).unwrap();
    let m2 = local_noise_model(&other, 0.99).unwrap();
    assert!(matches!(build_quasiprobability(&m2, &part, PecMode::All), Err(QemError::Mismatch(_))));
}

#[test]
fn grouped_zero_shot_split() {
    let eta = std::f64::consts::FRAC_1_SQRT_2;
    let plan = QuasiProbabilityPlan { layers: vec![layer(&[eta / 2.0, eta / 2.0]), layer(&[eta])] };
    assert!((plan.p_zero() - 0.5).abs() < 1e-12);
    let s = sample_instances(&plan, &ShotBudget { n_shots: 1000, n_circuits: 11, strategy: SamplingStrategy::GroupedZero }, 4).unwrap();
    assert_eq!(s.instances.len(), 11);
    assert_eq!(s.instances[0].shots, 500);
    assert!(s.instances[0].insertions.is_empty() && s.instances[0].sign == 1);
    assert!(s.instances[1..].iter().all(|i| i.shots == 50 && !i.insertions.is_empty()));
    assert_eq!(s.total_shots(), 1000);
    let plain = sample_instances(&plan, &ShotBudget::plain(1000, 7), 4).unwrap();
    assert_eq!(plain.instances.iter().map(|i| i.shots).collect::<Vec<_>>(), vec![143, 143, 143, 143, 143, 143, 142]);
    for bad in [
        ShotBudget::plain(10, 11),
        ShotBudget::plain(0, 0),
        ShotBudget { n_shots: 100, n_circuits: 1, strategy: SamplingStrategy::GroupedZero },
    ] {
        assert!(matches!(sample_instances(&plan, &bad, 0), Err(QemError::Budget(_))));
    }
}

#[test]
fn instance_frequencies_match_quasi_probabilities() {
    let plan = QuasiProbabilityPlan { layers: vec![layer(&[0.05, 0.1, 0.15])] };
    let n = 30_000;
    let s = sample_instances(&plan, &ShotBudget::plain(n, n), 8).unwrap();
    let g = plan.cost();
    let mut counts = [0usize; 4];
    for i in &s.instances {
        match i.insertions.as_slice() {
            [] => {
                assert_eq!(i.sign, 1);
                counts[3] += 1
            }
            [(0, e)] => {
                assert_eq!(i.sign, -1);
                counts[*e] += 1
            }
            other => panic!("unexpected insertions {other:?}"),
        }
    }
    let want = [0.05 / g, 0.1 / g, 0.15 / g, 1.3 / g];
    for k in 0..4 {
        let sigma = (want[k] * (1.0 - want[k]) / n as f64).sqrt();
        assert!((counts[k] as f64 / n as f64 - want[k]).abs() < 3.0 * sigma, "{k}: {} vs {}", counts[k], want[k]);
    }
}

fn record(instance: u64, shot: u64, sign: i8, fired: bool, outcomes: Vec<i8>) -> ShotRecord {
    ShotRecord { instance, shot, sign, checks: vec![fired], outcomes, accepted: !fired }
}

#[test]
fn postselection_counts_rejections() {
    let recs: Vec<ShotRecord> = (0..10).map(|i| record(0, i, 1, i < 3, vec![1])).collect();
    let ps = postselect(&recs);
    assert_eq!(ps.accepted.len(), 7);
    assert!((ps.rejection - 0.3).abs() < 1e-12);
    assert!((ps.cost() - 1.0 / 0.7f64.sqrt()).abs() < 1e-12);
    let clean: Vec<ShotRecord> = (0..10).map(|i| record(0, i, 1, false, vec![1])).collect();
    assert_eq!(postselect(&clean).rejection, 0.0);
    assert_eq!(postselect(&clean).cost(), 1.0);
    let circuits = SampledCircuits::unmodified(10, 1).unwrap();
    let all_bad: Vec<ShotRecord> = (0..10).map(|i| record(0, i, 1, true, vec![1])).collect();
    let layout = MeasurementLayout { observables: vec![0], globals: vec![], occupations: false };
    assert_eq!(estimate(QemProtocol::Ps, &all_bad, &layout, &circuits, &EstimateOptions::default()), Err(QemError::AllRejected));
}

#[test]
fn optimal_pp_allocation_splits_six_ways() {
    let groups = super::estimate::tests_support::assign(600, 4, 1.0 / 6.0, 1.0 / 3.0);
    let mut c = [0usize; 5];
    for g in groups {
        c[g] += 1;
    }
    assert_eq!(c, [100, 100, 100, 100, 200]);
    assert_eq!(PpAllocation::Optimal.fractions(2), Some((1.0 / 6.0, 1.0 / 3.0)));
    let (a, b) = PpAllocation::Custom { n_a: 1.0, n_b: 6.0 }.fractions(2).unwrap();
    assert!((4.0 * a + b - 1.0).abs() < 1e-12 && (b / a - 6.0).abs() < 1e-12);
}

#[test]
fn pp_in_codespace_returns_plain_expectation() {
    // O random ±1 with mean 0.4; both globals +1 on every shot
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 6000;
    let recs: Vec<ShotRecord> =
        (0..n).map(|i| record(i, 0, 1, false, vec![if rng.gen::<f64>() < 0.7 { 1 } else { -1 }, 1, 1])).collect();
    let circuits = SampledCircuits::unmodified(n as usize, n as usize).unwrap();
    let pp = pp_estimate(&recs, 0, &[1, 2], &circuits, true, PpAllocation::Optimal).unwrap();
    assert_eq!(pp.b, 1.0);
    assert_eq!(pp.var_b, 0.0);
    assert!(pp.valid);
    assert!((pp.estimate - 0.4).abs() < 4.0 * pp.variance.sqrt());
    // with B = 1 the variance is that of the four A means
    assert!((pp.variance - pp.var_a).abs() < 1e-15);
    let bad: Vec<ShotRecord> = (0..60).map(|i| record(i, 0, 1, false, vec![1, -1, -1])).collect();
    let c2 = SampledCircuits::unmodified(60, 60).unwrap();
    let pp = pp_estimate(&bad, 0, &[1, 2], &c2, true, PpAllocation::Optimal).unwrap();
    assert!(!pp.valid);
}

#[test]
fn single_circuit_is_plain_sample_statistics() {
    let ys = [1.0, -1.0, 1.0, 1.0, -1.0, 1.0];
    let mut t = CircuitTally::default();
    ys.iter().for_each(|&y| t.push(y));
    let e = linear_estimate(&[t], SamplingStrategy::Plain, 1.0, 1.0).unwrap();
    let m = ys.iter().sum::<f64>() / 6.0;
    let s2 = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / 5.0;
    assert!((e.mean - m).abs() < 1e-15);
    assert!((e.variance - s2 / 6.0).abs() < 1e-15);
}

/// Synthetic sign-weighted ensemble: circuit α has sign ±1 and true mean ν_α.
fn synthetic_tallies(rng: &mut ChaCha8Rng, nc: usize, ns: usize) -> Vec<CircuitTally> {
    (0..nc)
        .map(|_| {
            let sign = if rng.gen::<f64>() < 0.8 { 1.0 } else { -1.0 };
            let nu: f64 = rng.gen_range(-0.6..0.9);
            let mut t = CircuitTally::default();
            for _ in 0..ns {
                t.push(sign * if rng.gen::<f64>() < (1.0 + nu) / 2.0 { 1.0 } else { -1.0 });
            }
            t
        })
        .collect()
}

#[test]
fn variance_formula_tracks_bootstrap() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for ns in [10, 100] {
        let t = synthetic_tallies(&mut rng, 400, ns);
        let e = linear_estimate(&t, SamplingStrategy::Plain, 1.0, 1.6).unwrap();
        let boots: Vec<f64> = (0..400)
            .map(|_| {
                let res: Vec<CircuitTally> = (0..t.len()).map(|_| t[rng.gen_range(0..t.len())]).collect();
                linear_estimate(&res, SamplingStrategy::Plain, 1.0, 1.6).unwrap().mean
            })
            .collect();
        let bm = boots.iter().sum::<f64>() / boots.len() as f64;
        let bv = boots.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (boots.len() - 1) as f64;
        assert!((e.variance / bv - 1.0).abs() < 0.2, "n_s={ns}: formula {} bootstrap {bv}", e.variance);
    }
}

fn layout_for(k: usize, g: usize) -> MeasurementLayout {
    MeasurementLayout { observables: (0..k).collect(), globals: (k..k + g).collect(), occupations: false }
}

#[test]
fn full_pec_recovers_noiseless_values() {
    let (enc, c) = jw(3);
    let model = local_noise_model(&c, 0.99).unwrap();
    let init = prepare_initial_state(&enc, &alternating_occupation(&enc)).unwrap();
    let obs = enc.observable_sets().0.paulis;
    let k = obs.len();
    let plan = QuasiProbabilityPlan::full(&model);
    let n = 60_000;
    let circuits = sample_instances(&plan, &ShotBudget::plain(n, n), 21).unwrap();
    let cfg = EngineConfig::new(BackendKind::PauliFrameClifford);
    let recs = run(&c, &model, &init, &obs, &circuits.instances, 22, cfg.clone()).unwrap();
    let eng = crate::engine::Engine::new(&c, &model, &init, &obs, cfg).unwrap();
    let ideal = eng.noiseless_expectations();
    let est = estimate(QemProtocol::PecFull, &recs, &layout_for(k, 0), &circuits, &EstimateOptions::default()).unwrap();
    for (j, e) in est.observables.iter().enumerate() {
        assert!((e.mean - ideal[j]).abs() < 4.0 * e.variance.sqrt(), "obs {j}: {} vs {}", e.mean, ideal[j]);
    }
    assert!((est.c_pec - plan.cost()).abs() < 1e-12);
}

#[test]
fn snt_and_sv_chain_on_a_local_encoding() {
    let enc = build_encoding(EncodingKind::Vc, LatticeSpec::chain(2)).unwrap();
    let c = trotterize(&enc, &FhmParams { n_trotter: 1, ..FhmParams::default() })
        .unwrap()
        .insert_parity_checks(1, &Placement::Even)
        .unwrap()
        .clifford_round();
    let model = local_noise_model(&c, 0.995).unwrap();
    let init = prepare_initial_state(&enc, &alternating_occupation(&enc)).unwrap();
    let mut obs = enc.observable_sets().0.paulis;
    let k = obs.len();
    obs.extend(init.symmetries().iter().cloned());
    let g = init.symmetries().len();
    let part = partition(&c, &model).unwrap();
    let plan = build_quasiprobability(&model, &part, PecMode::UndetectableOnly).unwrap();
    let n = 60_000;
    let circuits = sample_instances(&plan, &ShotBudget::plain(n, n), 31).unwrap();
    let cfg = EngineConfig::new(BackendKind::PauliFrameClifford);
    let recs = run(&c, &model, &init, &obs, &circuits.instances, 32, cfg.clone()).unwrap();
    let ideal = crate::engine::Engine::new(&c, &model, &init, &obs, cfg.clone()).unwrap().noiseless_expectations();
    let layout = layout_for(k, g);
    let snt = estimate(QemProtocol::Snt, &recs, &layout, &circuits, &EstimateOptions::default()).unwrap();
    assert!(snt.rejection > 0.0 && snt.rejection < 0.5);
    let pm = snt.projector_mean.unwrap();
    assert!(pm > 0.5 && pm <= 1.01, "⟨M⟩ = {pm}");
    for (j, e) in snt.observables.iter().enumerate() {
        assert!((e.mean - ideal[j]).abs() < 4.0 * e.variance.sqrt() + 2e-3, "obs {j}: {} vs {}", e.mean, ideal[j]);
    }
    assert!((snt.c_total() - snt.c_ps * snt.c_pp.unwrap() * snt.c_pec).abs() < 1e-12);

    let plain = SampledCircuits::unmodified(n, n).unwrap();
    let raw = run(&c, &model, &init, &obs, &plain.instances, 33, cfg).unwrap();
    let sv = estimate(QemProtocol::Sv, &raw, &layout, &plain, &EstimateOptions::default()).unwrap();
    let ps = estimate(QemProtocol::Ps, &raw, &layout, &plain, &EstimateOptions::default()).unwrap();
    let un = estimate(QemProtocol::Unmitigated, &raw, &layout, &plain, &EstimateOptions::default()).unwrap();
    assert_eq!(un.rejection, 0.0);
    assert_eq!(sv.rejection, ps.rejection);
    assert_eq!(sv.c_pec, 1.0);
    // cost ordering between the SV-type and SNT chains
    assert!(sv.c_total() <= snt.c_total() + 0.05);
    let bias = |e: &ProtocolEstimate| e.observables.iter().zip(&ideal).map(|(o, i)| (o.mean - i).powi(2)).sum::<f64>();
    assert!(bias(&sv) < bias(&un));
}

#[test]
fn occupations_are_converted() {
    let recs: Vec<ShotRecord> = (0..4).map(|i| record(0, i, 1, false, vec![if i == 0 { 1 } else { -1 }])).collect();
    let circuits = SampledCircuits::unmodified(4, 1).unwrap();
    let layout = MeasurementLayout { observables: vec![0], globals: vec![], occupations: true };
    let e = estimate(QemProtocol::Unmitigated, &recs, &layout, &circuits, &EstimateOptions::default()).unwrap();
    assert!((e.observables[0].mean - 0.75).abs() < 1e-12);
    let v = estimate(QemProtocol::Unmitigated, &recs, &MeasurementLayout { occupations: false, ..layout }, &circuits, &EstimateOptions::default()).unwrap();
    assert!((e.observables[0].variance - v.observables[0].variance / 4.0).abs() < 1e-15);
}

#[test]
fn check_free_channel_layers_give_identity_layers() {
    let (_, c) = jw(1);
    let chans = vec![LayerNoiseChannel::empty(); c.num_layers()];
    let model = NoiseModel::from_channels(&c, chans, 0.0).unwrap();
    let plan = QuasiProbabilityPlan::full(&model);
    assert!(plan.is_identity());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn allocations_fill_the_budget(g in 1usize..5, n_a in 0.01f64..10.0, n_b in 0.01f64..10.0) {
            let k = (1usize << g) as f64;
            for alloc in [PpAllocation::Optimal, PpAllocation::Custom { n_a, n_b }] {
                let (fa, fb) = alloc.fractions(g).unwrap();
                prop_assert!((k * fa + fb - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn sampled_instances_use_every_shot(shots in 2usize..5000, circ_frac in 0.0f64..1.0, seed in any::<u64>(), grouped in any::<bool>()) {
            let (_, c) = jw(2);
            let m = local_noise_model(&c, 0.99).unwrap();
            let plan = QuasiProbabilityPlan::full(&m);
            let n_circuits = 2 + ((shots - 2) as f64 * circ_frac) as usize;
            let strategy = if grouped { SamplingStrategy::GroupedZero } else { SamplingStrategy::Plain };
            let s = sample_instances(&plan, &ShotBudget { n_shots: shots, n_circuits, strategy }, seed).unwrap();
            prop_assert_eq!(s.total_shots(), shots);
            prop_assert_eq!(s.instances.len(), n_circuits);
            prop_assert!((s.cost - plan.cost()).abs() < 1e-12);
            if grouped {
                prop_assert!(s.instances[1..].iter().all(|i| !i.insertions.is_empty()));
            }
        }
    }
}
