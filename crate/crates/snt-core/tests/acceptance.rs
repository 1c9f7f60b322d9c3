//! Acceptance checks. Every test writes one `PASS crit N: ...` or
//! `FAIL crit N: ...` line to stderr (bypassing the test harness capture) and
//! then asserts on the outcome.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snt_core::circuits::{FhmParams, LayeredCircuit, Placement};
use snt_core::classify::{classify_dense, classify_fault};
use snt_core::encodings::{build_encoding, EncodingKind, LatticeSpec};
use snt_core::engine::ShotRecord;
use snt_core::experiment::{prepare, run_experiment, ExperimentResult, ExperimentSpec};
use snt_core::noise::entanglement_fidelity;
use snt_core::qem::{linear_estimate, pp_estimate, CircuitTally, PpAllocation, QemProtocol, SampledCircuits, SamplingStrategy};
use snt_core::resource::{phase_diagram, required_fidelity, HardwareProfile, PhasePoint, ResourceModel};
use snt_core::stats::{analytic_r_jw, monte_carlo_r, RVariant};
use snt_core::{CliffordTableau, Gate, Letter, PauliOperator};
use std::collections::BTreeSet;
use std::io::Write;

fn report(crit: u32, ok: bool, detail: &str) {
    let line = format!("{} crit {crit}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {crit} failed: {detail}");
}

/// Four-site chain, Clifford circuit, checks once at the end.
fn chain_spec(encoding: EncodingKind, steps: usize, protocols: Vec<QemProtocol>, shots: usize) -> ExperimentSpec {
    ExperimentSpec {
        encoding,
        lattice: LatticeSpec::chain(4),
        fhm: FhmParams { n_trotter: steps, ..FhmParams::default() },
        clifford: true,
        check_rounds: 1,
        protocols,
        n_shots: shots,
        n_circuits: shots,
        seed: 2024,
        ..ExperimentSpec::default()
    }
}

/// Gate fidelity at which the evolution layers of `spec` have the given CSP.
/// λ = −N_TQG·ln F_ent is linear in ln F_ent, so one reference run fixes N_TQG.
fn fidelity_for_csp(spec: &ExperimentSpec, csp: f64) -> f64 {
    let f_ref = 0.999;
    let prep = prepare(&ExperimentSpec { fidelity: f_ref, ..spec.clone() }).unwrap();
    let n_tqg = prep.metrics.lambda / -entanglement_fidelity(f_ref).ln();
    let f_ent = csp.powf(1.0 / n_tqg);
    (4.0 * f_ent + 1.0) / 5.0
}

fn run(spec: &ExperimentSpec) -> ExperimentResult {
    let prep = prepare(spec).unwrap();
    run_experiment(spec, &prep).unwrap().0
}

fn beta_of(res: &ExperimentResult, p: QemProtocol) -> f64 {
    let r = res.get(p).unwrap();
    let alpha = if r.estimate.projector_mean.is_some() { 1.5 } else { 1.0 };
    (r.cost.c_total / alpha).ln() / r.cost.lambda
}

#[test]
fn crit_01_beta_reproduction() {
    let fidelities = [0.9995, 0.9992];
    let targets = [(EncodingKind::Vc, 0.77), (EncodingKind::Dk, 0.81), (EncodingKind::Le, 0.70), (EncodingKind::Hx, 0.66)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (enc, want) in targets {
        let betas: Vec<f64> = fidelities
            .iter()
            .map(|&f| beta_of(&run(&ExperimentSpec { fidelity: f, ..chain_spec(enc, 10, vec![QemProtocol::Snt], 380_000) }), QemProtocol::Snt))
            .collect();
        let beta = betas.iter().sum::<f64>() / betas.len() as f64;
        ok &= (beta - want).abs() <= 0.08;
        parts.push(format!("{} {beta:.3} (want {want}±0.08)", enc.name()));
    }
    let jw: Vec<f64> = fidelities
        .iter()
        .map(|&f| {
            let spec = ExperimentSpec {
                encoding: EncodingKind::Jw,
                lattice: LatticeSpec::chain(2),
                clifford: false,
                fidelity: f,
                protocols: vec![QemProtocol::Snt],
                n_shots: 150_000,
                n_circuits: 150_000,
                seed: 2024,
                ..ExperimentSpec::default()
            };
            beta_of(&run(&spec), QemProtocol::Snt)
        })
        .collect();
    let beta_jw = jw.iter().sum::<f64>() / jw.len() as f64;
    ok &= (beta_jw - 1.3).abs() <= 0.15;
    parts.push(format!("JW 2-site {beta_jw:.3} (want 1.3±0.15)"));
    report(1, ok, &format!("SNT beta at F in {fidelities:?}: {}", parts.join(", ")));
}

#[test]
fn crit_02_detectability_ratios() {
    let table = [
        (EncodingKind::Jw, 0.0, 0.64),
        (EncodingKind::Le, 0.89, 0.02),
        (EncodingKind::Dk, 0.80, 0.03),
        (EncodingKind::Vc, 0.83, 0.05),
        (EncodingKind::Hx, 0.91, 0.02),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (enc, ps, pp) in table {
        let prep = prepare(&ExperimentSpec { fidelity: 0.999, ..chain_spec(enc, 10, vec![QemProtocol::Sv], 1) }).unwrap();
        let (r_ps, r_pp) = (prep.partition.r_ps, prep.partition.r_pp);
        let good = (r_ps - ps).abs() <= 0.03 && (r_pp - pp).abs() <= 0.03;
        ok &= good;
        parts.push(format!(
            "{} {:.1}/{:.1}% (want {:.0}/{:.0}){}",
            enc.name(),
            100.0 * r_ps,
            100.0 * r_pp,
            100.0 * ps,
            100.0 * pp,
            if good { "" } else { " off" }
        ));
    }
    report(2, ok, &format!("R_PS/R_PP on the 4-site chain: {}", parts.join(", ")));
}

#[test]
fn crit_03_analytic_vs_monte_carlo() {
    let mut ok = true;
    let mut worst = (0.0f64, String::new());
    for (sites, n_q) in [(2, 4u32), (4, 8), (8, 16)] {
        let enc = build_encoding(EncodingKind::Jw, LatticeSpec::chain(sites)).unwrap();
        let stabs = enc.global_stabilizers();
        assert_eq!(enc.num_qubits(), n_q as usize);
        for p in [1e-3, 1e-2, 1e-1] {
            let (p_xy, p_z) = (2.0 * p / 3.0, p / 3.0);
            let (mc, _) = monte_carlo_r(stabs, p_xy, p_z, 100_000, 31 + n_q as u64).unwrap();
            let exact = analytic_r_jw(p_xy, p_z, n_q, RVariant::SpinLocal).unwrap();
            let d = (mc - exact).abs();
            ok &= d <= 0.01;
            if d >= worst.0 {
                worst = (d, format!("N_Q={n_q} p={p}: MC {mc:.4} vs {exact:.4}"));
            }
        }
    }
    report(3, ok, &format!("9 (p, N_Q) points, largest deviation {:.2} pp at {}", 100.0 * worst.0, worst.1));
}

fn random_pauli(rng: &mut ChaCha8Rng, n: usize) -> PauliOperator {
    loop {
        let letters: Vec<(usize, Letter)> = (0..n).map(|q| (q, [Letter::I, Letter::X, Letter::Y, Letter::Z][rng.gen_range(0..4)])).collect();
        let p = PauliOperator::from_letters(n, &letters).unwrap();
        if !p.is_trivial() {
            return p;
        }
    }
}

fn random_clifford(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<Gate> {
    (0..len)
        .map(|_| {
            let q = rng.gen_range(0..n);
            match rng.gen_range(0..4) {
                0 => Gate::H(q),
                1 => Gate::S(q),
                2 => Gate::Sx(q),
                _ => {
                    let mut r = rng.gen_range(0..n - 1);
                    if r >= q {
                        r += 1;
                    }
                    Gate::Cz(q, r)
                }
            }
        })
        .collect()
}

/// Random layered circuit on up to four data qubits plus up to two ancillas.
/// Every layer is `V G V†` where `G` fixes `Z_0..Z_{m-1}`, so the images
/// `V Z_i V†` are exact stabilizers; rotations only use axes commuting with them.
fn random_symmetric_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, max_layers: usize) -> LayeredCircuit {
    let nd = rng.gen_range(2..=max_qubits.min(4));
    let m = rng.gen_range(1..=nd.min(3));
    let n_local = rng.gen_range(0..=m.min(max_qubits - nd));
    let v = random_clifford(rng, nd, 4 * nd);
    let tv = CliffordTableau::from_gates(nd, &v);
    let stabs: Vec<PauliOperator> = (0..m)
        .map(|i| {
            let s = tv.conjugate(&PauliOperator::single(nd, i, Letter::Z)).unwrap();
            if rng.gen_bool(0.3) {
                s.negated()
            } else {
                s
            }
        })
        .collect();
    let v_dag: Vec<Gate> = v.iter().rev().map(Gate::inverse).collect();
    let n_layers = rng.gen_range(1..=max_layers);
    let axes: Vec<(usize, Letter)> = (0..nd)
        .flat_map(|q| Letter::NON_IDENTITY.map(|l| (q, l)))
        .filter(|&(q, l)| stabs.iter().all(|s| s.commutes_with(&PauliOperator::single(nd, q, l))))
        .collect();
    let mut ir = format!("snt-circuit 1\nqubits data={nd} ancilla=0\n");
    for (k, s) in stabs.iter().enumerate() {
        let kind = if k < n_local { "local" } else { "global" };
        ir += &format!("{kind} S{k} {s}\n");
    }
    ir += &format!("step_ends {}\n", (0..n_layers).map(|l| l.to_string()).collect::<Vec<_>>().join(" "));
    for l in 0..n_layers {
        let mut g = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let q = rng.gen_range(0..nd);
            let free = q >= m;
            g.push(match rng.gen_range(0..5) {
                0 if free => Gate::H(q),
                1 if free => Gate::Sx(q),
                2 | 3 => {
                    let mut r = rng.gen_range(0..nd - 1);
                    if r >= q {
                        r += 1;
                    }
                    Gate::Cz(q, r)
                }
                _ => Gate::S(q),
            });
        }
        let gates: Vec<String> = v_dag.iter().chain(&g).chain(&v).map(|g| g.to_string()).collect();
        ir += &format!("CLIFF {l}: {}", gates.join("; "));
        let n_rot = if axes.is_empty() { 0 } else { rng.gen_range(0..=2) };
        if n_rot > 0 {
            let rots: Vec<String> = (0..n_rot)
                .map(|_| {
                    let (q, a) = *axes.choose(rng).unwrap();
                    format!("r{} {q} {:?}", a.as_char().to_ascii_lowercase(), rng.gen_range(-2.0..2.0f64))
                })
                .collect();
            ir += &format!(" | ROT {l}: {}", rots.join("; "));
        }
        ir += &format!(" | STEP {l}\n");
    }
    let c = LayeredCircuit::from_ir(&ir).unwrap();
    if n_local > 0 {
        let at = rng.gen_range(1..=n_layers);
        c.insert_parity_checks(1, &Placement::AfterSteps(vec![at])).unwrap()
    } else {
        c
    }
}

#[test]
fn crit_04_classification_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let (mut cases, mut mismatches, mut max_q, mut max_l) = (0, 0, 0, 0);
    let mut classes = BTreeSet::new();
    while cases < 1000 {
        let c = random_symmetric_circuit(&mut rng, 6, 6);
        let l = rng.gen_range(0..c.num_layers());
        let p = random_pauli(&mut rng, c.num_qubits());
        let Some(want) = classify_dense(&c, l, &p) else { continue };
        let got = classify_fault(&c, l, &p).unwrap();
        if got != want {
            mismatches += 1;
        }
        classes.insert(format!("{got:?}"));
        max_q = max_q.max(c.num_qubits());
        max_l = max_l.max(c.num_layers());
        cases += 1;
    }
    report(
        4,
        mismatches == 0 && classes.len() == 3,
        &format!("{mismatches} mismatches in {cases} random circuits (up to {max_q} qubits, {max_l} layers incl. checks), classes seen {classes:?}"),
    );
}

#[test]
fn crit_05_bias_scaling() {
    let csps = [0.95, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4];
    let shots = 1_500_000;
    // (encoding index, ln λ, ln Θ) of the resolved points
    let mut pts: Vec<(usize, f64, f64)> = Vec::new();
    let mut excluded = 0;
    let local = [EncodingKind::Le, EncodingKind::Vc, EncodingKind::Dk, EncodingKind::Hx];
    for (i, &enc) in local.iter().enumerate() {
        let base = chain_spec(enc, 10, vec![QemProtocol::Snt], shots);
        for &csp in &csps {
            let spec = ExperimentSpec { fidelity: fidelity_for_csp(&base, csp), ..base.clone() };
            let res = run(&spec);
            let b = &res.get(QemProtocol::Snt).unwrap().bias;
            if b.resolved(2.0) {
                pts.push((i, res.metrics.lambda.ln(), b.theta.ln()));
            } else {
                excluded += 1;
            }
        }
    }
    // common slope with one intercept per encoding
    let (mut sxy, mut sxx) = (0.0, 0.0);
    let mut used = 0;
    for i in 0..local.len() {
        let g: Vec<&(usize, f64, f64)> = pts.iter().filter(|p| p.0 == i).collect();
        if g.len() < 2 {
            continue;
        }
        used += g.len();
        let mx = g.iter().map(|p| p.1).sum::<f64>() / g.len() as f64;
        let my = g.iter().map(|p| p.2).sum::<f64>() / g.len() as f64;
        sxy += g.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum::<f64>();
        sxx += g.iter().map(|p| (p.1 - mx).powi(2)).sum::<f64>();
    }
    let ok_data = used >= 4 && sxx > 0.0;
    // Θ is the squared bias, so Bias ∝ λ^e means Θ ∝ λ^{2e}
    let e = if ok_data { sxy / sxx / 2.0 } else { f64::NAN };
    report(
        5,
        ok_data && (e - 2.0).abs() <= 0.3,
        &format!("fitted exponent e = {e:.2} (want 2±0.3) from {used} resolved points, {excluded} below the resolution band"),
    );
}

#[test]
fn crit_06_multi_round_rescue() {
    let base = ExperimentSpec {
        check_rounds: 4,
        ..chain_spec(EncodingKind::Dk, 12, vec![QemProtocol::Unmitigated, QemProtocol::Snt], 400_000)
    };
    let spec = ExperimentSpec { fidelity: fidelity_for_csp(&base, 0.01), ..base };
    let res = run(&spec);
    let snt = &res.get(QemProtocol::Snt).unwrap().bias;
    let raw = res.get(QemProtocol::Unmitigated).unwrap().bias.theta;
    report(
        6,
        snt.theta <= 3e-2 && snt.theta * 10.0 <= raw,
        &format!(
            "DK, 12 steps, 4 rounds, F={:.5}, λ={:.2}, CSP={:.3}: SNT Θ={:.2e} ± {:.1e}, unmitigated Θ={raw:.2e}",
            spec.fidelity,
            res.metrics.lambda,
            res.metrics.csp,
            snt.theta,
            snt.var_theta.sqrt()
        ),
    );
}

/// Shots of O, S_↑, S_↓ with ⟨S_↑⟩ = ⟨S_↓⟩ = ⟨S_↑S_↓⟩ = 1/3 (so the B variance
/// sits on its upper limit) and O = +1 in the symmetric subspace, random outside.
fn pp_ensemble(rng: &mut ChaCha8Rng, n: usize) -> Vec<ShotRecord> {
    (0..n as u64)
        .map(|shot| {
            let u: f64 = rng.gen();
            let (s1, s2) = if u < 0.5 {
                (1, 1)
            } else if u < 2.0 / 3.0 {
                (1, -1)
            } else if u < 5.0 / 6.0 {
                (-1, 1)
            } else {
                (-1, -1)
            };
            let o = if (s1, s2) == (1, 1) || rng.gen_bool(0.5) { 1 } else { -1 };
            ShotRecord { instance: 0, shot, sign: 1, checks: vec![], outcomes: vec![o, s1, s2], accepted: true }
        })
        .collect()
}

#[test]
fn crit_07_pp_shot_split() {
    let n = 24_000;
    let allocs = [
        ("N/6,N/3", PpAllocation::Optimal),
        ("N/12,N/2", PpAllocation::Custom { n_a: 1.0 / 12.0, n_b: 0.5 }),
        ("N/4,N/3", PpAllocation::Custom { n_a: 0.25, n_b: 1.0 / 3.0 }),
    ];
    let circuits = SampledCircuits::unmodified(n, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut plug_in = [0.0f64; 3];
    let mut estimates = [Vec::new(), Vec::new(), Vec::new()];
    let ensembles = 100;
    for _ in 0..ensembles {
        let recs = pp_ensemble(&mut rng, n);
        for (k, (_, a)) in allocs.iter().enumerate() {
            let e = pp_estimate(&recs, 0, &[1, 2], &circuits, false, *a).unwrap();
            plug_in[k] += e.variance / ensembles as f64;
            estimates[k].push(e.estimate);
        }
    }
    let spread: Vec<f64> = estimates
        .iter()
        .map(|v| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        })
        .collect();
    // the spread of 100 estimates has a relative error of about 14%
    let consistent = (0..3).all(|k| (spread[k] / plug_in[k] - 1.0).abs() < 0.45);
    let optimal = plug_in[0] <= plug_in[1] && plug_in[0] <= plug_in[2];
    let detail = allocs
        .iter()
        .enumerate()
        .map(|(k, (name, _))| format!("{name}: {:.3e} (spread {:.3e})", plug_in[k], spread[k]))
        .collect::<Vec<_>>()
        .join(", ");
    report(7, optimal && consistent, &format!("mean estimator variance over {ensembles} ensembles of {n} shots: {detail}"));
}

#[test]
fn crit_08_measurement_error_cost() {
    let eps = 0.05;
    let base = chain_spec(EncodingKind::Le, 10, vec![QemProtocol::Ps], 400_000);
    let mut ok = true;
    let mut parts = Vec::new();
    for csp in [0.95, 0.9, 0.3, 0.15] {
        let f = fidelity_for_csp(&base, csp);
        let clean = run(&ExperimentSpec { fidelity: f, ..base.clone() });
        let noisy = run(&ExperimentSpec { fidelity: f, meas_error: eps, ..base.clone() });
        let c = |r: &ExperimentResult| r.get(QemProtocol::Ps).unwrap().estimate.c_ps;
        let increase = c(&noisy) / c(&clean);
        let bound = 1.0 / noisy.metrics.msp.sqrt();
        let good = if csp >= 0.9 { (increase / bound - 1.0).abs() <= 0.05 } else { increase < bound };
        ok &= good;
        parts.push(format!("CSP {csp}: {increase:.4} vs {bound:.4}"));
    }
    report(8, ok, &format!("LE, eps_meas={eps}, C_PS increase vs 1/sqrt(MSP): {}", parts.join(", ")));
}

#[test]
fn crit_09_pec_unbiased() {
    let base = chain_spec(EncodingKind::Dk, 10, vec![QemProtocol::PecFull], 400_000);
    let spec = ExperimentSpec { fidelity: fidelity_for_csp(&base, 0.5), ..base };
    let prep = prepare(&spec).unwrap();
    let (res, _) = run_experiment(&spec, &prep).unwrap();
    let pec = res.get(QemProtocol::PecFull).unwrap();
    let worst_z = pec
        .estimate
        .observables
        .iter()
        .zip(&prep.reference)
        .map(|(o, r)| (o.mean - r).abs() / o.variance.sqrt())
        .fold(0.0f64, f64::max);
    let predicted: f64 = prep.model.channels().iter().map(|c| 1.0 + 2.0 * c.epsilon()).product();
    let measured = pec.cost.c_total;
    let cost_ok = (measured / predicted - 1.0).abs() <= 0.15;
    report(
        9,
        worst_z <= 4.0 && cost_ok,
        &format!(
            "DK, CSP={:.3}: largest |mean - exact|/sigma = {worst_z:.2} over {} observables, cost {measured:.4} vs prod(1+2eps) {predicted:.4}",
            res.metrics.csp,
            prep.reference.len()
        ),
    );
}

fn bootstrap_variance(t: &[CircuitTally], scale: f64, reps: usize, rng: &mut ChaCha8Rng) -> f64 {
    let boots: Vec<f64> = (0..reps)
        .map(|_| {
            let res: Vec<CircuitTally> = (0..t.len()).map(|_| t[rng.gen_range(0..t.len())]).collect();
            linear_estimate(&res, SamplingStrategy::Plain, 1.0, scale).unwrap().mean
        })
        .collect();
    let m = boots.iter().sum::<f64>() / reps as f64;
    boots.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (reps - 1) as f64
}

/// Repeated grouped-zero estimates on a synthetic population: the 0-circuit
/// has mean 0.5; the others carry sign −1 with probability 0.2 and a mean
/// uniform in [−0.6, 0.9]. Returns (empirical variance, Var_c|α≠0[μ]).
fn grouped_zero_variance(p0: f64, n_c: usize, n_shots: usize, reps: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let shots = |rng: &mut ChaCha8Rng, mu: f64, n: usize| {
        let mut t = CircuitTally::default();
        for _ in 0..n {
            t.push(if rng.gen::<f64>() < (1.0 + mu) / 2.0 { 1.0 } else { -1.0 });
        }
        t
    };
    // population moments of sign·ν: E = 0.6·0.15, E[x²] = (0.9³ + 0.6³)/4.5
    let mean = 0.6 * 0.15;
    let var_nonzero = (0.9f64.powi(3) + 0.6f64.powi(3)) / 4.5 - mean * mean;
    let n0 = (n_shots as f64 * p0).round() as usize;
    let per = (n_shots - n0) / (n_c - 1);
    let est: Vec<f64> = (0..reps)
        .map(|_| {
            let mut t = vec![shots(rng, 0.5, n0)];
            for _ in 1..n_c {
                let sign = if rng.gen::<f64>() < 0.8 { 1.0 } else { -1.0 };
                let nu: f64 = rng.gen_range(-0.6..0.9);
                let mut c = shots(rng, nu, per);
                c.sum *= sign;
                t.push(c);
            }
            linear_estimate(&t, SamplingStrategy::GroupedZero, p0, 1.0).unwrap().mean
        })
        .collect();
    let m = est.iter().sum::<f64>() / reps as f64;
    (est.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps - 1) as f64, var_nonzero)
}

#[test]
fn crit_10_variance_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let base = chain_spec(EncodingKind::Le, 4, vec![QemProtocol::PecFull], 1);
    let f = fidelity_for_csp(&base, 0.5);
    let n_c = 400;
    let mut ok = true;
    let mut parts = Vec::new();
    for n_s in [10, 100, 1000] {
        let spec = ExperimentSpec { fidelity: f, n_shots: n_c * n_s, n_circuits: n_c, seed: 10 + n_s as u64, ..base.clone() };
        let prep = prepare(&spec).unwrap();
        let (_, batches) = run_experiment(&spec, &prep).unwrap();
        let b = &batches[0];
        let mut t = vec![CircuitTally::default(); b.circuits.instances.len()];
        for r in &b.records {
            t[r.instance as usize].push(r.sign as f64 * r.outcomes[0] as f64);
        }
        let formula = linear_estimate(&t, SamplingStrategy::Plain, 1.0, b.circuits.cost).unwrap().variance;
        let boot = bootstrap_variance(&t, b.circuits.cost, 2000, &mut rng);
        let good = (formula / boot - 1.0).abs() <= 0.1;
        ok &= good;
        parts.push(format!("n_s={n_s}: {formula:.3e} vs bootstrap {boot:.3e}"));
    }
    for p0 in [0.5, 0.68] {
        let n_c = 40;
        let (emp, var_nonzero) = grouped_zero_variance(p0, n_c, 80_000, 400, &mut rng);
        let factor = emp / (var_nonzero / (n_c - 1) as f64);
        let want = (1.0 - p0).powi(2);
        let good = (factor / want - 1.0).abs() <= 0.2;
        ok &= good;
        parts.push(format!("p0={p0}: reduction {factor:.4} vs (1-p0)^2 {want:.4}"));
    }
    report(10, ok, &parts.join(", "));
}

fn winners(points: &[PhasePoint]) -> BTreeSet<String> {
    points.iter().filter_map(|p| p.best.as_ref()).map(|b| format!("{}+{}", b.encoding.name(), b.protocol.name())).collect()
}

#[test]
fn crit_11_resource_anchors() {
    let model = ResourceModel::reference();
    let hw = HardwareProfile::twelve_hours(0.999);
    let six = LatticeSpec::new(6, 6, true).unwrap();
    let req = required_fidelity(&six, 15, QemProtocol::Snt, 0.05, &hw, &model).unwrap();
    let anchor = (0.9990..=0.9997).contains(&req.f_avg);

    let squares: Vec<LatticeSpec> = (3..=8).map(|n| LatticeSpec::new(n, n, true).unwrap()).collect();
    let fidelities = [0.99, 0.995, 0.998, 0.999, 0.9995, 0.9998, 0.9999, 0.99999];
    // lowest fidelity with a usable strategy, few circuits
    let few = phase_diagram(&squares, &fidelities, 10, &hw.with_circuits(1e3), &model).unwrap();
    let low: Vec<PhasePoint> = squares
        .iter()
        .filter_map(|l| few.iter().filter(|p| p.nx == l.nx && p.best.is_some()).min_by(|a, b| a.f_avg.total_cmp(&b.f_avg)).cloned())
        .collect();
    let low_w = winners(&low);
    let low_ok = !low.is_empty() && low_w.iter().all(|w| w == "DK+sv");
    // highest fidelity, many circuits
    let many = phase_diagram(&squares, &[0.99999], 10, &hw.with_circuits(hw.n_shots), &model).unwrap();
    let high_w = winners(&many);
    let high_ok = many.iter().all(|p| p.best.is_some()) && high_w.iter().all(|w| w == "DK+pec");
    // 1D chains over the whole grid
    let chains: Vec<LatticeSpec> = [4, 8, 16, 32, 64].into_iter().map(LatticeSpec::chain).collect();
    let mut one_d = phase_diagram(&chains, &fidelities, 10, &hw.with_circuits(1e3), &model).unwrap();
    one_d.extend(phase_diagram(&chains, &fidelities, 10, &hw.with_circuits(hw.n_shots), &model).unwrap());
    let encs: BTreeSet<&str> = one_d.iter().filter_map(|p| p.best.as_ref()).map(|b| b.encoding.name()).collect();
    let one_d_ok = !encs.is_empty() && encs.iter().all(|e| *e == "JW" || *e == "LE");
    report(
        11,
        anchor && low_ok && high_ok && one_d_ok,
        &format!(
            "required F(6x6, 15 steps, SNT, 5%) = {:.5} ({}+{} rounds {}){}; low F/few circuits winners {low_w:?}{}; high F/many circuits winners {high_w:?}{}; 1D encodings {encs:?}{}",
            req.f_avg,
            req.best.encoding.name(),
            req.best.protocol.name(),
            req.best.check_rounds,
            if anchor { "" } else { " off" },
            if low_ok { "" } else { " off" },
            if high_ok { "" } else { " off" },
            if one_d_ok { "" } else { " off" },
        ),
    );
}
