use super::*;

fn small(protocols: Vec<QemProtocol>) -> ExperimentSpec {
    ExperimentSpec {
        encoding: EncodingKind::Vc,
        lattice: LatticeSpec::chain(2),
        fhm: FhmParams { n_trotter: 2, ..FhmParams::default() },
        clifford: true,
        fidelity: 0.995,
        protocols,
        n_shots: 20_000,
        n_circuits: 20_000,
        threads: Some(2),
        seed: 5,
        ..ExperimentSpec::default()
    }
}

#[test]
fn noiseless_run_has_no_bias_and_no_cost() {
    let spec = ExperimentSpec { fidelity: 1.0, ..small(QemProtocol::ALL.to_vec()) };
    let prep = prepare(&spec).unwrap();
    assert_eq!(prep.metrics.lambda, 0.0);
    let (res, _) = run_experiment(&spec, &prep).unwrap();
    for r in &res.protocols {
        assert!(r.bias.theta.abs() <= 3.0 * r.bias.var_theta.sqrt() + 1e-12, "{}: Θ={}", r.estimate.protocol, r.bias.theta);
        assert_eq!(r.estimate.rejection, 0.0);
        assert_eq!(r.cost.c_pec, 1.0);
        assert_eq!(r.cost.beta, None);
    }
}

#[test]
fn runs_are_deterministic_and_thread_independent() {
    let spec = small(vec![QemProtocol::Sv, QemProtocol::Snt]);
    let prep = prepare(&spec).unwrap();
    let (a, _) = run_experiment(&spec, &prep).unwrap();
    let spec1 = ExperimentSpec { threads: Some(1), ..spec };
    let (b, _) = run_experiment(&spec1, &prep).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mitigation_reduces_bias() {
    let spec = ExperimentSpec { fidelity: 0.99, n_shots: 60_000, n_circuits: 60_000, ..small(QemProtocol::ALL.to_vec()) };
    let prep = prepare(&spec).unwrap();
    let (res, batches) = run_experiment(&spec, &prep).unwrap();
    assert_eq!(batches.len(), 3);
    let th = |p| res.get(p).unwrap().bias.theta;
    assert!(th(QemProtocol::Snt) < th(QemProtocol::Unmitigated));
    assert!(th(QemProtocol::Sv) < th(QemProtocol::Unmitigated));
    let pec = res.get(QemProtocol::PecFull).unwrap();
    assert!(pec.bias.theta < 4.0 * pec.bias.var_theta.sqrt());
    assert!(res.r_ps > 0.5);
}

#[test]
fn validation_names_the_field() {
    let msg = |s: ExperimentSpec| s.validate().unwrap_err().to_string();
    assert!(msg(ExperimentSpec { fidelity: 1.5, ..Default::default() }).contains("fidelity"));
    assert!(msg(ExperimentSpec { n_circuits: 10, n_shots: 5, ..Default::default() }).contains("n_shots"));
    assert!(msg(ExperimentSpec { check_rounds: 11, ..Default::default() }).contains("check_rounds"));
    assert!(msg(ExperimentSpec { backend: Some(BackendKind::PauliFrameClifford), ..Default::default() }).contains("backend"));
    ExperimentSpec::default().validate().unwrap();
}
