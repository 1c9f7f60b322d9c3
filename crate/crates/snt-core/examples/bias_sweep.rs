//! Squared bias of each protocol against λ on the 4-site Clifford benchmark.
//! Prints one CSV row per (encoding, fidelity, protocol).
//!
//! cargo run --release --example bias_sweep -- [shots] [sites] [clifford 0|1] [fidelities,..] [encodings...]

use snt_core::encodings::{EncodingKind, LatticeSpec};
use snt_core::experiment::{prepare, run_experiment, ExperimentSpec};
use snt_core::qem::QemProtocol;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let shots: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(380_000);
    let sites: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let clifford = args.get(2).is_none_or(|s| s != "0");
    let fids: Vec<f64> = match args.get(3) {
        Some(s) => s.split(',').map(|x| x.parse().expect("fidelity")).collect(),
        None => vec![0.9998, 0.9995, 0.999, 0.998, 0.996, 0.993, 0.99, 0.985, 0.98],
    };
    let kinds: Vec<EncodingKind> = if args.len() > 4 {
        args[4..].iter().map(|s| s.parse().expect("encoding name")).collect()
    } else {
        EncodingKind::ALL.to_vec()
    };
    println!("encoding,fidelity,lambda,lambda_prime,protocol,theta,var_theta,c_total,beta");
    for kind in kinds {
        for &f in &fids {
            let spec = ExperimentSpec {
                encoding: kind,
                lattice: LatticeSpec::chain(sites),
                clifford,
                fidelity: f,
                protocols: vec![QemProtocol::Unmitigated, QemProtocol::Sv, QemProtocol::Snt],
                n_shots: shots,
                n_circuits: shots,
                seed: 17,
                ..ExperimentSpec::default()
            };
            let t = std::time::Instant::now();
            let prep = prepare(&spec).expect("valid benchmark");
            let (res, _) = match run_experiment(&spec, &prep) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{kind} F={f}: {e}");
                    continue;
                }
            };
            for r in &res.protocols {
                println!(
                    "{kind},{f},{:.4},{:.4},{},{:.3e},{:.3e},{:.3},{}",
                    res.metrics.lambda,
                    res.metrics.lambda_prime,
                    r.estimate.protocol,
                    r.bias.theta,
                    r.bias.var_theta,
                    r.cost.c_total,
                    r.cost.beta.map_or("".into(), |b| format!("{b:.3}"))
                );
            }
            eprintln!("{kind} F={f} {:.1}s", t.elapsed().as_secs_f64());
        }
    }
}
