use super::*;
use crate::dense::DenseMatrix;
use crate::pauli::{gf2_rank, StabilizerState};
use num_complex::Complex;

type M = DenseMatrix<f64>;

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

fn lattices_for(kind: EncodingKind) -> Vec<LatticeSpec> {
    let mut out = vec![];
    match kind {
        EncodingKind::Jw | EncodingKind::Le => {
            out.push(LatticeSpec::chain(2));
            out.push(LatticeSpec::chain(5));
            out.push(LatticeSpec::new(3, 3, false).unwrap());
        }
        EncodingKind::Vc | EncodingKind::Hx => {
            out.push(LatticeSpec::chain(2));
            out.push(LatticeSpec::chain(4));
            out.push(LatticeSpec::new(2, 2, false).unwrap());
        }
        EncodingKind::Dk => {
            out.push(LatticeSpec::chain(3));
            out.push(LatticeSpec::chain(4));
            out.push(LatticeSpec::new(3, 2, false).unwrap());
            out.push(LatticeSpec::new(3, 3, false).unwrap());
        }
    }
    out.push(LatticeSpec::new(4, 4, true).unwrap());
    out
}

fn check_contract(enc: &EncodingInstance) {
    let m = enc.num_modes();
    let v = enc.vertex_operators();
    for (i, a) in v.iter().enumerate() {
        assert!(a.is_hermitian());
        for b in &v[i + 1..] {
            assert!(a.commutes_with(b), "{} vertex operators must commute", enc.kind());
        }
    }
    let edges: Vec<_> = enc.edges().iter().collect();
    for (&(j, k), e) in &edges {
        assert!(e.is_hermitian(), "E{j},{k} = {e}");
        for i in 0..m {
            assert_eq!(v[i].anticommutes(e), i == j || i == k, "{}: V{i} vs E{j},{k}", enc.kind());
        }
    }
    for (x, (&(a, b), e)) in edges.iter().enumerate() {
        for (&(cc, d), f) in &edges[x + 1..] {
            let shared = [a == cc, a == d, b == cc, b == d].iter().filter(|&&t| t).count();
            assert_eq!(e.anticommutes(f), shared == 1, "{}: E{a},{b} vs E{cc},{d}", enc.kind());
        }
    }
    let stabs = enc.all_stabilizers();
    for s in enc.local_stabilizers() {
        assert!(s.is_hermitian());
        for l in v.iter().chain(enc.edges().values()) {
            assert!(s.commutes_with(l), "{}: stabilizer {s} vs logical {l}", enc.kind());
        }
        for t in &stabs {
            assert!(s.commutes_with(t));
        }
    }
    assert_eq!(enc.local_stabilizers().len(), enc.num_qubits() - m);
    assert_eq!(gf2_rank(&stabs), stabs.len(), "{}: stabilizers must be independent", enc.kind());
}

#[test]
fn commutation_contract_holds_for_all_kinds() {
    for kind in EncodingKind::ALL {
        for lat in lattices_for(kind) {
            let enc = build_encoding(kind, lat).unwrap_or_else(|e| panic!("{kind} {lat:?}: {e}"));
            check_contract(&enc);
        }
    }
}

#[test]
fn unsupported_lattices_are_rejected() {
    let spinless_chain = LatticeSpec::new(4, 1, false).unwrap();
    assert!(matches!(build_encoding(EncodingKind::Vc, spinless_chain), Err(EncodingError::Unsupported { .. })));
    assert!(matches!(build_encoding(EncodingKind::Hx, spinless_chain), Err(EncodingError::Unsupported { .. })));
    assert!(matches!(build_encoding(EncodingKind::Dk, LatticeSpec::chain(2)), Err(EncodingError::Unsupported { .. })));
    assert!(LatticeSpec::new(0, 3, true).is_err());
}

#[test]
fn qubit_counts_and_ratios() {
    let jw = build_encoding(EncodingKind::Jw, LatticeSpec::chain(4)).unwrap();
    assert_eq!(jw.num_qubits(), 8);
    assert!(jw.local_stabilizers().is_empty());
    let le = build_encoding(EncodingKind::Le, LatticeSpec::chain(4)).unwrap();
    assert_eq!(le.num_qubits(), 16);
    assert_eq!(le.metadata().actual_qubit_ratio, 2.0);
    let dk = build_encoding(EncodingKind::Dk, LatticeSpec::new(4, 4, false).unwrap()).unwrap();
    // 16 vertices plus 5 odd faces of the 3x3 face grid
    assert_eq!(dk.num_qubits(), 21);
    for kind in EncodingKind::ALL {
        let enc = build_encoding(kind, LatticeSpec::new(4, 4, true).unwrap()).unwrap();
        assert_eq!(enc.metadata().qubit_ratio, kind.nominal_qubit_ratio());
        assert_eq!(enc.metadata().distance, kind.distance());
    }
}

#[test]
fn le_chain_weight_profile() {
    let le = build_encoding(EncodingKind::Le, LatticeSpec::chain(4)).unwrap();
    assert!(le.vertex_operators().iter().all(|v| v.weight() == 2));
    assert!(le.edges().values().all(|e| e.weight() == 2));
    assert_eq!(le.metadata().max_stabilizer_weight, 4);
    assert!(le.local_stabilizers().iter().all(|s| s.weight() >= 2));
}

#[test]
fn code_distances_match_table() {
    let cases = [
        (EncodingKind::Jw, LatticeSpec::chain(3)),
        (EncodingKind::Le, LatticeSpec::chain(2)),
        (EncodingKind::Le, LatticeSpec::chain(3)),
        (EncodingKind::Vc, LatticeSpec::new(2, 2, false).unwrap()),
        (EncodingKind::Dk, LatticeSpec::new(3, 2, false).unwrap()),
        (EncodingKind::Hx, LatticeSpec::new(2, 2, false).unwrap()),
        (EncodingKind::Hx, LatticeSpec::chain(2)),
    ];
    for (kind, lat) in cases {
        let enc = build_encoding(kind, lat).unwrap();
        assert_eq!(enc.distance_up_to(2), Some(kind.distance()), "{kind} {lat:?}");
    }
}

#[test]
fn tqg_formula_examples() {
    assert_eq!(tqg_count_formula(EncodingKind::Jw, 2, Dim::OneD).unwrap(), 8);
    assert_eq!(tqg_count_formula(EncodingKind::Dk, 36, Dim::TwoD).unwrap(), 522);
    assert_eq!(tqg_count_formula(EncodingKind::Hx, 36, Dim::TwoD).unwrap(), 1440);
    assert_eq!(tqg_count_formula(EncodingKind::Jw, 16, Dim::TwoD).unwrap(), 256 + 96 - 16 - 4);
    assert!(matches!(tqg_count_formula(EncodingKind::Vc, 10, Dim::TwoD), Err(EncodingError::Formula(_))));
}

#[test]
fn observable_set_sizes() {
    let enc = build_encoding(EncodingKind::Vc, LatticeSpec::chain(3)).unwrap();
    let (o1, o2) = enc.observable_sets();
    assert_eq!(o1.len(), 6);
    assert_eq!(o2.len(), 15);
    assert_eq!(o2.names[0], "n0n1");
}

#[test]
fn composite_edges_match_jordan_wigner_majoranas() {
    let lat = LatticeSpec::new(3, 3, false).unwrap();
    let enc = build_encoding(EncodingKind::Jw, lat).unwrap();
    let n = enc.num_qubits();
    let chain = lat.snake_order();
    let pos = |m: usize| chain.iter().position(|&s| s == m).unwrap();
    let gamma = |p: usize| {
        let mut l: Vec<(usize, Letter)> = (0..p).map(|q| (q, Letter::Z)).collect();
        l.push((p, Letter::X));
        PauliOperator::from_letters(n, &l).unwrap()
    };
    for (j, k) in [(0usize, 3usize), (1, 4), (4, 7), (2, 5), (0, 8)] {
        let mut want = gamma(pos(j)).multiply(&gamma(pos(k))).unwrap();
        want.add_phase(3);
        assert_eq!(enc.edge_between(j, k).unwrap(), want, "E{j},{k}");
        assert_eq!(enc.edge_between(k, j).unwrap(), want.negated());
    }
}

#[test]
fn missing_edges_error() {
    let enc = build_encoding(EncodingKind::Vc, LatticeSpec::new(2, 2, false).unwrap()).unwrap();
    assert!(matches!(enc.edge_operator(0, 3), Err(EncodingError::NoEdge(0, 3))));
    assert!(matches!(enc.hopping_operators(0, 3), Err(EncodingError::NotAdjacent(0, 3))));
    assert!(matches!(enc.vertex_operator(9), Err(EncodingError::NoMode(9))));
}

fn dense_annihilator(n: usize, m: usize) -> M {
    let mut xs: Vec<(usize, Letter)> = (0..m).map(|q| (q, Letter::Z)).collect();
    let mut ys = xs.clone();
    xs.push((m, Letter::X));
    ys.push((m, Letter::Y));
    let x = M::from_pauli(&PauliOperator::from_letters(n, &xs).unwrap());
    let y = M::from_pauli(&PauliOperator::from_letters(n, &ys).unwrap());
    x.add(&y.scale(Complex::new(0.0, 1.0))).scale(c(0.5))
}

/// Fermi-Hubbard Hamiltonian on the full Fock space (direct Jordan-Wigner
/// matrices in mode order) and the projector on even parity per spin.
fn fermion_reference(lat: &LatticeSpec, u: f64) -> (M, M) {
    let m = lat.n_modes();
    let dim = 1 << m;
    let ann: Vec<M> = (0..m).map(|i| dense_annihilator(m, i)).collect();
    let num: Vec<M> = ann.iter().map(|a| a.adjoint().mul(a)).collect();
    let mut h = M::zeros(dim);
    for hp in lat.hopping_pairs() {
        let t = ann[hp.j].adjoint().mul(&ann[hp.k]);
        h = h.add(&t).add(&t.adjoint());
    }
    if lat.spinful {
        for s in 0..lat.n_sites() {
            h = h.add(&num[lat.mode(s, 0)].mul(&num[lat.mode(s, 1)]).scale(c(u)));
        }
    }
    let mut p = M::identity(dim);
    for s in 0..lat.n_spins() {
        let mut par = PauliOperator::identity(m);
        for site in 0..lat.n_sites() {
            par.set(lat.mode(site, s), Letter::Z);
        }
        p = p.mul(&M::identity(dim).add(&M::from_pauli(&par)).scale(c(0.5)));
    }
    (h, p)
}

fn encoded_hamiltonian(enc: &EncodingInstance, u: f64) -> (M, M) {
    let lat = *enc.lattice();
    let dim = 1 << enc.num_qubits();
    let mut h = M::zeros(dim);
    for hp in lat.hopping_pairs() {
        let (a, b) = enc.hopping_operators(hp.j, hp.k).unwrap();
        h = h.add(&M::from_pauli(&a).add(&M::from_pauli(&b)).scale(c(0.5)));
    }
    if lat.spinful {
        let id = M::identity(dim);
        for s in 0..lat.n_sites() {
            let nu = id.add(&M::from_pauli(enc.vertex_operator(lat.mode(s, 0)).unwrap()).scale(c(-1.0))).scale(c(0.5));
            let nd = id.add(&M::from_pauli(enc.vertex_operator(lat.mode(s, 1)).unwrap()).scale(c(-1.0))).scale(c(0.5));
            h = h.add(&nu.mul(&nd).scale(c(u)));
        }
    }
    let mut p = M::identity(dim);
    for s in enc.all_stabilizers() {
        p = p.mul(&M::identity(dim).add(&M::from_pauli(&s)).scale(c(0.5)));
    }
    (h, p)
}

fn moments(h: &M, p: &M, k: usize) -> Vec<f64> {
    let mut out = vec![p.trace().re];
    let mut acc = p.clone();
    for _ in 0..k {
        acc = acc.mul(h);
        out.push(acc.trace().re);
    }
    out
}

/// The encoded Hamiltonian restricted to the code space must have the same
/// spectrum as the fermionic one in the even-parity sector; compare moments.
#[test]
fn encoded_hubbard_spectrum_matches_fermions() {
    let cases = [
        (EncodingKind::Jw, LatticeSpec::new(2, 2, true).unwrap()),
        (EncodingKind::Jw, LatticeSpec::new(3, 2, false).unwrap()),
        (EncodingKind::Le, LatticeSpec::chain(2)),
        (EncodingKind::Le, LatticeSpec::new(2, 2, false).unwrap()),
        (EncodingKind::Vc, LatticeSpec::chain(2)),
        (EncodingKind::Vc, LatticeSpec::new(2, 2, false).unwrap()),
        (EncodingKind::Hx, LatticeSpec::chain(2)),
        (EncodingKind::Hx, LatticeSpec::new(2, 2, false).unwrap()),
        (EncodingKind::Dk, LatticeSpec::chain(3)),
        (EncodingKind::Dk, LatticeSpec::new(3, 2, false).unwrap()),
    ];
    for (kind, lat) in cases {
        let enc = build_encoding(kind, lat).unwrap();
        let (hf, pf) = fermion_reference(&lat, 1.3);
        let (he, pe) = encoded_hamiltonian(&enc, 1.3);
        let a = moments(&hf, &pf, 5);
        let b = moments(&he, &pe, 5);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8, "{kind} {lat:?}: moments {a:?} vs {b:?}");
        }
    }
}

#[test]
fn fock_generators_define_the_occupation() {
    for kind in EncodingKind::ALL {
        let enc = build_encoding(kind, LatticeSpec::chain(3)).unwrap();
        let occ: Vec<bool> = (0..enc.num_modes()).map(|i| i % 4 == 0 || i == 4).collect();
        let st = StabilizerState::new(enc.fock_state_generators(&occ).unwrap()).unwrap();
        for (i, v) in enc.vertex_operators().iter().enumerate() {
            assert_eq!(st.expectation(v).unwrap(), if occ[i] { -1 } else { 1 });
        }
        for s in enc.all_stabilizers() {
            assert_ne!(st.expectation(&s).unwrap(), 0);
        }
    }
}

#[test]
fn dump_lists_every_section() {
    let enc = build_encoding(EncodingKind::Le, LatticeSpec::chain(2)).unwrap();
    let d = enc.dump();
    for sec in ["[layout]", "[vertex]", "[edges]", "[stabilizers]", "[plaquettes]", "[metadata]"] {
        assert!(d.contains(sec));
    }
    assert!(d.contains("connectivity 3(+2)"));
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn stabilizers_commute_with_the_hamiltonian(kind in prop::sample::select(EncodingKind::ALL.to_vec()), nx in 2usize..5, ny in 1usize..4) {
            let lat = if ny == 1 { LatticeSpec::chain(nx) } else { LatticeSpec::new(nx, ny, true).unwrap() };
            let Ok(enc) = build_encoding(kind, lat) else { return Ok(()) };
            let stabs = enc.all_stabilizers();
            prop_assert_eq!(enc.local_stabilizers().len() + enc.num_modes(), enc.num_qubits());
            for (i, s) in stabs.iter().enumerate() {
                for t in &stabs[i + 1..] {
                    prop_assert!(s.commutes_with(t));
                }
                for v in enc.vertex_operators() {
                    prop_assert!(s.commutes_with(v));
                }
                // raw edges may act on auxiliary modes; the Hamiltonian terms may not
                for &(j, k) in enc.edges().keys() {
                    let Ok((a, b)) = enc.hopping_operators(j, k) else { continue };
                    prop_assert!(s.commutes_with(&a) && s.commutes_with(&b));
                }
                for site in 0..enc.lattice().n_sites() {
                    prop_assert!(s.commutes_with(&enc.interaction_operator(site).unwrap()));
                }
            }
        }
    }
}
