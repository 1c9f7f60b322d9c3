use super::{EncodingError, EncodingInstance, EncodingKind, EncodingMetadata, LatticeSpec, Plaquette};
use crate::pauli::{Gf2Basis, Letter, PauliOperator};
use std::collections::BTreeMap;

struct Builder {
    n: usize,
    vertex: Vec<Option<PauliOperator>>,
    edges: BTreeMap<(usize, usize), PauliOperator>,
    candidates: Vec<PauliOperator>,
    labels: Vec<String>,
    chains: Vec<Vec<usize>>,
}

impl Builder {
    fn new(n: usize, modes: usize) -> Self {
        Builder {
            n,
            vertex: vec![None; modes],
            edges: BTreeMap::new(),
            candidates: Vec::new(),
            labels: vec![String::new(); n],
            chains: Vec::new(),
        }
    }

    fn pauli(&self, letters: &[(usize, Letter)]) -> PauliOperator {
        PauliOperator::from_letters(self.n, letters).expect("qubits allocated by the builder")
    }

    /// Stores `E_{from,to}` under the canonical key.
    fn set_edge(&mut self, from: usize, to: usize, e: PauliOperator) {
        if from < to {
            self.edges.insert((from, to), e);
        } else {
            self.edges.insert((to, from), e.negated());
        }
    }

    fn directed_edge(&self, from: usize, to: usize) -> PauliOperator {
        if from < to {
            self.edges[&(from, to)].clone()
        } else {
            self.edges[&(to, from)].negated()
        }
    }

    fn loop_product(&self, cycle: &[usize]) -> PauliOperator {
        let mut acc = PauliOperator::identity(self.n);
        for i in 0..cycle.len() {
            acc.mul_assign_right(&self.directed_edge(cycle[i], cycle[(i + 1) % cycle.len()]));
        }
        acc
    }
}

/// The mode grids of one encoding: each copy is `cols x rows` cells holding modes.
struct Grid {
    cols: usize,
    rows: usize,
    modes: Vec<usize>,
}

impl Grid {
    fn cell(&self, x: usize, y: usize) -> usize {
        y * self.cols + x
    }
}

fn grids_2d(kind: EncodingKind, lattice: &LatticeSpec) -> Result<Vec<Grid>, EncodingError> {
    let n = lattice.n_sites();
    if lattice.is_1d() {
        if !lattice.spinful {
            return Err(EncodingError::Unsupported { kind, reason: "needs a 2D mode grid; a spinless chain has one row".into() });
        }
        // one copy with a row per spin species
        let modes = (0..2).flat_map(|r| (0..lattice.nx).map(move |x| r * n + x)).collect();
        return Ok(vec![Grid { cols: lattice.nx, rows: 2, modes }]);
    }
    Ok((0..lattice.n_spins())
        .map(|s| Grid { cols: lattice.nx, rows: lattice.ny, modes: (0..n).map(|site| lattice.mode(site, s)).collect() })
        .collect())
}

pub(super) fn build(kind: EncodingKind, lattice: LatticeSpec) -> Result<EncodingInstance, EncodingError> {
    let lattice = LatticeSpec::new(lattice.nx, lattice.ny, lattice.spinful)?;
    let modes = lattice.n_modes();
    let mut b = match kind {
        EncodingKind::Jw => jordan_wigner(&lattice),
        EncodingKind::Le => {
            let n_sites = lattice.n_sites();
            let chains: Vec<Vec<usize>> =
                (0..lattice.n_spins()).map(|s| lattice.snake_order().into_iter().map(|site| lattice.mode(site, s)).collect()).collect();
            let grids: Vec<Grid> = chains.iter().map(|c| Grid { cols: n_sites, rows: 1, modes: c.clone() }).collect();
            let mut b = majorana_site(&lattice, &grids, le_slots);
            b.chains = chains;
            b
        }
        EncodingKind::Vc => majorana_site(&lattice, &grids_2d(kind, &lattice)?, vc_slots),
        EncodingKind::Hx => majorana_site(&lattice, &grids_2d(kind, &lattice)?, hx_slots),
        EncodingKind::Dk => derby_klassen(&lattice, &grids_2d(kind, &lattice)?)?,
    };
    let vertex: Vec<PauliOperator> = b
        .vertex
        .iter()
        .enumerate()
        .map(|(i, v)| v.clone().ok_or_else(|| EncodingError::Internal(format!("mode {i} has no vertex operator"))))
        .collect::<Result<_, _>>()?;
    let mut global = Vec::new();
    for s in 0..lattice.n_spins() {
        let mut g = PauliOperator::identity(b.n);
        for site in 0..lattice.n_sites() {
            g.mul_assign_right(&vertex[lattice.mode(site, s)]);
        }
        global.push(g);
    }
    let local = select_stabilizers(&b, &vertex, &global, modes)?;
    let plaquettes = (0..local.len()).map(|k| Plaquette { stabilizer: k, ancilla_slot: k }).collect();
    let (conn, anc) = kind.connectivity();
    let metadata = EncodingMetadata {
        distance: kind.distance(),
        qubit_ratio: kind.nominal_qubit_ratio(),
        actual_qubit_ratio: b.n as f64 / modes as f64,
        max_stabilizer_weight: local.iter().map(|s| s.weight()).max().unwrap_or(0),
        connectivity: conn,
        ancilla_connectivity: anc,
    };
    Ok(EncodingInstance {
        kind,
        lattice,
        n_qubits: b.n,
        vertex,
        edges: std::mem::take(&mut b.edges),
        local,
        global,
        plaquettes,
        qubit_labels: std::mem::take(&mut b.labels),
        chains: std::mem::take(&mut b.chains),
        metadata,
    })
}

fn jordan_wigner(lattice: &LatticeSpec) -> Builder {
    let n_sites = lattice.n_sites();
    let mut b = Builder::new(lattice.n_modes(), lattice.n_modes());
    for s in 0..lattice.n_spins() {
        let chain: Vec<usize> = lattice.snake_order().into_iter().map(|site| lattice.mode(site, s)).collect();
        let off = s * n_sites;
        // γ_{2m} = Z_{off..q-1} X_q
        let gamma = |p: usize| -> PauliOperator {
            let mut letters: Vec<(usize, Letter)> = (off..off + p).map(|q| (q, Letter::Z)).collect();
            letters.push((off + p, Letter::X));
            PauliOperator::from_letters(lattice.n_modes(), &letters).expect("in range")
        };
        for (p, &m) in chain.iter().enumerate() {
            b.vertex[m] = Some(b.pauli(&[(off + p, Letter::Z)]));
            b.labels[off + p] = format!("mode{m}");
        }
        for p in 0..chain.len().saturating_sub(1) {
            let mut e = gamma(p).multiply(&gamma(p + 1)).expect("same register");
            e.add_phase(3);
            b.set_edge(chain[p], chain[p + 1], e);
        }
        b.chains.push(chain);
    }
    b
}

/// Vertex operator and the four edge slots of one two-qubit cell.
struct Slots {
    v: PauliOperator,
    /// east, north, west, south
    dirs: [PauliOperator; 4],
}

const EAST: usize = 0;
const NORTH: usize = 1;
const WEST: usize = 2;
const SOUTH: usize = 3;

fn le_slots(b: &Builder, a: usize, c: usize) -> Slots {
    Slots {
        v: b.pauli(&[(a, Letter::Z), (c, Letter::Z)]),
        dirs: [
            b.pauli(&[(a, Letter::X)]),
            b.pauli(&[(a, Letter::Z), (c, Letter::X)]),
            b.pauli(&[(a, Letter::Y)]),
            b.pauli(&[(a, Letter::Z), (c, Letter::Y)]),
        ],
    }
}

fn hx_slots(b: &Builder, a: usize, c: usize) -> Slots {
    Slots {
        v: b.pauli(&[(a, Letter::Z), (c, Letter::Z)]),
        dirs: [
            b.pauli(&[(a, Letter::X)]),
            b.pauli(&[(a, Letter::Y)]),
            b.pauli(&[(a, Letter::Z), (c, Letter::X)]),
            b.pauli(&[(a, Letter::Z), (c, Letter::Y)]),
        ],
    }
}

fn vc_slots(b: &Builder, a: usize, c: usize) -> Slots {
    Slots {
        v: b.pauli(&[(a, Letter::Z)]),
        dirs: [
            b.pauli(&[(a, Letter::X)]),
            b.pauli(&[(a, Letter::Y), (c, Letter::Y)]),
            b.pauli(&[(a, Letter::Y), (c, Letter::X)]),
            b.pauli(&[(a, Letter::Y), (c, Letter::Z)]),
        ],
    }
}

/// Encodings where every mode owns two qubits carrying five mutually
/// anticommuting operators: `V` and one slot per grid direction. An edge is
/// the product of the facing slots; face loops, pairings of unused slots on
/// neighbouring cells, and products of two unused slots on one cell give the
/// stabilizer candidates.
fn majorana_site(lattice: &LatticeSpec, grids: &[Grid], slot_fn: fn(&Builder, usize, usize) -> Slots) -> Builder {
    let total_cells: usize = grids.iter().map(|g| g.modes.len()).sum();
    let mut b = Builder::new(2 * total_cells, lattice.n_modes());
    let mut offset = 0;
    for g in grids {
        let slots: Vec<Slots> = (0..g.modes.len()).map(|c| slot_fn(&b, offset + 2 * c, offset + 2 * c + 1)).collect();
        for (c, &m) in g.modes.iter().enumerate() {
            b.vertex[m] = Some(slots[c].v.clone());
            b.labels[offset + 2 * c] = format!("mode{m}.a");
            b.labels[offset + 2 * c + 1] = format!("mode{m}.b");
        }
        let mut edges = Vec::new();
        for y in 0..g.rows {
            for x in 0..g.cols.saturating_sub(1) {
                edges.push((g.cell(x, y), g.cell(x + 1, y), EAST, WEST));
            }
        }
        for y in 0..g.rows.saturating_sub(1) {
            for x in 0..g.cols {
                edges.push((g.cell(x, y), g.cell(x, y + 1), NORTH, SOUTH));
            }
        }
        let mut used = vec![[false; 4]; g.modes.len()];
        for &(p, q, sp, sq) in &edges {
            let e = slots[p].dirs[sp].multiply(&slots[q].dirs[sq]).expect("same register");
            b.set_edge(g.modes[p], g.modes[q], e);
            used[p][sp] = true;
            used[q][sq] = true;
        }
        for y in 0..g.rows.saturating_sub(1) {
            for x in 0..g.cols.saturating_sub(1) {
                let cyc = [g.modes[g.cell(x, y)], g.modes[g.cell(x + 1, y)], g.modes[g.cell(x + 1, y + 1)], g.modes[g.cell(x, y + 1)]];
                let s = b.loop_product(&cyc);
                b.candidates.push(s);
            }
        }
        // pair the unused slots across each edge
        const LO_PREF: [usize; 4] = [NORTH, SOUTH, EAST, WEST];
        const HI_PREF: [usize; 4] = [SOUTH, NORTH, WEST, EAST];
        for &(p, q, sp, sq) in &edges {
            let up = LO_PREF.iter().copied().find(|&d| !used[p][d]);
            let uq = HI_PREF.iter().copied().find(|&d| !used[q][d]);
            if let (Some(up), Some(uq)) = (up, uq) {
                used[p][up] = true;
                used[q][uq] = true;
                let mut s = slots[p].dirs[sp].multiply(&slots[p].dirs[up]).expect("same register");
                s.mul_assign_right(&slots[q].dirs[sq]);
                s.mul_assign_right(&slots[q].dirs[uq]);
                b.candidates.push(hermitian_rep(s));
            }
        }
        for (c, u) in used.iter().enumerate() {
            let free: Vec<usize> = (0..4).filter(|&d| !u[d]).collect();
            let mut best: Option<PauliOperator> = None;
            for i in 0..free.len() {
                for j in i + 1..free.len() {
                    let s = hermitian_rep(slots[c].dirs[free[i]].multiply(&slots[c].dirs[free[j]]).expect("same register"));
                    if s.weight() >= 2 && best.as_ref().is_none_or(|bs| s.weight() > bs.weight()) {
                        best = Some(s);
                    }
                }
            }
            if let Some(s) = best {
                b.candidates.push(s);
            }
        }
        offset += 2 * g.modes.len();
    }
    b
}

/// Drops a factor of ±i so that the result is Hermitian with sign +1 or -1.
fn hermitian_rep(mut p: PauliOperator) -> PauliOperator {
    if !p.is_hermitian() {
        p.add_phase(3);
    }
    p
}

fn derby_klassen(lattice: &LatticeSpec, grids: &[Grid]) -> Result<Builder, EncodingError> {
    for g in grids {
        let faces = g.cols.saturating_sub(1) * g.rows.saturating_sub(1);
        if faces < 2 {
            return Err(EncodingError::Unsupported {
                kind: EncodingKind::Dk,
                reason: format!("mode grid {}x{} has {faces} faces; at least two are needed", g.cols, g.rows),
            });
        }
    }
    let odd = |fx: usize, fy: usize| (fx + fy) % 2 == 0;
    let mut sizes = Vec::new();
    for g in grids {
        let mut n_odd = 0;
        for fy in 0..g.rows - 1 {
            for fx in 0..g.cols - 1 {
                if odd(fx, fy) {
                    n_odd += 1;
                }
            }
        }
        sizes.push(g.modes.len() + n_odd);
    }
    let n: usize = sizes.iter().sum();
    let mut b = Builder::new(n, lattice.n_modes());
    let mut offset = 0;
    for (g, size) in grids.iter().zip(&sizes) {
        let mut face_qubit = BTreeMap::new();
        let mut next = offset + g.modes.len();
        for fy in 0..g.rows - 1 {
            for fx in 0..g.cols - 1 {
                if odd(fx, fy) {
                    b.labels[next] = format!("face({fx},{fy})@{}", g.modes[0]);
                    face_qubit.insert((fx, fy), next);
                    next += 1;
                }
            }
        }
        let vq = |x: usize, y: usize| offset + g.cell(x, y);
        for y in 0..g.rows {
            for x in 0..g.cols {
                let m = g.modes[g.cell(x, y)];
                b.vertex[m] = Some(b.pauli(&[(vq(x, y), Letter::Z)]));
                b.labels[vq(x, y)] = format!("mode{m}");
            }
        }
        // edges sharing an odd face at a vertex carry the same letter there
        let letter = |x: usize, y: usize, dir: usize| -> Letter {
            let east_group = if odd(x, y) { [EAST, NORTH] } else { [EAST, SOUTH] };
            if east_group.contains(&dir) {
                Letter::X
            } else {
                Letter::Y
            }
        };
        let face_of = |cands: &[(isize, isize)]| -> Option<usize> {
            cands.iter().find_map(|&(fx, fy)| {
                if fx < 0 || fy < 0 {
                    return None;
                }
                face_qubit.get(&(fx as usize, fy as usize)).copied()
            })
        };
        for y in 0..g.rows {
            for x in 0..g.cols {
                let (xi, yi) = (x as isize, y as isize);
                if x + 1 < g.cols {
                    let mut letters = vec![(vq(x, y), letter(x, y, EAST)), (vq(x + 1, y), letter(x + 1, y, WEST))];
                    if let Some(f) = face_of(&[(xi, yi), (xi, yi - 1)]) {
                        letters.push((f, Letter::X));
                    }
                    let e = b.pauli(&letters);
                    b.set_edge(g.modes[g.cell(x, y)], g.modes[g.cell(x + 1, y)], e);
                }
                if y + 1 < g.rows {
                    let mut letters = vec![(vq(x, y), letter(x, y, NORTH)), (vq(x, y + 1), letter(x, y + 1, SOUTH))];
                    if let Some(f) = face_of(&[(xi, yi), (xi - 1, yi)]) {
                        letters.push((f, Letter::Y));
                    }
                    let e = b.pauli(&letters);
                    b.set_edge(g.modes[g.cell(x, y)], g.modes[g.cell(x, y + 1)], e);
                }
            }
        }
        let cycle = |fx: usize, fy: usize| {
            [g.modes[g.cell(fx, fy)], g.modes[g.cell(fx + 1, fy)], g.modes[g.cell(fx + 1, fy + 1)], g.modes[g.cell(fx, fy + 1)]]
        };
        // odd-face loops are ±I; orient one edge so that each equals +I
        for fy in 0..g.rows - 1 {
            for fx in 0..g.cols - 1 {
                if !odd(fx, fy) {
                    continue;
                }
                let c = cycle(fx, fy);
                let s = b.loop_product(&c);
                if !s.is_trivial() {
                    return Err(EncodingError::Internal(format!("odd face ({fx},{fy}) loop is {s}")));
                }
                match s.phase() {
                    0 => {}
                    2 => {
                        let e = b.directed_edge(c[0], c[1]).negated();
                        b.set_edge(c[0], c[1], e);
                    }
                    p => return Err(EncodingError::Internal(format!("odd face loop has phase i^{p}"))),
                }
            }
        }
        for fy in 0..g.rows - 1 {
            for fx in 0..g.cols - 1 {
                if !odd(fx, fy) {
                    let s = b.loop_product(&cycle(fx, fy));
                    b.candidates.push(s);
                }
            }
        }
        offset += size;
    }
    Ok(b)
}

/// Picks independent local stabilizers from the candidates, never letting them
/// generate a product of global stabilizers, then completes the set from the
/// centralizer of the logical operators so that exactly `n - modes` remain.
fn select_stabilizers(
    b: &Builder,
    vertex: &[PauliOperator],
    global: &[PauliOperator],
    modes: usize,
) -> Result<Vec<PauliOperator>, EncodingError> {
    let logical: Vec<PauliOperator> = vertex.iter().chain(b.edges.values()).cloned().collect();
    let target = b.n.checked_sub(modes).ok_or_else(|| EncodingError::Internal("fewer qubits than modes".into()))?;
    let mut selected: Vec<PauliOperator> = Vec::new();
    let mut span = Gf2Basis::new(b.n);
    for g in global {
        span.insert(g);
    }
    for c in &b.candidates {
        if !c.is_hermitian() {
            return Err(EncodingError::Internal(format!("candidate {c} is not Hermitian")));
        }
        if let Some(l) = logical.iter().find(|l| l.anticommutes(c)) {
            return Err(EncodingError::Internal(format!("candidate {c} anticommutes with logical {l}")));
        }
        if selected.len() == target || selected.iter().any(|s| s.anticommutes(c)) {
            continue;
        }
        if span.insert(c) {
            selected.push(c.clone());
        }
    }
    if selected.len() < target {
        let mut constraints = logical.clone();
        constraints.extend(selected.iter().cloned());
        let mut basis = centralizer(b.n, &constraints);
        let pool: Vec<PauliOperator> = selected.clone();
        reduce_weights(&mut basis, &pool);
        basis.sort_by_key(|p| p.weight());
        for c in basis {
            if selected.len() == target {
                break;
            }
            if selected.iter().any(|s| s.anticommutes(&c)) {
                continue;
            }
            if span.insert(&c) {
                selected.push(c);
            }
        }
    }
    if selected.len() != target {
        return Err(EncodingError::Internal(format!("found {} local stabilizers, expected {target}", selected.len())));
    }
    for g in global {
        if selected.iter().any(|s| s.anticommutes(g)) {
            return Err(EncodingError::Internal("a local stabilizer anticommutes with a global one".into()));
        }
    }
    Ok(selected)
}

/// Basis of all Paulis commuting with every operator in `ops` (letters only).
pub(crate) fn centralizer(n: usize, ops: &[PauliOperator]) -> Vec<PauliOperator> {
    // unknown v = (x_v | z_v); constraint row for op o is (z_o | x_o)
    let width = 2 * n;
    let words = width.div_ceil(64);
    let get = |v: &[u64], i: usize| (v[i / 64] >> (i % 64)) & 1 == 1;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for o in ops {
        let mut r = vec![0u64; words];
        for q in 0..n {
            if o.z_bit(q) {
                r[q / 64] |= 1 << (q % 64);
            }
            if o.x_bit(q) {
                let i = n + q;
                r[i / 64] |= 1 << (i % 64);
            }
        }
        for (row, &p) in rows.iter().zip(&pivots) {
            if get(&r, p) {
                for (a, bb) in r.iter_mut().zip(row) {
                    *a ^= bb;
                }
            }
        }
        if let Some(p) = (0..width).find(|&i| get(&r, i)) {
            for row in rows.iter_mut() {
                if get(row, p) {
                    for (a, bb) in row.iter_mut().zip(&r) {
                        *a ^= bb;
                    }
                }
            }
            rows.push(r);
            pivots.push(p);
        }
    }
    let mut out = Vec::new();
    for free in (0..width).filter(|i| !pivots.contains(i)) {
        let mut v = vec![0u64; words];
        v[free / 64] |= 1 << (free % 64);
        for (row, &p) in rows.iter().zip(&pivots) {
            if get(row, free) {
                v[p / 64] |= 1 << (p % 64);
            }
        }
        let mut pauli = PauliOperator::identity(n);
        for q in 0..n {
            let xb = get(&v, q);
            let zb = get(&v, n + q);
            if xb || zb {
                pauli.set(q, Letter::from_bits(xb, zb));
            }
        }
        out.push(pauli);
    }
    out
}

/// Greedy weight reduction by multiplying with other basis elements and the pool.
fn reduce_weights(basis: &mut [PauliOperator], pool: &[PauliOperator]) {
    let mut improved = true;
    let mut rounds = 0;
    while improved && rounds < 50 {
        improved = false;
        rounds += 1;
        for i in 0..basis.len() {
            let others: Vec<PauliOperator> =
                basis.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p.clone()).chain(pool.iter().cloned()).collect();
            for o in &others {
                let mut t = basis[i].clone();
                t.xor_letters(o);
                if !t.is_trivial() && t.weight() < basis[i].weight() {
                    basis[i] = t.unsigned();
                    improved = true;
                }
            }
        }
    }
}
