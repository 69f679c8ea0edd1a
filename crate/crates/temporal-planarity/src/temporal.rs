//! Temporal sequences of graphs: witness checking and normalization,
//! labelled minor search, shadows and upleaves, the labelled-theta bond
//! test linking torsos through a middle graph, and the reduction from
//! rooted-tree SEFE instances to plain sequences.

use std::collections::{BTreeMap, BTreeSet};

use crate::decomposition::{tutte_leaves, Bag};
use crate::graph::{EdgeId, LabeledGraph, MinorStep, MinorWitness, VertexId};
use crate::{Error, Result};

const WITNESS_SEARCH_BUDGET: usize = 4_000_000;
const WITNESS_REMOVED_CAP: usize = 26;
const BIPARTITION_VERTEX_CAP: usize = 22;

/// Which way a consecutive pair of sequence entries relates: `Down`
/// means the next entry is a minor of the current one (the witness
/// replays current → next); `Up` means the current entry is a minor of
/// the next (the witness replays next → current).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Down => write!(f, "≽"),
            Direction::Up => write!(f, "≼"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalStep {
    pub direction: Direction,
    pub witness: MinorWitness,
}

/// What normalization did: which input positions were compressed away,
/// and which output positions are padding copies of a boundary graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizationTrace {
    pub dropped_inputs: Vec<usize>,
    pub padded_outputs: Vec<usize>,
}

/// Graphs G₀..G_{n−1} with a verified minor witness between each
/// consecutive pair. After normalization the directions strictly
/// alternate starting with ≽ and ending with ≼, so the entries at even
/// offsets are the maximal ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalSequence {
    graphs: Vec<LabeledGraph>,
    steps: Vec<TemporalStep>,
    trace: NormalizationTrace,
}

impl TemporalSequence {
    pub fn new(graphs: Vec<LabeledGraph>, steps: Vec<TemporalStep>) -> Result<Self> {
        validate(&graphs, &steps)?;
        Ok(TemporalSequence { graphs, steps, trace: NormalizationTrace::default() })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[LabeledGraph] {
        &self.graphs
    }

    pub fn graph(&self, i: usize) -> &LabeledGraph {
        &self.graphs[i]
    }

    pub fn steps(&self) -> &[TemporalStep] {
        &self.steps
    }

    pub fn trace(&self) -> &NormalizationTrace {
        &self.trace
    }

    pub fn is_normalized(&self) -> bool {
        self.graphs.len() % 2 == 1
            && self.steps.iter().enumerate().all(|(i, s)| {
                s.direction == if i % 2 == 0 { Direction::Down } else { Direction::Up }
            })
    }

    /// Compress runs pointing the same way (composing their witnesses)
    /// and pad the ends with duplicated boundary graphs until the
    /// directions run ≽, ≼, ≽, … , ≼.
    pub fn normalized(&self) -> Result<TemporalSequence> {
        let mut graphs = self.graphs.clone();
        let mut steps = self.steps.clone();
        let mut origin: Vec<usize> = (0..graphs.len()).collect();
        let mut dropped = Vec::new();

        let mut i = 0;
        while i + 1 < steps.len() {
            if steps[i].direction != steps[i + 1].direction {
                i += 1;
                continue;
            }
            let w = match steps[i].direction {
                Direction::Down => steps[i].witness.then(&steps[i + 1].witness),
                Direction::Up => steps[i + 1].witness.then(&steps[i].witness),
            };
            steps[i] = TemporalStep { direction: steps[i].direction, witness: w };
            steps.remove(i + 1);
            graphs.remove(i + 1);
            dropped.push(origin.remove(i + 1));
            i = i.saturating_sub(1);
        }

        let mut padded = Vec::new();
        if let Some(first) = steps.first() {
            if first.direction == Direction::Up {
                graphs.insert(0, graphs[0].clone());
                steps.insert(
                    0,
                    TemporalStep { direction: Direction::Down, witness: MinorWitness::identity() },
                );
                padded.push(0);
            }
        }
        if let Some(last) = steps.last() {
            if last.direction == Direction::Down {
                graphs.push(graphs.last().unwrap().clone());
                steps.push(TemporalStep {
                    direction: Direction::Up,
                    witness: MinorWitness::identity(),
                });
                padded.push(graphs.len() - 1);
            }
        }

        validate(&graphs, &steps)?;
        let out = TemporalSequence {
            graphs,
            steps,
            trace: NormalizationTrace { dropped_inputs: dropped, padded_outputs: padded },
        };
        debug_assert!(out.is_normalized());
        Ok(out)
    }
}

fn validate(graphs: &[LabeledGraph], steps: &[TemporalStep]) -> Result<()> {
    if graphs.is_empty() {
        return Err(Error::Input("a temporal sequence needs at least one graph".into()));
    }
    if steps.len() + 1 != graphs.len() {
        return Err(Error::Input(format!(
            "{} graphs need {} steps, got {}",
            graphs.len(),
            graphs.len() - 1,
            steps.len()
        )));
    }
    for (i, step) in steps.iter().enumerate() {
        let check = match step.direction {
            Direction::Down => step.witness.verify(&graphs[i], &graphs[i + 1]),
            Direction::Up => step.witness.verify(&graphs[i + 1], &graphs[i]),
        };
        check.map_err(|e| {
            Error::Input(format!("witness between entries {i} and {} fails: {e}", i + 1))
        })?;
    }
    Ok(())
}

/// A per-pair hint for `verify_and_normalize`: give a direction, a
/// witness, both, or neither (then both directions are searched).
#[derive(Debug, Clone, Default)]
pub struct StepHint {
    pub direction: Option<Direction>,
    pub witness: Option<MinorWitness>,
}

/// Check (or find) a minor witness between each consecutive pair and
/// normalize the result. Witness search tries ≽ before ≼.
pub fn verify_and_normalize(graphs: &[LabeledGraph], hints: &[StepHint]) -> Result<TemporalSequence> {
    if graphs.is_empty() {
        return Err(Error::Input("a temporal sequence needs at least one graph".into()));
    }
    if !hints.is_empty() && hints.len() != graphs.len() - 1 {
        return Err(Error::Input(format!(
            "{} graphs need {} step hints, got {}",
            graphs.len(),
            graphs.len() - 1,
            hints.len()
        )));
    }
    let blank = StepHint::default();
    let mut steps = Vec::new();
    for i in 0..graphs.len().saturating_sub(1) {
        let hint = hints.get(i).unwrap_or(&blank);
        let step = resolve_step(&graphs[i], &graphs[i + 1], hint, i)?;
        steps.push(step);
    }
    TemporalSequence::new(graphs.to_vec(), steps)?.normalized()
}

fn resolve_step(
    g: &LabeledGraph,
    h: &LabeledGraph,
    hint: &StepHint,
    i: usize,
) -> Result<TemporalStep> {
    let j = i + 1;
    match (hint.direction, &hint.witness) {
        (Some(direction), Some(witness)) => {
            Ok(TemporalStep { direction, witness: witness.clone() })
        }
        (Some(direction), None) => {
            let found = match direction {
                Direction::Down => find_labeled_minor_witness(g, h)?,
                Direction::Up => find_labeled_minor_witness(h, g)?,
            };
            found
                .map(|witness| TemporalStep { direction, witness })
                .ok_or_else(|| {
                    Error::Input(format!("no minor relation between entries {i} and {j}"))
                })
        }
        (None, witness) => {
            if let Some(w) = witness {
                if w.verify(g, h).is_ok() {
                    return Ok(TemporalStep { direction: Direction::Down, witness: w.clone() });
                }
                if w.verify(h, g).is_ok() {
                    return Ok(TemporalStep { direction: Direction::Up, witness: w.clone() });
                }
                return Err(Error::Input(format!(
                    "supplied witness fits neither direction between entries {i} and {j}"
                )));
            }
            if let Some(witness) = find_labeled_minor_witness(g, h)? {
                return Ok(TemporalStep { direction: Direction::Down, witness });
            }
            if let Some(witness) = find_labeled_minor_witness(h, g)? {
                return Ok(TemporalStep { direction: Direction::Up, witness });
            }
            Err(Error::Input(format!("no minor relation between entries {i} and {j}")))
        }
    }
}

/// Search for a witness replaying g onto h, respecting all edge labels:
/// every edge of g missing from h is either deleted or contracted, and
/// leftover vertices are renamed or dropped. Returns `None` when no
/// assignment works.
pub fn find_labeled_minor_witness(
    g: &LabeledGraph,
    h: &LabeledGraph,
) -> Result<Option<MinorWitness>> {
    let eg = g.edge_set();
    let eh = h.edge_set();
    if !eh.is_subset(&eg) {
        return Ok(None);
    }
    let removed: Vec<EdgeId> = eg.difference(&eh).copied().collect();
    if removed.len() > WITNESS_REMOVED_CAP {
        return Err(Error::ResourceCap(format!(
            "{} edges to remove exceed the witness search cap",
            removed.len()
        )));
    }
    let mut budget = WITNESS_SEARCH_BUDGET;
    let mut deletes = Vec::new();
    let mut contracts = Vec::new();
    let found = search_assignment(g, h, &removed, 0, &mut deletes, &mut contracts, &mut budget)?;
    if let Some(w) = &found {
        w.verify(g, h)
            .map_err(|e| Error::Internal(format!("assembled witness fails to replay: {e}")))?;
    }
    Ok(found)
}

fn search_assignment(
    cur: &LabeledGraph,
    h: &LabeledGraph,
    removed: &[EdgeId],
    idx: usize,
    deletes: &mut Vec<EdgeId>,
    contracts: &mut Vec<EdgeId>,
    budget: &mut usize,
) -> Result<Option<MinorWitness>> {
    if *budget == 0 {
        return Err(Error::ResourceCap("witness search budget exhausted".into()));
    }
    *budget -= 1;
    if idx == removed.len() {
        return Ok(assemble_witness(cur, h, deletes, contracts));
    }
    let e = removed[idx];

    let after_delete = cur.apply_step(&MinorStep::Delete(e))?;
    deletes.push(e);
    if let Some(w) =
        search_assignment(&after_delete, h, removed, idx + 1, deletes, contracts, budget)?
    {
        return Ok(Some(w));
    }
    deletes.pop();

    if !cur.is_loop(e)? {
        let after_contract = cur.apply_step(&MinorStep::Contract(e))?;
        contracts.push(e);
        if let Some(w) =
            search_assignment(&after_contract, h, removed, idx + 1, deletes, contracts, budget)?
        {
            return Ok(Some(w));
        }
        contracts.pop();
    }
    Ok(None)
}

fn assemble_witness(
    r: &LabeledGraph,
    h: &LabeledGraph,
    deletes: &[EdgeId],
    contracts: &[EdgeId],
) -> Option<MinorWitness> {
    let phi = match_vertices(r, h)?;
    let mapped: BTreeSet<VertexId> = phi.keys().copied().collect();
    let mut steps: Vec<MinorStep> = Vec::new();
    for &e in deletes {
        steps.push(MinorStep::Delete(e));
    }
    for &e in contracts {
        steps.push(MinorStep::Contract(e));
    }
    for v in r.vertices() {
        if !mapped.contains(&v) {
            steps.push(MinorStep::DropIsolated(v));
        }
    }
    // rename through a fresh range so swaps cannot collide
    let base = r
        .vertices()
        .chain(h.vertices())
        .map(|v| v.0)
        .max()
        .unwrap_or(0)
        + 1;
    let moved: Vec<(VertexId, VertexId)> =
        phi.iter().filter(|(a, b)| a != b).map(|(&a, &b)| (a, b)).collect();
    for (k, &(from, _)) in moved.iter().enumerate() {
        steps.push(MinorStep::Relabel(from, VertexId(base + k as u32)));
    }
    for (k, &(_, to)) in moved.iter().enumerate() {
        steps.push(MinorStep::Relabel(VertexId(base + k as u32), to));
    }
    Some(MinorWitness::new(steps))
}

/// A vertex renaming turning r into h exactly, honouring every edge's
/// endpoints. Spare isolated vertices of r are left out of the map.
fn match_vertices(r: &LabeledGraph, h: &LabeledGraph) -> Option<BTreeMap<VertexId, VertexId>> {
    if r.edge_set() != h.edge_set() {
        return None;
    }
    let edges: Vec<EdgeId> = r.edge_ids().collect();
    let mut fwd: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut bwd: BTreeMap<VertexId, VertexId> = BTreeMap::new();

    fn assign(
        fwd: &mut BTreeMap<VertexId, VertexId>,
        bwd: &mut BTreeMap<VertexId, VertexId>,
        a: VertexId,
        c: VertexId,
    ) -> Option<(bool, bool)> {
        match (fwd.get(&a), bwd.get(&c)) {
            (Some(&c2), _) if c2 != c => None,
            (_, Some(&a2)) if a2 != a => None,
            (Some(_), Some(_)) => Some((false, false)),
            _ => {
                let nf = fwd.insert(a, c).is_none();
                let nb = bwd.insert(c, a).is_none();
                Some((nf, nb))
            }
        }
    }

    fn unassign(
        fwd: &mut BTreeMap<VertexId, VertexId>,
        bwd: &mut BTreeMap<VertexId, VertexId>,
        a: VertexId,
        c: VertexId,
        fresh: (bool, bool),
    ) {
        if fresh.0 {
            fwd.remove(&a);
        }
        if fresh.1 {
            bwd.remove(&c);
        }
    }

    fn go(
        edges: &[EdgeId],
        idx: usize,
        r: &LabeledGraph,
        h: &LabeledGraph,
        fwd: &mut BTreeMap<VertexId, VertexId>,
        bwd: &mut BTreeMap<VertexId, VertexId>,
    ) -> bool {
        let Some(&e) = edges.get(idx) else {
            return true;
        };
        let (a, b) = r.endpoints(e).unwrap();
        let (c, d) = h.endpoints(e).unwrap();
        for (p, q) in [(c, d), (d, c)] {
            let Some(f1) = assign(fwd, bwd, a, p) else { continue };
            if let Some(f2) = assign(fwd, bwd, b, q) {
                if go(edges, idx + 1, r, h, fwd, bwd) {
                    return true;
                }
                unassign(fwd, bwd, b, q, f2);
            }
            unassign(fwd, bwd, a, p, f1);
            if a == b || c == d {
                break;
            }
        }
        false
    }

    if !go(&edges, 0, r, h, &mut fwd, &mut bwd) {
        return None;
    }

    // isolated vertices: h's must all be matched, extras of r are spare
    let h_free: Vec<VertexId> = h.vertices().filter(|v| !bwd.contains_key(v)).collect();
    let r_free: Vec<VertexId> = r.vertices().filter(|v| !fwd.contains_key(v)).collect();
    if h_free.len() > r_free.len() {
        return None;
    }
    if h_free.iter().any(|v| h.degree(*v) > 0) || r_free.iter().any(|v| r.degree(*v) > 0) {
        return None;
    }
    for (a, c) in r_free.into_iter().zip(h_free.into_iter()) {
        fwd.insert(a, c);
    }
    Some(fwd)
}

/// The shadow of an edge set in one entry of the sequence: plain label
/// intersection.
pub fn shadow(a: &BTreeSet<EdgeId>, seq: &TemporalSequence, j: usize) -> BTreeSet<EdgeId> {
    a.intersection(&seq.graph(j).edge_set()).copied().collect()
}

/// A Tutte leaf of a maximal entry whose edges have not appeared yet:
/// either the entry opens the sequence or the previous entry misses all
/// of the leaf's labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Upleaf {
    pub edges: BTreeSet<EdgeId>,
    /// Offset of the maximal entry the leaf is rooted at (always even).
    pub root: usize,
}

pub fn upleaves(seq: &TemporalSequence) -> Result<Vec<Upleaf>> {
    if !seq.is_normalized() {
        return Err(Error::Precondition("sequence is not normalized".into()));
    }
    let mut out = Vec::new();
    for root in (0..seq.len()).step_by(2) {
        for edges in tutte_leaves(seq.graph(root))? {
            let new_edges = root == 0
                || edges
                    .intersection(&seq.graph(root - 1).edge_set())
                    .next()
                    .is_none();
            if new_edges {
                out.push(Upleaf { edges, root });
            }
        }
    }
    Ok(out)
}

/// The upleaf with the largest root, ties broken by the smallest sorted
/// edge-label set.
pub fn last_upleaf(seq: &TemporalSequence) -> Result<Upleaf> {
    upleaves(seq)?
        .into_iter()
        .max_by(|a, b| a.root.cmp(&b.root).then(b.edges.cmp(&a.edges)))
        .ok_or_else(|| Error::Internal("a normalized sequence always has an upleaf".into()))
}

/// Does g have a bond through all three edges? Equivalently, is the
/// labelled theta on exactly {x, y, z} a minor of g? Checked by brute
/// force over vertex bipartitions with both sides connected.
pub fn bond_contains_three(g: &LabeledGraph, x: EdgeId, y: EdgeId, z: EdgeId) -> Result<bool> {
    if x == y || y == z || x == z {
        return Ok(false);
    }
    for e in [x, y, z] {
        if !g.has_edge(e) || g.is_loop(e)? {
            return Ok(false);
        }
    }
    if !g.is_connected() {
        return Ok(false);
    }
    let vs: Vec<VertexId> = g.vertices().collect();
    let n = vs.len();
    if n > BIPARTITION_VERTEX_CAP {
        return Err(Error::ResourceCap(format!(
            "{n} vertices exceed the bipartition enumeration cap"
        )));
    }
    let ends: Vec<(VertexId, VertexId)> = [x, y, z]
        .iter()
        .map(|&e| g.endpoints(e).unwrap())
        .collect();
    for mask in 0..(1u64 << (n - 1)) {
        let mut side: BTreeSet<VertexId> = BTreeSet::from([vs[0]]);
        for (i, &v) in vs.iter().enumerate().skip(1) {
            if mask >> (i - 1) & 1 == 1 {
                side.insert(v);
            }
        }
        if !ends
            .iter()
            .all(|&(u, v)| side.contains(&u) != side.contains(&v))
        {
            continue;
        }
        let other: BTreeSet<VertexId> = vs.iter().filter(|v| !side.contains(v)).copied().collect();
        if induced_connected(g, &side) && induced_connected(g, &other) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn induced_connected(g: &LabeledGraph, set: &BTreeSet<VertexId>) -> bool {
    let Some(&start) = set.iter().next() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for e in g.incident_edges(v) {
            let (a, b) = g.endpoints(e).unwrap();
            let w = if a == v { b } else { a };
            if set.contains(&w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == set.len()
}

/// All label triples {x, y, z} from the middle graph that form a theta
/// minor of it and — after routing each label to the torso edge whose
/// reservoir holds it — of both outer torsos.
pub fn temporal_theta_minor(
    b1: &Bag,
    g2: &LabeledGraph,
    b3: &Bag,
) -> Result<Vec<[EdgeId; 3]>> {
    let route = |bag: &Bag, e: EdgeId| -> Option<EdgeId> {
        bag.reservoirs
            .iter()
            .find(|(_, res)| res.contains(&e))
            .map(|(&label, _)| label)
    };
    let edges: Vec<EdgeId> = g2.edge_ids().collect();
    let mut out = Vec::new();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            'triple: for k in j + 1..edges.len() {
                let (x, y, z) = (edges[i], edges[j], edges[k]);
                if !bond_contains_three(g2, x, y, z)? {
                    continue;
                }
                for bag in [b1, b3] {
                    let (Some(tx), Some(ty), Some(tz)) =
                        (route(bag, x), route(bag, y), route(bag, z))
                    else {
                        continue 'triple;
                    };
                    if tx == ty || ty == tz || tx == tz {
                        continue 'triple;
                    }
                    if !bond_contains_three(&bag.torso, tx, ty, tz)? {
                        continue 'triple;
                    }
                }
                out.push([x, y, z]);
            }
        }
    }
    Ok(out)
}

/// A witness deleting g down to its subgraph h (same labels, same
/// endpoints, leftover vertices dropped).
pub fn subgraph_witness(g: &LabeledGraph, h: &LabeledGraph) -> Result<MinorWitness> {
    for v in h.vertices() {
        if !g.has_vertex(v) {
            return Err(Error::Input(format!("vertex {v} is not in the host graph")));
        }
    }
    for e in h.edge_ids() {
        if !g.has_edge(e) || g.endpoints(e)? != h.endpoints(e)? {
            return Err(Error::Input(format!(
                "edge {e} is not an identical edge of the host graph"
            )));
        }
    }
    let mut steps: Vec<MinorStep> = g
        .edge_set()
        .difference(&h.edge_set())
        .map(|&e| MinorStep::Delete(e))
        .collect();
    for v in g.vertices() {
        if !h.has_vertex(v) {
            steps.push(MinorStep::DropIsolated(v));
        }
    }
    let w = MinorWitness::new(steps);
    w.verify(g, h)?;
    Ok(w)
}

/// Flatten a rooted tree of graphs (each parent's graph a subgraph of
/// its children's) into the interleaved sequence whose simultaneous
/// embeddings match the tree instance: children subtrees separated by
/// copies of the root's graph.
pub fn rooted_tree_to_sequence(
    nodes: &[LabeledGraph],
    children: &[Vec<usize>],
    root: usize,
) -> Result<TemporalSequence> {
    if nodes.is_empty() || nodes.len() != children.len() || root >= nodes.len() {
        return Err(Error::Input("malformed graph tree".into()));
    }
    let mut visited = BTreeSet::new();
    let order = flatten(nodes, children, root, &mut visited)?;
    let graphs: Vec<LabeledGraph> = order.iter().map(|&i| nodes[i].clone()).collect();
    let mut steps = Vec::new();
    for pair in graphs.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let step = if let Ok(witness) = subgraph_witness(a, b) {
            TemporalStep { direction: Direction::Down, witness }
        } else {
            let witness = subgraph_witness(b, a).map_err(|_| {
                Error::Input("tree containment violated between interleaved entries".into())
            })?;
            TemporalStep { direction: Direction::Up, witness }
        };
        steps.push(step);
    }
    TemporalSequence::new(graphs, steps)
}

fn flatten(
    nodes: &[LabeledGraph],
    children: &[Vec<usize>],
    at: usize,
    visited: &mut BTreeSet<usize>,
) -> Result<Vec<usize>> {
    if !visited.insert(at) {
        return Err(Error::Input("graph tree contains a cycle".into()));
    }
    let kids = &children[at];
    for &c in kids {
        if c >= nodes.len() {
            return Err(Error::Input(format!("child index {c} out of range")));
        }
        if !subgraph_of(&nodes[at], &nodes[c]) {
            return Err(Error::Input(format!(
                "tree containment violated between node {at} and child {c}"
            )));
        }
    }
    if kids.is_empty() {
        return Ok(vec![at]);
    }
    let mut out = Vec::new();
    for (pos, &c) in kids.iter().enumerate() {
        if pos > 0 {
            out.push(at);
        }
        out.extend(flatten(nodes, children, c, visited)?);
    }
    Ok(out)
}

fn subgraph_of(small: &LabeledGraph, big: &LabeledGraph) -> bool {
    small.vertices().all(|v| big.has_vertex(v))
        && small.edge_ids().all(|e| {
            big.has_edge(e) && big.endpoints(e).unwrap() == small.endpoints(e).unwrap()
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::tutte_decompose;

    fn c4() -> LabeledGraph {
        LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3), (3, 3, 4), (4, 4, 1)]).unwrap()
    }

    fn k4() -> LabeledGraph {
        LabeledGraph::from_edges([
            (12, 1, 2),
            (13, 1, 3),
            (14, 1, 4),
            (23, 2, 3),
            (24, 2, 4),
            (34, 3, 4),
        ])
        .unwrap()
    }

    fn k4_minus_edge() -> LabeledGraph {
        LabeledGraph::from_edges([(12, 1, 2), (23, 2, 3), (13, 1, 3), (14, 1, 4), (34, 3, 4)])
            .unwrap()
    }

    fn theta_at_13() -> LabeledGraph {
        LabeledGraph::from_edges([(13, 1, 3), (12, 1, 3), (14, 1, 3)]).unwrap()
    }

    fn e(ids: impl IntoIterator<Item = u32>) -> BTreeSet<EdgeId> {
        ids.into_iter().map(EdgeId).collect()
    }

    #[test]
    fn monotone_runs_compress_and_ends_pad() {
        let c4 = c4();
        let c3 = c4.apply_step(&MinorStep::Contract(EdgeId(4))).unwrap();
        let c3_renamed = c3
            .apply_step(&MinorStep::Relabel(VertexId(3), VertexId(5)))
            .unwrap();
        let seq = verify_and_normalize(&[c4.clone(), c3, c3_renamed.clone()], &[]).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.graph(0), &c4);
        assert_eq!(seq.graph(1), &c3_renamed);
        assert_eq!(seq.graph(2), &c3_renamed);
        assert_eq!(seq.trace().dropped_inputs, vec![1]);
        assert_eq!(seq.trace().padded_outputs, vec![2]);
        assert!(seq.is_normalized());
        seq.steps()[0]
            .witness
            .verify(&c4, &c3_renamed)
            .expect("composed witness replays across the dropped entry");
    }

    #[test]
    fn caption_witnesses_verify_a_contract_and_delete_triple() {
        // middle graph reached from the left by contracting 4 and
        // deleting 7, from the right by contracting 8 and deleting 9
        let g2 = LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3), (3, 3, 4), (5, 4, 1)]).unwrap();
        let g1 = LabeledGraph::from_edges([
            (1, 1, 2),
            (2, 2, 3),
            (3, 3, 4),
            (5, 4, 1),
            (4, 9, 1),
            (7, 9, 3),
        ])
        .unwrap();
        let g3 = LabeledGraph::from_edges([
            (1, 1, 2),
            (2, 2, 3),
            (3, 3, 4),
            (5, 4, 1),
            (8, 6, 2),
            (9, 6, 4),
        ])
        .unwrap();
        let hints = vec![
            StepHint {
                direction: Some(Direction::Down),
                witness: Some(MinorWitness::new(vec![
                    MinorStep::Contract(EdgeId(4)),
                    MinorStep::Delete(EdgeId(7)),
                ])),
            },
            StepHint {
                direction: Some(Direction::Up),
                witness: Some(MinorWitness::new(vec![
                    MinorStep::Contract(EdgeId(8)),
                    MinorStep::Delete(EdgeId(9)),
                ])),
            },
        ];
        let seq = verify_and_normalize(&[g1, g2, g3], &hints).unwrap();
        assert!(seq.is_normalized());
        assert_eq!(seq.len(), 3);
        assert!(seq.trace().dropped_inputs.is_empty());
        assert!(seq.trace().padded_outputs.is_empty());
    }

    #[test]
    fn unrelated_pair_is_a_sequence_error() {
        let c5 = LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3), (3, 3, 4), (4, 4, 5), (5, 5, 1)])
            .unwrap();
        let err = verify_and_normalize(&[k4(), c5], &[]).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
        assert!(err.to_string().contains("entries 0 and 1"));
    }

    #[test]
    fn identical_graphs_have_an_empty_witness() {
        let w = find_labeled_minor_witness(&k4(), &k4()).unwrap().unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn witness_search_contracts_one_edge_per_triangle_side() {
        let g = k4_minus_edge();
        let w = find_labeled_minor_witness(&g, &theta_at_13()).unwrap().unwrap();
        assert_eq!(w.contracted_edges(), e([23, 34]));
        assert!(w.deleted_edges().is_empty());
        w.verify(&g, &theta_at_13()).unwrap();
    }

    #[test]
    fn foreign_labels_mean_no_witness() {
        let c3_foreign = LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3), (9, 3, 1)]).unwrap();
        assert!(find_labeled_minor_witness(&c4(), &c3_foreign).unwrap().is_none());
    }

    #[test]
    fn witness_search_handles_vertex_swaps() {
        let g = LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3), (3, 3, 1)]).unwrap();
        let h = LabeledGraph::from_edges([(1, 2, 1), (2, 1, 3), (3, 3, 2)]).unwrap();
        // h is g with vertices 1 and 2 exchanged
        let w = find_labeled_minor_witness(&g, &h).unwrap().unwrap();
        w.verify(&g, &h).unwrap();
    }

    #[test]
    fn shadows_intersect_labels_and_compose() {
        let g1 = k4_minus_edge();
        let g2 = theta_at_13();
        let seq = verify_and_normalize(&[g1, g2], &[]).unwrap();
        let a = e([12, 23]);
        assert_eq!(shadow(&a, &seq, 1), e([12]));
        assert_eq!(shadow(&e([23, 34]), &seq, 1), e([]));
        let via_middle: BTreeSet<EdgeId> = shadow(&shadow(&a, &seq, 1), &seq, 2);
        assert_eq!(via_middle, shadow(&a, &seq, 2));
    }

    #[test]
    fn upleaves_need_unseen_labels() {
        let seq = verify_and_normalize(&[k4_minus_edge(), theta_at_13()], &[]).unwrap();
        // normalized to (K4−e ≽ theta ≼ theta)
        let ups = upleaves(&seq).unwrap();
        assert_eq!(
            ups,
            vec![
                Upleaf { edges: e([12, 23]), root: 0 },
                Upleaf { edges: e([13]), root: 0 },
                Upleaf { edges: e([14, 34]), root: 0 },
            ]
        );
        let last = last_upleaf(&seq).unwrap();
        assert_eq!(last, Upleaf { edges: e([12, 23]), root: 0 });
    }

    #[test]
    fn single_graph_tutte_leaves_are_all_upleaves() {
        let theta = LabeledGraph::from_edges([(1, 1, 2), (2, 1, 2), (3, 1, 2)]).unwrap();
        let seq = verify_and_normalize(&[theta], &[]).unwrap();
        let ups = upleaves(&seq).unwrap();
        assert_eq!(ups.len(), 3);
        assert!(ups.iter().all(|u| u.root == 0));
        assert_eq!(last_upleaf(&seq).unwrap().edges, e([1]));
    }

    #[test]
    fn theta_edges_lie_on_a_common_bond() {
        let theta = LabeledGraph::from_edges([(1, 1, 2), (2, 1, 2), (3, 1, 2)]).unwrap();
        assert!(bond_contains_three(&theta, EdgeId(1), EdgeId(2), EdgeId(3)).unwrap());
    }

    #[test]
    fn cycle_bonds_have_only_two_edges() {
        let g = c4();
        let ids: Vec<EdgeId> = g.edge_ids().collect();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                for k in j + 1..ids.len() {
                    assert!(!bond_contains_three(&g, ids[i], ids[j], ids[k]).unwrap());
                }
            }
        }
    }

    #[test]
    fn star_cuts_of_k4_carry_three_edges() {
        assert!(bond_contains_three(&k4(), EdgeId(12), EdgeId(13), EdgeId(14)).unwrap());
        assert!(!bond_contains_three(&k4(), EdgeId(12), EdgeId(13), EdgeId(23)).unwrap());
    }

    #[test]
    fn bond_test_agrees_with_labelled_minor_search() {
        let dipole = LabeledGraph::from_edges([(1, 1, 2), (2, 1, 2), (3, 1, 2), (4, 1, 2)]).unwrap();
        let fixtures = [theta_like(), c4(), k4(), k4_minus_edge(), dipole];
        for g in &fixtures {
            let ids: Vec<EdgeId> = g.edge_ids().collect();
            for i in 0..ids.len() {
                for j in i + 1..ids.len() {
                    for k in j + 1..ids.len() {
                        let (x, y, z) = (ids[i], ids[j], ids[k]);
                        let (u, v) = (VertexId(1001), VertexId(1002));
                        let mut target = LabeledGraph::new();
                        target.add_edge(x, u, v).unwrap();
                        target.add_edge(y, u, v).unwrap();
                        target.add_edge(z, u, v).unwrap();
                        let by_search =
                            find_labeled_minor_witness(g, &target).unwrap().is_some();
                        let by_bond = bond_contains_three(g, x, y, z).unwrap();
                        assert_eq!(by_search, by_bond, "{g:?} triple {x} {y} {z}");
                    }
                }
            }
        }
    }

    fn theta_like() -> LabeledGraph {
        LabeledGraph::from_edges([(1, 1, 2), (2, 1, 2), (3, 1, 2)]).unwrap()
    }

    #[test]
    fn middle_theta_labels_route_into_both_torsos() {
        let dec = tutte_decompose(&k4()).unwrap();
        let bag = &dec.bags[0];
        let middle = LabeledGraph::from_edges([(12, 1, 2), (13, 1, 2), (14, 1, 2)]).unwrap();
        let triples = temporal_theta_minor(bag, &middle, bag).unwrap();
        assert_eq!(triples, vec![[EdgeId(12), EdgeId(13), EdgeId(14)]]);

        let foreign = LabeledGraph::from_edges([(91, 1, 2), (92, 1, 2), (93, 1, 2)]).unwrap();
        assert!(temporal_theta_minor(bag, &foreign, bag).unwrap().is_empty());
    }

    #[test]
    fn isomorphic_outer_graphs_can_link_through_several_triples() {
        // two K4s contracting onto the same doubled-pair middle graph in
        // different ways
        let g1 = LabeledGraph::from_edges([
            (5, 1, 2),
            (1, 1, 3),
            (2, 1, 4),
            (3, 2, 3),
            (4, 2, 4),
            (9, 3, 4),
        ])
        .unwrap();
        let g3 = LabeledGraph::from_edges([
            (6, 1, 2),
            (1, 1, 3),
            (3, 2, 3),
            (4, 1, 4),
            (2, 2, 4),
            (9, 3, 4),
        ])
        .unwrap();
        let g2 = g1.apply_step(&MinorStep::Contract(EdgeId(5))).unwrap();
        assert_eq!(g2, g3.apply_step(&MinorStep::Contract(EdgeId(6))).unwrap());
        let d1 = tutte_decompose(&g1).unwrap();
        let d3 = tutte_decompose(&g3).unwrap();
        let triples = temporal_theta_minor(&d1.bags[0], &g2, &d3.bags[0]).unwrap();
        assert!(triples.contains(&[EdgeId(1), EdgeId(2), EdgeId(3)]));
        assert!(triples.contains(&[EdgeId(2), EdgeId(3), EdgeId(4)]));
        for t in &triples {
            assert!(bond_contains_three(&g2, t[0], t[1], t[2]).unwrap());
        }
    }

    #[test]
    fn single_node_tree_is_a_one_graph_sequence() {
        let seq = rooted_tree_to_sequence(&[k4()], &[vec![]], 0).unwrap();
        assert_eq!(seq.len(), 1);
        assert!(seq.is_normalized());
    }

    #[test]
    fn star_tree_interleaves_children_around_the_root() {
        let h = LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3), (3, 3, 1)]).unwrap();
        let mut g1 = h.clone();
        g1.add_vertex(VertexId(4));
        g1.add_edge(EdgeId(4), VertexId(1), VertexId(4)).unwrap();
        g1.add_edge(EdgeId(5), VertexId(2), VertexId(4)).unwrap();
        let mut g2 = h.clone();
        g2.add_vertex(VertexId(5));
        g2.add_edge(EdgeId(6), VertexId(2), VertexId(5)).unwrap();
        g2.add_edge(EdgeId(7), VertexId(3), VertexId(5)).unwrap();
        let seq =
            rooted_tree_to_sequence(&[h.clone(), g1.clone(), g2.clone()], &[vec![1, 2], vec![], vec![]], 0)
                .unwrap();
        assert_eq!(seq.graphs(), &[g1, h, g2]);
        assert!(seq.is_normalized());
    }

    #[test]
    fn depth_two_tree_unfolds_to_length_five() {
        let root = LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3), (3, 3, 1)]).unwrap();
        let grow = |g: &LabeledGraph, v: u32, e1: u32, a: u32, e2: u32, b: u32| {
            let mut out = g.clone();
            out.add_vertex(VertexId(v));
            out.add_edge(EdgeId(e1), VertexId(a), VertexId(v)).unwrap();
            out.add_edge(EdgeId(e2), VertexId(b), VertexId(v)).unwrap();
            out
        };
        let c1 = grow(&root, 4, 4, 1, 5, 2);
        let d1 = grow(&c1, 5, 6, 1, 7, 4);
        let d2 = grow(&c1, 6, 8, 2, 9, 4);
        let c2 = grow(&root, 7, 10, 2, 11, 3);
        let nodes = [root.clone(), c1.clone(), c2.clone(), d1.clone(), d2.clone()];
        let children = [vec![1, 2], vec![3, 4], vec![], vec![], vec![]];
        let seq = rooted_tree_to_sequence(&nodes, &children, 0).unwrap();
        assert_eq!(seq.len(), 5);
        assert_eq!(seq.graphs(), &[d1, c1, d2, root, c2]);
        assert!(seq.is_normalized());
    }

    #[test]
    fn tree_containment_violations_are_input_errors() {
        let h = LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3), (3, 3, 1)]).unwrap();
        let unrelated = LabeledGraph::from_edges([(9, 7, 8)]).unwrap();
        let err = rooted_tree_to_sequence(&[h, unrelated], &[vec![1], vec![]], 0).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }
}
