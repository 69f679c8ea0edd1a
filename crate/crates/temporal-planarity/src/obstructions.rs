//! Certificates that rule out a simultaneous embedding: disagreeable,
//! amazingly-bad and gaudy triples, inconsistent triple/list pairs, and
//! uncombinable list pairs, plus the planarity pre-check. [`obstructed`]
//! scans a sequence in a fixed order — triples by offset, kinds in the
//! order just given — and returns the first certificate found.

use std::collections::{BTreeMap, BTreeSet};

use crate::bonds::{
    bond_cyclic_order, bond_sides, centred_bond, is_gaudy, ColourId, GaudyWitness,
};
use crate::decomposition::{
    is_tuplet, tutte_decompose, tutte_leaves, two_components_at, two_separators, Bag, TorsoKind,
};
use crate::graph::{
    enumerate_planar_embeddings, EdgeId, EmbeddedGraph, LabeledGraph, MinorStep, MinorWitness,
    VertexId,
};
use crate::lists::{
    check_same_blocks, combine, is_planar_two_connected, BlockId, Blocks, CombineOutcome,
    EmbeddingList, UncombinableCertificate, EMBEDDING_ENUMERATION_CAP,
};
use crate::temporal::{temporal_theta_minor, TemporalSequence};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ObstructionKind {
    Nonplanar,
    Disagreeable,
    AmazinglyBad,
    Gaudy,
    Inconsistent,
    Uncombinable,
}

impl std::fmt::Display for ObstructionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ObstructionKind::Nonplanar => "nonplanar",
            ObstructionKind::Disagreeable => "disagreeable",
            ObstructionKind::AmazinglyBad => "amazingly-bad",
            ObstructionKind::Gaudy => "gaudy",
            ObstructionKind::Inconsistent => "inconsistent",
            ObstructionKind::Uncombinable => "uncombinable",
        };
        write!(f, "{name}")
    }
}

/// A reason no simultaneous embedding (satisfying the given lists) can
/// exist. Every variant carries enough data to re-derive the conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Obstruction {
    /// An entry with no planar embedding at all.
    Nonplanar { graph: usize },
    /// Two theta minors shared by a 3-block of the first and a 3-block of
    /// the third graph whose relative orientations cannot both be matched,
    /// whichever embeddings the two blocks receive.
    Disagreeable {
        triple: usize,
        block1: BlockId,
        block3: BlockId,
        theta1: [EdgeId; 3],
        theta2: [EdgeId; 3],
    },
    /// A decomposition leaf of the first graph pins the middle graph's
    /// components at a projected pair into an arrangement that one
    /// component of the third graph cannot span contiguously.
    AmazinglyBad {
        triple: usize,
        leaf: BTreeSet<EdgeId>,
        tuplet: (VertexId, VertexId),
        component: BTreeSet<EdgeId>,
    },
    /// A centred colouring of the triple that stays gaudy after keeping
    /// one colour and pooling the rest.
    Gaudy {
        triple: usize,
        separator: (VertexId, VertexId),
        pivot: VertexId,
        red: ColourId,
        witness: GaudyWitness,
    },
    /// Stored embeddings of same-part blocks that cannot agree on the
    /// orientation of shared theta minors. Two blocks and one theta mean
    /// the stored pair itself disagrees; three blocks and two thetas mean
    /// no orientation of the first block satisfies both.
    Inconsistent {
        triple: usize,
        list: usize,
        blocks: Vec<BlockId>,
        thetas: Vec<[EdgeId; 3]>,
    },
    /// Two lists whose parts impose contradictory reorientation parities.
    Uncombinable { certificate: UncombinableCertificate },
}

impl Obstruction {
    pub fn kind(&self) -> ObstructionKind {
        match self {
            Obstruction::Nonplanar { .. } => ObstructionKind::Nonplanar,
            Obstruction::Disagreeable { .. } => ObstructionKind::Disagreeable,
            Obstruction::AmazinglyBad { .. } => ObstructionKind::AmazinglyBad,
            Obstruction::Gaudy { .. } => ObstructionKind::Gaudy,
            Obstruction::Inconsistent { .. } => ObstructionKind::Inconsistent,
            Obstruction::Uncombinable { .. } => ObstructionKind::Uncombinable,
        }
    }
}

fn check_triple_offset(seq: &TemporalSequence, offset: usize) -> Result<()> {
    if !seq.is_normalized() {
        return Err(Error::Precondition("sequence is not normalized".into()));
    }
    if offset % 2 != 0 || offset + 2 >= seq.len() {
        return Err(Error::Precondition(format!(
            "no maximal triple starts at offset {offset}"
        )));
    }
    Ok(())
}

/// The standalone consecutive triple beginning at the maximal entry
/// `offset` of a normalized sequence.
pub fn triple_at(seq: &TemporalSequence, offset: usize) -> Result<TemporalSequence> {
    check_triple_offset(seq, offset)?;
    TemporalSequence::new(
        seq.graphs()[offset..=offset + 2].to_vec(),
        seq.steps()[offset..=offset + 1].to_vec(),
    )
}

/// The first maximal entry with no planar embedding, if any. Minor
/// entries inherit planarity from their neighbours, so checking the
/// maximal ones suffices.
pub fn check_nonplanar(seq: &TemporalSequence) -> Result<Option<Obstruction>> {
    if !seq.is_normalized() {
        return Err(Error::Precondition("sequence is not normalized".into()));
    }
    for i in (0..seq.len()).step_by(2) {
        if !is_planar_two_connected(seq.graph(i))? {
            return Ok(Some(Obstruction::Nonplanar { graph: i }));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Theta orientations.
//
// A theta minor on three labels is realized by splitting the vertex set
// into two connected halves that every one of the three edges crosses;
// contracting each half gives the two branch vertices. An embedding then
// induces one of two cyclic orders on the three edges. To compare the
// order a torso embedding induces with the order the middle graph gets,
// the torso's split must project onto the middle graph's split: every
// torso vertex with a shadow in the middle graph has to land in the
// matching half. The parity of a theta is whether the two torsos, so
// aligned, induce the same cyclic order; reorienting either torso flips
// it. Triples with no such aligned realization on one side constrain
// nothing and are skipped.

const SPLIT_VERTEX_CAP: usize = 22;

struct OuterFrame<'a> {
    bag: &'a Bag,
    alpha: &'a EmbeddedGraph,
    vmap: &'a BTreeMap<VertexId, VertexId>,
}

fn route_theta(bag: &Bag, labels: [EdgeId; 3]) -> Result<[EdgeId; 3]> {
    let route = |e: EdgeId| -> Result<EdgeId> {
        bag.reservoirs
            .iter()
            .find(|(_, res)| res.contains(&e))
            .map(|(&label, _)| label)
            .ok_or_else(|| Error::Internal(format!("label {e} reaches no reservoir of the torso")))
    };
    Ok([route(labels[0])?, route(labels[1])?, route(labels[2])?])
}

/// Which label each virtual torso edge lends to the theta. A virtual
/// edge stands in for every edge of its reservoir, but a concrete
/// 3-connected minor fixes one of them; two thetas can only constrain
/// the same minor if they agree on these picks.
fn pick_signature(bag: &Bag, labels: [EdgeId; 3]) -> Result<BTreeMap<EdgeId, EdgeId>> {
    let routed = route_theta(bag, labels)?;
    let mut sig = BTreeMap::new();
    for (t, l) in routed.into_iter().zip(labels) {
        if !bag.real_edges.contains(&t) {
            sig.insert(t, l);
        }
    }
    Ok(sig)
}

fn picks_agree(a: &BTreeMap<EdgeId, EdgeId>, b: &BTreeMap<EdgeId, EdgeId>) -> bool {
    a.iter().all(|(t, l)| b.get(t).map_or(true, |m| m == l))
}

fn connected_within(g: &LabeledGraph, side: &BTreeSet<VertexId>) -> bool {
    let Some(&start) = side.iter().next() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for e in g.incident_edges(v) {
            let (a, b) = g.endpoints(e).unwrap();
            let w = if a == v { b } else { a };
            if side.contains(&w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == side.len()
}

/// All ways to realize a theta minor on the given edge triple: vertex
/// bipartitions with both halves connected and all three edges crossing.
fn theta_splits(
    g: &LabeledGraph,
    triple: [EdgeId; 3],
) -> Result<Vec<(BTreeSet<VertexId>, BTreeSet<VertexId>)>> {
    let vs: Vec<VertexId> = g.vertices().collect();
    let n = vs.len();
    if n > SPLIT_VERTEX_CAP {
        return Err(Error::ResourceCap(format!(
            "{n} vertices exceed the bipartition enumeration cap"
        )));
    }
    let ends: Vec<(VertexId, VertexId)> = triple
        .iter()
        .map(|&e| g.endpoints(e))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for mask in 0..(1u64 << (n.saturating_sub(1))) {
        let mut side: BTreeSet<VertexId> = BTreeSet::from([vs[0]]);
        for (i, &v) in vs.iter().enumerate().skip(1) {
            if mask >> (i - 1) & 1 == 1 {
                side.insert(v);
            }
        }
        if side.len() == n {
            continue;
        }
        if !ends
            .iter()
            .all(|&(u, v)| side.contains(&u) != side.contains(&v))
        {
            continue;
        }
        let other: BTreeSet<VertexId> = vs.iter().filter(|v| !side.contains(v)).copied().collect();
        if connected_within(g, &side) && connected_within(g, &other) {
            out.push((side, other));
        }
    }
    Ok(out)
}

/// The cyclic order the torso embedding induces on the theta, reported
/// relative to the middle graph's split: `true` iff, read around the
/// half that projects into `p_side`, the middle label of the sorted
/// triple directly follows the smallest. `None` when no realization of
/// the routed triple projects onto the given split.
fn projected_flag(
    frame: &OuterFrame,
    p_side: &BTreeSet<VertexId>,
    routed: [EdgeId; 3],
    labels: [EdgeId; 3],
) -> Result<Option<bool>> {
    let torso = &frame.bag.torso;
    for (a, _) in theta_splits(torso, routed)? {
        let mut pairing: Option<bool> = None;
        let mut consistent = true;
        for w in torso.vertices() {
            let Some(img) = frame.vmap.get(&w) else {
                continue;
            };
            let this = a.contains(&w) == p_side.contains(img);
            match pairing {
                None => pairing = Some(this),
                Some(prev) if prev != this => {
                    consistent = false;
                    break;
                }
                _ => {}
            }
        }
        let Some(a_matches_p) = pairing else {
            continue;
        };
        if !consistent {
            continue;
        }
        let routed_set: BTreeSet<EdgeId> = routed.iter().copied().collect();
        let extra: Vec<MinorStep> = torso
            .edge_ids()
            .filter(|&e| {
                let (u, v) = torso.endpoints(e).unwrap();
                a.contains(&u) != a.contains(&v) && !routed_set.contains(&e)
            })
            .map(MinorStep::Delete)
            .collect();
        let reduced = frame.alpha.induce(&MinorWitness::new(extra))?;
        let (s0, _) = bond_sides(reduced.graph(), &routed_set).ok_or_else(|| {
            Error::Internal("a theta realization did not reduce to a bond".into())
        })?;
        let order = bond_cyclic_order(&reduced, &routed_set)?;
        let to_label: BTreeMap<EdgeId, EdgeId> = routed.iter().copied().zip(labels).collect();
        let seen: Vec<EdgeId> = order.iter().map(|t| to_label[t]).collect();
        let pos = seen
            .iter()
            .position(|&l| l == labels[0])
            .ok_or_else(|| Error::Internal("theta label missing from its cyclic order".into()))?;
        let read_flag = seen[(pos + 1) % 3] == labels[1];
        let around_a = if s0 == a { read_flag } else { !read_flag };
        return Ok(Some(if a_matches_p { around_a } else { !around_a }));
    }
    Ok(None)
}

/// Whether the two embedded torsos induce the same cyclic order on the
/// theta. `None` when the triple admits no common aligned realization
/// and so imposes no constraint on the pair.
fn theta_parity(
    g2: &LabeledGraph,
    f1: &OuterFrame,
    f3: &OuterFrame,
    labels: [EdgeId; 3],
) -> Result<Option<bool>> {
    let mut labels = labels;
    labels.sort();
    let routed1 = route_theta(f1.bag, labels)?;
    let routed3 = route_theta(f3.bag, labels)?;
    for (p, _) in theta_splits(g2, labels)? {
        let Some(o1) = projected_flag(f1, &p, routed1, labels)? else {
            continue;
        };
        let Some(o3) = projected_flag(f3, &p, routed3, labels)? else {
            continue;
        };
        return Ok(Some(o1 == o3));
    }
    Ok(None)
}

fn first_embedding(g: &LabeledGraph) -> Result<EmbeddedGraph> {
    let rot = enumerate_planar_embeddings(g, EMBEDDING_ENUMERATION_CAP)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Precondition("torso has no planar embedding".into()))?;
    EmbeddedGraph::new(g.clone(), rot)
}

enum PairVerdict {
    Unlinked,
    Coupled,
    Disagreeing([EdgeId; 3], [EdgeId; 3]),
}

fn pair_verdict(
    g2: &LabeledGraph,
    b1: &Bag,
    down: &BTreeMap<VertexId, VertexId>,
    b3: &Bag,
    up: &BTreeMap<VertexId, VertexId>,
) -> Result<PairVerdict> {
    let thetas = temporal_theta_minor(b1, g2, b3)?;
    if thetas.is_empty() {
        return Ok(PairVerdict::Unlinked);
    }
    let a1 = first_embedding(&b1.torso)?;
    let a3 = first_embedding(&b3.torso)?;
    let f1 = OuterFrame { bag: b1, alpha: &a1, vmap: down };
    let f3 = OuterFrame { bag: b3, alpha: &a3, vmap: up };
    let mut seen = Vec::new();
    for &t in &thetas {
        let Some(p) = theta_parity(g2, &f1, &f3, t)? else {
            continue;
        };
        let s1 = pick_signature(b1, t)?;
        let s3 = pick_signature(b3, t)?;
        for (t0, p0, s10, s30) in &seen {
            if p != *p0 && picks_agree(&s1, s10) && picks_agree(&s3, s30) {
                return Ok(PairVerdict::Disagreeing(*t0, t));
            }
        }
        seen.push((t, p, s1, s3));
    }
    if seen.is_empty() {
        Ok(PairVerdict::Unlinked)
    } else {
        Ok(PairVerdict::Coupled)
    }
}

/// Scans the triple at `offset` for a 3-block pair whose shared thetas
/// cannot all be matched at once.
pub fn check_disagreeable(seq: &TemporalSequence, offset: usize) -> Result<Option<Obstruction>> {
    check_triple_offset(seq, offset)?;
    let g1 = seq.graph(offset);
    let g2 = seq.graph(offset + 1);
    let g3 = seq.graph(offset + 2);
    let dec1 = tutte_decompose(g1)?;
    let dec3 = tutte_decompose(g3)?;
    let down = seq.steps()[offset].witness.vertex_map(g1)?;
    let up = seq.steps()[offset + 1].witness.vertex_map(g3)?;
    for (i1, b1) in dec1.bags.iter().enumerate() {
        if b1.kind != TorsoKind::ThreeBlock {
            continue;
        }
        for (i3, b3) in dec3.bags.iter().enumerate() {
            if b3.kind != TorsoKind::ThreeBlock {
                continue;
            }
            if let PairVerdict::Disagreeing(t0, t1) = pair_verdict(g2, b1, &down, b3, &up)? {
                return Ok(Some(Obstruction::Disagreeable {
                    triple: offset,
                    block1: BlockId { graph: offset, bag: i1 },
                    block3: BlockId { graph: offset + 2, bag: i3 },
                    theta1: t0,
                    theta2: t1,
                }));
            }
        }
    }
    Ok(None)
}

fn outer_bags(
    seq: &TemporalSequence,
    offset: usize,
    block1: BlockId,
    block3: BlockId,
) -> Result<(Bag, Bag)> {
    check_triple_offset(seq, offset)?;
    if block1.graph != offset || block3.graph != offset + 2 {
        return Err(Error::Precondition(
            "blocks do not belong to the outer graphs of the triple".into(),
        ));
    }
    let pick = |graph: usize, bag: usize| -> Result<Bag> {
        let dec = tutte_decompose(seq.graph(graph))?;
        let b = dec
            .bags
            .get(bag)
            .ok_or_else(|| Error::Precondition(format!("graph {graph} has no bag {bag}")))?;
        if b.kind != TorsoKind::ThreeBlock {
            return Err(Error::Precondition(format!(
                "bag {bag} of graph {graph} is not a 3-block"
            )));
        }
        Ok(b.clone())
    };
    Ok((pick(block1.graph, block1.bag)?, pick(block3.graph, block3.bag)?))
}

/// Whether the two outer 3-blocks share at least one theta minor that
/// constrains their embeddings.
pub fn linked(
    seq: &TemporalSequence,
    offset: usize,
    block1: BlockId,
    block3: BlockId,
) -> Result<bool> {
    let (b1, b3) = outer_bags(seq, offset, block1, block3)?;
    let down = seq.steps()[offset].witness.vertex_map(seq.graph(offset))?;
    let up = seq.steps()[offset + 1].witness.vertex_map(seq.graph(offset + 2))?;
    match pair_verdict(seq.graph(offset + 1), &b1, &down, &b3, &up)? {
        PairVerdict::Unlinked => Ok(false),
        _ => Ok(true),
    }
}

/// Whether the two outer 3-blocks are linked and admit embeddings that
/// match the orientation of every shared theta at once.
pub fn coupled(
    seq: &TemporalSequence,
    offset: usize,
    block1: BlockId,
    block3: BlockId,
) -> Result<bool> {
    let (b1, b3) = outer_bags(seq, offset, block1, block3)?;
    let down = seq.steps()[offset].witness.vertex_map(seq.graph(offset))?;
    let up = seq.steps()[offset + 1].witness.vertex_map(seq.graph(offset + 2))?;
    match pair_verdict(seq.graph(offset + 1), &b1, &down, &b3, &up)? {
        PairVerdict::Coupled => Ok(true),
        _ => Ok(false),
    }
}

// ---------------------------------------------------------------------------
// Amazingly-bad triples.

/// Arrangement of the middle graph's components at a projected pair, as
/// pinned by the embeddings the first graph induces: the full cycle when
/// every component carries a leaf edge, otherwise the contiguous run of
/// those that do.
enum ForcedShape {
    Cycle(Vec<usize>),
    Chain(Vec<usize>),
}

fn rotate_to_min_usize(mut order: Vec<usize>) -> Vec<usize> {
    if let Some(pos) = order.iter().enumerate().min_by_key(|&(_, v)| *v).map(|(i, _)| i) {
        order.rotate_left(pos);
    }
    order
}

fn cycle_canonical(order: &[usize]) -> Vec<usize> {
    let fwd = rotate_to_min_usize(order.to_vec());
    let rev = rotate_to_min_usize(order.iter().rev().copied().collect());
    fwd.min(rev)
}

fn chain_canonical(arc: Vec<usize>) -> Vec<usize> {
    let rev: Vec<usize> = arc.iter().rev().copied().collect();
    arc.min(rev)
}

/// The members of `f` as one contiguous cyclic run of `order`, or `None`
/// when they do not sit together.
fn cyclic_run(order: &[usize], f: &BTreeSet<usize>) -> Option<Vec<usize>> {
    let n = order.len();
    if f.is_empty() {
        return Some(Vec::new());
    }
    if f.len() >= n {
        return Some(order.to_vec());
    }
    let start = (0..n).find(|&i| f.contains(&order[i]) && !f.contains(&order[(i + n - 1) % n]))?;
    let run: Vec<usize> = (0..n)
        .map(|k| order[(start + k) % n])
        .take_while(|v| f.contains(v))
        .collect();
    if run.len() == f.len() {
        Some(run)
    } else {
        None
    }
}

fn cyclic_subset_contiguous(order: &[usize], s: &BTreeSet<usize>) -> bool {
    cyclic_run(order, s).is_some()
}

/// Positions of `set` inside `chain` when they form one contiguous run.
fn run_of(chain: &[usize], set: &BTreeSet<usize>) -> Option<(usize, usize)> {
    let positions: Vec<usize> = chain
        .iter()
        .enumerate()
        .filter(|(_, v)| set.contains(v))
        .map(|(i, _)| i)
        .collect();
    if positions.len() != set.len() {
        return None;
    }
    let (lo, hi) = (*positions.first()?, *positions.last()?);
    if hi - lo + 1 == positions.len() {
        Some((lo, hi))
    } else {
        None
    }
}

/// Whether the components `s` can be brought together without breaking
/// the arrangement forced on the leaf-carrying components.
fn affectively_connected(
    s: &BTreeSet<usize>,
    f: &BTreeSet<usize>,
    total: usize,
    shape: &ForcedShape,
) -> bool {
    match shape {
        ForcedShape::Cycle(order) => cyclic_subset_contiguous(order, s),
        ForcedShape::Chain(chain) => {
            let u: BTreeSet<usize> = (0..total).filter(|i| !f.contains(i)).collect();
            if s.iter().all(|i| f.contains(i)) {
                s.is_empty() || run_of(chain, s).is_some()
            } else if u.iter().all(|i| s.contains(i)) {
                let fs: BTreeSet<usize> = f.intersection(s).copied().collect();
                let co: BTreeSet<usize> =
                    chain.iter().copied().filter(|i| !fs.contains(i)).collect();
                co.is_empty() || run_of(chain, &co).is_some()
            } else {
                let fs: BTreeSet<usize> = f.intersection(s).copied().collect();
                if fs.is_empty() {
                    return true;
                }
                match run_of(chain, &fs) {
                    Some((lo, hi)) => lo == 0 || hi == chain.len() - 1,
                    None => false,
                }
            }
        }
    }
}

fn forced_shape(total: usize, f: &BTreeSet<usize>, orders: &[Vec<usize>]) -> Result<ForcedShape> {
    if f.len() == total {
        let mut canon: Option<Vec<usize>> = None;
        for o in orders {
            let c = cycle_canonical(o);
            match &canon {
                None => canon = Some(c),
                Some(prev) if *prev != c => {
                    return Err(Error::Internal(
                        "induced embeddings disagree on a fully pinned arrangement".into(),
                    ));
                }
                _ => {}
            }
        }
        Ok(ForcedShape::Cycle(canon.unwrap_or_default()))
    } else {
        let mut canon: Option<Vec<usize>> = None;
        for o in orders {
            let arc = cyclic_run(o, f).ok_or_else(|| {
                Error::Internal("leaf-carrying components do not sit together".into())
            })?;
            let c = chain_canonical(arc);
            match &canon {
                None => canon = Some(c),
                Some(prev) if *prev != c => {
                    return Err(Error::Internal(
                        "induced embeddings disagree on a pinned arrangement".into(),
                    ));
                }
                _ => {}
            }
        }
        Ok(ForcedShape::Chain(canon.unwrap_or_default()))
    }
}

/// Component indices in rotator order around `x`, runs collapsed. Each
/// component's edges at `x` must form one contiguous run.
fn component_order_at(
    emb: &EmbeddedGraph,
    x: VertexId,
    comps: &[BTreeSet<EdgeId>],
) -> Result<Vec<usize>> {
    let rot = emb
        .rotation()
        .rotator(x)
        .ok_or(Error::UnknownVertex(x))?;
    let mut order: Vec<usize> = Vec::new();
    for d in rot {
        let owner = comps
            .iter()
            .position(|c| c.contains(&d.edge))
            .ok_or_else(|| {
                Error::Internal(format!("edge {} belongs to no component at the pair", d.edge))
            })?;
        if order.last() != Some(&owner) {
            order.push(owner);
        }
    }
    if order.len() > 1 && order.first() == order.last() {
        order.pop();
    }
    let distinct: BTreeSet<usize> = order.iter().copied().collect();
    if distinct.len() != order.len() {
        return Err(Error::Internal(
            "a component's edges split into separate runs".into(),
        ));
    }
    Ok(rotate_to_min_usize(order))
}

fn rotation_fingerprint(emb: &EmbeddedGraph) -> String {
    format!("{:?}", emb.rotation())
}

/// The distinct embeddings the first graph of the triple induces on the
/// middle one.
fn induced_middle_embeddings(seq: &TemporalSequence, offset: usize) -> Result<Vec<EmbeddedGraph>> {
    let g1 = seq.graph(offset);
    let rots = enumerate_planar_embeddings(g1, EMBEDDING_ENUMERATION_CAP)?;
    if rots.is_empty() {
        return Err(Error::Precondition(
            "the first graph of the triple has no planar embedding".into(),
        ));
    }
    let witness = &seq.steps()[offset].witness;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut induced = Vec::new();
    for rot in rots {
        let f = EmbeddedGraph::new(g1.clone(), rot)?.induce(witness)?;
        if seen.insert(rotation_fingerprint(&f)) {
            induced.push(f);
        }
    }
    Ok(induced)
}

fn shadow_components(
    comps2: &[BTreeSet<EdgeId>],
    c3: &BTreeSet<EdgeId>,
) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for (i, d) in comps2.iter().enumerate() {
        if d.is_disjoint(c3) {
            continue;
        }
        if !d.is_subset(c3) {
            return Err(Error::Internal(
                "a middle component straddles two components of the third graph".into(),
            ));
        }
        out.insert(i);
    }
    Ok(out)
}

/// Scans the triple at `offset` for a decomposition leaf of the first
/// graph and a component at a tuplet of the third whose projections
/// cannot be embedded together. `leaf` restricts the scan to one leaf;
/// otherwise every leaf is tried.
pub fn check_amazingly_bad(
    seq: &TemporalSequence,
    offset: usize,
    leaf: Option<&BTreeSet<EdgeId>>,
) -> Result<Option<Obstruction>> {
    check_triple_offset(seq, offset)?;
    let g2 = seq.graph(offset + 1);
    let g3 = seq.graph(offset + 2);
    let all_leaves = tutte_leaves(seq.graph(offset))?;
    let leaves: Vec<&BTreeSet<EdgeId>> = match leaf {
        Some(a) => {
            if !all_leaves.contains(a) {
                return Err(Error::Precondition(
                    "the given edge set is not a decomposition leaf of the first graph".into(),
                ));
            }
            vec![a]
        }
        None => all_leaves.iter().collect(),
    };
    let induced = induced_middle_embeddings(seq, offset)?;
    let up_map = seq.steps()[offset + 1].witness.vertex_map(g3)?;
    // Arrangements depend only on the projected pair; share them between
    // tuplets and leaves.
    type PairData = Option<(Vec<BTreeSet<EdgeId>>, Vec<Vec<usize>>)>;
    let mut cache: BTreeMap<(VertexId, VertexId), PairData> = BTreeMap::new();
    for s in two_separators(g3) {
        if !is_tuplet(g3, s.0, s.1) {
            continue;
        }
        let (px, py) = match (up_map.get(&s.0), up_map.get(&s.1)) {
            (Some(&a), Some(&b)) if a != b => (a, b),
            _ => continue,
        };
        if !cache.contains_key(&(px, py)) {
            let comps2 = two_components_at(g2, px, py);
            let data = if comps2.len() < 2 {
                None
            } else {
                let mut orders = Vec::new();
                for emb in &induced {
                    orders.push(component_order_at(emb, px, &comps2)?);
                }
                Some((comps2, orders))
            };
            cache.insert((px, py), data);
        }
        let Some((comps2, orders)) = cache[&(px, py)].as_ref() else {
            continue;
        };
        let comps3 = two_components_at(g3, s.0, s.1);
        for a in &leaves {
            let f_set: BTreeSet<usize> = (0..comps2.len())
                .filter(|&i| !comps2[i].is_disjoint(a))
                .collect();
            if f_set.is_empty() {
                continue;
            }
            let shape = forced_shape(comps2.len(), &f_set, orders)?;
            for c3 in &comps3 {
                let s_set = shadow_components(comps2, c3)?;
                if !affectively_connected(&s_set, &f_set, comps2.len(), &shape) {
                    return Ok(Some(Obstruction::AmazinglyBad {
                        triple: offset,
                        leaf: (*a).clone(),
                        tuplet: s,
                        component: c3.clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Gaudy triples.

/// Scans the triple at `offset` for a centred colouring that stays gaudy
/// after binarising one of its colours.
pub fn check_gaudy(seq: &TemporalSequence, offset: usize) -> Result<Option<Obstruction>> {
    let triple = triple_at(seq, offset)?;
    for t in two_separators(seq.graph(offset)) {
        for x in [t.0, t.1] {
            let centred = match centred_bond(&triple, t, x) {
                Ok(c) => c,
                Err(Error::Precondition(_)) => continue,
                Err(e) => return Err(e),
            };
            for red in centred.colours_used() {
                let bg = centred.binarised(red);
                if let Some(witness) = is_gaudy(&bg)? {
                    return Ok(Some(Obstruction::Gaudy {
                        triple: offset,
                        separator: t,
                        pivot: x,
                        red,
                        witness,
                    }));
                }
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Inconsistent triple/list pairs.

/// Scans the triple at `offset` against the stored embeddings of `list`:
/// first for a same-part pair of outer blocks whose stored embeddings
/// disagree on a shared theta, then for a same-part trio that no
/// orientation of the left block can satisfy.
pub fn check_inconsistent(
    seq: &TemporalSequence,
    offset: usize,
    list: &EmbeddingList,
    list_index: usize,
    blocks: &Blocks,
) -> Result<Option<Obstruction>> {
    check_triple_offset(seq, offset)?;
    check_same_blocks(list, blocks)?;
    let g2 = seq.graph(offset + 1);
    let down = seq.steps()[offset].witness.vertex_map(seq.graph(offset))?;
    let up = seq.steps()[offset + 1].witness.vertex_map(seq.graph(offset + 2))?;
    let side1: Vec<BlockId> = list.block_ids().filter(|id| id.graph == offset).collect();
    let side3: Vec<BlockId> = list.block_ids().filter(|id| id.graph == offset + 2).collect();
    let stored = |id: BlockId| -> Result<EmbeddedGraph> {
        let torso = blocks
            .torso(id)
            .ok_or_else(|| Error::Internal(format!("{id} has no torso")))?;
        let rot = list
            .embedding(id)
            .ok_or_else(|| Error::Internal(format!("{id} has no stored embedding")))?;
        EmbeddedGraph::new(torso.clone(), rot.clone())
    };
    for &id1 in &side1 {
        for &id3 in &side3 {
            if list.part_of(id1) != list.part_of(id3) {
                continue;
            }
            let b1 = blocks.bag(id1).expect("listed block");
            let b3 = blocks.bag(id3).expect("listed block");
            let thetas = temporal_theta_minor(b1, g2, b3)?;
            if thetas.is_empty() {
                continue;
            }
            let a1 = stored(id1)?;
            let a3 = stored(id3)?;
            let f1 = OuterFrame { bag: b1, alpha: &a1, vmap: &down };
            let f3 = OuterFrame { bag: b3, alpha: &a3, vmap: &up };
            for &t in &thetas {
                if theta_parity(g2, &f1, &f3, t)? == Some(false) {
                    return Ok(Some(Obstruction::Inconsistent {
                        triple: offset,
                        list: list_index,
                        blocks: vec![id1, id3],
                        thetas: vec![t],
                    }));
                }
            }
        }
    }
    for &id1 in &side1 {
        let b1 = blocks.bag(id1).expect("listed block");
        let a1 = stored(id1)?;
        for (k, &id3) in side3.iter().enumerate() {
            for &id3b in &side3[k + 1..] {
                if list.part_of(id1) != list.part_of(id3)
                    || list.part_of(id1) != list.part_of(id3b)
                {
                    continue;
                }
                let b3 = blocks.bag(id3).expect("listed block");
                let b3b = blocks.bag(id3b).expect("listed block");
                let thetas = temporal_theta_minor(b1, g2, b3)?;
                let thetas_b = temporal_theta_minor(b1, g2, b3b)?;
                if thetas.is_empty() || thetas_b.is_empty() {
                    continue;
                }
                let a3 = stored(id3)?;
                let a3b = stored(id3b)?;
                let f1 = OuterFrame { bag: b1, alpha: &a1, vmap: &down };
                let f3 = OuterFrame { bag: b3, alpha: &a3, vmap: &up };
                let f3b = OuterFrame { bag: b3b, alpha: &a3b, vmap: &up };
                for &t in &thetas {
                    let Some(bit) = theta_parity(g2, &f1, &f3, t)? else {
                        continue;
                    };
                    let s1 = pick_signature(b1, t)?;
                    for &tb in &thetas_b {
                        if !picks_agree(&s1, &pick_signature(b1, tb)?) {
                            continue;
                        }
                        let Some(bit_b) = theta_parity(g2, &f1, &f3b, tb)? else {
                            continue;
                        };
                        if bit != bit_b {
                            return Ok(Some(Obstruction::Inconsistent {
                                triple: offset,
                                list: list_index,
                                blocks: vec![id1, id3, id3b],
                                thetas: vec![t, tb],
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Wraps list combination as an obstruction check.
pub fn check_uncombinable(l: &EmbeddingList, m: &EmbeddingList) -> Result<Option<Obstruction>> {
    match combine(l, m)? {
        CombineOutcome::Combined(_) => Ok(None),
        CombineOutcome::Uncombinable(certificate) => {
            Ok(Some(Obstruction::Uncombinable { certificate }))
        }
    }
}

/// First certificate found scanning triples by offset and, within each
/// triple, the kinds in order: disagreeable, amazingly-bad, gaudy, then
/// inconsistent against each list in turn; finally the pair of lists is
/// tested for combinability. The planarity pre-check is separate — see
/// [`check_nonplanar`].
pub fn obstructed(
    seq: &TemporalSequence,
    lists: &[EmbeddingList],
) -> Result<Option<Obstruction>> {
    if lists.len() > 2 {
        return Err(Error::Precondition("at most two lists are supported".into()));
    }
    let blocks = Blocks::of(seq)?;
    for list in lists {
        check_same_blocks(list, &blocks)?;
    }
    let mut offset = 0;
    while offset + 2 < seq.len() {
        if let Some(o) = check_disagreeable(seq, offset)? {
            return Ok(Some(o));
        }
        if let Some(o) = check_amazingly_bad(seq, offset, None)? {
            return Ok(Some(o));
        }
        if let Some(o) = check_gaudy(seq, offset)? {
            return Ok(Some(o));
        }
        for (li, list) in lists.iter().enumerate() {
            if let Some(o) = check_inconsistent(seq, offset, list, li, &blocks)? {
                return Ok(Some(o));
            }
        }
        offset += 2;
    }
    if let [l, m] = lists {
        if let Some(o) = check_uncombinable(l, m)? {
            return Ok(Some(o));
        }
    }
    Ok(None)
}
