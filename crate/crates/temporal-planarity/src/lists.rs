//! Embedding lists: partitions of the 3-blocks of a sequence's maximal
//! entries with one chosen torso embedding per block. A simultaneous
//! embedding satisfies a list when, within each part, every block's
//! induced embedding agrees with the chosen one up to a single common
//! reorientation. Lists combine through a parity constraint graph, and
//! lift along accurate coarsenings of the sequence.

use std::collections::{BTreeMap, BTreeSet};

use crate::decomposition::{
    torso_embedding, tutte_decompose, Bag, TorsoKind, TutteDecomposition,
};
use crate::graph::{
    enumerate_planar_embeddings, Dart, EdgeId, EmbeddedGraph, LabeledGraph, MinorWitness,
    RotationSystem,
};
use crate::temporal::{find_labeled_minor_witness, TemporalSequence};
use crate::{Error, Result};

pub const EMBEDDING_ENUMERATION_CAP: usize = 50_000;

/// Names one 3-block: the offset of a maximal entry and the bag index in
/// its decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockId {
    pub graph: usize,
    pub bag: usize,
}

impl std::fmt::Display for BlockId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "block {}.{}", self.graph, self.bag)
    }
}

/// The planar 3-blocks of a normalized sequence, with the decompositions
/// of its maximal entries kept for reuse.
#[derive(Debug, Clone)]
pub struct Blocks {
    ids: Vec<BlockId>,
    decs: BTreeMap<usize, TutteDecomposition>,
}

impl Blocks {
    pub fn of(seq: &TemporalSequence) -> Result<Blocks> {
        if !seq.is_normalized() {
            return Err(Error::Precondition("sequence is not normalized".into()));
        }
        let mut ids = Vec::new();
        let mut decs = BTreeMap::new();
        for i in (0..seq.len()).step_by(2) {
            let dec = tutte_decompose(seq.graph(i))?;
            for (j, bag) in dec.bags.iter().enumerate() {
                if bag.kind == TorsoKind::ThreeBlock && torso_is_planar(&bag.torso)? {
                    ids.push(BlockId { graph: i, bag: j });
                }
            }
            decs.insert(i, dec);
        }
        Ok(Blocks { ids, decs })
    }

    pub fn ids(&self) -> &[BlockId] {
        &self.ids
    }

    pub fn decomposition(&self, graph: usize) -> Option<&TutteDecomposition> {
        self.decs.get(&graph)
    }

    pub fn bag(&self, id: BlockId) -> Option<&Bag> {
        self.decs.get(&id.graph)?.bags.get(id.bag)
    }

    pub fn torso(&self, id: BlockId) -> Option<&LabeledGraph> {
        self.bag(id).map(|b| &b.torso)
    }
}

fn torso_is_planar(t: &LabeledGraph) -> Result<bool> {
    Ok(!enumerate_planar_embeddings(t, EMBEDDING_ENUMERATION_CAP)?.is_empty())
}

/// Whether a graph 2-connected enough to decompose is planar, decided
/// blockwise: cycles and dipole torsos always embed, so only the
/// 3-block torsos need checking.
pub fn is_planar_two_connected(g: &LabeledGraph) -> Result<bool> {
    let dec = tutte_decompose(g)?;
    for bag in &dec.bags {
        if bag.kind == TorsoKind::ThreeBlock && !torso_is_planar(&bag.torso)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingList {
    parts: Vec<BTreeSet<BlockId>>,
    embeddings: BTreeMap<BlockId, RotationSystem>,
}

impl EmbeddingList {
    pub fn new(
        parts: Vec<BTreeSet<BlockId>>,
        embeddings: BTreeMap<BlockId, RotationSystem>,
        blocks: &Blocks,
    ) -> Result<Self> {
        let mut seen: BTreeSet<BlockId> = BTreeSet::new();
        for part in &parts {
            if part.is_empty() {
                return Err(Error::Input("empty list part".into()));
            }
            for &id in part {
                if !seen.insert(id) {
                    return Err(Error::Input(format!("{id} appears in two parts")));
                }
            }
        }
        let expected: BTreeSet<BlockId> = blocks.ids().iter().copied().collect();
        if seen != expected || embeddings.keys().copied().collect::<BTreeSet<_>>() != expected {
            return Err(Error::Input(
                "list does not cover exactly the sequence's 3-blocks".into(),
            ));
        }
        for (&id, rot) in &embeddings {
            let torso = blocks.torso(id).expect("covered id");
            rot.validate(torso)?;
            EmbeddedGraph::new(torso.clone(), rot.clone()).map_err(|_| {
                Error::Input(format!("the embedding stored for {id} is not planar"))
            })?;
        }
        Ok(Self::assemble(parts, embeddings))
    }

    fn assemble(
        mut parts: Vec<BTreeSet<BlockId>>,
        embeddings: BTreeMap<BlockId, RotationSystem>,
    ) -> Self {
        parts.sort_by_key(|p| p.iter().next().copied());
        EmbeddingList { parts, embeddings }
    }

    pub fn parts(&self) -> &[BTreeSet<BlockId>] {
        &self.parts
    }

    pub fn embedding(&self, id: BlockId) -> Option<&RotationSystem> {
        self.embeddings.get(&id)
    }

    pub fn block_ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.embeddings.keys().copied()
    }

    pub fn part_of(&self, id: BlockId) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(&id))
    }
}

/// One part per block, first enumerated embedding each.
pub fn trivial_list(seq: &TemporalSequence) -> Result<EmbeddingList> {
    for i in (0..seq.len()).step_by(2) {
        if !is_planar_two_connected(seq.graph(i))? {
            return Err(Error::Precondition(format!(
                "entry {i} has no planar embedding"
            )));
        }
    }
    let blocks = Blocks::of(seq)?;
    let mut parts = Vec::new();
    let mut embeddings = BTreeMap::new();
    for &id in blocks.ids() {
        let torso = blocks.torso(id).expect("listed id");
        let all = enumerate_planar_embeddings(torso, EMBEDDING_ENUMERATION_CAP)?;
        let first = all
            .into_iter()
            .next()
            .ok_or_else(|| Error::Internal(format!("{id} lost its planar embedding")))?;
        parts.push(BTreeSet::from([id]));
        embeddings.insert(id, first);
    }
    EmbeddingList::new(parts, embeddings, &blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// How an embedding of the whole graph orients one of its 3-blocks
/// relative to a reference torso embedding; `None` when the induced
/// embedding is not the reference up to reorientation.
pub fn block_sign(
    embedded: &EmbeddedGraph,
    dec: &TutteDecomposition,
    bag: usize,
    reference: &RotationSystem,
) -> Result<Option<Sign>> {
    let induced = torso_embedding(embedded, dec, bag)?;
    if induced.rotation() == reference {
        Ok(Some(Sign::Plus))
    } else if induced.rotation() == &reference.reorient() {
        Ok(Some(Sign::Minus))
    } else {
        Ok(None)
    }
}

/// Does the per-entry family of embeddings satisfy the list? Signs are
/// computed per block; each part must be orientation-uniform.
pub fn satisfies(
    seq: &TemporalSequence,
    sigma: &[RotationSystem],
    l: &EmbeddingList,
) -> Result<bool> {
    if sigma.len() != seq.len() {
        return Err(Error::Input(format!(
            "{} embeddings for {} graphs",
            sigma.len(),
            seq.len()
        )));
    }
    let blocks = Blocks::of(seq)?;
    check_same_blocks(l, &blocks)?;
    let mut embedded: BTreeMap<usize, EmbeddedGraph> = BTreeMap::new();
    for &id in blocks.ids() {
        if !embedded.contains_key(&id.graph) {
            embedded.insert(
                id.graph,
                EmbeddedGraph::new(seq.graph(id.graph).clone(), sigma[id.graph].clone())?,
            );
        }
    }
    for part in l.parts() {
        let mut part_sign: Option<Sign> = None;
        for &id in part {
            let sign = block_sign(
                &embedded[&id.graph],
                blocks.decomposition(id.graph).expect("listed graph"),
                id.bag,
                l.embedding(id).expect("covered id"),
            )?;
            let Some(sign) = sign else {
                return Ok(false);
            };
            match part_sign {
                None => part_sign = Some(sign),
                Some(s) if s != sign => return Ok(false),
                Some(_) => {}
            }
        }
    }
    Ok(true)
}

pub(crate) fn check_same_blocks(l: &EmbeddingList, blocks: &Blocks) -> Result<()> {
    let have: BTreeSet<BlockId> = l.block_ids().collect();
    let want: BTreeSet<BlockId> = blocks.ids().iter().copied().collect();
    if have != want {
        return Err(Error::Input(
            "list does not match the sequence's 3-blocks".into(),
        ));
    }
    Ok(())
}

fn sign_between(a: &RotationSystem, b: &RotationSystem) -> Option<Sign> {
    if a == b {
        Some(Sign::Plus)
    } else if a == &b.reorient() {
        Some(Sign::Minus)
    } else {
        None
    }
}

/// Same partition, and per part the embeddings agree up to one common
/// reorientation.
pub fn equivalent(a: &EmbeddingList, b: &EmbeddingList) -> Result<bool> {
    if a.parts != b.parts {
        return Ok(false);
    }
    for part in a.parts() {
        let mut part_sign: Option<Sign> = None;
        for &id in part {
            let (ea, eb) = (a.embedding(id).unwrap(), b.embedding(id).unwrap());
            let Some(sign) = sign_between(ea, eb) else {
                return Ok(false);
            };
            match part_sign {
                None => part_sign = Some(sign),
                Some(s) if s != sign => return Ok(false),
                Some(_) => {}
            }
        }
    }
    Ok(true)
}

/// An odd cycle in the parity constraint graph between the parts of two
/// lists: consecutive blocks share a part of one list or the other,
/// alternating, and the reorientation parities sum to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncombinableCertificate {
    pub cycle: Vec<BlockId>,
}

impl UncombinableCertificate {
    /// Re-derives the contradiction from the two lists.
    pub fn validate(&self, l: &EmbeddingList, m: &EmbeddingList) -> Result<()> {
        if self.cycle.len() < 2 || self.cycle.len() % 2 != 0 {
            return Err(Error::Input("certificate cycle must have even length ≥ 2".into()));
        }
        let mut parity = 0u8;
        for &id in &self.cycle {
            let (el, em) = match (l.embedding(id), m.embedding(id)) {
                (Some(el), Some(em)) => (el, em),
                _ => return Err(Error::Input(format!("{id} is not in both lists"))),
            };
            match sign_between(el, em) {
                Some(Sign::Plus) => {}
                Some(Sign::Minus) => parity ^= 1,
                None => return Err(Error::Input(format!("{id} embeddings unrelated"))),
            }
        }
        for (k, &id) in self.cycle.iter().enumerate() {
            let next = self.cycle[(k + 1) % self.cycle.len()];
            let share_l = l.part_of(id) == l.part_of(next);
            let share_m = m.part_of(id) == m.part_of(next);
            // alternate which list links consecutive blocks
            let want_l = k % 2 == 0;
            if (want_l && !share_l) || (!want_l && !share_m) {
                return Err(Error::Input(format!(
                    "certificate blocks {id} and {next} do not share the expected part"
                )));
            }
        }
        if parity != 1 {
            return Err(Error::Input("certificate parities cancel out".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CombineOutcome {
    Combined(EmbeddingList),
    Uncombinable(UncombinableCertificate),
}

/// Merge two lists into the finest common coarsening whose satisfaction
/// is the conjunction of both, or report the parity obstruction.
pub fn combine(l: &EmbeddingList, m: &EmbeddingList) -> Result<CombineOutcome> {
    let lk: BTreeSet<BlockId> = l.block_ids().collect();
    let mk: BTreeSet<BlockId> = m.block_ids().collect();
    if lk != mk {
        return Err(Error::Input("lists cover different 3-blocks".into()));
    }

    let offset = l.parts().len();
    let node_count = offset + m.parts().len();
    let mut adj: Vec<Vec<(usize, u8, BlockId)>> = vec![Vec::new(); node_count];
    for &id in &lk {
        let lp = l.part_of(id).expect("covered");
        let mp = offset + m.part_of(id).expect("covered");
        let parity = match sign_between(l.embedding(id).unwrap(), m.embedding(id).unwrap()) {
            Some(Sign::Plus) => 0,
            Some(Sign::Minus) => 1,
            None => {
                return Err(Error::Input(format!(
                    "the lists store unrelated embeddings for {id}"
                )))
            }
        };
        adj[lp].push((mp, parity, id));
        adj[mp].push((lp, parity, id));
    }

    let mut colour: Vec<Option<u8>> = vec![None; node_count];
    let mut parent: Vec<Option<(usize, BlockId)>> = vec![None; node_count];
    let mut component: Vec<usize> = vec![usize::MAX; node_count];
    for start in 0..node_count {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(0);
        component[start] = start;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cu = colour[u].unwrap();
            for &(v, parity, id) in &adj[u] {
                let expected = cu ^ parity;
                match colour[v] {
                    None => {
                        colour[v] = Some(expected);
                        component[v] = start;
                        parent[v] = Some((u, id));
                        queue.push_back(v);
                    }
                    Some(cv) if cv != expected => {
                        return Ok(CombineOutcome::Uncombinable(UncombinableCertificate {
                            cycle: conflict_cycle(&parent, u, v, id),
                        }));
                    }
                    Some(_) => {}
                }
            }
        }
    }

    let mut parts: BTreeMap<usize, BTreeSet<BlockId>> = BTreeMap::new();
    let mut embeddings = BTreeMap::new();
    for &id in &lk {
        let lp = l.part_of(id).expect("covered");
        parts.entry(component[lp]).or_default().insert(id);
        let rot = l.embedding(id).unwrap();
        let rot = if colour[lp] == Some(0) { rot.clone() } else { rot.reorient() };
        embeddings.insert(id, rot);
    }
    Ok(CombineOutcome::Combined(EmbeddingList::assemble(
        parts.into_values().collect(),
        embeddings,
    )))
}

fn conflict_cycle(
    parent: &[Option<(usize, BlockId)>],
    u: usize,
    v: usize,
    closing: BlockId,
) -> Vec<BlockId> {
    let ascend = |mut n: usize| {
        let mut nodes = vec![n];
        let mut blocks = Vec::new();
        while let Some((p, id)) = parent[n] {
            blocks.push(id);
            nodes.push(p);
            n = p;
        }
        (nodes, blocks)
    };
    let (nu, bu) = ascend(u);
    let (nv, bv) = ascend(v);
    let nu_pos: BTreeMap<usize, usize> = nu.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    for (i, &n) in nv.iter().enumerate() {
        if let Some(&j) = nu_pos.get(&n) {
            let mut cycle: Vec<BlockId> = bu[..j].iter().rev().copied().collect();
            cycle.push(closing);
            cycle.extend(bv[..i].iter().copied());
            return cycle;
        }
    }
    // BFS trees within one component always meet
    vec![closing]
}

/// One lift per low block, as bag indices of the high decomposition.
pub fn block_lifts(
    dec_low: &TutteDecomposition,
    dec_high: &TutteDecomposition,
) -> Result<BTreeMap<usize, usize>> {
    Ok(block_lift_details(dec_low, dec_high)?
        .into_iter()
        .map(|(low, lift)| (low, lift.high_bag))
        .collect())
}

struct Lift {
    high_bag: usize,
    witness: MinorWitness,
    relabel: BTreeMap<EdgeId, EdgeId>,
}

fn block_lift_details(
    dec_low: &TutteDecomposition,
    dec_high: &TutteDecomposition,
) -> Result<BTreeMap<usize, Lift>> {
    let mut out = BTreeMap::new();
    let mut used: BTreeMap<usize, usize> = BTreeMap::new();
    for (li, low_bag) in dec_low.bags.iter().enumerate() {
        if low_bag.kind != TorsoKind::ThreeBlock {
            continue;
        }
        let mut found: Option<Lift> = None;
        for (hi, high_bag) in dec_high.bags.iter().enumerate() {
            if high_bag.kind != TorsoKind::ThreeBlock {
                continue;
            }
            let Some((relabelled, map)) = route_torso(&low_bag.torso, high_bag) else {
                continue;
            };
            if let Some(witness) = find_labeled_minor_witness(&relabelled, &low_bag.torso)? {
                if let Some(prev) = &found {
                    return Err(Error::Precondition(format!(
                        "3-block bag {li} lifts into both bags {} and {hi}",
                        prev.high_bag
                    )));
                }
                found = Some(Lift { high_bag: hi, witness, relabel: map });
            }
        }
        let lift = found.ok_or_else(|| {
            Error::Precondition(format!("3-block bag {li} has no lift"))
        })?;
        if let Some(&other) = used.get(&lift.high_bag) {
            return Err(Error::Precondition(format!(
                "3-block bags {other} and {li} both lift into bag {}",
                lift.high_bag
            )));
        }
        used.insert(lift.high_bag, li);
        out.insert(li, lift);
    }
    Ok(out)
}

/// Rename the high bag's torso edges by routing each low label into the
/// reservoir holding it; fails when two low labels collide on one torso
/// edge. Returns the renamed torso and the applied renaming.
fn route_torso(
    low_torso: &LabeledGraph,
    high_bag: &Bag,
) -> Option<(LabeledGraph, BTreeMap<EdgeId, EdgeId>)> {
    let low_labels = low_torso.edge_set();
    let mut map: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for (&torso_edge, reservoir) in &high_bag.reservoirs {
        let matched: Vec<EdgeId> = reservoir.intersection(&low_labels).copied().collect();
        match matched.len() {
            0 => {}
            1 => {
                map.insert(torso_edge, matched[0]);
            }
            _ => return None,
        }
    }
    let routed: BTreeSet<EdgeId> = map.values().copied().collect();
    if !low_labels.is_subset(&routed) {
        return None;
    }
    let mut renamed = LabeledGraph::new();
    for v in high_bag.torso.vertices() {
        renamed.add_vertex(v);
    }
    for e in high_bag.torso.edge_ids() {
        let (u, v) = high_bag.torso.endpoints(e).expect("torso edge");
        let label = map.get(&e).copied().unwrap_or(e);
        renamed.add_edge(label, u, v).ok()?;
    }
    Some((renamed, map))
}

pub(crate) fn translate_rotation(
    rot: &RotationSystem,
    map: &BTreeMap<EdgeId, EdgeId>,
) -> RotationSystem {
    RotationSystem::new(rot.vertices().map(|v| {
        let rotator = rot
            .rotator(v)
            .expect("listed vertex")
            .iter()
            .map(|d| Dart::new(map.get(&d.edge).copied().unwrap_or(d.edge), d.side))
            .collect();
        (v, rotator)
    }))
}

/// Carry a list along a pair of equally long sequences where each high
/// entry contains the corresponding low entry as a minor and is accurate
/// for it: lifted parts keep their coupling, all other high blocks get
/// singleton parts.
pub fn lift_list(
    low: &TemporalSequence,
    l: &EmbeddingList,
    high: &TemporalSequence,
) -> Result<EmbeddingList> {
    if low.len() != high.len() {
        return Err(Error::Input("sequences differ in length".into()));
    }
    let low_blocks = Blocks::of(low)?;
    let high_blocks = Blocks::of(high)?;
    check_same_blocks(l, &low_blocks)?;

    let mut lift_of: BTreeMap<BlockId, (BlockId, RotationSystem)> = BTreeMap::new();
    for i in (0..low.len()).step_by(2) {
        let dec_low = low_blocks.decomposition(i).expect("maximal entry");
        let dec_high = high_blocks.decomposition(i).expect("maximal entry");
        for (li, lift) in block_lift_details(dec_low, dec_high)? {
            let low_id = BlockId { graph: i, bag: li };
            let high_id = BlockId { graph: i, bag: lift.high_bag };
            let reference = l
                .embedding(low_id)
                .ok_or_else(|| Error::Input(format!("{low_id} missing from the list")))?;
            let high_torso = high_blocks
                .torso(high_id)
                .ok_or_else(|| Error::Internal(format!("{high_id} is not a planar 3-block")))?;
            let (renamed, _) = route_torso(
                &low_blocks.torso(low_id).expect("listed"),
                high_blocks.bag(high_id).expect("listed"),
            )
            .ok_or_else(|| Error::Internal("lift lost its routing".into()))?;
            let mut chosen = None;
            for rot in enumerate_planar_embeddings(high_torso, EMBEDDING_ENUMERATION_CAP)? {
                let renamed_rot = translate_rotation(&rot, &lift.relabel);
                let induced = EmbeddedGraph::new(renamed.clone(), renamed_rot)?
                    .induce(&lift.witness)?;
                if induced.rotation() == reference {
                    chosen = Some(rot);
                    break;
                }
            }
            let chosen = chosen.ok_or_else(|| {
                Error::Internal(format!("no embedding of {high_id} induces the one of {low_id}"))
            })?;
            lift_of.insert(low_id, (high_id, chosen));
        }
    }

    let mut parts = Vec::new();
    let mut embeddings = BTreeMap::new();
    for part in l.parts() {
        let mut lifted_part = BTreeSet::new();
        for &id in part {
            let (high_id, rot) = lift_of
                .get(&id)
                .ok_or_else(|| Error::Internal(format!("{id} has no recorded lift")))?;
            lifted_part.insert(*high_id);
            embeddings.insert(*high_id, rot.clone());
        }
        parts.push(lifted_part);
    }
    for &id in high_blocks.ids() {
        if embeddings.contains_key(&id) {
            continue;
        }
        let torso = high_blocks.torso(id).expect("listed id");
        let first = enumerate_planar_embeddings(torso, EMBEDDING_ENUMERATION_CAP)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Internal(format!("{id} lost its planar embedding")))?;
        parts.push(BTreeSet::from([id]));
        embeddings.insert(id, first);
    }
    EmbeddingList::new(parts, embeddings, &high_blocks)
}
