//! Bond graphs: minimal edge cuts with partial colourings, the induced
//! cyclic order on a bond, bond minors, and the machinery for building
//! respectful embeddings and the lists that describe them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::decomposition::{
    bough_bijection, flexibility, is_nice, side_minor, torso_embedding, totally_nested,
    tutte_decompose, two_components_at, two_separators, TorsoKind, TutteDecomposition,
};
use crate::graph::{
    coadd, contract_edge_set, enumerate_planar_embeddings, two_sum, Dart, EdgeId, EmbeddedGraph,
    FreshIds, LabeledGraph, MinorStep, MinorWitness, RotationSystem, VertexId,
};
use crate::lists::{block_lifts, lift_list, BlockId, Blocks, EmbeddingList, EMBEDDING_ENUMERATION_CAP};
use crate::temporal::{verify_and_normalize, Direction, TemporalSequence};
use crate::{Error, Result};

/// The two vertex sides of a bond, with the side containing the smallest
/// vertex first. Returns `None` when `b` is not a bond of `g`.
pub fn bond_sides(
    g: &LabeledGraph,
    b: &BTreeSet<EdgeId>,
) -> Option<(BTreeSet<VertexId>, BTreeSet<VertexId>)> {
    if b.is_empty() || !b.iter().all(|&e| g.has_edge(e)) {
        return None;
    }
    let rest: BTreeSet<EdgeId> = g.edge_set().difference(b).copied().collect();
    let mut cut = LabeledGraph::new();
    for v in g.vertices() {
        cut.add_vertex(v);
    }
    for &e in &rest {
        let (u, v) = g.endpoints(e).ok()?;
        cut.add_edge(e, u, v).ok()?;
    }
    let comps = cut.components();
    if comps.len() != 2 {
        return None;
    }
    let (x, y) = (comps[0].clone(), comps[1].clone());
    for &e in b {
        let (u, v) = g.endpoints(e).ok()?;
        let crosses = (x.contains(&u) && y.contains(&v)) || (x.contains(&v) && y.contains(&u));
        if !crosses {
            return None;
        }
    }
    if x.iter().next() <= y.iter().next() {
        Some((x, y))
    } else {
        Some((y, x))
    }
}

/// A bond is a minimal edge cut: removing it leaves exactly two connected
/// pieces and every bond edge joins the two.
pub fn is_bond(g: &LabeledGraph, b: &BTreeSet<EdgeId>) -> bool {
    bond_sides(g, b).is_some()
}

fn side_spanning_tree(g: &LabeledGraph, side: &BTreeSet<VertexId>) -> BTreeSet<EdgeId> {
    let mut tree = BTreeSet::new();
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    let Some(&start) = side.iter().next() else {
        return tree;
    };
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for e in g.incident_edges(v) {
            let (a, b) = g.endpoints(e).unwrap();
            let w = if a == v { b } else { a };
            if side.contains(&w) && !seen.contains(&w) {
                seen.insert(w);
                tree.insert(e);
                queue.push_back(w);
            }
        }
    }
    tree
}

/// The cyclic order an embedding induces on a bond: contract the side
/// containing the smallest vertex to a point and read its rotator. The
/// result starts at the smallest bond edge.
pub fn bond_cyclic_order(emb: &EmbeddedGraph, b: &BTreeSet<EdgeId>) -> Result<Vec<EdgeId>> {
    let (x, _y) = bond_sides(emb.graph(), b)
        .ok_or_else(|| Error::Precondition("edge set is not a bond".into()))?;
    let tree = side_spanning_tree(emb.graph(), &x);
    let merged = contract_edge_set(emb, &tree)?;
    let hub = *x.iter().next().unwrap();
    let rot = merged
        .rotation()
        .rotator(hub)
        .ok_or_else(|| Error::Internal("contracted bond side lost its rotator".into()))?;
    let cyc: Vec<EdgeId> = rot.iter().map(|d| d.edge).filter(|e| b.contains(e)).collect();
    if cyc.len() != b.len() {
        return Err(Error::Internal("bond edges missing from contracted rotator".into()));
    }
    Ok(rotate_to_min(cyc))
}

pub(crate) fn rotate_to_min(mut cyc: Vec<EdgeId>) -> Vec<EdgeId> {
    if cyc.len() > 1 {
        let pos = cyc
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| **e)
            .map(|(i, _)| i)
            .unwrap();
        cyc.rotate_left(pos);
    }
    cyc
}

/// True if `segment` occupies consecutive positions of the cyclic order.
pub fn is_cyclic_segment(order: &[EdgeId], segment: &BTreeSet<EdgeId>) -> bool {
    if segment.is_empty() || segment.len() == order.len() {
        return true;
    }
    let n = order.len();
    let Some(start) = (0..n).find(|&i| {
        segment.contains(&order[i]) && !segment.contains(&order[(i + n - 1) % n])
    }) else {
        return false;
    };
    (0..segment.len()).all(|k| segment.contains(&order[(start + k) % n]))
}

/// An opaque colour. Centred colourings use one colour per 2-component.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct ColourId(pub u32);

pub type Colouring = BTreeMap<EdgeId, BTreeSet<ColourId>>;

/// A graph with a distinguished bond, some of whose edges carry colours.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BondGraph {
    graph: LabeledGraph,
    bond: BTreeSet<EdgeId>,
    colouring: Colouring,
}

impl BondGraph {
    pub fn new(graph: LabeledGraph, bond: BTreeSet<EdgeId>, colouring: Colouring) -> Result<Self> {
        if !is_bond(&graph, &bond) {
            return Err(Error::Precondition("edge set is not a bond of the graph".into()));
        }
        for (e, set) in &colouring {
            if !bond.contains(e) {
                return Err(Error::Precondition(format!(
                    "coloured edge {e} does not lie on the bond"
                )));
            }
            if set.is_empty() {
                return Err(Error::Precondition(format!("edge {e} carries an empty colour set")));
            }
        }
        Ok(BondGraph { graph, bond, colouring })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn bond(&self) -> &BTreeSet<EdgeId> {
        &self.bond
    }

    pub fn colouring(&self) -> &Colouring {
        &self.colouring
    }

    pub fn colours_of(&self, e: EdgeId) -> Option<&BTreeSet<ColourId>> {
        self.colouring.get(&e)
    }

    /// Every colour in use.
    pub fn colours(&self) -> BTreeSet<ColourId> {
        self.colouring.values().flatten().copied().collect()
    }

    /// The two-colour view that keeps `red` and paints every other colour
    /// blue. Red is reported as colour 0, blue as colour 1.
    pub fn binarised(&self, red: ColourId) -> BondGraph {
        let colouring = self
            .colouring
            .iter()
            .map(|(&e, set)| {
                let mut out = BTreeSet::new();
                if set.contains(&red) {
                    out.insert(ColourId(0));
                }
                if set.iter().any(|&c| c != red) {
                    out.insert(ColourId(1));
                }
                (e, out)
            })
            .collect();
        BondGraph { graph: self.graph.clone(), bond: self.bond.clone(), colouring }
    }
}

/// Some colour is carried, together with at least one other colour, by
/// three different bond edges. No embedding can be respectful then.
pub fn is_three_overcoloured(bg: &BondGraph) -> bool {
    bg.colours().iter().any(|&c| {
        bg.colouring
            .values()
            .filter(|set| set.contains(&c) && set.len() >= 2)
            .count()
            >= 3
    })
}

/// Four distinct edges appear in this cyclic order such that the first and
/// third carry some colour and the second and fourth carry a different one.
fn is_four_overcoloured(bg: &BondGraph, order: &[EdgeId]) -> bool {
    let n = order.len();
    for &c in &bg.colours() {
        let has_c: Vec<bool> = order
            .iter()
            .map(|e| bg.colours_of(*e).is_some_and(|s| s.contains(&c)))
            .collect();
        let has_other: Vec<bool> = order
            .iter()
            .map(|e| bg.colours_of(*e).is_some_and(|s| s.iter().any(|&d| d != c)))
            .collect();
        for start in 0..n {
            let mut stage = 0;
            for k in 0..n {
                let i = (start + k) % n;
                match stage {
                    0 | 2 if has_c[i] => stage += 1,
                    1 | 3 if has_other[i] => stage += 1,
                    _ => {}
                }
                if stage == 4 {
                    return true;
                }
            }
        }
    }
    false
}

/// Whether the embedding avoids both kinds of overcolouring on the bond.
pub fn is_bond_respectful(bg: &BondGraph, emb: &EmbeddedGraph) -> Result<bool> {
    if emb.graph() != &bg.graph {
        return Err(Error::Precondition("embedding belongs to a different graph".into()));
    }
    if is_three_overcoloured(bg) {
        return Ok(false);
    }
    let order = bond_cyclic_order(emb, &bg.bond)?;
    Ok(!is_four_overcoloured(bg, &order))
}

/// Contract an uncoloured edge off the bond. Bond and colouring survive.
pub fn contract_outside_bond(bg: &BondGraph, e: EdgeId) -> Result<BondGraph> {
    if bg.bond.contains(&e) {
        return Err(Error::Precondition(format!("edge {e} lies on the bond")));
    }
    let graph = bg.graph.apply_step(&crate::graph::MinorStep::Contract(e))?;
    let out = BondGraph::new(graph, bg.bond.clone(), bg.colouring.clone())
        .map_err(|_| Error::Internal("bond did not survive the contraction".into()))?;
    Ok(out)
}

/// Merge a maximal parallel class down to its smallest edge, which then
/// carries the union of the colours. The class must account for all but at
/// most one of the 2-components at the spanned vertex pair.
pub fn merge_mergeable(bg: &BondGraph, class: &BTreeSet<EdgeId>) -> Result<BondGraph> {
    let Some(&first) = class.iter().next() else {
        return Err(Error::Precondition("empty parallel class".into()));
    };
    let (u, v) = bg.graph.endpoints(first)?;
    let full: BTreeSet<EdgeId> = bg
        .graph
        .edge_ids()
        .filter(|&e| {
            let (a, b) = bg.graph.endpoints(e).unwrap();
            (a, b) == (u.min(v), u.max(v)) || (a, b) == (u.max(v), u.min(v))
        })
        .collect();
    if &full != class {
        return Err(Error::Precondition("class is not a maximal parallel class".into()));
    }
    let chunky = two_components_at(&bg.graph, u, v)
        .into_iter()
        .filter(|c| c.len() > 1)
        .count();
    if chunky > 1 {
        return Err(Error::Precondition(
            "merging needs all but at most one 2-component to be a single edge".into(),
        ));
    }
    let mut graph = bg.graph.clone();
    let mut bond = bg.bond.clone();
    let mut colouring = bg.colouring.clone();
    let merged: BTreeSet<ColourId> = class
        .iter()
        .filter_map(|e| bg.colouring.get(e))
        .flatten()
        .copied()
        .collect();
    for &e in class.iter().skip(1) {
        graph = graph.apply_step(&crate::graph::MinorStep::Delete(e))?;
        bond.remove(&e);
        colouring.remove(&e);
    }
    colouring.remove(&first);
    if !merged.is_empty() {
        colouring.insert(first, merged);
    }
    BondGraph::new(graph, bond, colouring)
        .map_err(|_| Error::Internal("bond did not survive the merge".into()))
}

/// One 2-component kept whole, the rest of the graph replaced by a single
/// spanning edge. When the replaced side holds bond edges, the torso edge
/// joins the bond and carries their colours; when it holds all of them,
/// the bond does not reach the component at all.
struct BranchPiece {
    graph: LabeledGraph,
    torso_edge: EdgeId,
    bond: BTreeSet<EdgeId>,
    colouring: Colouring,
}

fn branch_piece(bg: &BondGraph, component: &BTreeSet<EdgeId>) -> Result<BranchPiece> {
    let complement: BTreeSet<EdgeId> =
        bg.graph.edge_set().difference(component).copied().collect();
    let outside_bond: BTreeSet<EdgeId> = bg.bond.intersection(&complement).copied().collect();
    let inside_bond: BTreeSet<EdgeId> = bg.bond.intersection(component).copied().collect();
    let (torso_edge, bond, extra_colours) = if inside_bond.is_empty() {
        let torso = complement
            .iter()
            .find(|e| !bg.bond.contains(e))
            .or_else(|| complement.iter().next())
            .copied()
            .ok_or_else(|| Error::Precondition("component has no complement".into()))?;
        (torso, BTreeSet::new(), BTreeSet::new())
    } else if outside_bond.is_empty() {
        let torso = *complement
            .iter()
            .next()
            .ok_or_else(|| Error::Precondition("component has no complement".into()))?;
        (torso, inside_bond, BTreeSet::new())
    } else {
        let torso = *outside_bond.iter().next().unwrap();
        let colours: BTreeSet<ColourId> = outside_bond
            .iter()
            .filter_map(|e| bg.colouring.get(e))
            .flatten()
            .copied()
            .collect();
        let mut bond = inside_bond;
        bond.insert(torso);
        (torso, bond, colours)
    };
    let (graph, _witness) = side_minor(&bg.graph, component, torso_edge)?;
    let mut colouring: Colouring = bg
        .colouring
        .iter()
        .filter(|(e, _)| bond.contains(e) && component.contains(e))
        .map(|(&e, set)| (e, set.clone()))
        .collect();
    if !extra_colours.is_empty() {
        colouring.insert(torso_edge, extra_colours);
    }
    if !bond.is_empty() && !is_bond(&graph, &bond) {
        return Err(Error::Internal("branch lost the bond".into()));
    }
    Ok(BranchPiece { graph, torso_edge, bond, colouring })
}

/// The bond graph induced on the branch of one 2-component at a
/// totally-nested separator, or `None` when every bond edge lies outside
/// the component.
pub fn bond_branch(
    bg: &BondGraph,
    t: (VertexId, VertexId),
    component: &BTreeSet<EdgeId>,
) -> Result<Option<BondGraph>> {
    if !totally_nested(&bg.graph, t)? {
        return Err(Error::Precondition("separator is not totally nested".into()));
    }
    let comps = two_components_at(&bg.graph, t.0, t.1);
    if !comps.contains(component) {
        return Err(Error::Precondition(
            "edge set is not a 2-component at the separator".into(),
        ));
    }
    let piece = branch_piece(bg, component)?;
    if piece.bond.is_empty() {
        return Ok(None);
    }
    Ok(Some(BondGraph::new(piece.graph, piece.bond, piece.colouring)?))
}

/// The bond graph induced on a bag's torso, or `None` when the bond lies
/// entirely beyond one of its branches. Torso edges standing for branches
/// that hold bond edges join the bond and carry the union of their colours.
pub fn bond_torso(
    bg: &BondGraph,
    dec: &TutteDecomposition,
    bag: usize,
) -> Result<Option<BondGraph>> {
    let b = &dec.bags[bag];
    let mut h = bg.graph.clone();
    let mut bond = bg.bond.clone();
    let mut colouring = bg.colouring.clone();
    for (&label, reservoir) in &b.reservoirs {
        if b.real_edges.contains(&label) {
            continue;
        }
        if bond.is_subset(reservoir) {
            return Ok(None);
        }
        let in_bond: BTreeSet<EdgeId> = bond.intersection(reservoir).copied().collect();
        let torso_edge = if in_bond.is_empty() {
            label
        } else {
            *in_bond.iter().next().unwrap()
        };
        let keep: BTreeSet<EdgeId> = h.edge_set().difference(reservoir).copied().collect();
        let (next, _) = side_minor(&h, &keep, torso_edge)?;
        h = next;
        let colours: BTreeSet<ColourId> = in_bond
            .iter()
            .filter_map(|e| colouring.get(e))
            .flatten()
            .copied()
            .collect();
        for e in reservoir {
            bond.remove(e);
            colouring.remove(e);
        }
        if !in_bond.is_empty() {
            bond.insert(torso_edge);
            if !colours.is_empty() {
                colouring.insert(torso_edge, colours);
            }
        }
    }
    if bond.is_empty() {
        return Ok(None);
    }
    Ok(Some(BondGraph::new(h, bond, colouring).map_err(|e| {
        Error::Internal(format!("bond did not survive the torso construction: {e}"))
    })?))
}

/// Where a red/blue colouring went wrong.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GaudyWitness {
    /// A separator with at least three 2-components that each hold both
    /// colours.
    Tuplet { separator: (VertexId, VertexId) },
    /// A 3-block whose bond-torso admits no respectful embedding.
    Disrespectful { bag: usize },
}

/// Tests the two gaudiness conditions of a red/blue bond graph: a tuplet
/// with three two-coloured components, or a 3-block torso that cannot be
/// embedded respectfully. Checking torsos suffices for the second
/// condition because they are the maximal 3-connected bond-minors.
pub fn is_gaudy(bg: &BondGraph) -> Result<Option<GaudyWitness>> {
    let colours = bg.colours();
    if colours.len() > 2 {
        return Err(Error::Precondition("gaudiness is defined for two-colourings".into()));
    }
    if !bg.graph.is_two_connected() {
        return Err(Error::Precondition("bond graph is not 2-connected".into()));
    }
    let palette: Vec<ColourId> = colours.iter().copied().collect();
    if let [red, blue] = palette[..] {
        for (x, y) in two_separators(&bg.graph) {
            let comps = two_components_at(&bg.graph, x, y);
            if comps.len() < 3 {
                continue;
            }
            let loud = comps
                .iter()
                .filter(|c| component_has_colour(bg, c, red) && component_has_colour(bg, c, blue))
                .count();
            if loud >= 3 {
                return Ok(Some(GaudyWitness::Tuplet { separator: (x, y) }));
            }
        }
    }
    let dec = tutte_decompose(&bg.graph)?;
    for (i, bag) in dec.bags.iter().enumerate() {
        if bag.kind != TorsoKind::ThreeBlock {
            continue;
        }
        let Some(torso) = bond_torso(bg, &dec, i)? else {
            continue;
        };
        let embeddings = enumerate_planar_embeddings(torso.graph(), EMBEDDING_ENUMERATION_CAP)?;
        let Some(rot) = embeddings.into_iter().next() else {
            continue;
        };
        let emb = EmbeddedGraph::new(torso.graph().clone(), rot)?;
        if !is_bond_respectful(&torso, &emb)? {
            return Ok(Some(GaudyWitness::Disrespectful { bag: i }));
        }
    }
    Ok(None)
}

fn component_has_colour(bg: &BondGraph, component: &BTreeSet<EdgeId>, colour: ColourId) -> bool {
    component
        .iter()
        .filter_map(|e| bg.colouring.get(e))
        .any(|set| set.contains(&colour))
}

/// Outcome of trying to build a respectful embedding.
#[derive(Clone, Debug)]
pub enum RespectfulOutcome {
    Embedding(EmbeddedGraph),
    Gaudy(GaudyWitness),
}

/// Builds a respectful embedding of a red/blue bond graph, or reports why
/// none exists. The construction recurses on the branches at a
/// totally-nested separator and arranges the components so that each
/// colour occupies one stretch of the bond.
pub fn construct_respectful_embedding(bg: &BondGraph) -> Result<RespectfulOutcome> {
    if let Some(witness) = is_gaudy(bg)? {
        return Ok(RespectfulOutcome::Gaudy(witness));
    }
    let emb = glue_colourfully(bg)?;
    if !is_bond_respectful(bg, &emb)? {
        return Err(Error::Internal(
            "not gaudy, yet the constructed embedding is not respectful".into(),
        ));
    }
    Ok(RespectfulOutcome::Embedding(emb))
}

fn glue_colourfully(bg: &BondGraph) -> Result<EmbeddedGraph> {
    let g = &bg.graph;
    let nested = two_separators(g)
        .into_iter()
        .find(|&(x, y)| totally_nested(g, (x, y)).unwrap_or(false));
    let Some((x, y)) = nested else {
        // a cycle always respects its two-edge bond; a 3-connected graph
        // has one embedding up to reversal, which keeps respectfulness
        let embeddings = enumerate_planar_embeddings(g, EMBEDDING_ENUMERATION_CAP)?;
        for rot in embeddings {
            let emb = EmbeddedGraph::new(g.clone(), rot)?;
            if is_bond_respectful(bg, &emb)? {
                return Ok(emb);
            }
        }
        return Err(Error::Precondition(
            "graph admits no planar embedding respecting the bond".into(),
        ));
    };

    let comps = two_components_at(g, x, y);
    let mut pieces = Vec::new();
    for comp in &comps {
        pieces.push((comp.clone(), branch_piece(bg, comp)?));
    }

    let palette: Vec<ColourId> = bg.colours().iter().copied().collect();
    let red = palette.first().copied();
    let blue = palette.get(1).copied();
    let class = |comp: &BTreeSet<EdgeId>| -> (bool, bool) {
        (
            red.is_some_and(|c| component_has_colour(bg, comp, c)),
            blue.is_some_and(|c| component_has_colour(bg, comp, c)),
        )
    };

    let carriers = pieces.iter().filter(|(_, p)| !p.bond.is_empty()).count();
    let mut poly = Vec::new();
    let mut reds = Vec::new();
    let mut blues = Vec::new();
    let mut plain = Vec::new();
    for (i, (comp, _)) in pieces.iter().enumerate() {
        match class(comp) {
            (true, true) => poly.push(i),
            (true, false) => reds.push(i),
            (false, true) => blues.push(i),
            (false, false) => plain.push(i),
        }
    }
    let key = |&i: &usize| pieces[i].0.iter().next().copied();
    poly.sort_by_key(key);
    reds.sort_by_key(key);
    blues.sort_by_key(key);
    plain.sort_by_key(key);

    // (piece index, wanted colour split of its own bond segment)
    let mut arrangement: Vec<(usize, Option<(ColourId, ColourId)>)> = Vec::new();
    if carriers <= 1 {
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by_key(|&i| (pieces[i].1.bond.is_empty(), key(&i)));
        arrangement.extend(order.into_iter().map(|i| (i, None)));
    } else {
        match poly.len() {
            0 => {
                for &i in reds.iter().chain(&blues).chain(&plain) {
                    arrangement.push((i, None));
                }
            }
            1 => {
                arrangement.push((poly[0], red.zip(blue)));
                for &i in blues.iter().chain(&plain).chain(&reds) {
                    arrangement.push((i, None));
                }
            }
            2 => {
                arrangement.push((poly[0], red.zip(blue)));
                for &i in blues.iter().chain(&plain) {
                    arrangement.push((i, None));
                }
                arrangement.push((poly[1], blue.zip(red)));
                for &i in &reds {
                    arrangement.push((i, None));
                }
            }
            _ => {
                return Err(Error::Internal(
                    "three two-coloured components despite the gaudiness check".into(),
                ))
            }
        }
    }

    let mut embedded = Vec::new();
    for &(i, split) in &arrangement {
        let piece = &pieces[i].1;
        let emb = if piece.bond.is_empty() {
            let rot = enumerate_planar_embeddings(&piece.graph, EMBEDDING_ENUMERATION_CAP)?
                .into_iter()
                .next()
                .ok_or_else(|| Error::Precondition("branch admits no planar embedding".into()))?;
            EmbeddedGraph::new(piece.graph.clone(), rot)?
        } else {
            let inner = BondGraph::new(piece.graph.clone(), piece.bond.clone(), piece.colouring.clone())?;
            let emb = glue_colourfully(&inner)?;
            if !is_bond_respectful(&inner, &emb)? {
                return Err(Error::Internal("branch embedding is not respectful".into()));
            }
            match split {
                None => emb,
                Some((first, second)) => orient_split(&inner, emb, piece.torso_edge, first, second)?,
            }
        };
        embedded.push((i, emb));
    }

    assemble_around(g, x, y, &pieces, &embedded)
}

/// Reorients the embedding if needed so that, reading the branch bond just
/// after the torso edge, every `first`-coloured edge comes before every
/// `second`-coloured one.
fn orient_split(
    inner: &BondGraph,
    emb: EmbeddedGraph,
    torso_edge: EdgeId,
    first: ColourId,
    second: ColourId,
) -> Result<EmbeddedGraph> {
    for candidate in [emb.clone(), emb.reorient()] {
        let order = bond_cyclic_order(&candidate, inner.bond())?;
        let at = order
            .iter()
            .position(|&e| e == torso_edge)
            .ok_or_else(|| Error::Internal("torso edge missing from the branch bond".into()))?;
        let linear: Vec<EdgeId> = (1..order.len()).map(|k| order[(at + k) % order.len()]).collect();
        let mut last_first = None;
        let mut first_second = None;
        for (i, e) in linear.iter().enumerate() {
            if let Some(set) = inner.colours_of(*e) {
                if set.contains(&first) {
                    last_first = Some(i);
                }
                if set.contains(&second) && first_second.is_none() {
                    first_second = Some(i);
                }
            }
        }
        let ok = match (last_first, first_second) {
            (Some(a), Some(b)) => a <= b,
            _ => true,
        };
        if ok {
            return Ok(candidate);
        }
    }
    Err(Error::Internal("neither orientation splits the branch colours".into()))
}

/// Glues the embedded branches back into the whole graph in the given
/// cyclic order, via repeated 2-sums along fresh spanning edges.
fn assemble_around(
    g: &LabeledGraph,
    x: VertexId,
    y: VertexId,
    pieces: &[(BTreeSet<EdgeId>, BranchPiece)],
    embedded: &[(usize, EmbeddedGraph)],
) -> Result<EmbeddedGraph> {
    let fresh_base = g.edge_ids().map(|e| e.0).max().unwrap_or(0) + 1;
    let glue = |k: usize| EdgeId(fresh_base + k as u32);
    let m = embedded.len();
    if m < 2 {
        return Err(Error::Internal("a separator must split into at least two pieces".into()));
    }

    let mut acc: Option<EmbeddedGraph> = None;
    for (pos, &(i, ref emb)) in embedded.iter().enumerate() {
        let piece = &pieces[i].1;
        let before = (pos > 0).then(|| glue(pos - 1));
        let after = (pos + 1 < m).then(|| glue(pos));
        let mut graph = g.spanned_subgraph(&pieces[i].0)?;
        graph.add_vertex(x);
        graph.add_vertex(y);
        for e in [before, after].into_iter().flatten() {
            graph.add_edge(e, x, y)?;
        }
        let mut rotators: BTreeMap<VertexId, Vec<Dart>> = BTreeMap::new();
        for v in emb.graph().vertices() {
            let old = emb.rotation().rotator(v).unwrap_or(&[]);
            let mut new = Vec::new();
            for d in old {
                if d.edge == piece.torso_edge {
                    let pair = if v == x {
                        [after, before]
                    } else {
                        [before, after]
                    };
                    for e in pair.into_iter().flatten() {
                        new.push(graph.dart_at(e, v)?);
                    }
                } else {
                    new.push(*d);
                }
            }
            rotators.insert(v, new);
        }
        let this = EmbeddedGraph::new(graph, crate::graph::RotationSystem::new(rotators))
            .map_err(|e| Error::Internal(format!("branch re-anchoring is not planar: {e}")))?;
        acc = Some(match acc {
            None => this,
            Some(prev) => two_sum(&prev, &this, glue(pos - 1))?,
        });
    }
    let out = acc.expect("at least two pieces");
    if out.graph() != g {
        return Err(Error::Internal("glued branches do not reassemble the graph".into()));
    }
    Ok(out)
}

/// The bond of the last graph of a triple around the branch set of (the
/// shadow of) a chosen separator vertex, coloured by the 2-components at
/// the separator in the first graph.
#[derive(Clone, Debug)]
pub struct CentredColouring {
    bond_graph: BondGraph,
    separator: (VertexId, VertexId),
    pivot: VertexId,
    components: Vec<BTreeSet<EdgeId>>,
}

impl CentredColouring {
    pub fn bond_graph(&self) -> &BondGraph {
        &self.bond_graph
    }

    pub fn separator(&self) -> (VertexId, VertexId) {
        self.separator
    }

    pub fn pivot(&self) -> VertexId {
        self.pivot
    }

    /// Colour `i` stands for this 2-component of the first graph.
    pub fn components(&self) -> &[BTreeSet<EdgeId>] {
        &self.components
    }

    pub fn colours_used(&self) -> BTreeSet<ColourId> {
        self.bond_graph.colours()
    }

    pub fn binarised(&self, red: ColourId) -> BondGraph {
        self.bond_graph.binarised(red)
    }
}

/// Builds the centred bond of the last graph of a normalized triple at a
/// separator vertex of the first graph.
pub fn centred_bond(
    seq: &TemporalSequence,
    t: (VertexId, VertexId),
    x: VertexId,
) -> Result<CentredColouring> {
    if seq.len() != 3 || !seq.is_normalized() {
        return Err(Error::Precondition("centred bonds live on normalized triples".into()));
    }
    if x != t.0 && x != t.1 {
        return Err(Error::Precondition("pivot must be a separator vertex".into()));
    }
    let g1 = seq.graph(0);
    let g2 = seq.graph(1);
    let g3 = seq.graph(2);
    if !crate::decomposition::is_two_separator(g1, t.0, t.1) {
        return Err(Error::Precondition("pair does not separate the first graph".into()));
    }
    debug_assert_eq!(seq.steps()[0].direction, Direction::Down);
    debug_assert_eq!(seq.steps()[1].direction, Direction::Up);
    let down = seq.steps()[0].witness.vertex_map(g1)?;
    let shadow_x = *down
        .get(&x)
        .ok_or_else(|| Error::Precondition(format!("{x} leaves no shadow in the middle graph")))?;
    let up = seq.steps()[1].witness.vertex_map(g3)?;
    let branch_set: BTreeSet<VertexId> = up
        .iter()
        .filter(|(_, &img)| img == shadow_x)
        .map(|(&v, _)| v)
        .collect();
    if branch_set.is_empty() {
        return Err(Error::Internal("the shadow vertex has an empty branch set".into()));
    }
    let bond: BTreeSet<EdgeId> = g3
        .edge_ids()
        .filter(|&e| {
            let (u, v) = g3.endpoints(e).unwrap();
            branch_set.contains(&u) != branch_set.contains(&v)
        })
        .collect();
    if !is_bond(g3, &bond) {
        return Err(Error::Internal("branch set boundary is not a bond".into()));
    }

    let components = two_components_at(g1, t.0, t.1);
    let mut colouring = Colouring::new();
    for &e in &bond {
        if !g2.has_edge(e) {
            continue;
        }
        let colour = components
            .iter()
            .position(|c| c.contains(&e))
            .ok_or_else(|| Error::Internal(format!("edge {e} lies in no 2-component")))?;
        colouring.insert(e, BTreeSet::from([ColourId(colour as u32)]));
    }
    let at_shadow: BTreeSet<EdgeId> = g2.incident_edges(shadow_x).into_iter().collect();
    let coloured: BTreeSet<EdgeId> = colouring.keys().copied().collect();
    if coloured != at_shadow {
        return Err(Error::Internal(
            "coloured bond edges differ from the shadow vertex's edges".into(),
        ));
    }
    for (p, q) in two_separators(g3) {
        let comps = two_components_at(g3, p, q);
        let holding = comps.iter().filter(|c| c.iter().any(|e| bond.contains(e))).count();
        if holding >= 2 && (branch_set.contains(&p) == branch_set.contains(&q)) {
            return Err(Error::Internal(
                "a separator splits the bond without crossing it".into(),
            ));
        }
    }

    Ok(CentredColouring {
        bond_graph: BondGraph::new(g3.clone(), bond, colouring)?,
        separator: t,
        pivot: x,
        components,
    })
}

/// The colours appearing on the edges of a set.
fn palette(bg: &BondGraph, edges: &BTreeSet<EdgeId>) -> BTreeSet<ColourId> {
    edges
        .iter()
        .filter_map(|e| bg.colouring.get(e))
        .flatten()
        .copied()
        .collect()
}

fn is_mono(palette: &BTreeSet<ColourId>, f: ColourId) -> bool {
    palette.len() == 1 && palette.contains(&f)
}

/// At least two of the components hold bond edges.
fn crosses_bond(bg: &BondGraph, comps: &[BTreeSet<EdgeId>]) -> bool {
    comps
        .iter()
        .filter(|c| c.iter().any(|e| bg.bond.contains(e)))
        .count()
        >= 2
}

/// Some colour leaves at most one of the components not monochromatic
/// in it.
fn is_fit(palettes: &[BTreeSet<ColourId>], colours: &BTreeSet<ColourId>) -> bool {
    colours
        .iter()
        .any(|&f| palettes.iter().filter(|p| !is_mono(p, f)).count() <= 1)
}

/// The first separator crossing the bond at which the colouring breaks
/// down: more than two polychromatic components, or a component without
/// any coloured edge.
pub fn badly_coloured_at(bg: &BondGraph) -> Option<(VertexId, VertexId)> {
    for (x, y) in two_separators(&bg.graph) {
        let comps = two_components_at(&bg.graph, x, y);
        if !crosses_bond(bg, &comps) {
            continue;
        }
        let palettes: Vec<BTreeSet<ColourId>> =
            comps.iter().map(|c| palette(bg, c)).collect();
        let poly = palettes.iter().filter(|p| p.len() >= 2).count();
        if poly > 2 || palettes.iter().any(|p| p.is_empty()) {
            return Some((x, y));
        }
    }
    None
}

/// Every tuplet crossing the bond admits a colour in which all but at
/// most one of its components are monochromatic.
pub fn is_bond_fitting(bg: &BondGraph) -> bool {
    let colours = bg.colours();
    for (x, y) in two_separators(&bg.graph) {
        let comps = two_components_at(&bg.graph, x, y);
        if comps.len() < 3 || !crosses_bond(bg, &comps) {
            continue;
        }
        let palettes: Vec<BTreeSet<ColourId>> =
            comps.iter().map(|c| palette(bg, c)).collect();
        if !is_fit(&palettes, &colours) {
            return false;
        }
    }
    true
}

/// The red/blue pair of a colouring with at most two colours, smaller
/// colour first; `None` when fewer than two colours are in use.
fn colour_pair(bg: &BondGraph) -> Result<Option<(ColourId, ColourId)>> {
    let colours = bg.colours();
    match colours.len() {
        0 | 1 => Ok(None),
        2 => {
            let mut it = colours.into_iter();
            Ok(Some((it.next().unwrap(), it.next().unwrap())))
        }
        n => Err(Error::Precondition(format!("expected at most two colours, found {n}"))),
    }
}

/// The unique edge of the component at the given vertex.
fn single_attachment(g: &LabeledGraph, comp: &BTreeSet<EdgeId>, v: VertexId) -> Result<EdgeId> {
    let mut found = None;
    for &e in comp {
        let (a, b) = g.endpoints(e)?;
        if a == v || b == v {
            if found.is_some() {
                return Err(Error::Precondition(format!(
                    "a tuplet component attaches to {v} by more than one edge; the graph is not nice"
                )));
            }
            found = Some(e);
        }
    }
    found.ok_or_else(|| Error::Internal(format!("a tuplet component misses its vertex {v}")))
}

/// A bond graph rebuilt over the input by coadditions at tuplet
/// vertices, with a witness that replays the new graph back onto the
/// input. Bond and colouring carry over unchanged.
#[derive(Clone, Debug)]
pub struct BondModel {
    pub bond_graph: BondGraph,
    pub witness: MinorWitness,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Anchor {
    Plain,
    Red,
    Blue,
}

/// Coadds a short path at each vertex of a tuplet that has more than one
/// monochromatic component in some colour. The repeated monochromatic
/// components of each such colour move onto an end of the path, behind a
/// buffer vertex, so afterwards every tuplet either keeps at most one
/// monochromatic component per colour or consists of one colour's
/// monochromatic components plus a single other.
pub fn make_almost_fit(bg: &BondGraph, fresh: &mut FreshIds) -> Result<BondModel> {
    if let Some((x, y)) = badly_coloured_at(bg) {
        return Err(Error::Precondition(format!(
            "colouring breaks down at the separator {x},{y}"
        )));
    }
    let identity = BondModel { bond_graph: bg.clone(), witness: MinorWitness::identity() };
    let Some((red, blue)) = colour_pair(bg)? else {
        return Ok(identity);
    };
    let g = &bg.graph;

    struct PathPlan {
        at: VertexId,
        red_end: bool,
        blue_end: bool,
        targets: BTreeMap<EdgeId, Anchor>,
    }
    let mut plans: Vec<PathPlan> = Vec::new();
    for (x, y) in two_separators(g) {
        let comps = two_components_at(g, x, y);
        if comps.len() < 3 {
            continue;
        }
        let palettes: Vec<BTreeSet<ColourId>> =
            comps.iter().map(|c| palette(bg, c)).collect();
        let mono_red = palettes.iter().filter(|p| is_mono(p, red)).count();
        let mono_blue = palettes.iter().filter(|p| is_mono(p, blue)).count();
        if !crosses_bond(bg, &comps) || (mono_red <= 1 && mono_blue <= 1) {
            continue;
        }
        for &v in &[x, y] {
            let mut targets = BTreeMap::new();
            for (comp, pal) in comps.iter().zip(&palettes) {
                let e = single_attachment(g, comp, v)?;
                let anchor = if is_mono(pal, red) && mono_red > 1 {
                    Anchor::Red
                } else if is_mono(pal, blue) && mono_blue > 1 {
                    Anchor::Blue
                } else {
                    Anchor::Plain
                };
                targets.insert(e, anchor);
            }
            plans.push(PathPlan {
                at: v,
                red_end: mono_red > 1,
                blue_end: mono_blue > 1,
                targets,
            });
        }
    }
    if plans.is_empty() {
        return Ok(identity);
    }

    let mut h = g.clone();
    let mut stages: Vec<MinorWitness> = Vec::new();
    for plan in &plans {
        let len = 1 + if plan.red_end { 2 } else { 0 } + if plan.blue_end { 2 } else { 0 };
        let vids: Vec<VertexId> = (0..len).map(|_| fresh.vertex()).collect();
        let i_plain = if plan.red_end { 2 } else { 0 };
        let mut path = LabeledGraph::new();
        for &v in &vids {
            path.add_vertex(v);
        }
        let mut path_edges: Vec<EdgeId> = Vec::new();
        for w in vids.windows(2) {
            let e = fresh.edge();
            path.add_edge(e, w[0], w[1])?;
            path_edges.push(e);
        }
        let theta: BTreeMap<EdgeId, VertexId> = plan
            .targets
            .iter()
            .map(|(&e, anchor)| {
                let idx = match anchor {
                    Anchor::Plain => i_plain,
                    Anchor::Red => 0,
                    Anchor::Blue => len - 1,
                };
                (e, vids[idx])
            })
            .collect();
        let coadded = coadd(&h, &path, plan.at, &theta)?;
        if !coadded.two_connected {
            return Err(Error::Internal("path coaddition lost 2-connectivity".into()));
        }
        h = coadded.graph;
        let mut steps: Vec<MinorStep> =
            path_edges.iter().map(|&e| MinorStep::Contract(e)).collect();
        steps.push(MinorStep::Relabel(vids[0], plan.at));
        stages.push(MinorWitness::new(steps));
    }

    let mut witness = MinorWitness::identity();
    for stage in stages.iter().rev() {
        witness = witness.then(stage);
    }
    witness
        .verify(&h, g)
        .map_err(|_| Error::Internal("path coadditions do not replay back onto the input".into()))?;
    let bond_graph = BondGraph::new(h, bg.bond.clone(), bg.colouring.clone())?;
    Ok(BondModel { bond_graph, witness })
}

/// Coadds a cycle at both vertices of every unfit tuplet crossing the
/// bond: the components spread out along the cycle, one per vertex and
/// in the same order on both sides, with the two monochromatic
/// components placed opposite each other when there are four. Requires
/// each unfit tuplet to have at most one monochromatic component per
/// colour; the result is bond-fitting.
pub fn almost_to_fit(bg: &BondGraph, fresh: &mut FreshIds) -> Result<BondModel> {
    if let Some((x, y)) = badly_coloured_at(bg) {
        return Err(Error::Precondition(format!(
            "colouring breaks down at the separator {x},{y}"
        )));
    }
    colour_pair(bg)?;
    let colours = bg.colours();
    let g = &bg.graph;

    struct CyclePlan {
        at: VertexId,
        attachments: Vec<EdgeId>,
    }
    let mut plans: Vec<CyclePlan> = Vec::new();
    for (x, y) in two_separators(g) {
        let comps = two_components_at(g, x, y);
        if comps.len() < 3 || !crosses_bond(bg, &comps) {
            continue;
        }
        let palettes: Vec<BTreeSet<ColourId>> =
            comps.iter().map(|c| palette(bg, c)).collect();
        if is_fit(&palettes, &colours) {
            continue;
        }
        for &f in &colours {
            if palettes.iter().filter(|p| is_mono(p, f)).count() > 1 {
                return Err(Error::Precondition(format!("tuplet {x},{y} is not almost fit")));
            }
        }
        let order: Vec<usize> = match comps.len() {
            3 => (0..3).collect(),
            4 => {
                let monos: Vec<usize> = (0..4).filter(|&i| palettes[i].len() == 1).collect();
                let polys: Vec<usize> = (0..4).filter(|&i| palettes[i].len() >= 2).collect();
                if monos.len() != 2 || polys.len() != 2 {
                    return Err(Error::Internal(
                        "a four-component unfit tuplet must pair two monochromatic with two polychromatic components"
                            .into(),
                    ));
                }
                vec![monos[0], polys[0], monos[1], polys[1]]
            }
            n => {
                return Err(Error::Internal(format!(
                    "an unfit tuplet with one monochromatic component per colour has {n} components; at most four are possible"
                )))
            }
        };
        for &v in &[x, y] {
            let attachments = order
                .iter()
                .map(|&i| single_attachment(g, &comps[i], v))
                .collect::<Result<Vec<EdgeId>>>()?;
            plans.push(CyclePlan { at: v, attachments });
        }
    }
    if plans.is_empty() {
        return Ok(BondModel { bond_graph: bg.clone(), witness: MinorWitness::identity() });
    }

    let mut h = g.clone();
    let mut stages: Vec<MinorWitness> = Vec::new();
    for plan in &plans {
        let k = plan.attachments.len();
        let vids: Vec<VertexId> = (0..k).map(|_| fresh.vertex()).collect();
        let mut cycle = LabeledGraph::new();
        for &v in &vids {
            cycle.add_vertex(v);
        }
        let mut cycle_edges: Vec<EdgeId> = Vec::new();
        for i in 0..k {
            let e = fresh.edge();
            cycle.add_edge(e, vids[i], vids[(i + 1) % k])?;
            cycle_edges.push(e);
        }
        let theta: BTreeMap<EdgeId, VertexId> = plan
            .attachments
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, vids[i]))
            .collect();
        let coadded = coadd(&h, &cycle, plan.at, &theta)?;
        if !coadded.two_connected {
            return Err(Error::Internal("cycle coaddition lost 2-connectivity".into()));
        }
        h = coadded.graph;
        let mut steps: Vec<MinorStep> = cycle_edges[..k - 1]
            .iter()
            .map(|&e| MinorStep::Contract(e))
            .collect();
        steps.push(MinorStep::Delete(cycle_edges[k - 1]));
        steps.push(MinorStep::Relabel(vids[0], plan.at));
        stages.push(MinorWitness::new(steps));
    }

    let mut witness = MinorWitness::identity();
    for stage in stages.iter().rev() {
        witness = witness.then(stage);
    }
    witness
        .verify(&h, g)
        .map_err(|_| Error::Internal("cycle coadditions do not replay back onto the input".into()))?;
    let out = BondGraph::new(h, bg.bond.clone(), bg.colouring.clone())?;
    if !is_bond_fitting(&out) {
        return Err(Error::Internal("cycle coadditions left an unfit tuplet".into()));
    }
    Ok(BondModel { bond_graph: out, witness })
}

/// A nice bond-fitting rebuild of a bond graph, accurate for the input.
#[derive(Clone, Debug)]
pub struct FitModel {
    pub bond_graph: BondGraph,
    /// Replays the model back onto the input graph.
    pub witness: MinorWitness,
    /// For each 3-block bag of the input's decomposition, the bag of the
    /// model's decomposition holding it.
    pub block_map: BTreeMap<usize, usize>,
}

/// Rebuilds a nice two-coloured bond graph into a bond-fitting one that
/// every respectful embedding of the input extends into: paths first
/// thin out repeated monochromatic components, then cycles spread the
/// remaining unfit tuplets. Flexibility never grows and at most
/// 12·flexibility edges are added; both are checked, as are niceness,
/// fitting and accuracy of the result.
pub fn fit_model(bg: &BondGraph, fresh: &mut FreshIds) -> Result<FitModel> {
    colour_pair(bg)?;
    if !is_nice(&bg.graph) {
        return Err(Error::Precondition("bond graph is not nice".into()));
    }
    if let Some((x, y)) = badly_coloured_at(bg) {
        return Err(Error::Precondition(format!(
            "colouring breaks down at the separator {x},{y}"
        )));
    }

    let dec_in = tutte_decompose(&bg.graph)?;
    if is_bond_fitting(bg) {
        let block_map = dec_in
            .bags
            .iter()
            .enumerate()
            .filter(|(_, bag)| bag.kind == TorsoKind::ThreeBlock)
            .map(|(i, _)| (i, i))
            .collect();
        return Ok(FitModel {
            bond_graph: bg.clone(),
            witness: MinorWitness::identity(),
            block_map,
        });
    }

    let before = flexibility(&bg.graph)?.value;
    let almost = make_almost_fit(bg, fresh)?;
    let fitted = almost_to_fit(&almost.bond_graph, fresh)?;
    let witness = fitted.witness.then(&almost.witness);
    let h = fitted.bond_graph;
    witness
        .verify(h.graph(), &bg.graph)
        .map_err(|_| Error::Internal("model witness does not replay onto the input".into()))?;

    if !is_nice(h.graph()) {
        return Err(Error::Internal("model is not nice".into()));
    }
    if !is_bond_fitting(&h) {
        return Err(Error::Internal("model is not bond-fitting".into()));
    }
    if badly_coloured_at(&h).is_some() {
        return Err(Error::Internal("model became badly coloured".into()));
    }
    let after = flexibility(h.graph())?.value;
    if after > before {
        return Err(Error::Internal(format!(
            "model flexibility grew from {before} to {after}"
        )));
    }
    let budget = bg.graph.edge_count() + 12 * before.max(0) as usize;
    if h.graph().edge_count() > budget {
        return Err(Error::Internal(format!(
            "model has {} edges, over the budget of {budget}",
            h.graph().edge_count()
        )));
    }
    let dec_out = tutte_decompose(h.graph())?;
    let block_map = block_lifts(&dec_in, &dec_out)
        .map_err(|e| Error::Internal(format!("model lost accuracy: {e}")))?;
    Ok(FitModel { bond_graph: h, witness, block_map })
}

/// Whether this 3-block bag's orientation is pinned through the bond: at
/// least three of its bough segments hold coloured edges, at least two
/// of them carrying red and at least two carrying blue.
pub fn colour_locked(bg: &BondGraph, dec: &TutteDecomposition, bag: usize) -> Result<bool> {
    if bag >= dec.bags.len() {
        return Err(Error::Precondition(format!("no bag {bag}")));
    }
    if dec.bags[bag].kind != TorsoKind::ThreeBlock {
        return Ok(false);
    }
    let Some((red, blue)) = colour_pair(bg)? else {
        return Ok(false);
    };
    let segments = bough_bijection(&bg.graph, dec, bag, &bg.bond)?;
    let mut coloured = 0usize;
    let mut reds = 0usize;
    let mut blues = 0usize;
    for seg in segments.values() {
        let pal = palette(bg, seg);
        if !pal.is_empty() {
            coloured += 1;
        }
        if pal.contains(&red) {
            reds += 1;
        }
        if pal.contains(&blue) {
            blues += 1;
        }
    }
    Ok(coloured >= 3 && reds >= 2 && blues >= 2)
}

/// The one-entry sequence holding just this graph.
fn singleton(g: &LabeledGraph) -> Result<TemporalSequence> {
    verify_and_normalize(std::slice::from_ref(g), &[])
}

/// One list telling the respectful embeddings of a bond-fitting graph
/// apart from the rest: the colour-locked 3-blocks form a single coupled
/// part, every other block is free, and the stored embeddings are those
/// induced by one constructed respectful embedding. The list lives on
/// the one-entry sequence of the graph.
pub fn list_for_bonds(bg: &BondGraph) -> Result<EmbeddingList> {
    if !is_bond_fitting(bg) {
        return Err(Error::Precondition("bond graph is not bond-fitting".into()));
    }
    let iota = match construct_respectful_embedding(bg)? {
        RespectfulOutcome::Embedding(emb) => emb,
        RespectfulOutcome::Gaudy(_) => {
            return Err(Error::Precondition("colouring is gaudy".into()))
        }
    };
    let seq = singleton(&bg.graph)?;
    let blocks = Blocks::of(&seq)?;
    let dec = blocks
        .decomposition(0)
        .ok_or_else(|| Error::Internal("one-entry sequence lost its decomposition".into()))?;
    let mut locked: BTreeSet<BlockId> = BTreeSet::new();
    let mut parts: Vec<BTreeSet<BlockId>> = Vec::new();
    let mut embeddings: BTreeMap<BlockId, RotationSystem> = BTreeMap::new();
    for &id in blocks.ids() {
        let induced = torso_embedding(&iota, dec, id.bag)?;
        embeddings.insert(id, induced.rotation().clone());
        if colour_locked(bg, dec, id.bag)? {
            locked.insert(id);
        } else {
            parts.push(BTreeSet::from([id]));
        }
    }
    if !locked.is_empty() {
        parts.push(locked);
    }
    EmbeddingList::new(parts, embeddings, &blocks)
}

/// The model and lists of a many-coloured bond graph.
#[derive(Clone, Debug)]
pub struct WorkhorseOutcome {
    pub bond_graph: BondGraph,
    /// Replays the model back onto the input graph.
    pub witness: MinorWitness,
    /// Input 3-block bags to model 3-block bags.
    pub block_map: BTreeMap<usize, usize>,
    /// One list per colour, each over the one-entry sequence of the
    /// model: an embedding respects the full colouring exactly when it
    /// satisfies every list.
    pub lists: Vec<EmbeddingList>,
}

/// Works through the colours one at a time: each two-colour view of the
/// colouring — the chosen colour against all others — is either already
/// bond-fitting, in which case its list is read off directly, or the
/// graph is rebuilt by `fit_model` for that view first, carrying the
/// lists of earlier colours along the rebuild. Edge growth stays within
/// 12·k·flexibility for k colours, and flexibility never grows.
pub fn model_list_workhorse(bg: &BondGraph, fresh: &mut FreshIds) -> Result<WorkhorseOutcome> {
    let colours: Vec<ColourId> = bg.colours().into_iter().collect();
    let k = colours.len();
    if k == 0 {
        return Err(Error::Precondition("the colouring uses no colours".into()));
    }
    if !is_nice(&bg.graph) {
        return Err(Error::Precondition("bond graph is not nice".into()));
    }
    for (x, y) in two_separators(&bg.graph) {
        let comps = two_components_at(&bg.graph, x, y);
        if !crosses_bond(bg, &comps) {
            continue;
        }
        if comps.iter().any(|c| palette(bg, c).is_empty()) {
            return Err(Error::Precondition(format!(
                "an uncoloured component sits at the crossing separator {x},{y}"
            )));
        }
    }
    for &j in &colours {
        if is_gaudy(&bg.binarised(j))?.is_some() {
            return Err(Error::Precondition(format!(
                "the two-colour view for colour {} is gaudy",
                j.0
            )));
        }
    }

    let before = flexibility(&bg.graph)?.value;
    let start_edges = bg.graph.edge_count();
    let mut current = bg.clone();
    let mut witness = MinorWitness::identity();
    let mut lists: Vec<EmbeddingList> = Vec::new();
    let demote = |j: ColourId| {
        move |e: Error| match e {
            Error::Precondition(msg) => Error::Internal(format!(
                "the view for colour {} broke its guarantees: {msg}",
                j.0
            )),
            other => other,
        }
    };
    for &j in &colours {
        let mut view = current.binarised(j);
        if !is_bond_fitting(&view) {
            let model = fit_model(&view, fresh).map_err(demote(j))?;
            let low = singleton(&current.graph)?;
            let high = singleton(model.bond_graph.graph())?;
            for list in &mut lists {
                *list = lift_list(&low, list, &high).map_err(demote(j))?;
            }
            witness = model.witness.then(&witness);
            current = BondGraph::new(
                model.bond_graph.graph().clone(),
                current.bond.clone(),
                current.colouring.clone(),
            )?;
            view = current.binarised(j);
            if !is_bond_fitting(&view) {
                return Err(Error::Internal(format!(
                    "colour {} is still unfit after its model",
                    j.0
                )));
            }
        }
        lists.push(list_for_bonds(&view).map_err(demote(j))?);
    }

    witness
        .verify(&current.graph, &bg.graph)
        .map_err(|_| Error::Internal("workhorse witness does not replay onto the input".into()))?;
    let after = flexibility(&current.graph)?.value;
    if after > before {
        return Err(Error::Internal(format!(
            "workhorse flexibility grew from {before} to {after}"
        )));
    }
    let budget = start_edges + 12 * k * before.max(0) as usize;
    if current.graph.edge_count() > budget {
        return Err(Error::Internal(format!(
            "workhorse model has {} edges, over the budget of {budget}",
            current.graph.edge_count()
        )));
    }
    let block_map = block_lifts(&tutte_decompose(&bg.graph)?, &tutte_decompose(&current.graph)?)
        .map_err(|e| Error::Internal(format!("workhorse model lost accuracy: {e}")))?;
    Ok(WorkhorseOutcome { bond_graph: current, witness, block_map, lists })
}
