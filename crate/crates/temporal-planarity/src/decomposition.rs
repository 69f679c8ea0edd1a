//! Splitting 2-connected multigraphs along their 2-separators: separation
//! enumeration and nestedness, the Tutte decomposition into 3-block, cycle
//! and two-vertex bags (with a reservoir of replaced edges behind every
//! torso edge), side minors, the flexibility measure, and bough machinery
//! that relates bonds to decomposition bags.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::bonds::{bond_cyclic_order, is_bond, is_cyclic_segment, rotate_to_min};
use crate::graph::{EdgeId, EmbeddedGraph, LabeledGraph, MinorStep, MinorWitness, VertexId};
use crate::{Error, Result};

const PATH_SEARCH_CAP: usize = 2_000_000;
const SEPARATION_PIECE_CAP: usize = 16;

/// Spanning single edges of {x, y} and the edge sets attached to each
/// component of g − {x, y}. Together these are the 2-components at the
/// pair, each attached to both vertices when the pair separates g.
pub fn two_components_at(g: &LabeledGraph, x: VertexId, y: VertexId) -> Vec<BTreeSet<EdgeId>> {
    let (spanning, comps) = pieces_split(g, x, y);
    let mut pieces: Vec<BTreeSet<EdgeId>> = spanning
        .into_iter()
        .map(|e| BTreeSet::from([e]))
        .chain(comps)
        .collect();
    pieces.sort();
    pieces
}

fn pieces_split(
    g: &LabeledGraph,
    x: VertexId,
    y: VertexId,
) -> (Vec<EdgeId>, Vec<BTreeSet<EdgeId>>) {
    let mut spanning = Vec::new();
    for e in g.edge_ids() {
        let (u, v) = g.endpoints(e).unwrap();
        if (u == x && v == y) || (u == y && v == x) {
            spanning.push(e);
        }
    }
    let mut comps = Vec::new();
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    for start in g.vertices() {
        if start == x || start == y || seen.contains(&start) {
            continue;
        }
        let mut comp = BTreeSet::from([start]);
        seen.insert(start);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for e in g.incident_edges(v) {
                let (a, b) = g.endpoints(e).unwrap();
                let w = if a == v { b } else { a };
                if w == x || w == y || comp.contains(&w) {
                    continue;
                }
                comp.insert(w);
                seen.insert(w);
                queue.push_back(w);
            }
        }
        let edges: BTreeSet<EdgeId> = g
            .edge_ids()
            .filter(|&e| {
                let (a, b) = g.endpoints(e).unwrap();
                comp.contains(&a) || comp.contains(&b)
            })
            .collect();
        comps.push(edges);
    }
    (spanning, comps)
}

/// A pair separates when its removal disconnects the rest, or when at
/// least three 2-components meet at it (which covers spanning edges
/// parallel to a separating pair).
pub fn is_two_separator(g: &LabeledGraph, x: VertexId, y: VertexId) -> bool {
    if x == y || !g.has_vertex(x) || !g.has_vertex(y) {
        return false;
    }
    let (spanning, comps) = pieces_split(g, x, y);
    comps.len() >= 2 || spanning.len() + comps.len() >= 3
}

pub fn is_tuplet(g: &LabeledGraph, x: VertexId, y: VertexId) -> bool {
    is_two_separator(g, x, y) && two_components_at(g, x, y).len() >= 3
}

/// All tuplets: separating pairs with at least three 2-components.
pub fn tuplets(g: &LabeledGraph) -> Vec<(VertexId, VertexId)> {
    two_separators(g)
        .into_iter()
        .filter(|&(x, y)| two_components_at(g, x, y).len() >= 3)
        .collect()
}

/// A 2-connected graph is nice when its tuplets keep their distance —
/// at least two between any pair of them — and attach thinly: each
/// 2-component at a tuplet meets each tuplet vertex in exactly one edge.
pub fn is_nice(g: &LabeledGraph) -> bool {
    if !g.is_two_connected() {
        return false;
    }
    let ts = tuplets(g);
    for (i, &(a, b)) in ts.iter().enumerate() {
        for &(c, d) in &ts[i + 1..] {
            let close = [a, b]
                .iter()
                .any(|&u| [c, d].iter().any(|&v| vertex_distance(g, u, v) < 2));
            if close {
                return false;
            }
        }
    }
    for &(x, y) in &ts {
        for comp in two_components_at(g, x, y) {
            for v in [x, y] {
                let attachments = comp
                    .iter()
                    .filter(|&&e| {
                        let (p, q) = g.endpoints(e).unwrap();
                        p == v || q == v
                    })
                    .count();
                if attachments != 1 {
                    return false;
                }
            }
        }
    }
    true
}

fn vertex_distance(g: &LabeledGraph, from: VertexId, to: VertexId) -> usize {
    let mut dist: BTreeMap<VertexId, usize> = BTreeMap::from([(from, 0)]);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            return dist[&v];
        }
        for e in g.incident_edges(v) {
            let (a, b) = g.endpoints(e).unwrap();
            let w = if a == v { b } else { a };
            if !dist.contains_key(&w) {
                dist.insert(w, dist[&v] + 1);
                queue.push_back(w);
            }
        }
    }
    usize::MAX
}

/// All separating vertex pairs, in increasing order.
pub fn two_separators(g: &LabeledGraph) -> Vec<(VertexId, VertexId)> {
    let vs: Vec<VertexId> = g.vertices().collect();
    let mut out = Vec::new();
    for (i, &x) in vs.iter().enumerate() {
        for &y in &vs[i + 1..] {
            if is_two_separator(g, x, y) {
                out.push((x, y));
            }
        }
    }
    out
}

/// An edge bipartition whose sides meet only in the two separator
/// vertices. `side_a` holds the smallest edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TwoSeparation {
    pub separator: (VertexId, VertexId),
    pub side_a: BTreeSet<EdgeId>,
    pub side_b: BTreeSet<EdgeId>,
}

impl TwoSeparation {
    fn new(separator: (VertexId, VertexId), p: BTreeSet<EdgeId>, q: BTreeSet<EdgeId>) -> Self {
        debug_assert!(separator.0 <= separator.1);
        if p <= q {
            TwoSeparation { separator, side_a: p, side_b: q }
        } else {
            TwoSeparation { separator, side_a: q, side_b: p }
        }
    }

    /// Two separations are nested when one side of one lies inside a
    /// side of the other.
    pub fn nested_with(&self, other: &TwoSeparation) -> bool {
        self.side_a.is_subset(&other.side_a)
            || self.side_a.is_subset(&other.side_b)
            || self.side_b.is_subset(&other.side_a)
            || self.side_b.is_subset(&other.side_b)
    }
}

/// Every 2-separation of g: for each separating pair, every bipartition
/// of its 2-components into two nonempty groups.
pub fn two_separations(g: &LabeledGraph) -> Result<Vec<TwoSeparation>> {
    if !g.is_two_connected() {
        return Err(Error::NotTwoConnected);
    }
    let mut out: BTreeSet<TwoSeparation> = BTreeSet::new();
    for (x, y) in two_separators(g) {
        let pieces = two_components_at(g, x, y);
        let k = pieces.len();
        if k > SEPARATION_PIECE_CAP {
            return Err(Error::ResourceCap(format!(
                "{k} pieces at a separator exceed the separation enumeration cap"
            )));
        }
        // fix piece 0 on side A so each bipartition appears once
        for mask in 0..(1u32 << (k - 1)) {
            let mut a = pieces[0].clone();
            let mut b = BTreeSet::new();
            for (j, piece) in pieces.iter().enumerate().skip(1) {
                if mask >> (j - 1) & 1 == 1 {
                    a.extend(piece.iter().copied());
                } else {
                    b.extend(piece.iter().copied());
                }
            }
            if b.is_empty() {
                continue;
            }
            out.insert(TwoSeparation::new((x, y), a, b));
        }
    }
    Ok(out.into_iter().collect())
}

/// A separator is totally nested when each of its componental
/// separations (one 2-component against the rest) is nested with every
/// 2-separation of g.
pub fn totally_nested(g: &LabeledGraph, t: (VertexId, VertexId)) -> Result<bool> {
    let (x, y) = if t.0 <= t.1 { t } else { (t.1, t.0) };
    if !is_two_separator(g, x, y) {
        return Err(Error::Precondition(format!(
            "({x}, {y}) is not a 2-separator"
        )));
    }
    let pieces = two_components_at(g, x, y);
    let all_edges = g.edge_set();
    let all = two_separations(g)?;
    for piece in &pieces {
        let rest: BTreeSet<EdgeId> = all_edges.difference(piece).copied().collect();
        if rest.is_empty() {
            continue;
        }
        let comp_sep = TwoSeparation::new((x, y), piece.clone(), rest);
        if all.iter().any(|s| !comp_sep.nested_with(s)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TorsoKind {
    ThreeBlock,
    Cycle,
    TwoVertex,
}

/// One bag of the Tutte decomposition. The torso carries the bag's real
/// edges plus one edge per adjacent branch; every torso edge owns a
/// reservoir — the real edges it stands for (a real edge stands for
/// itself). Torso edges toward a neighbour are labelled by the smallest
/// reservoir edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bag {
    pub vertices: BTreeSet<VertexId>,
    pub kind: TorsoKind,
    pub torso: LabeledGraph,
    pub real_edges: BTreeSet<EdgeId>,
    pub reservoirs: BTreeMap<EdgeId, BTreeSet<EdgeId>>,
    pub virtual_neighbours: BTreeMap<EdgeId, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TutteDecomposition {
    pub bags: Vec<Bag>,
}

impl TutteDecomposition {
    pub fn neighbours(&self, i: usize) -> BTreeSet<usize> {
        self.bags[i].virtual_neighbours.values().copied().collect()
    }

    pub fn tree_degree(&self, i: usize) -> usize {
        self.neighbours(i).len()
    }

    pub fn bag_of_edge(&self, e: EdgeId) -> Option<usize> {
        self.bags.iter().position(|b| b.real_edges.contains(&e))
    }

    pub fn bag_with_vertices(&self, vs: &BTreeSet<VertexId>) -> Option<usize> {
        self.bags.iter().position(|b| &b.vertices == vs)
    }

    /// Real edges of the subtree entered from `from` through its
    /// neighbour `toward`.
    pub fn subtree_real_edges(&self, from: usize, toward: usize) -> BTreeSet<EdgeId> {
        let mut seen = BTreeSet::from([from, toward]);
        let mut queue = VecDeque::from([toward]);
        let mut out = BTreeSet::new();
        while let Some(i) = queue.pop_front() {
            out.extend(self.bags[i].real_edges.iter().copied());
            for j in self.neighbours(i) {
                if seen.insert(j) {
                    queue.push_back(j);
                }
            }
        }
        out
    }
}

fn classify(g: &LabeledGraph) -> TorsoKind {
    if g.vertex_count() == 2 {
        TorsoKind::TwoVertex
    } else if g.vertices().all(|v| g.degree(v) == 2) {
        TorsoKind::Cycle
    } else {
        TorsoKind::ThreeBlock
    }
}

fn first_separator(g: &LabeledGraph) -> Option<(VertexId, VertexId)> {
    let vs: Vec<VertexId> = g.vertices().collect();
    for (i, &x) in vs.iter().enumerate() {
        for &y in &vs[i + 1..] {
            if is_two_separator(g, x, y) {
                return Some((x, y));
            }
        }
    }
    None
}

/// Decompose a 2-connected multigraph into its canonical tree of
/// 3-block, cycle and two-vertex bags by repeatedly splitting at
/// separating pairs and then merging adjacent cycle bags.
pub fn tutte_decompose(g: &LabeledGraph) -> Result<TutteDecomposition> {
    if !g.is_two_connected() {
        return Err(Error::NotTwoConnected);
    }
    let real: BTreeSet<EdgeId> = g.edge_set();
    let first_virtual = g.edge_ids().map(|e| e.0).max().unwrap_or(0) + 1;
    let mut next_virtual = first_virtual;
    let mut fresh = || {
        let v = EdgeId(next_virtual);
        next_virtual += 1;
        v
    };

    let mut nodes: Vec<(LabeledGraph, TorsoKind)> = Vec::new();
    let mut work: VecDeque<LabeledGraph> = VecDeque::from([g.clone()]);
    while let Some(h) = work.pop_front() {
        let Some((x, y)) = first_separator(&h) else {
            let kind = classify(&h);
            nodes.push((h, kind));
            continue;
        };
        let (spanning, comps) = pieces_split(&h, x, y);
        let total = spanning.len() + comps.len();
        if total >= 3 {
            // a two-vertex bag: keep spanning edges, one fresh edge per branch
            let mut pg = LabeledGraph::new();
            pg.add_vertex(x);
            pg.add_vertex(y);
            for e in spanning {
                pg.add_edge(e, x, y)?;
            }
            for branch in comps {
                let v = fresh();
                pg.add_edge(v, x, y)?;
                let mut child = h.spanned_subgraph(&branch)?;
                child.add_vertex(x);
                child.add_vertex(y);
                child.add_edge(v, x, y)?;
                work.push_back(child);
            }
            nodes.push((pg, TorsoKind::TwoVertex));
        } else {
            // exactly two branches: split them apart, no bag in between
            let v = fresh();
            for branch in comps {
                let mut child = h.spanned_subgraph(&branch)?;
                child.add_vertex(x);
                child.add_vertex(y);
                child.add_edge(v, x, y)?;
                work.push_back(child);
            }
        }
    }

    // adjacent cycle bags glue back into one larger cycle
    'merge: loop {
        for i in 0..nodes.len() {
            if nodes[i].1 != TorsoKind::Cycle {
                continue;
            }
            for j in i + 1..nodes.len() {
                if nodes[j].1 != TorsoKind::Cycle {
                    continue;
                }
                let shared: Vec<EdgeId> = nodes[i]
                    .0
                    .edge_ids()
                    .filter(|e| e.0 >= first_virtual && nodes[j].0.has_edge(*e))
                    .collect();
                if let Some(&v) = shared.first() {
                    let a = nodes[i].0.apply_step(&MinorStep::Delete(v))?;
                    let b = nodes[j].0.apply_step(&MinorStep::Delete(v))?;
                    let merged = a.union(&b)?;
                    nodes[i] = (merged, TorsoKind::Cycle);
                    nodes.remove(j);
                    continue 'merge;
                }
            }
        }
        break;
    }

    // each remaining fresh label ties exactly two bags together
    let mut partners: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (i, (h, _)) in nodes.iter().enumerate() {
        for e in h.edge_ids().filter(|e| e.0 >= first_virtual) {
            partners.entry(e).or_default().push(i);
        }
    }
    for (e, owners) in &partners {
        if owners.len() != 2 {
            return Err(Error::Internal(format!(
                "fresh edge {e} appears in {} bags",
                owners.len()
            )));
        }
        let (a, b) = (owners[0], owners[1]);
        if nodes[a].1 == TorsoKind::TwoVertex && nodes[b].1 == TorsoKind::TwoVertex {
            return Err(Error::Internal(
                "two adjacent two-vertex bags survived splitting".into(),
            ));
        }
    }

    // reservoir of a fresh edge = real edges reachable through the partner
    let adjacency: BTreeMap<usize, BTreeMap<EdgeId, usize>> = {
        let mut adj: BTreeMap<usize, BTreeMap<EdgeId, usize>> = BTreeMap::new();
        for (e, owners) in &partners {
            adj.entry(owners[0]).or_default().insert(*e, owners[1]);
            adj.entry(owners[1]).or_default().insert(*e, owners[0]);
        }
        adj
    };
    let node_reals: Vec<BTreeSet<EdgeId>> = nodes
        .iter()
        .map(|(h, _)| h.edge_set().intersection(&real).copied().collect())
        .collect();
    let far_reals = |from: usize, toward: usize| -> BTreeSet<EdgeId> {
        let mut seen = BTreeSet::from([from, toward]);
        let mut queue = VecDeque::from([toward]);
        let mut out = BTreeSet::new();
        while let Some(i) = queue.pop_front() {
            out.extend(node_reals[i].iter().copied());
            if let Some(nb) = adjacency.get(&i) {
                for &j in nb.values() {
                    if seen.insert(j) {
                        queue.push_back(j);
                    }
                }
            }
        }
        out
    };

    let mut bags: Vec<Bag> = Vec::new();
    let mut raw_partner: Vec<BTreeMap<EdgeId, (EdgeId, usize)>> = Vec::new();
    for (i, (h, kind)) in nodes.iter().enumerate() {
        let mut torso = LabeledGraph::new();
        for v in h.vertices() {
            torso.add_vertex(v);
        }
        let mut reservoirs = BTreeMap::new();
        let mut renamed = BTreeMap::new();
        for e in h.edge_ids() {
            let (u, v) = h.endpoints(e)?;
            if e.0 < first_virtual {
                torso.add_edge(e, u, v)?;
                reservoirs.insert(e, BTreeSet::from([e]));
            } else {
                let partner = adjacency[&i][&e];
                let reservoir = far_reals(i, partner);
                let label = *reservoir.iter().next().ok_or_else(|| {
                    Error::Internal("a decomposition subtree holds no real edge".into())
                })?;
                torso.add_edge(label, u, v)?;
                reservoirs.insert(label, reservoir);
                renamed.insert(label, (e, partner));
            }
        }
        bags.push(Bag {
            vertices: h.vertices().collect(),
            kind: *kind,
            torso,
            real_edges: node_reals[i].clone(),
            reservoirs,
            virtual_neighbours: BTreeMap::new(),
        });
        raw_partner.push(renamed);
    }

    // deterministic bag order, then rewire neighbour indices
    let mut order: Vec<usize> = (0..bags.len()).collect();
    order.sort_by(|&a, &b| {
        (&bags[a].vertices, &bags[a].real_edges).cmp(&(&bags[b].vertices, &bags[b].real_edges))
    });
    let mut position = vec![0usize; bags.len()];
    for (new_idx, &old_idx) in order.iter().enumerate() {
        position[old_idx] = new_idx;
    }
    let mut sorted: Vec<Bag> = Vec::with_capacity(bags.len());
    for &old_idx in &order {
        let mut bag = bags[old_idx].clone();
        bag.virtual_neighbours = raw_partner[old_idx]
            .iter()
            .map(|(&label, &(_, partner))| (label, position[partner]))
            .collect();
        sorted.push(bag);
    }
    Ok(TutteDecomposition { bags: sorted })
}

/// Torso graphs of the maximal 3-connected pieces.
pub fn three_blocks(g: &LabeledGraph) -> Result<Vec<LabeledGraph>> {
    Ok(tutte_decompose(g)?
        .bags
        .into_iter()
        .filter(|b| b.kind == TorsoKind::ThreeBlock)
        .map(|b| b.torso)
        .collect())
}

/// Same bag in the same host, ignoring which reservoir edge labels each
/// torso edge: vertices, kind, real edges, and the reservoir behind each
/// torso edge position must agree.
pub fn tutte_equivalent(a: &Bag, b: &Bag) -> bool {
    if a.vertices != b.vertices || a.kind != b.kind || a.real_edges != b.real_edges {
        return false;
    }
    let profile = |bag: &Bag| -> BTreeSet<(VertexId, VertexId, Vec<EdgeId>)> {
        bag.reservoirs
            .iter()
            .map(|(&label, res)| {
                let (u, v) = bag.torso.endpoints(label).unwrap();
                (u, v, res.iter().copied().collect())
            })
            .collect()
    };
    profile(a) == profile(b)
}

/// The side minor G[[A:e]]: keep side A of a 2-separation and re-route
/// the complement-side edge e across the separator, realised by
/// contracting a spanning forest of the complement chosen so the
/// separator pair ends up as e's endpoints.
pub fn side_minor(
    g: &LabeledGraph,
    a: &BTreeSet<EdgeId>,
    e: EdgeId,
) -> Result<(LabeledGraph, MinorWitness)> {
    let all = g.edge_set();
    if !a.is_subset(&all) || a.is_empty() {
        return Err(Error::Precondition("side is not an edge subset of g".into()));
    }
    let b: BTreeSet<EdgeId> = all.difference(a).copied().collect();
    if !b.contains(&e) {
        return Err(Error::Precondition(format!(
            "edge {e} does not lie on the complement side"
        )));
    }
    let ga = g.spanned_subgraph(a)?;
    let gb = g.spanned_subgraph(&b)?;
    let va: BTreeSet<VertexId> = ga.vertices().collect();
    let vb: BTreeSet<VertexId> = gb.vertices().collect();
    let shared: Vec<VertexId> = va.intersection(&vb).copied().collect();
    let [x, y] = shared[..] else {
        return Err(Error::Precondition(
            "sides do not meet in exactly two vertices".into(),
        ));
    };
    for piece in two_components_at(g, x, y) {
        if !(piece.is_subset(a) || piece.is_subset(&b)) {
            return Err(Error::Precondition(
                "edge set does not split whole 2-components".into(),
            ));
        }
    }

    let path = path_through_edge(&gb, x, y, e)?;
    let mut forest: BTreeSet<EdgeId> = path.iter().copied().collect();
    let mut span: BTreeSet<VertexId> = BTreeSet::from([x]);
    for &f in &path {
        let (u, v) = gb.endpoints(f)?;
        span.insert(u);
        span.insert(v);
    }
    let mut grew = true;
    while grew {
        grew = false;
        for f in gb.edge_ids() {
            if forest.contains(&f) {
                continue;
            }
            let (u, v) = gb.endpoints(f)?;
            if span.contains(&u) != span.contains(&v) {
                forest.insert(f);
                span.insert(u);
                span.insert(v);
                grew = true;
            }
        }
    }
    if !gb.vertices().all(|v| span.contains(&v)) {
        return Err(Error::Internal("complement side is not connected".into()));
    }

    let mut steps = Vec::new();
    for f in &b {
        if !forest.contains(f) {
            steps.push(MinorStep::Delete(*f));
        }
    }
    for f in &forest {
        if *f != e {
            steps.push(MinorStep::Contract(*f));
        }
    }
    // contracting joins vertices onto the smallest id; steer the two
    // forest components back onto the separator pair
    let mut stump = LabeledGraph::new();
    for v in gb.vertices() {
        stump.add_vertex(v);
    }
    for &f in &forest {
        if f != e {
            let (u, v) = gb.endpoints(f)?;
            stump.add_edge(f, u, v)?;
        }
    }
    let comps = stump.components();
    let merged_of = |v: VertexId| -> VertexId {
        comps
            .iter()
            .find(|c| c.contains(&v))
            .and_then(|c| c.iter().next().copied())
            .unwrap_or(v)
    };
    let (mx, my) = (merged_of(x), merged_of(y));
    if mx != x {
        steps.push(MinorStep::Relabel(mx, x));
    }
    if my != y {
        steps.push(MinorStep::Relabel(my, y));
    }

    let witness = MinorWitness::new(steps);
    let got = witness.replay(g)?;
    let mut expected = ga;
    expected.add_vertex(x);
    expected.add_vertex(y);
    expected.add_edge(e, x, y)?;
    if got != expected {
        return Err(Error::Internal("side minor replay mismatch".into()));
    }
    Ok((got, witness))
}

/// A simple x–y path in g passing through edge e, as an edge list.
fn path_through_edge(g: &LabeledGraph, x: VertexId, y: VertexId, e: EdgeId) -> Result<Vec<EdgeId>> {
    fn dfs(
        g: &LabeledGraph,
        cur: VertexId,
        target: VertexId,
        e: EdgeId,
        path: &mut Vec<EdgeId>,
        on_path: &mut BTreeSet<VertexId>,
        budget: &mut usize,
    ) -> Result<bool> {
        if *budget == 0 {
            return Err(Error::ResourceCap("path search budget exhausted".into()));
        }
        *budget -= 1;
        if cur == target {
            return Ok(path.contains(&e));
        }
        for edge in g.incident_edges(cur) {
            let (a, b) = g.endpoints(edge)?;
            let w = if a == cur { b } else { a };
            if on_path.contains(&w) {
                continue;
            }
            path.push(edge);
            on_path.insert(w);
            if dfs(g, w, target, e, path, on_path, budget)? {
                return Ok(true);
            }
            path.pop();
            on_path.remove(&w);
        }
        Ok(false)
    }

    let mut path = Vec::new();
    let mut on_path = BTreeSet::from([x]);
    let mut budget = PATH_SEARCH_CAP;
    if dfs(g, x, y, e, &mut path, &mut on_path, &mut budget)? {
        Ok(path)
    } else {
        Err(Error::Precondition(format!(
            "no simple {x}\u{2013}{y} path runs through edge {e}"
        )))
    }
}

/// A minor witness taking g to the bag's torso: one side-minor step per
/// torso edge that stands for a branch.
pub fn torso_witness(g: &LabeledGraph, dec: &TutteDecomposition, bag: usize) -> Result<MinorWitness> {
    let b = &dec.bags[bag];
    let mut h = g.clone();
    let mut w = MinorWitness::identity();
    for (&label, reservoir) in &b.reservoirs {
        if b.real_edges.contains(&label) {
            continue;
        }
        let keep: BTreeSet<EdgeId> = h.edge_set().difference(reservoir).copied().collect();
        let (next, step) = side_minor(&h, &keep, label)?;
        h = next;
        w = w.then(&step);
    }
    if h != b.torso {
        return Err(Error::Internal("torso witness does not replay to the torso".into()));
    }
    Ok(w)
}

/// The embedding a host embedding induces on a bag's torso.
pub fn torso_embedding(
    emb: &EmbeddedGraph,
    dec: &TutteDecomposition,
    bag: usize,
) -> Result<EmbeddedGraph> {
    let w = torso_witness(emb.graph(), dec, bag)?;
    emb.induce(&w)
}

/// Edge sets that sit at the tips of the decomposition tree: leaf bags
/// with 3-block or cycle torsos contribute their real edges, and every
/// spanning edge of a two-vertex bag is a leaf on its own.
pub fn tutte_leaves(g: &LabeledGraph) -> Result<Vec<BTreeSet<EdgeId>>> {
    let dec = tutte_decompose(g)?;
    let mut out = Vec::new();
    for (i, bag) in dec.bags.iter().enumerate() {
        match bag.kind {
            TorsoKind::ThreeBlock | TorsoKind::Cycle => {
                if dec.tree_degree(i) <= 1 {
                    out.push(bag.real_edges.clone());
                }
            }
            TorsoKind::TwoVertex => {
                for &e in &bag.real_edges {
                    out.push(BTreeSet::from([e]));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Replace every maximal path whose internal vertices have degree two by
/// a single edge labelled with the smallest label on the path.
pub fn suppress_degree_two(g: &LabeledGraph) -> Result<LabeledGraph> {
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let branch: BTreeSet<VertexId> = g.vertices().filter(|&v| g.degree(v) != 2).collect();
    if branch.is_empty() {
        return Err(Error::Precondition(
            "every vertex has degree two; the graph is a cycle".into(),
        ));
    }
    let mut out = LabeledGraph::new();
    for &v in &branch {
        out.add_vertex(v);
    }
    let mut used: BTreeSet<EdgeId> = BTreeSet::new();
    for &u in &branch {
        for first in g.incident_edges(u) {
            if used.contains(&first) {
                continue;
            }
            let mut chain = vec![first];
            let (a, b) = g.endpoints(first)?;
            let mut cur = if a == u { b } else { a };
            let mut prev = first;
            while !branch.contains(&cur) {
                let next = g
                    .incident_edges(cur)
                    .into_iter()
                    .find(|&f| f != prev)
                    .ok_or_else(|| Error::Internal("degree-two chain broke off".into()))?;
                chain.push(next);
                let (p, q) = g.endpoints(next)?;
                cur = if p == cur { q } else { p };
                prev = next;
            }
            for &f in &chain {
                used.insert(f);
            }
            let label = *chain.iter().min().unwrap();
            out.add_edge(label, u, cur)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flexibility {
    pub alpha: u64,
    pub beta: u64,
    pub gamma: u64,
    pub value: i64,
}

/// How many essentially different embeddings a 2-connected graph admits,
/// counted through its totally nested separators after suppressing
/// degree-2 vertices: 1 + 2(α + 3β) − γ.
pub fn flexibility(g: &LabeledGraph) -> Result<Flexibility> {
    if !g.is_two_connected() {
        return Err(Error::NotTwoConnected);
    }
    if g.vertices().all(|v| g.degree(v) == 2) {
        return Ok(Flexibility { alpha: 0, beta: 0, gamma: 0, value: 1 });
    }
    let s = suppress_degree_two(g)?;
    let mut alpha = 0u64;
    let mut beta = 0u64;
    let mut gamma = 0u64;
    for (x, y) in two_separators(&s) {
        let pieces = two_components_at(&s, x, y);
        if pieces.len() >= 3 {
            beta += pieces.len() as u64 - 2;
            gamma += pieces
                .iter()
                .filter(|p| {
                    p.len() == 1 && {
                        let e = *p.iter().next().unwrap();
                        let (u, v) = s.endpoints(e).unwrap();
                        (u, v) == (x.min(y), x.max(y)) || (v, u) == (x.min(y), x.max(y))
                    }
                })
                .count() as u64;
        } else if totally_nested(&s, (x, y))? {
            alpha += 1;
        }
    }
    let value = 1 + 2 * (alpha as i64 + 3 * beta as i64) - gamma as i64;
    Ok(Flexibility { alpha, beta, gamma, value })
}

/// Flexibility of a whole sequence: odd positions weighted by how much
/// of the sequence still follows them.
pub fn sequence_flexibility(seq: &[LabeledGraph]) -> Result<i64> {
    let n = seq.len();
    let mut total = 0i64;
    for (idx, g) in seq.iter().enumerate().step_by(2) {
        let i = idx + 1;
        total += (n - i + 1) as i64 * flexibility(g)?.value;
    }
    Ok(total)
}

/// Total edge count over the odd (maximal) positions.
pub fn sequence_size(seq: &[LabeledGraph]) -> usize {
    seq.iter().step_by(2).map(|g| g.edge_count()).sum()
}

/// The bough segments of bond b for bag p: per tree neighbour, the bond
/// edges lying beyond that neighbour; plus each of p's own real edges in
/// b as a singleton.
pub fn bough_segments(
    g: &LabeledGraph,
    dec: &TutteDecomposition,
    p: usize,
    b: &BTreeSet<EdgeId>,
) -> Result<Vec<BTreeSet<EdgeId>>> {
    Ok(bough_bijection(g, dec, p, b)?.into_values().collect())
}

/// Maps each torso edge of p that meets b to its bough segment: a branch
/// torso edge to the bond edges beyond it, a real torso edge to itself.
pub fn bough_bijection(
    g: &LabeledGraph,
    dec: &TutteDecomposition,
    p: usize,
    b: &BTreeSet<EdgeId>,
) -> Result<BTreeMap<EdgeId, BTreeSet<EdgeId>>> {
    if !is_bond(g, b) {
        return Err(Error::Precondition("edge set is not a bond".into()));
    }
    if p >= dec.bags.len() {
        return Err(Error::Precondition(format!("no bag {p}")));
    }
    let bag = &dec.bags[p];
    let mut out = BTreeMap::new();
    for (&label, &nb) in &bag.virtual_neighbours {
        let seg: BTreeSet<EdgeId> = dec
            .subtree_real_edges(p, nb)
            .intersection(b)
            .copied()
            .collect();
        if !seg.is_empty() {
            out.insert(label, seg);
        }
    }
    for &e in bag.real_edges.intersection(b) {
        out.insert(e, BTreeSet::from([e]));
    }
    Ok(out)
}

/// Collapse the cyclic order an embedding puts on b to the torso edges
/// of p, one entry per nonempty bough segment. Each segment must be
/// contiguous for the collapse to be well defined.
pub fn bough_ordering(
    emb: &EmbeddedGraph,
    dec: &TutteDecomposition,
    p: usize,
    b: &BTreeSet<EdgeId>,
) -> Result<Vec<EdgeId>> {
    let bij = bough_bijection(emb.graph(), dec, p, b)?;
    let order = bond_cyclic_order(emb, b)?;
    for seg in bij.values() {
        if !is_cyclic_segment(&order, seg) {
            return Err(Error::Internal(
                "a bough segment is not contiguous on the bond".into(),
            ));
        }
    }
    let owner = |e: EdgeId| -> EdgeId {
        bij.iter()
            .find(|(_, seg)| seg.contains(&e))
            .map(|(&label, _)| label)
            .unwrap()
    };
    let mut collapsed: Vec<EdgeId> = Vec::new();
    for &e in &order {
        let label = owner(e);
        if collapsed.last() != Some(&label) {
            collapsed.push(label);
        }
    }
    while collapsed.len() > 1 && collapsed.first() == collapsed.last() {
        collapsed.pop();
    }
    Ok(rotate_to_min(collapsed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{enumerate_planar_embeddings, two_sum_graphs};

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

    fn theta() -> LabeledGraph {
        LabeledGraph::from_edges([(1, 1, 2), (2, 1, 2), (3, 1, 2)]).unwrap()
    }

    fn cycle(n: u32) -> LabeledGraph {
        LabeledGraph::from_edges((1..=n).map(|i| (i, i, i % n + 1))).unwrap()
    }

    /// Three triangles through the hub pair {1, 3}.
    fn theta_of_triangles() -> LabeledGraph {
        LabeledGraph::from_edges([
            (12, 1, 2),
            (23, 2, 3),
            (14, 1, 4),
            (34, 3, 4),
            (15, 1, 5),
            (35, 3, 5),
        ])
        .unwrap()
    }

    /// Three 3-blocks arranged in a triangle: every bag boundary edge of
    /// the middle cycle is a branch, none is real.
    fn triangle_of_blocks() -> LabeledGraph {
        LabeledGraph::from_edges([
            (101, 1, 11),
            (102, 1, 12),
            (103, 11, 12),
            (104, 11, 2),
            (105, 12, 2),
            (201, 2, 21),
            (202, 2, 22),
            (203, 21, 22),
            (204, 21, 3),
            (205, 22, 3),
            (301, 1, 31),
            (302, 1, 32),
            (303, 31, 32),
            (304, 31, 3),
            (305, 32, 3),
        ])
        .unwrap()
    }

    fn e(ids: impl IntoIterator<Item = u32>) -> BTreeSet<EdgeId> {
        ids.into_iter().map(EdgeId).collect()
    }

    #[test]
    fn k4_has_no_two_separators() {
        assert!(two_separators(&k4()).is_empty());
        assert!(two_separations(&k4()).unwrap().is_empty());
    }

    #[test]
    fn k4_minus_edge_has_one_totally_nested_separator() {
        let g = k4_minus_edge();
        assert_eq!(two_separators(&g), vec![(VertexId(1), VertexId(3))]);
        let seps = two_separations(&g).unwrap();
        assert_eq!(seps.len(), 3);
        assert!(totally_nested(&g, (VertexId(1), VertexId(3))).unwrap());
        assert!(totally_nested(&g, (VertexId(3), VertexId(1))).unwrap());
    }

    #[test]
    fn theta_separator_is_a_tuplet_with_three_single_edge_components() {
        let g = theta();
        let pieces = two_components_at(&g, VertexId(1), VertexId(2));
        assert_eq!(pieces, vec![e([1]), e([2]), e([3])]);
        assert!(is_tuplet(&g, VertexId(1), VertexId(2)));
    }

    #[test]
    fn four_cycle_separators_are_not_tuplets_and_not_totally_nested() {
        let g = cycle(4);
        let t = (VertexId(1), VertexId(3));
        let pieces = two_components_at(&g, t.0, t.1);
        assert_eq!(pieces.len(), 2);
        assert!(!is_tuplet(&g, t.0, t.1));
        assert!(!totally_nested(&g, t).unwrap());
        assert!(!totally_nested(&g, (VertexId(2), VertexId(4))).unwrap());
    }

    #[test]
    fn separations_reject_graphs_that_are_not_two_connected() {
        let path = LabeledGraph::from_edges([(1, 1, 2), (2, 2, 3)]).unwrap();
        assert!(matches!(two_separations(&path), Err(Error::NotTwoConnected)));
    }

    #[test]
    fn k4_minus_edge_decomposition_matches_hand_computation() {
        let g = k4_minus_edge();
        let dec = tutte_decompose(&g).unwrap();
        assert_eq!(dec.bags.len(), 3);

        let b0 = &dec.bags[0];
        assert_eq!(b0.vertices, [1, 2, 3].map(VertexId).into());
        assert_eq!(b0.kind, TorsoKind::Cycle);
        assert_eq!(b0.real_edges, e([12, 23]));
        assert_eq!(
            b0.torso,
            LabeledGraph::from_edges([(12, 1, 2), (23, 2, 3), (13, 1, 3)]).unwrap()
        );
        assert_eq!(b0.reservoirs[&EdgeId(13)], e([13, 14, 34]));
        assert_eq!(b0.virtual_neighbours, BTreeMap::from([(EdgeId(13), 1)]));

        let b1 = &dec.bags[1];
        assert_eq!(b1.vertices, [1, 3].map(VertexId).into());
        assert_eq!(b1.kind, TorsoKind::TwoVertex);
        assert_eq!(b1.real_edges, e([13]));
        assert_eq!(
            b1.torso,
            LabeledGraph::from_edges([(13, 1, 3), (12, 1, 3), (14, 1, 3)]).unwrap()
        );
        assert_eq!(b1.reservoirs[&EdgeId(12)], e([12, 23]));
        assert_eq!(b1.reservoirs[&EdgeId(14)], e([14, 34]));
        assert_eq!(b1.reservoirs[&EdgeId(13)], e([13]));
        assert_eq!(
            b1.virtual_neighbours,
            BTreeMap::from([(EdgeId(12), 0), (EdgeId(14), 2)])
        );

        let b2 = &dec.bags[2];
        assert_eq!(b2.vertices, [1, 3, 4].map(VertexId).into());
        assert_eq!(b2.kind, TorsoKind::Cycle);
        assert_eq!(b2.real_edges, e([14, 34]));
        assert_eq!(
            b2.torso,
            LabeledGraph::from_edges([(14, 1, 4), (34, 3, 4), (12, 1, 3)]).unwrap()
        );
        assert_eq!(b2.reservoirs[&EdgeId(12)], e([12, 13, 23]));

        assert_eq!(dec.bag_of_edge(EdgeId(23)), Some(0));
        assert_eq!(dec.subtree_real_edges(1, 0), e([12, 23]));
        assert_eq!(dec.subtree_real_edges(0, 1), e([13, 14, 34]));
    }

    #[test]
    fn theta_decomposes_to_a_single_two_vertex_bag() {
        let dec = tutte_decompose(&theta()).unwrap();
        assert_eq!(dec.bags.len(), 1);
        assert_eq!(dec.bags[0].kind, TorsoKind::TwoVertex);
        assert_eq!(dec.bags[0].torso, theta());
        assert_eq!(dec.tree_degree(0), 0);
    }

    #[test]
    fn cycles_decompose_to_a_single_cycle_bag() {
        for n in [3u32, 4, 5, 6] {
            let g = cycle(n);
            let dec = tutte_decompose(&g).unwrap();
            assert_eq!(dec.bags.len(), 1, "cycle of length {n}");
            assert_eq!(dec.bags[0].kind, TorsoKind::Cycle);
            assert_eq!(dec.bags[0].torso, g);
        }
    }

    #[test]
    fn k4_decomposes_to_a_single_three_block() {
        let dec = tutte_decompose(&k4()).unwrap();
        assert_eq!(dec.bags.len(), 1);
        assert_eq!(dec.bags[0].kind, TorsoKind::ThreeBlock);
        assert_eq!(dec.bags[0].torso, k4());
        assert_eq!(three_blocks(&k4()).unwrap(), vec![k4()]);
    }

    #[test]
    fn three_blocks_meeting_in_an_all_branch_triangle() {
        let g = triangle_of_blocks();
        let dec = tutte_decompose(&g).unwrap();
        let kinds: Vec<TorsoKind> = dec.bags.iter().map(|b| b.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TorsoKind::Cycle,
                TorsoKind::ThreeBlock,
                TorsoKind::ThreeBlock,
                TorsoKind::ThreeBlock
            ]
        );
        let middle = &dec.bags[0];
        assert_eq!(middle.vertices, [1, 2, 3].map(VertexId).into());
        assert!(middle.real_edges.is_empty());
        assert_eq!(
            middle.torso,
            LabeledGraph::from_edges([(101, 1, 2), (201, 2, 3), (301, 1, 3)]).unwrap()
        );
        assert_eq!(middle.reservoirs[&EdgeId(101)], e(101..=105));
        assert_eq!(middle.reservoirs[&EdgeId(201)], e(201..=205));
        assert_eq!(middle.reservoirs[&EdgeId(301)], e(301..=305));
        assert_eq!(dec.tree_degree(0), 3);
        assert_eq!(three_blocks(&g).unwrap().len(), 3);
    }

    #[test]
    fn torso_minor_witnesses_replay_exactly() {
        for g in [k4(), k4_minus_edge(), theta(), cycle(5), theta_of_triangles(), triangle_of_blocks()] {
            let dec = tutte_decompose(&g).unwrap();
            for i in 0..dec.bags.len() {
                let w = torso_witness(&g, &dec, i).unwrap();
                w.verify(&g, &dec.bags[i].torso).unwrap();
            }
        }
    }

    #[test]
    fn bags_with_relabelled_torso_edges_are_tutte_equivalent() {
        let dec = tutte_decompose(&k4_minus_edge()).unwrap();
        let hub = &dec.bags[1];
        let mut relabelled = hub.clone();
        // pick edge 23 instead of 12 to stand for the {12,23} branch
        relabelled.torso = LabeledGraph::from_edges([(13, 1, 3), (23, 1, 3), (14, 1, 3)]).unwrap();
        let reservoir = relabelled.reservoirs.remove(&EdgeId(12)).unwrap();
        relabelled.reservoirs.insert(EdgeId(23), reservoir);
        assert!(tutte_equivalent(hub, &relabelled));
        assert!(!tutte_equivalent(hub, &dec.bags[0]));
        assert!(tutte_equivalent(&dec.bags[0], &dec.bags[0]));
    }

    #[test]
    fn side_minor_of_theta_side_is_theta_again() {
        let g = theta();
        let (h, w) = side_minor(&g, &e([1, 2]), EdgeId(3)).unwrap();
        assert_eq!(h, g);
        w.verify(&g, &h).unwrap();
    }

    #[test]
    fn side_minor_reroutes_the_chosen_edge_across_the_separator() {
        let g = k4_minus_edge();
        let (h, w) = side_minor(&g, &e([12, 23]), EdgeId(34)).unwrap();
        assert_eq!(
            h,
            LabeledGraph::from_edges([(12, 1, 2), (23, 2, 3), (34, 1, 3)]).unwrap()
        );
        w.verify(&g, &h).unwrap();

        let (h2, w2) = side_minor(&g, &e([13, 14, 34]), EdgeId(12)).unwrap();
        assert_eq!(
            h2,
            LabeledGraph::from_edges([(13, 1, 3), (14, 1, 4), (34, 3, 4), (12, 1, 3)]).unwrap()
        );
        w2.verify(&g, &h2).unwrap();
    }

    #[test]
    fn side_minor_rejects_a_non_side() {
        let g = k4_minus_edge();
        assert!(side_minor(&g, &e([12, 13]), EdgeId(34)).is_err());
        assert!(side_minor(&g, &e([12, 23]), EdgeId(23)).is_err());
    }

    #[test]
    fn opposite_side_minors_two_sum_back_to_the_graph() {
        // rebuilding from a 2-separation needs a shared edge label that
        // neither side already holds
        for g in [theta(), k4_minus_edge(), cycle(4), cycle(5), theta_of_triangles()] {
            let fresh = EdgeId(g.edge_ids().map(|e| e.0).max().unwrap() + 1);
            for sep in two_separations(&g).unwrap() {
                let (x, y) = sep.separator;
                let mut left = g.spanned_subgraph(&sep.side_a).unwrap();
                left.add_edge(fresh, x, y).unwrap();
                let mut right = g.spanned_subgraph(&sep.side_b).unwrap();
                right.add_edge(fresh, x, y).unwrap();
                assert_eq!(two_sum_graphs(&left, &right, fresh).unwrap(), g);
            }
        }
    }

    #[test]
    fn tutte_leaf_examples() {
        assert_eq!(tutte_leaves(&theta()).unwrap(), vec![e([1]), e([2]), e([3])]);
        assert_eq!(
            tutte_leaves(&k4_minus_edge()).unwrap(),
            vec![e([12, 23]), e([13]), e([14, 34])]
        );
        assert_eq!(tutte_leaves(&k4()).unwrap(), vec![e([12, 13, 14, 23, 24, 34])]);
        assert_eq!(
            tutte_leaves(&triangle_of_blocks()).unwrap(),
            vec![e(101..=105), e(201..=205), e(301..=305)]
        );
    }

    #[test]
    fn suppression_contracts_chains_onto_their_smallest_label() {
        let g = k4_minus_edge();
        let s = suppress_degree_two(&g).unwrap();
        assert_eq!(
            s,
            LabeledGraph::from_edges([(12, 1, 3), (13, 1, 3), (14, 1, 3)]).unwrap()
        );
        assert!(matches!(suppress_degree_two(&cycle(5)), Err(Error::Precondition(_))));
    }

    #[test]
    fn flexibility_of_cycles_is_one() {
        for n in [3u32, 4, 5, 6] {
            assert_eq!(flexibility(&cycle(n)).unwrap().value, 1);
        }
    }

    #[test]
    fn flexibility_of_k4_is_one() {
        let f = flexibility(&k4()).unwrap();
        assert_eq!((f.alpha, f.beta, f.gamma, f.value), (0, 0, 0, 1));
    }

    #[test]
    fn flexibility_counts_the_theta_tuplet() {
        let f = flexibility(&theta()).unwrap();
        assert_eq!((f.alpha, f.beta, f.gamma, f.value), (0, 1, 3, 4));
    }

    #[test]
    fn flexibility_survives_subdivision() {
        assert_eq!(flexibility(&k4_minus_edge()).unwrap().value, 4);
        // K4 with edge 12 subdivided through a fresh vertex 9
        let g = LabeledGraph::from_edges([
            (91, 9, 1),
            (92, 9, 2),
            (13, 1, 3),
            (14, 1, 4),
            (23, 2, 3),
            (24, 2, 4),
            (34, 3, 4),
        ])
        .unwrap();
        assert_eq!(flexibility(&g).unwrap().value, 1);
    }

    #[test]
    fn nested_separator_without_a_tuplet_counts_toward_alpha() {
        // two K4-minus-an-edge blocks sharing the missing pair {1, 2}
        let g = LabeledGraph::from_edges([
            (13, 1, 3),
            (14, 1, 4),
            (23, 2, 3),
            (24, 2, 4),
            (34, 3, 4),
            (15, 1, 5),
            (16, 1, 6),
            (25, 2, 5),
            (26, 2, 6),
            (56, 5, 6),
        ])
        .unwrap();
        let f = flexibility(&g).unwrap();
        assert_eq!((f.alpha, f.beta, f.gamma, f.value), (1, 0, 0, 3));
    }

    #[test]
    fn sequence_flexibility_weights_odd_positions() {
        let seq = vec![theta(), cycle(3), k4()];
        assert_eq!(sequence_flexibility(&seq).unwrap(), 3 * 4 + 1);
        assert_eq!(sequence_size(&seq), 3 + 6);
    }

    #[test]
    fn rotator_segmentation_in_every_embedding() {
        let g = k4_minus_edge();
        let pieces = two_components_at(&g, VertexId(1), VertexId(3));
        for rot in enumerate_planar_embeddings(&g, 10_000).unwrap() {
            for v in [VertexId(1), VertexId(3)] {
                let order: Vec<EdgeId> = rot.rotator(v).unwrap().iter().map(|d| d.edge).collect();
                for piece in &pieces {
                    let local: BTreeSet<EdgeId> =
                        piece.iter().filter(|e| order.contains(e)).copied().collect();
                    assert!(is_cyclic_segment(&order, &local));
                }
            }
            let collapse = |v: VertexId| -> Vec<usize> {
                let order: Vec<EdgeId> = rot.rotator(v).unwrap().iter().map(|d| d.edge).collect();
                let mut ids: Vec<usize> = order
                    .iter()
                    .map(|e| pieces.iter().position(|p| p.contains(e)).unwrap())
                    .collect();
                ids.dedup();
                while ids.len() > 1 && ids.first() == ids.last() {
                    ids.pop();
                }
                let min = ids.iter().enumerate().min_by_key(|(_, x)| **x).unwrap().0;
                ids.rotate_left(min);
                ids
            };
            let at_one = collapse(VertexId(1));
            let mut at_three = collapse(VertexId(3));
            at_three.reverse();
            let min = at_three.iter().enumerate().min_by_key(|(_, x)| **x).unwrap().0;
            at_three.rotate_left(min);
            assert_eq!(at_one, at_three);
        }
    }

    #[test]
    fn embeddings_with_equal_torso_data_are_equal() {
        for g in [k4(), k4_minus_edge(), theta(), cycle(5), theta_of_triangles()] {
            let dec = tutte_decompose(&g).unwrap();
            let data_bags: Vec<usize> = dec
                .bags
                .iter()
                .enumerate()
                .filter(|(_, b)| b.kind != TorsoKind::Cycle)
                .map(|(i, _)| i)
                .collect();
            let mut seen: BTreeMap<String, RotationSystemKey> = BTreeMap::new();
            for rot in enumerate_planar_embeddings(&g, 10_000).unwrap() {
                let emb = EmbeddedGraph::new(g.clone(), rot.clone()).unwrap();
                let data: Vec<String> = data_bags
                    .iter()
                    .map(|&i| format!("{:?}", torso_embedding(&emb, &dec, i).unwrap().rotation()))
                    .collect();
                let key = data.join("|");
                if let Some(prev) = seen.get(&key) {
                    assert_eq!(prev, &rot, "distinct embeddings share torso data");
                } else {
                    seen.insert(key, rot);
                }
            }
        }
    }

    type RotationSystemKey = crate::graph::RotationSystem;

    #[test]
    fn bough_segments_of_the_hub_bag() {
        let g = k4_minus_edge();
        let dec = tutte_decompose(&g).unwrap();
        let b = e([12, 14, 13]);
        let bij = bough_bijection(&g, &dec, 1, &b).unwrap();
        assert_eq!(
            bij,
            BTreeMap::from([
                (EdgeId(12), e([12])),
                (EdgeId(13), e([13])),
                (EdgeId(14), e([14])),
            ])
        );
        assert_eq!(
            bough_segments(&g, &dec, 1, &b).unwrap(),
            vec![e([12]), e([13]), e([14])]
        );
    }

    #[test]
    fn bough_segments_when_p_is_the_only_bag() {
        let g = k4();
        let dec = tutte_decompose(&g).unwrap();
        let b = e([12, 13, 14]);
        let segs = bough_segments(&g, &dec, 0, &b).unwrap();
        assert_eq!(segs, vec![e([12]), e([13]), e([14])]);
    }

    #[test]
    fn bough_segments_absorb_whole_subtrees() {
        let g = theta_of_triangles();
        let dec = tutte_decompose(&g).unwrap();
        // the cut around {1, 2}: three edges leaving toward 3, 4 and 5
        let b = e([23, 14, 15]);
        let hub = dec.bag_with_vertices(&[1, 3].map(VertexId).into()).unwrap();
        let bij = bough_bijection(&g, &dec, hub, &b).unwrap();
        assert_eq!(
            bij,
            BTreeMap::from([
                (EdgeId(12), e([23])),
                (EdgeId(14), e([14])),
                (EdgeId(15), e([15])),
            ])
        );
        // seen from a leaf triangle, everything beyond the hub is one segment
        let leaf = dec.bag_with_vertices(&[1, 2, 3].map(VertexId).into()).unwrap();
        let bij_leaf = bough_bijection(&g, &dec, leaf, &b).unwrap();
        let far = bij_leaf[&dec.bags[leaf]
            .virtual_neighbours
            .keys()
            .next()
            .copied()
            .unwrap()]
            .clone();
        assert_eq!(far, e([14, 15]));
        assert_eq!(bij_leaf[&EdgeId(23)], e([23]));
    }

    #[test]
    fn bough_segments_are_contiguous_in_every_embedding() {
        let g = theta_of_triangles();
        let dec = tutte_decompose(&g).unwrap();
        let bonds = [e([12, 14, 15]), e([23, 14, 15]), e([12, 23]), e([23, 34, 15])];
        for rot in enumerate_planar_embeddings(&g, 10_000).unwrap() {
            let emb = EmbeddedGraph::new(g.clone(), rot).unwrap();
            for b in &bonds {
                assert!(is_bond(&g, b));
                let order = bond_cyclic_order(&emb, b).unwrap();
                for p in 0..dec.bags.len() {
                    for seg in bough_segments(&g, &dec, p, b).unwrap() {
                        assert!(is_cyclic_segment(&order, &seg));
                    }
                }
            }
        }
    }

    #[test]
    fn bough_ordering_reverses_under_reorientation() {
        let g = k4_minus_edge();
        let dec = tutte_decompose(&g).unwrap();
        let b = e([12, 14, 13]);
        for rot in enumerate_planar_embeddings(&g, 10_000).unwrap() {
            let emb = EmbeddedGraph::new(g.clone(), rot).unwrap();
            let fwd = bough_ordering(&emb, &dec, 1, &b).unwrap();
            let mut rev = bough_ordering(&emb.reorient(), &dec, 1, &b).unwrap();
            rev.reverse();
            assert_eq!(rotate_to_min(rev), fwd);
        }
    }

    #[test]
    fn flipping_the_hub_reverses_the_bough_ordering() {
        let g = theta_of_triangles();
        let dec = tutte_decompose(&g).unwrap();
        let hub = dec.bag_with_vertices(&[1, 3].map(VertexId).into()).unwrap();
        let b = e([12, 14, 15]);
        let mut by_torso: BTreeMap<String, Vec<Vec<EdgeId>>> = BTreeMap::new();
        for rot in enumerate_planar_embeddings(&g, 10_000).unwrap() {
            let emb = EmbeddedGraph::new(g.clone(), rot).unwrap();
            let torso_rot = format!("{:?}", torso_embedding(&emb, &dec, hub).unwrap().rotation());
            let ord = bough_ordering(&emb, &dec, hub, &b).unwrap();
            by_torso.entry(torso_rot).or_default().push(ord);
        }
        assert_eq!(by_torso.len(), 2, "the hub admits two orientations");
        let orders: Vec<Vec<Vec<EdgeId>>> = by_torso.into_values().collect();
        for ord in &orders[0] {
            for other in &orders[1] {
                let mut rev = other.clone();
                rev.reverse();
                assert_eq!(rotate_to_min(rev), ord.clone());
            }
        }
    }

    #[test]
    fn tuplets_are_totally_nested_on_all_fixtures() {
        for g in [k4_minus_edge(), theta(), theta_of_triangles(), triangle_of_blocks()] {
            let vs: Vec<VertexId> = g.vertices().collect();
            for (i, &x) in vs.iter().enumerate() {
                for &y in &vs[i + 1..] {
                    if is_tuplet(&g, x, y) {
                        assert!(totally_nested(&g, (x, y)).unwrap(), "tuplet ({x}, {y})");
                    }
                }
            }
        }
    }
}
