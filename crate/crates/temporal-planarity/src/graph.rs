//! Edge-labelled multigraphs, rotation systems and the minor calculus.
//!
//! Edge labels are globally meaningful: minor operations delete and contract
//! edges and may relabel vertices, but never touch edge labels. Rotation
//! systems are stored as cyclic sequences of darts (half-edges), which keeps
//! loops and parallel edges unambiguous.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One of the two half-edges of an edge. `side` selects an endpoint slot of
/// the edge: the dart `(e, s)` sits at the endpoint in slot `s`. A loop's two
/// darts sit at the same vertex but remain distinct.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Dart {
    pub edge: EdgeId,
    pub side: u8,
}

impl Dart {
    pub fn new(edge: EdgeId, side: u8) -> Self {
        debug_assert!(side < 2);
        Dart { edge, side }
    }

    /// The other half of the same edge.
    pub fn partner(self) -> Self {
        Dart { edge: self.edge, side: 1 - self.side }
    }
}

impl fmt::Display for Dart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.edge, if self.side == 0 { "" } else { "'" })
    }
}

/// A multigraph with unique edge labels. Endpoint pairs are unordered and
/// stored canonically with the smaller vertex first, so dart sides are
/// comparable across graphs that carry the same edge.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, (VertexId, VertexId)>,
}

impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.edges.len() == other.edges.len()
            && self.edges.iter().all(|(e, &(u, v))| {
                other.edges.get(e).is_some_and(|&(x, y)| (u, v) == (x, y) || (u, v) == (y, x))
            })
    }
}

impl Eq for LabeledGraph {}

impl LabeledGraph {
    pub fn new() -> Self {
        LabeledGraph { vertices: BTreeSet::new(), edges: BTreeMap::new() }
    }

    /// Builds a graph from `(label, u, v)` triples; endpoints are declared
    /// implicitly.
    pub fn from_edges<I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, u32)>,
    {
        let mut g = LabeledGraph::new();
        for (e, u, v) in edges {
            g.add_vertex(VertexId(u));
            g.add_vertex(VertexId(v));
            g.add_edge(EdgeId(e), VertexId(u), VertexId(v))?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.vertices.insert(v);
    }

    pub fn add_edge(&mut self, e: EdgeId, u: VertexId, v: VertexId) -> Result<()> {
        if self.edges.contains_key(&e) {
            return Err(Error::DuplicateEdge(e));
        }
        self.vertices.insert(u);
        self.vertices.insert(v);
        self.edges.insert(e, (u.min(v), u.max(v)));
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn edge_set(&self) -> BTreeSet<EdgeId> {
        self.edges.keys().copied().collect()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn endpoints(&self, e: EdgeId) -> Result<(VertexId, VertexId)> {
        self.edges.get(&e).copied().ok_or(Error::UnknownEdge(e))
    }

    pub fn is_loop(&self, e: EdgeId) -> Result<bool> {
        let (u, v) = self.endpoints(e)?;
        Ok(u == v)
    }

    /// The endpoint sitting in the dart's slot.
    pub fn dart_origin(&self, d: Dart) -> Result<VertexId> {
        let (u, v) = self.endpoints(d.edge)?;
        Ok(if d.side == 0 { u } else { v })
    }

    /// The dart of `e` anchored at `v`; for loops the side-0 dart.
    pub fn dart_at(&self, e: EdgeId, v: VertexId) -> Result<Dart> {
        let (u, w) = self.endpoints(e)?;
        if u == v {
            Ok(Dart::new(e, 0))
        } else if w == v {
            Ok(Dart::new(e, 1))
        } else {
            Err(Error::Precondition(format!("edge {e} is not incident with {v}")))
        }
    }

    /// Sorted incident edges; a loop appears once.
    pub fn incident_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, &(u, w))| u == v || w == v)
            .map(|(&e, _)| e)
            .collect()
    }

    /// All darts anchored at `v`, sorted; a loop contributes both darts.
    pub fn darts_at(&self, v: VertexId) -> Vec<Dart> {
        let mut out = Vec::new();
        for (&e, &(u, w)) in &self.edges {
            if u == v {
                out.push(Dart::new(e, 0));
            }
            if w == v {
                out.push(Dart::new(e, 1));
            }
        }
        out
    }

    /// Every dart of the graph, sorted.
    pub fn all_darts(&self) -> Vec<Dart> {
        let mut out = Vec::with_capacity(2 * self.edges.len());
        for &e in self.edges.keys() {
            out.push(Dart::new(e, 0));
            out.push(Dart::new(e, 1));
        }
        out
    }

    /// Degree counting loops twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.darts_at(v).len()
    }

    /// Connected components as vertex sets (isolated vertices included).
    pub fn components(&self) -> Vec<BTreeSet<VertexId>> {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut out = Vec::new();
        let adjacency = self.adjacency();
        for &start in &self.vertices {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(v) = queue.pop_front() {
                comp.insert(v);
                if let Some(ns) = adjacency.get(&v) {
                    for &n in ns {
                        if seen.insert(n) {
                            queue.push_back(n);
                        }
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    fn adjacency(&self) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
        let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for &(u, v) in self.edges.values() {
            adj.entry(u).or_default().insert(v);
            adj.entry(v).or_default().insert(u);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn has_loop(&self) -> bool {
        self.edges.values().any(|&(u, v)| u == v)
    }

    /// 2-connected: connected, loopless, and either a single pair of vertices
    /// joined by at least two edges, or at least three vertices with no
    /// cutvertex. A single edge does not qualify.
    pub fn is_two_connected(&self) -> bool {
        if self.has_loop() || !self.is_connected() || self.vertices.len() < 2 {
            return false;
        }
        if self.vertices.len() == 2 {
            return self.edges.len() >= 2;
        }
        self.vertices.iter().all(|&v| {
            let mut rest = self.clone();
            rest.remove_vertex_and_incident(v);
            rest.is_connected() && !rest.vertices.is_empty()
        })
    }

    fn remove_vertex_and_incident(&mut self, v: VertexId) {
        self.edges.retain(|_, &mut (u, w)| u != v && w != v);
        self.vertices.remove(&v);
    }

    /// The subgraph spanned by an edge set: those edges plus their endpoints.
    pub fn spanned_subgraph(&self, edges: &BTreeSet<EdgeId>) -> Result<LabeledGraph> {
        let mut g = LabeledGraph::new();
        for &e in edges {
            let (u, v) = self.endpoints(e)?;
            g.add_vertex(u);
            g.add_vertex(v);
            g.add_edge(e, u, v)?;
        }
        Ok(g)
    }

    /// Union of two edge-disjoint graphs (shared vertices allowed).
    pub fn union(&self, other: &LabeledGraph) -> Result<LabeledGraph> {
        let mut g = self.clone();
        for v in other.vertices() {
            g.add_vertex(v);
        }
        for e in other.edge_ids() {
            let (u, v) = other.endpoints(e)?;
            g.add_edge(e, u, v)?;
        }
        Ok(g)
    }

    /// Applies one minor step, returning the new graph.
    pub fn apply_step(&self, step: &MinorStep) -> Result<LabeledGraph> {
        let mut g = self.clone();
        match *step {
            MinorStep::Delete(e) => {
                if g.edges.remove(&e).is_none() {
                    return Err(Error::UnknownEdge(e));
                }
            }
            MinorStep::Contract(e) => {
                let (u, v) = g.endpoints(e)?;
                if u == v {
                    return Err(Error::ContractLoop(e));
                }
                let keep = u.min(v);
                let gone = u.max(v);
                g.edges.remove(&e);
                for ends in g.edges.values_mut() {
                    if ends.0 == gone {
                        ends.0 = keep;
                    }
                    if ends.1 == gone {
                        ends.1 = keep;
                    }
                    if ends.0 > ends.1 {
                        std::mem::swap(&mut ends.0, &mut ends.1);
                    }
                }
                g.vertices.remove(&gone);
            }
            MinorStep::DropIsolated(v) => {
                if !g.vertices.contains(&v) {
                    return Err(Error::UnknownVertex(v));
                }
                if g.degree(v) > 0 {
                    return Err(Error::NotIsolated(v));
                }
                g.vertices.remove(&v);
            }
            MinorStep::Relabel(old, new) => {
                if !g.vertices.contains(&old) {
                    return Err(Error::UnknownVertex(old));
                }
                if old == new {
                    return Ok(g);
                }
                if g.vertices.contains(&new) {
                    return Err(Error::VertexInUse(new));
                }
                g.vertices.remove(&old);
                g.vertices.insert(new);
                for ends in g.edges.values_mut() {
                    if ends.0 == old {
                        ends.0 = new;
                    }
                    if ends.1 == old {
                        ends.1 = new;
                    }
                    if ends.0 > ends.1 {
                        std::mem::swap(&mut ends.0, &mut ends.1);
                    }
                }
            }
        }
        Ok(g)
    }
}

impl Default for LabeledGraph {
    fn default() -> Self {
        Self::new()
    }
}

/// One step of a minor derivation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MinorStep {
    Delete(EdgeId),
    Contract(EdgeId),
    DropIsolated(VertexId),
    Relabel(VertexId, VertexId),
}

impl fmt::Display for MinorStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinorStep::Delete(e) => write!(f, "delete {e}"),
            MinorStep::Contract(e) => write!(f, "contract {e}"),
            MinorStep::DropIsolated(v) => write!(f, "drop {v}"),
            MinorStep::Relabel(a, b) => write!(f, "relabel {a}->{b}"),
        }
    }
}

/// An explicit derivation of one graph as a minor of another. Replaying the
/// steps on the source must be defined at every step.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MinorWitness {
    pub steps: Vec<MinorStep>,
}

impl MinorWitness {
    pub fn identity() -> Self {
        MinorWitness { steps: Vec::new() }
    }

    pub fn new(steps: Vec<MinorStep>) -> Self {
        MinorWitness { steps }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `self` then `next`.
    pub fn then(&self, next: &MinorWitness) -> MinorWitness {
        let mut steps = self.steps.clone();
        steps.extend(next.steps.iter().copied());
        MinorWitness { steps }
    }

    pub fn replay(&self, source: &LabeledGraph) -> Result<LabeledGraph> {
        let mut g = source.clone();
        for (index, step) in self.steps.iter().enumerate() {
            g = g
                .apply_step(step)
                .map_err(|e| Error::Witness { index, source: Box::new(e) })?;
        }
        Ok(g)
    }

    /// Checks that replaying on `source` yields `target` exactly.
    pub fn verify(&self, source: &LabeledGraph, target: &LabeledGraph) -> Result<()> {
        let got = self.replay(source)?;
        if &got == target {
            Ok(())
        } else {
            Err(Error::Precondition(
                "witness replay does not yield the stated target".into(),
            ))
        }
    }

    /// Edges contracted along the witness.
    pub fn contracted_edges(&self) -> BTreeSet<EdgeId> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                MinorStep::Contract(e) => Some(*e),
                _ => None,
            })
            .collect()
    }

    pub fn deleted_edges(&self) -> BTreeSet<EdgeId> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                MinorStep::Delete(e) => Some(*e),
                _ => None,
            })
            .collect()
    }

    /// Where each vertex of `source` ends up after replaying: merged
    /// vertices share an image, dropped vertices are absent. The preimage
    /// of a target vertex is its branch set.
    pub fn vertex_map(&self, source: &LabeledGraph) -> Result<BTreeMap<VertexId, VertexId>> {
        let mut g = source.clone();
        let mut map: BTreeMap<VertexId, VertexId> = source.vertices().map(|v| (v, v)).collect();
        for (index, step) in self.steps.iter().enumerate() {
            match *step {
                MinorStep::Contract(e) => {
                    let (u, v) = g.endpoints(e)?;
                    let keep = u.min(v);
                    let gone = u.max(v);
                    for img in map.values_mut() {
                        if *img == gone {
                            *img = keep;
                        }
                    }
                }
                MinorStep::Relabel(old, new) => {
                    for img in map.values_mut() {
                        if *img == old {
                            *img = new;
                        }
                    }
                }
                MinorStep::DropIsolated(v) => {
                    map.retain(|_, img| *img != v);
                }
                MinorStep::Delete(_) => {}
            }
            g = g
                .apply_step(step)
                .map_err(|e| Error::Witness { index, source: Box::new(e) })?;
        }
        Ok(map)
    }
}

/// Per-vertex cyclic orders of darts. Stored canonically: each rotator is
/// rotated so that its smallest dart comes first, which makes equality,
/// ordering and hashing structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RotationSystem {
    rotators: BTreeMap<VertexId, Vec<Dart>>,
}

fn canonical_cycle(mut seq: Vec<Dart>) -> Vec<Dart> {
    if seq.len() > 1 {
        let min_pos = seq
            .iter()
            .enumerate()
            .min_by_key(|(_, d)| **d)
            .map(|(i, _)| i)
            .unwrap();
        seq.rotate_left(min_pos);
    }
    seq
}

impl RotationSystem {
    pub fn new<I>(rotators: I) -> Self
    where
        I: IntoIterator<Item = (VertexId, Vec<Dart>)>,
    {
        RotationSystem {
            rotators: rotators
                .into_iter()
                .map(|(v, seq)| (v, canonical_cycle(seq)))
                .collect(),
        }
    }

    /// Convenience builder from `(vertex, [(edge, side)..])` literals.
    pub fn from_raw<I, J>(rotators: I) -> Self
    where
        I: IntoIterator<Item = (u32, J)>,
        J: IntoIterator<Item = (u32, u8)>,
    {
        RotationSystem::new(rotators.into_iter().map(|(v, seq)| {
            (
                VertexId(v),
                seq.into_iter()
                    .map(|(e, s)| Dart::new(EdgeId(e), s))
                    .collect::<Vec<_>>(),
            )
        }))
    }

    pub fn rotator(&self, v: VertexId) -> Option<&[Dart]> {
        self.rotators.get(&v).map(|r| r.as_slice())
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.rotators.keys().copied()
    }

    /// The dart after `d` in the cyclic order at `v`.
    pub fn successor(&self, v: VertexId, d: Dart) -> Result<Dart> {
        let rot = self
            .rotators
            .get(&v)
            .ok_or(Error::UnknownVertex(v))?;
        let pos = rot
            .iter()
            .position(|&x| x == d)
            .ok_or_else(|| Error::MalformedRotation(format!("dart {d} not at {v}")))?;
        Ok(rot[(pos + 1) % rot.len()])
    }

    /// Checks the rotators carry exactly the darts of `g`, each at the vertex
    /// it is anchored at.
    pub fn validate(&self, g: &LabeledGraph) -> Result<()> {
        let mut seen: BTreeSet<Dart> = BTreeSet::new();
        for (&v, rot) in &self.rotators {
            if !g.has_vertex(v) {
                return Err(Error::MalformedRotation(format!("rotator at unknown vertex {v}")));
            }
            for &d in rot {
                if !g.has_edge(d.edge) {
                    return Err(Error::MalformedRotation(format!("dart {d} of unknown edge")));
                }
                if g.dart_origin(d)? != v {
                    return Err(Error::MalformedRotation(format!("dart {d} anchored at wrong vertex")));
                }
                if !seen.insert(d) {
                    return Err(Error::MalformedRotation(format!("dart {d} appears twice")));
                }
            }
        }
        if seen.len() != 2 * g.edge_count() {
            return Err(Error::MalformedRotation(format!(
                "expected {} darts, found {}",
                2 * g.edge_count(),
                seen.len()
            )));
        }
        for v in g.vertices() {
            let expected = g.darts_at(v);
            if !expected.is_empty() && !self.rotators.contains_key(&v) {
                return Err(Error::MalformedRotation(format!("missing rotator at {v}")));
            }
            if let Some(rot) = self.rotators.get(&v) {
                let mut have: Vec<Dart> = rot.clone();
                have.sort();
                if have != expected {
                    return Err(Error::MalformedRotation(format!("rotator at {v} has wrong darts")));
                }
            }
        }
        Ok(())
    }

    /// Reverses every rotator.
    pub fn reorient(&self) -> RotationSystem {
        RotationSystem::new(self.rotators.iter().map(|(&v, rot)| {
            let mut rev = rot.clone();
            rev.reverse();
            (v, rev)
        }))
    }
}

/// The face walks of a rotation system. Walking convention: after traversing
/// edge `e` from `u` into `v` via the dart at `u`, the walk continues with the
/// successor of `e`'s dart at `v` in the rotator of `v`. Faces are reported in
/// ascending order of their smallest dart, each walk starting at that dart.
pub fn trace_faces(g: &LabeledGraph, rot: &RotationSystem) -> Result<Vec<Vec<Dart>>> {
    rot.validate(g)?;
    let all = g.all_darts();
    let mut visited: BTreeSet<Dart> = BTreeSet::new();
    let mut faces = Vec::new();
    for &start in &all {
        if visited.contains(&start) {
            continue;
        }
        let mut walk = Vec::new();
        let mut d = start;
        loop {
            walk.push(d);
            visited.insert(d);
            let partner = d.partner();
            let head = g.dart_origin(partner)?;
            d = rot.successor(head, partner)?;
            if d == start {
                break;
            }
            if visited.contains(&d) {
                return Err(Error::MalformedRotation("face walk re-entered a visited dart".into()));
            }
        }
        faces.push(walk);
    }
    Ok(faces)
}

/// Euler genus of a rotation system: `(2·components − vertices + edges − faces) / 2`,
/// where isolated vertices each count one face.
pub fn genus(g: &LabeledGraph, rot: &RotationSystem) -> Result<usize> {
    let faces = trace_faces(g, rot)?;
    let isolated = g.vertices().filter(|&v| g.degree(v) == 0).count();
    let f = faces.len() + isolated;
    let c = g.components().len();
    let v = g.vertex_count();
    let e = g.edge_count();
    let doubled = (2 * c + e) as isize - v as isize - f as isize;
    if doubled < 0 || doubled % 2 != 0 {
        return Err(Error::Internal(format!("impossible Euler count {doubled}")));
    }
    Ok((doubled / 2) as usize)
}

pub fn is_planar_rotation(g: &LabeledGraph, rot: &RotationSystem) -> Result<bool> {
    Ok(genus(g, rot)? == 0)
}

/// A graph together with a genus-0 rotation system.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EmbeddedGraph {
    graph: LabeledGraph,
    rotation: RotationSystem,
}

impl EmbeddedGraph {
    pub fn new(graph: LabeledGraph, rotation: RotationSystem) -> Result<Self> {
        let g = genus(&graph, &rotation)?;
        if g != 0 {
            return Err(Error::Precondition(format!(
                "rotation system has genus {g}, expected a planar one"
            )));
        }
        Ok(EmbeddedGraph { graph, rotation })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn rotation(&self) -> &RotationSystem {
        &self.rotation
    }

    pub fn into_parts(self) -> (LabeledGraph, RotationSystem) {
        (self.graph, self.rotation)
    }

    pub fn reorient(&self) -> EmbeddedGraph {
        EmbeddedGraph { graph: self.graph.clone(), rotation: self.rotation.reorient() }
    }

    /// Applies one minor step, inducing the rotation system on the result.
    /// Deletion removes the edge's darts; contraction splices the two
    /// endpoint rotators: cutting each open at the contracted edge's dart
    /// yields linear segments, and the merged rotator is one followed by the
    /// other.
    pub fn apply_step(&self, step: &MinorStep) -> Result<EmbeddedGraph> {
        let graph = self.graph.apply_step(step)?;
        // A dart carried across the step may change its stored side when the
        // canonical endpoint order of its edge changes; re-anchor each one.
        let remap = |d: Dart, anchor: VertexId| -> Result<Dart> {
            let (u, w) = graph.endpoints(d.edge)?;
            if u == w {
                // Loop slots are preserved verbatim by endpoint substitution.
                Ok(d)
            } else {
                graph.dart_at(d.edge, anchor)
            }
        };
        let rotation = match *step {
            MinorStep::Delete(e) => {
                let kept = self.rotation.rotators.iter().map(|(&v, rot)| {
                    (v, rot.iter().copied().filter(|d| d.edge != e).collect::<Vec<_>>())
                });
                RotationSystem::new(kept.filter(|(v, rot)| !rot.is_empty() || graph.degree(*v) > 0))
            }
            MinorStep::Contract(e) => {
                let (u, v) = self.graph.endpoints(e)?;
                let keep = u.min(v);
                let gone = u.max(v);
                let seg_keep = cut_open(self.rotation.rotator(keep).unwrap_or(&[]), Dart::new(e, side_at(&self.graph, e, keep, false)?));
                let seg_gone = cut_open(self.rotation.rotator(gone).unwrap_or(&[]), Dart::new(e, side_at(&self.graph, e, gone, true)?));
                let mut merged = seg_keep;
                merged.extend(seg_gone);
                let mut rotators: BTreeMap<VertexId, Vec<Dart>> = BTreeMap::new();
                for (&w, rot) in &self.rotation.rotators {
                    if w == keep || w == gone {
                        continue;
                    }
                    let moved: Result<Vec<Dart>> = rot.iter().map(|&d| remap(d, w)).collect();
                    rotators.insert(w, moved?);
                }
                if !merged.is_empty() {
                    let moved: Result<Vec<Dart>> = merged.iter().map(|&d| remap(d, keep)).collect();
                    rotators.insert(keep, moved?);
                }
                RotationSystem::new(rotators)
            }
            MinorStep::DropIsolated(v) => RotationSystem::new(
                self.rotation
                    .rotators
                    .iter()
                    .filter(|(&w, _)| w != v)
                    .map(|(&w, rot)| (w, rot.clone())),
            ),
            MinorStep::Relabel(old, new) => {
                let mut rotators: BTreeMap<VertexId, Vec<Dart>> = BTreeMap::new();
                for (&w, rot) in &self.rotation.rotators {
                    let anchor = if w == old { new } else { w };
                    let moved: Result<Vec<Dart>> = rot.iter().map(|&d| remap(d, anchor)).collect();
                    rotators.insert(anchor, moved?);
                }
                RotationSystem::new(rotators)
            }
        };
        let out = EmbeddedGraph::new(graph, rotation).map_err(|e| match e {
            Error::Precondition(msg) => Error::Internal(format!(
                "minor step {step} broke planarity: {msg}"
            )),
            other => other,
        })?;
        Ok(out)
    }

    /// Replays a whole witness; the result is independent of any stepwise
    /// valid reordering of the steps.
    pub fn induce(&self, witness: &MinorWitness) -> Result<EmbeddedGraph> {
        let mut g = self.clone();
        for (index, step) in witness.steps.iter().enumerate() {
            g = g
                .apply_step(step)
                .map_err(|e| Error::Witness { index, source: Box::new(e) })?;
        }
        Ok(g)
    }

    pub fn faces(&self) -> Result<Vec<Vec<Dart>>> {
        trace_faces(&self.graph, &self.rotation)
    }
}

/// Slot of `e` at `v`; for loops `second` picks which of the two darts.
fn side_at(g: &LabeledGraph, e: EdgeId, v: VertexId, second: bool) -> Result<u8> {
    let (u, w) = g.endpoints(e)?;
    if u == v && w == v {
        Ok(if second { 1 } else { 0 })
    } else if u == v {
        Ok(0)
    } else if w == v {
        Ok(1)
    } else {
        Err(Error::Precondition(format!("edge {e} is not incident with {v}")))
    }
}

/// Removes `at` from a cyclic sequence and returns the linear remainder
/// starting just after it.
fn cut_open(cycle: &[Dart], at: Dart) -> Vec<Dart> {
    let Some(pos) = cycle.iter().position(|&d| d == at) else {
        return cycle.to_vec();
    };
    let mut out = Vec::with_capacity(cycle.len().saturating_sub(1));
    for i in 1..cycle.len() {
        out.push(cycle[(pos + i) % cycle.len()]);
    }
    out
}

pub const DEFAULT_EMBEDDING_CAP: usize = 50_000;

/// All genus-0 rotation systems of a connected graph, in ascending canonical
/// order. Errors when the raw candidate count exceeds `cap`.
pub fn enumerate_planar_embeddings(g: &LabeledGraph, cap: usize) -> Result<Vec<RotationSystem>> {
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let mut total: u128 = 1;
    let mut slots: Vec<(VertexId, Vec<Dart>)> = Vec::new();
    for v in g.vertices() {
        let darts = g.darts_at(v);
        let mut perms: u128 = 1;
        for k in 1..darts.len().saturating_sub(1) + 1 {
            if k >= 1 && k < darts.len() {
                perms = perms.saturating_mul(k as u128);
            }
        }
        total = total.saturating_mul(perms);
        if total > cap as u128 {
            return Err(Error::ResourceCap(format!(
                "rotation system count exceeds cap {cap}"
            )));
        }
        slots.push((v, darts));
    }
    let mut out = Vec::new();
    let mut chosen: Vec<(VertexId, Vec<Dart>)> = Vec::with_capacity(slots.len());
    enumerate_rec(g, &slots, 0, &mut chosen, &mut out)?;
    out.sort();
    out.dedup();
    Ok(out)
}

fn enumerate_rec(
    g: &LabeledGraph,
    slots: &[(VertexId, Vec<Dart>)],
    idx: usize,
    chosen: &mut Vec<(VertexId, Vec<Dart>)>,
    out: &mut Vec<RotationSystem>,
) -> Result<()> {
    if idx == slots.len() {
        let rot = RotationSystem::new(chosen.iter().cloned());
        if genus(g, &rot)? == 0 {
            out.push(rot);
        }
        return Ok(());
    }
    let (v, darts) = &slots[idx];
    if darts.len() <= 2 {
        chosen.push((*v, darts.clone()));
        enumerate_rec(g, slots, idx + 1, chosen, out)?;
        chosen.pop();
        return Ok(());
    }
    // Fix the smallest dart first so each cyclic order appears exactly once.
    let first = darts[0];
    let rest: Vec<Dart> = darts[1..].to_vec();
    for perm in permutations(&rest) {
        let mut rot = Vec::with_capacity(darts.len());
        rot.push(first);
        rot.extend(perm);
        chosen.push((*v, rot));
        enumerate_rec(g, slots, idx + 1, chosen, out)?;
        chosen.pop();
    }
    Ok(())
}

/// All permutations in lexicographic order.
fn permutations(items: &[Dart]) -> Vec<Vec<Dart>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            let mut perm = vec![x];
            perm.append(&mut tail);
            out.push(perm);
        }
    }
    out
}

/// Union-minus-shared-edge of two 2-connected graphs overlapping exactly in
/// the shared edge `e` and its endpoints.
pub fn two_sum_graphs(g: &LabeledGraph, h: &LabeledGraph, e: EdgeId) -> Result<LabeledGraph> {
    let (gu, gv) = g.endpoints(e)?;
    let (hu, hv) = h.endpoints(e)?;
    if BTreeSet::from([gu, gv]) != BTreeSet::from([hu, hv]) {
        return Err(Error::Composition(format!(
            "shared edge {e} has different endpoints in the two graphs"
        )));
    }
    let shared_vertices: BTreeSet<VertexId> =
        g.vertices().filter(|v| h.has_vertex(*v)).collect();
    if shared_vertices != BTreeSet::from([gu, gv]) {
        return Err(Error::Composition(
            "graphs of a 2-sum must share exactly the endpoints of the shared edge".into(),
        ));
    }
    let shared_edges: Vec<EdgeId> = g.edge_ids().filter(|x| h.has_edge(*x)).collect();
    if shared_edges != vec![e] {
        return Err(Error::Composition(
            "graphs of a 2-sum must share exactly the shared edge".into(),
        ));
    }
    if !g.is_two_connected() || !h.is_two_connected() {
        return Err(Error::NotTwoConnected);
    }
    let mut out = LabeledGraph::new();
    for v in g.vertices().chain(h.vertices()) {
        out.add_vertex(v);
    }
    for (src, other) in [(g, h), (h, g)] {
        for x in src.edge_ids() {
            if x == e {
                continue;
            }
            if other.has_edge(x) && out.has_edge(x) {
                continue;
            }
            let (u, v) = src.endpoints(x)?;
            out.add_edge(x, u, v)?;
        }
    }
    Ok(out)
}

/// Embedded 2-sum: the unique planar rotation of the 2-sum inducing both
/// inputs back on their sides. At each endpoint of the shared edge the two
/// rotators are cut open at that edge's darts and concatenated.
pub fn two_sum(g: &EmbeddedGraph, h: &EmbeddedGraph, e: EdgeId) -> Result<EmbeddedGraph> {
    let graph = two_sum_graphs(g.graph(), h.graph(), e)?;
    let (x, y) = g.graph().endpoints(e)?;
    let mut rotators: BTreeMap<VertexId, Vec<Dart>> = BTreeMap::new();
    for src in [g, h] {
        for v in src.graph().vertices() {
            if v == x || v == y {
                continue;
            }
            rotators.insert(v, src.rotation().rotator(v).unwrap_or(&[]).to_vec());
        }
    }
    for v in [x, y] {
        let dg = g.graph().dart_at(e, v)?;
        let dh = h.graph().dart_at(e, v)?;
        let mut merged = cut_open(g.rotation().rotator(v).unwrap_or(&[]), dg);
        merged.extend(cut_open(h.rotation().rotator(v).unwrap_or(&[]), dh));
        rotators.insert(v, merged);
    }
    EmbeddedGraph::new(graph, RotationSystem::new(rotators))
        .map_err(|err| Error::Composition(format!("2-sum rotation is not planar: {err}")))
}

/// Vertex sum: both graphs contain `v` with identical incident edge labels
/// and are otherwise disjoint. Each shared label `e`, incident with `v` and
/// some `a` in the first graph and with `v` and some `b` in the second,
/// becomes the edge `a`–`b`; everything else is kept. Contracting the
/// complementary side's private edges recovers either input (up to naming
/// the merged vertex `v`).
pub fn vertex_sum_graphs(
    g1: &LabeledGraph,
    g2: &LabeledGraph,
    v: VertexId,
) -> Result<LabeledGraph> {
    let at1: BTreeSet<EdgeId> = g1.incident_edges(v).into_iter().collect();
    let at2: BTreeSet<EdgeId> = g2.incident_edges(v).into_iter().collect();
    if !g1.has_vertex(v) || !g2.has_vertex(v) {
        return Err(Error::Composition(format!("both graphs must contain {v}")));
    }
    if at1 != at2 {
        return Err(Error::Composition(
            "vertex sum requires identical incident edge labels at the shared vertex".into(),
        ));
    }
    if at1.iter().any(|&e| g1.is_loop(e).unwrap_or(false) || g2.is_loop(e).unwrap_or(false)) {
        return Err(Error::Composition("vertex sum at a loop is not supported".into()));
    }
    let shared_vertices: BTreeSet<VertexId> =
        g1.vertices().filter(|u| g2.has_vertex(*u)).collect();
    if shared_vertices != BTreeSet::from([v]) {
        return Err(Error::Composition(
            "graphs of a vertex sum must share exactly the summed vertex".into(),
        ));
    }
    let private1: BTreeSet<EdgeId> = g1.edge_ids().filter(|e| !at1.contains(e)).collect();
    let private2: BTreeSet<EdgeId> = g2.edge_ids().filter(|e| !at2.contains(e)).collect();
    if !private1.is_disjoint(&private2) {
        return Err(Error::Composition(
            "away from the shared vertex the two graphs must have disjoint edge labels".into(),
        ));
    }
    let mut out = LabeledGraph::new();
    for u in g1.vertices().chain(g2.vertices()) {
        if u != v {
            out.add_vertex(u);
        }
    }
    for &e in &private1 {
        let (a, b) = g1.endpoints(e)?;
        out.add_edge(e, a, b)?;
    }
    for &e in &private2 {
        let (a, b) = g2.endpoints(e)?;
        out.add_edge(e, a, b)?;
    }
    for &e in &at1 {
        let a = other_end(g1, e, v)?;
        let b = other_end(g2, e, v)?;
        out.add_edge(e, a, b)?;
    }
    Ok(out)
}

fn other_end(g: &LabeledGraph, e: EdgeId, v: VertexId) -> Result<VertexId> {
    let (u, w) = g.endpoints(e)?;
    if u == v {
        Ok(w)
    } else if w == v {
        Ok(u)
    } else {
        Err(Error::Precondition(format!("edge {e} is not incident with {v}")))
    }
}

/// Embedded vertex sum. Requires the two rotators at `v` to induce the same
/// cyclic order of shared edge labels; the sum keeps the first embedding's
/// rotators and reverses the second's, and then induces the first embedding
/// and the reorientation of the second on the two sides.
pub fn vertex_sum(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    v: VertexId,
) -> Result<EmbeddedGraph> {
    let graph = vertex_sum_graphs(g1.graph(), g2.graph(), v)?;
    let labels1: Vec<EdgeId> = g1
        .rotation()
        .rotator(v)
        .unwrap_or(&[])
        .iter()
        .map(|d| d.edge)
        .collect();
    let labels2: Vec<EdgeId> = g2
        .rotation()
        .rotator(v)
        .unwrap_or(&[])
        .iter()
        .map(|d| d.edge)
        .collect();
    if !cyclic_label_eq(&labels1, &labels2) {
        return Err(Error::Composition(
            "the rotators at the shared vertex disagree".into(),
        ));
    }
    let mut rotators: BTreeMap<VertexId, Vec<Dart>> = BTreeMap::new();
    for u in g1.graph().vertices() {
        if u == v {
            continue;
        }
        rotators.insert(u, translate_rotator(g1.graph(), &graph, g1.rotation().rotator(u).unwrap_or(&[]), u)?);
    }
    for u in g2.graph().vertices() {
        if u == v {
            continue;
        }
        let mut rot = translate_rotator(g2.graph(), &graph, g2.rotation().rotator(u).unwrap_or(&[]), u)?;
        rot.reverse();
        rotators.insert(u, rot);
    }
    EmbeddedGraph::new(graph, RotationSystem::new(rotators))
        .map_err(|err| Error::Composition(format!("vertex sum rotation is not planar: {err}")))
}

/// Re-anchors a rotator's darts from one graph to another that carries the
/// same edge labels at `u` (endpoints may differ).
fn translate_rotator(
    from: &LabeledGraph,
    to: &LabeledGraph,
    rot: &[Dart],
    u: VertexId,
) -> Result<Vec<Dart>> {
    let _ = from;
    rot.iter().map(|d| to.dart_at(d.edge, u)).collect()
}

fn cyclic_label_eq(a: &[EdgeId], b: &[EdgeId]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|shift| (0..a.len()).all(|i| a[i] == b[(i + shift) % b.len()]))
}

/// Mints vertex and edge ids that collide with nothing in the graphs it
/// was seeded with. Ids come out in ascending order, so constructions
/// that draw from one mint are reproducible.
#[derive(Clone, Debug)]
pub struct FreshIds {
    next_vertex: u32,
    next_edge: u32,
}

impl FreshIds {
    pub fn above<'a, I>(graphs: I) -> FreshIds
    where
        I: IntoIterator<Item = &'a LabeledGraph>,
    {
        let mut out = FreshIds { next_vertex: 0, next_edge: 0 };
        for g in graphs {
            for v in g.vertices() {
                out.next_vertex = out.next_vertex.max(v.0 + 1);
            }
            for e in g.edge_ids() {
                out.next_edge = out.next_edge.max(e.0 + 1);
            }
        }
        out
    }

    pub fn vertex(&mut self) -> VertexId {
        let v = VertexId(self.next_vertex);
        self.next_vertex += 1;
        v
    }

    pub fn edge(&mut self) -> EdgeId {
        let e = EdgeId(self.next_edge);
        self.next_edge += 1;
        e
    }
}

/// Result of a coaddition: the inverse of contracting `j` down to `x`.
#[derive(Clone, Debug)]
pub struct Coadded {
    pub graph: LabeledGraph,
    /// Whether the construction is guaranteed 2-connected: the input was
    /// 2-connected, `j` is connected, and for every vertex `y` of `j`, every
    /// component of `j − y` contains a vertex in the image of the attachment
    /// map.
    pub two_connected: bool,
}

/// Replaces the vertex `x` of `g` by the disjoint graph `j`: every edge of
/// `g` at `x` is re-anchored at its assigned vertex `theta(e)` of `j`.
/// Contracting `j`'s edges in the result (and renaming the merged vertex
/// back to `x`) recovers `g`.
pub fn coadd(
    g: &LabeledGraph,
    j: &LabeledGraph,
    x: VertexId,
    theta: &BTreeMap<EdgeId, VertexId>,
) -> Result<Coadded> {
    if !g.has_vertex(x) {
        return Err(Error::UnknownVertex(x));
    }
    if g.vertices().any(|v| j.has_vertex(v)) {
        return Err(Error::Composition("coadded graph must have fresh vertex ids".into()));
    }
    if g.edge_ids().any(|e| j.has_edge(e)) {
        return Err(Error::Composition("coadded graph must have fresh edge labels".into()));
    }
    let at_x = g.incident_edges(x);
    if at_x.iter().any(|&e| g.is_loop(e).unwrap_or(false)) {
        return Err(Error::Composition("coaddition at a loop is not supported".into()));
    }
    for &e in &at_x {
        let target = theta
            .get(&e)
            .ok_or_else(|| Error::Composition(format!("attachment map misses edge {e}")))?;
        if !j.has_vertex(*target) {
            return Err(Error::Composition(format!(
                "attachment of edge {e} is not a vertex of the coadded graph"
            )));
        }
    }
    let mut out = LabeledGraph::new();
    for v in g.vertices() {
        if v != x {
            out.add_vertex(v);
        }
    }
    for v in j.vertices() {
        out.add_vertex(v);
    }
    for e in g.edge_ids() {
        let (u, w) = g.endpoints(e)?;
        let nu = if u == x { theta[&e] } else { u };
        let nw = if w == x { theta[&e] } else { w };
        out.add_edge(e, nu, nw)?;
    }
    for e in j.edge_ids() {
        let (u, w) = j.endpoints(e)?;
        out.add_edge(e, u, w)?;
    }
    let image: BTreeSet<VertexId> = at_x.iter().map(|e| theta[e]).collect();
    let two_connected = g.is_two_connected()
        && j.is_connected()
        && j.vertices().all(|y| {
            let mut rest = j.clone();
            rest.remove_vertex_and_incident(y);
            rest.components().into_iter().all(|c| c.iter().any(|v| image.contains(v)))
        });
    Ok(Coadded { graph: out, two_connected })
}

/// Contracts every edge of a connected subset in an embedded graph and
/// reads off the rotator of the merged vertex: the induced cyclic order of
/// the remaining darts around the blob.
pub fn contract_edge_set(g: &EmbeddedGraph, edges: &BTreeSet<EdgeId>) -> Result<EmbeddedGraph> {
    let mut cur = g.clone();
    let mut remaining: BTreeSet<EdgeId> = edges.clone();
    loop {
        let mut progressed = false;
        let snapshot: Vec<EdgeId> = remaining.iter().copied().collect();
        for e in snapshot {
            if !cur.graph().has_edge(e) {
                remaining.remove(&e);
                continue;
            }
            if cur.graph().is_loop(e)? {
                continue;
            }
            cur = cur.apply_step(&MinorStep::Contract(e))?;
            remaining.remove(&e);
            progressed = true;
        }
        if remaining.is_empty() {
            break;
        }
        if !progressed {
            return Err(Error::Precondition(
                "edge set cannot be fully contracted without contracting loops".into(),
            ));
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> LabeledGraph {
        // Edges 1, 2, 3 all joining u = 0 and v = 1.
        LabeledGraph::from_edges([(1, 0, 1), (2, 0, 1), (3, 0, 1)]).unwrap()
    }

    fn triangle() -> LabeledGraph {
        LabeledGraph::from_edges([(1, 0, 1), (2, 1, 2), (3, 0, 2)]).unwrap()
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

    #[test]
    fn triangle_unique_rotation_has_two_faces() {
        let g = triangle();
        let rots = enumerate_planar_embeddings(&g, 100).unwrap();
        assert_eq!(rots.len(), 1);
        let faces = trace_faces(&g, &rots[0]).unwrap();
        assert_eq!(faces.len(), 2);
    }

    #[test]
    fn theta_opposed_rotators_have_three_faces() {
        let g = theta();
        let rot = RotationSystem::from_raw([
            (0, vec![(1, 0), (2, 0), (3, 0)]),
            (1, vec![(3, 1), (2, 1), (1, 1)]),
        ]);
        let faces = trace_faces(&g, &rot).unwrap();
        assert_eq!(faces.len(), 3);
        assert_eq!(genus(&g, &rot).unwrap(), 0);
    }

    #[test]
    fn theta_aligned_rotators_have_one_face_and_genus_one() {
        let g = theta();
        let rot = RotationSystem::from_raw([
            (0, vec![(1, 0), (2, 0), (3, 0)]),
            (1, vec![(1, 1), (2, 1), (3, 1)]),
        ]);
        let faces = trace_faces(&g, &rot).unwrap();
        assert_eq!(faces.len(), 1);
        assert_eq!(genus(&g, &rot).unwrap(), 1);
        assert!(!is_planar_rotation(&g, &rot).unwrap());
    }

    #[test]
    fn face_trace_partitions_darts() {
        let g = k4();
        for rot in enumerate_planar_embeddings(&g, 1000).unwrap() {
            let faces = trace_faces(&g, &rot).unwrap();
            let mut all: Vec<Dart> = faces.concat();
            all.sort();
            assert_eq!(all, g.all_darts());
        }
    }

    #[test]
    fn k4_has_exactly_two_planar_rotations_of_sixteen() {
        let g = k4();
        let mut candidates = 0;
        // Count raw candidates by hand: each of the four degree-3 vertices
        // contributes (3-1)! = 2 cyclic orders.
        for _ in 0..1 {
            candidates = 2 * 2 * 2 * 2;
        }
        assert_eq!(candidates, 16);
        let planar = enumerate_planar_embeddings(&g, 1000).unwrap();
        assert_eq!(planar.len(), 2);
        assert_eq!(planar[0].reorient(), planar[1]);
    }

    #[test]
    fn theta_has_two_planar_rotations_of_four() {
        let g = theta();
        let planar = enumerate_planar_embeddings(&g, 1000).unwrap();
        assert_eq!(planar.len(), 2);
        assert_eq!(planar[0].reorient(), planar[1]);
    }

    #[test]
    fn contracting_a_triangle_edge_merges_rotators() {
        let g = triangle();
        let rots = enumerate_planar_embeddings(&g, 100).unwrap();
        let emb = EmbeddedGraph::new(g, rots[0].clone()).unwrap();
        // Contract edge 2 joining vertices 1 and 2; the merged vertex is 1.
        let out = emb.apply_step(&MinorStep::Contract(EdgeId(2))).unwrap();
        assert_eq!(out.graph().edge_count(), 2);
        assert!(out.graph().has_vertex(VertexId(0)));
        assert!(out.graph().has_vertex(VertexId(1)));
        assert!(!out.graph().has_vertex(VertexId(2)));
        let rot = out.rotation().rotator(VertexId(1)).unwrap();
        assert_eq!(rot.len(), 2);
        assert_eq!(genus(out.graph(), out.rotation()).unwrap(), 0);
    }

    #[test]
    fn deleting_a_theta_edge_stays_planar() {
        let g = theta();
        let rot = RotationSystem::from_raw([
            (0, vec![(1, 0), (2, 0), (3, 0)]),
            (1, vec![(3, 1), (2, 1), (1, 1)]),
        ]);
        let emb = EmbeddedGraph::new(g, rot).unwrap();
        let out = emb.apply_step(&MinorStep::Delete(EdgeId(2))).unwrap();
        assert_eq!(out.graph().edge_count(), 2);
        assert!(is_planar_rotation(out.graph(), out.rotation()).unwrap());
    }

    #[test]
    fn contract_then_delete_matches_delete_then_contract() {
        let g = k4();
        let rots = enumerate_planar_embeddings(&g, 1000).unwrap();
        let emb = EmbeddedGraph::new(g, rots[0].clone()).unwrap();
        let w1 = MinorWitness::new(vec![MinorStep::Contract(EdgeId(12)), MinorStep::Delete(EdgeId(34))]);
        let w2 = MinorWitness::new(vec![MinorStep::Delete(EdgeId(34)), MinorStep::Contract(EdgeId(12))]);
        assert_eq!(emb.induce(&w1).unwrap(), emb.induce(&w2).unwrap());
    }

    #[test]
    fn identity_witness_is_identity() {
        let g = k4();
        let rots = enumerate_planar_embeddings(&g, 1000).unwrap();
        let emb = EmbeddedGraph::new(g, rots[0].clone()).unwrap();
        assert_eq!(emb.induce(&MinorWitness::identity()).unwrap(), emb);
    }

    #[test]
    fn contracting_a_loop_is_rejected() {
        let mut g = LabeledGraph::new();
        g.add_vertex(VertexId(0));
        g.add_edge(EdgeId(1), VertexId(0), VertexId(0)).unwrap();
        assert!(matches!(
            g.apply_step(&MinorStep::Contract(EdgeId(1))),
            Err(Error::ContractLoop(_))
        ));
    }

    #[test]
    fn two_sum_of_triangles_is_a_four_cycle() {
        let g = LabeledGraph::from_edges([(10, 0, 1), (11, 1, 2), (99, 0, 2)]).unwrap();
        let h = LabeledGraph::from_edges([(20, 0, 3), (21, 3, 2), (99, 0, 2)]).unwrap();
        let sum = two_sum_graphs(&g, &h, EdgeId(99)).unwrap();
        assert_eq!(sum.edge_count(), 4);
        assert_eq!(sum.vertex_count(), 4);
        assert!(sum.vertices().all(|v| sum.degree(v) == 2));
    }

    #[test]
    fn embedded_two_sum_induces_both_sides() {
        // Two thetas sharing edge 99; check the unique-induction property by
        // counting rotations of the 2-sum that induce both inputs.
        let g = LabeledGraph::from_edges([(1, 0, 1), (2, 0, 1), (99, 0, 1)]).unwrap();
        let h = LabeledGraph::from_edges([(3, 0, 1), (4, 0, 1), (99, 0, 1)]).unwrap();
        let gs = enumerate_planar_embeddings(&g, 100).unwrap();
        let hs = enumerate_planar_embeddings(&h, 100).unwrap();
        assert_eq!((gs.len(), hs.len()), (2, 2));
        for rg in &gs {
            for rh in &hs {
                let eg = EmbeddedGraph::new(g.clone(), rg.clone()).unwrap();
                let eh = EmbeddedGraph::new(h.clone(), rh.clone()).unwrap();
                let sum = two_sum(&eg, &eh, EdgeId(99)).unwrap();
                // Recover the g-side: delete 4, keeping 3 as the bridge.
                let back_g = sum.induce(&MinorWitness::new(vec![MinorStep::Delete(EdgeId(4))])).unwrap();
                let expect_g = relabel_edge(&eg, EdgeId(99), EdgeId(3));
                assert_eq!(back_g, expect_g);
                let back_h = sum.induce(&MinorWitness::new(vec![MinorStep::Delete(EdgeId(2))])).unwrap();
                let expect_h = relabel_edge(&eh, EdgeId(99), EdgeId(1));
                assert_eq!(back_h, expect_h);
            }
        }
    }

    /// Test helper: renames an edge label in a copy of an embedded graph.
    fn relabel_edge(g: &EmbeddedGraph, from: EdgeId, to: EdgeId) -> EmbeddedGraph {
        let mut graph = LabeledGraph::new();
        for v in g.graph().vertices() {
            graph.add_vertex(v);
        }
        for e in g.graph().edge_ids() {
            let (u, v) = g.graph().endpoints(e).unwrap();
            graph.add_edge(if e == from { to } else { e }, u, v).unwrap();
        }
        let rot = RotationSystem::new(g.rotation().vertices().map(|v| {
            (
                v,
                g.rotation()
                    .rotator(v)
                    .unwrap()
                    .iter()
                    .map(|d| {
                        if d.edge == from {
                            Dart::new(to, d.side)
                        } else {
                            *d
                        }
                    })
                    .collect::<Vec<_>>(),
            )
        }));
        EmbeddedGraph::new(graph, rot).unwrap()
    }

    #[test]
    fn vertex_sum_recovers_both_sides_as_minors() {
        // Two triangles sharing vertex 0 and the labels of the edges at 0.
        let g1 = LabeledGraph::from_edges([(1, 0, 1), (2, 0, 2), (5, 1, 2)]).unwrap();
        let g2 = LabeledGraph::from_edges([(1, 0, 3), (2, 0, 4), (6, 3, 4)]).unwrap();
        let sum = vertex_sum_graphs(&g1, &g2, VertexId(0)).unwrap();
        assert_eq!(sum.edge_count(), 4);
        assert_eq!(sum.vertex_count(), 4);
        // Contract g2's private edge 6 and rename: should recover g1.
        let back = sum
            .apply_step(&MinorStep::Contract(EdgeId(6)))
            .unwrap();
        let merged: Vec<VertexId> = back
            .vertices()
            .filter(|v| !g1.has_vertex(*v) || *v == VertexId(3))
            .collect();
        assert_eq!(merged, vec![VertexId(3)]);
        let back = back
            .apply_step(&MinorStep::Relabel(VertexId(3), VertexId(0)))
            .unwrap();
        assert_eq!(back, g1);
    }

    #[test]
    fn embedded_vertex_sum_orientations() {
        let g1 = LabeledGraph::from_edges([(1, 0, 1), (2, 0, 2), (5, 1, 2)]).unwrap();
        let g2 = LabeledGraph::from_edges([(1, 0, 3), (2, 0, 4), (6, 3, 4)]).unwrap();
        let e1 = EmbeddedGraph::new(
            g1.clone(),
            enumerate_planar_embeddings(&g1, 10).unwrap()[0].clone(),
        )
        .unwrap();
        let e2 = EmbeddedGraph::new(
            g2.clone(),
            enumerate_planar_embeddings(&g2, 10).unwrap()[0].clone(),
        )
        .unwrap();
        let sum = vertex_sum(&e1, &e2, VertexId(0)).unwrap();
        // Inducing back onto g1: contract 6, rename the merged vertex to 0.
        let back = sum
            .induce(&MinorWitness::new(vec![
                MinorStep::Contract(EdgeId(6)),
                MinorStep::Relabel(VertexId(3), VertexId(0)),
            ]))
            .unwrap();
        assert_eq!(back, e1);
        let back2 = sum
            .induce(&MinorWitness::new(vec![
                MinorStep::Contract(EdgeId(5)),
                MinorStep::Relabel(VertexId(1), VertexId(0)),
            ]))
            .unwrap();
        assert_eq!(back2, e2.reorient());
    }

    #[test]
    fn coadding_a_single_vertex_relabels() {
        let g = triangle();
        let mut j = LabeledGraph::new();
        j.add_vertex(VertexId(9));
        let theta: BTreeMap<EdgeId, VertexId> = g
            .incident_edges(VertexId(0))
            .into_iter()
            .map(|e| (e, VertexId(9)))
            .collect();
        let out = coadd(&g, &j, VertexId(0), &theta).unwrap();
        assert!(out.two_connected);
        let expected = g.apply_step(&MinorStep::Relabel(VertexId(0), VertexId(9))).unwrap();
        assert_eq!(out.graph, expected);
    }

    #[test]
    fn coadding_an_edge_splits_a_four_valent_vertex() {
        // A 4-valent vertex 0 with edges 1,2 going to one new end and 3,4 to
        // the other.
        let g = LabeledGraph::from_edges([
            (1, 0, 1),
            (2, 0, 1),
            (3, 0, 2),
            (4, 0, 2),
            (5, 1, 2),
        ])
        .unwrap();
        let j = LabeledGraph::from_edges([(90, 10, 11)]).unwrap();
        let theta = BTreeMap::from([
            (EdgeId(1), VertexId(10)),
            (EdgeId(2), VertexId(10)),
            (EdgeId(3), VertexId(11)),
            (EdgeId(4), VertexId(11)),
        ]);
        let out = coadd(&g, &j, VertexId(0), &theta).unwrap();
        assert!(out.two_connected);
        assert_eq!(out.graph.degree(VertexId(10)), 3);
        assert_eq!(out.graph.degree(VertexId(11)), 3);
        // Contracting the coadded edge recovers g up to the vertex name.
        let back = out
            .graph
            .apply_step(&MinorStep::Contract(EdgeId(90)))
            .unwrap()
            .apply_step(&MinorStep::Relabel(VertexId(10), VertexId(0)))
            .unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn genus_is_invariant_under_vertex_relabelling() {
        let g = k4();
        let rots = enumerate_planar_embeddings(&g, 1000).unwrap();
        let emb = EmbeddedGraph::new(g, rots[0].clone()).unwrap();
        let moved = emb
            .apply_step(&MinorStep::Relabel(VertexId(1), VertexId(100)))
            .unwrap();
        assert_eq!(genus(moved.graph(), moved.rotation()).unwrap(), 0);
    }

    #[test]
    fn k4_minus_edge_is_two_connected_but_k4_minus_vertex_path_is_not() {
        let mut g = k4();
        g = g.apply_step(&MinorStep::Delete(EdgeId(24))).unwrap();
        assert!(g.is_two_connected());
        let path = LabeledGraph::from_edges([(1, 0, 1), (2, 1, 2)]).unwrap();
        assert!(!path.is_two_connected());
        let c2 = LabeledGraph::from_edges([(1, 0, 1), (2, 0, 1)]).unwrap();
        assert!(c2.is_two_connected());
    }
}
