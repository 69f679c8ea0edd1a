//! Exact ground truth for desk-sized instances: enumerate the planar
//! rotation systems of every entry, link consecutive layers through the
//! minor witnesses, and read off embeddability, witnesses, and counts.
//! Exponential on purpose — caps turn blow-ups into resource errors,
//! never wrong answers.

use std::collections::BTreeMap;

use crate::graph::{
    enumerate_planar_embeddings, EmbeddedGraph, LabeledGraph, MinorWitness, RotationSystem,
};
use crate::lists::{self, block_sign, Blocks, EmbeddingList, Sign};
use crate::temporal::{Direction, TemporalSequence};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_edges: usize,
    pub max_embeddings: usize,
    pub max_chains: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { max_edges: 12, max_embeddings: 50_000, max_chains: 500_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub embeddable: bool,
    /// One rotation system per entry, forming a compatible chain (and
    /// satisfying the lists when any were given).
    pub witness: Option<Vec<RotationSystem>>,
    /// Number of simultaneous embeddings, restricted to list-satisfying
    /// ones when lists were given.
    pub counted: Option<u64>,
}

fn rotation_key(r: &RotationSystem) -> String {
    format!("{r:?}")
}

fn layer_embeddings(seq: &TemporalSequence, caps: &OracleCaps) -> Result<Vec<Vec<RotationSystem>>> {
    seq.graphs()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            if g.edge_count() > caps.max_edges {
                return Err(Error::ResourceCap(format!(
                    "entry {i} has {} edges, cap is {}",
                    g.edge_count(),
                    caps.max_edges
                )));
            }
            enumerate_planar_embeddings(g, caps.max_embeddings)
        })
        .collect()
}

/// adjacency[i][k] = indices in layer i+1 compatible with embedding k of
/// layer i. A downward witness gives each embedding exactly one image;
/// an upward witness links every inducing successor back.
fn adjacency(
    seq: &TemporalSequence,
    layers: &[Vec<RotationSystem>],
) -> Result<Vec<Vec<Vec<usize>>>> {
    let index_of: Vec<BTreeMap<String, usize>> = layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .enumerate()
                .map(|(j, r)| (rotation_key(r), j))
                .collect()
        })
        .collect();
    let mut adj = Vec::new();
    for (i, step) in seq.steps().iter().enumerate() {
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); layers[i].len()];
        match step.direction {
            Direction::Down => {
                for (k, rot) in layers[i].iter().enumerate() {
                    let key = induced_key(seq.graph(i), rot, &step.witness)?;
                    let j = index_of[i + 1].get(&key).ok_or_else(|| {
                        Error::Internal("induced embedding missing from the next layer".into())
                    })?;
                    out[k].push(*j);
                }
            }
            Direction::Up => {
                for (j, rot) in layers[i + 1].iter().enumerate() {
                    let key = induced_key(seq.graph(i + 1), rot, &step.witness)?;
                    let k = index_of[i].get(&key).ok_or_else(|| {
                        Error::Internal("induced embedding missing from the previous layer".into())
                    })?;
                    out[*k].push(j);
                }
            }
        }
        adj.push(out);
    }
    Ok(adj)
}

fn induced_key(g: &LabeledGraph, rot: &RotationSystem, w: &MinorWitness) -> Result<String> {
    let embedded = EmbeddedGraph::new(g.clone(), rot.clone())?;
    Ok(rotation_key(embedded.induce(w)?.rotation()))
}

/// Decide simultaneous (list-)embeddability exactly.
pub fn simultaneous_oracle(
    seq: &TemporalSequence,
    given_lists: &[EmbeddingList],
    caps: &OracleCaps,
) -> Result<OracleVerdict> {
    let layers = layer_embeddings(seq, caps)?;
    let adj = adjacency(seq, &layers)?;
    let n = layers.len();

    if given_lists.is_empty() {
        // pure reachability with a count DP
        let mut count: Vec<u64> = vec![1; layers[0].len()];
        let mut back: Vec<Vec<Option<usize>>> = vec![vec![None; layers[0].len()]];
        for i in 0..n - 1 {
            let mut next_count = vec![0u64; layers[i + 1].len()];
            let mut next_back = vec![None; layers[i + 1].len()];
            for (k, js) in adj[i].iter().enumerate() {
                if count[k] == 0 {
                    continue;
                }
                for &j in js {
                    next_count[j] = next_count[j].checked_add(count[k]).ok_or_else(|| {
                        Error::ResourceCap("embedding count overflows".into())
                    })?;
                    if next_back[j].is_none() {
                        next_back[j] = Some(k);
                    }
                }
            }
            count = next_count;
            back.push(next_back);
        }
        let total: u64 = count.iter().try_fold(0u64, |acc, &c| {
            acc.checked_add(c)
                .ok_or_else(|| Error::ResourceCap("embedding count overflows".into()))
        })?;
        let witness = count
            .iter()
            .position(|&c| c > 0)
            .map(|last| reconstruct_chain(&layers, &back, last));
        return Ok(OracleVerdict { embeddable: total > 0, witness, counted: Some(total) });
    }

    // with lists: enumerate complete chains and keep the satisfying ones
    let blocks = Blocks::of(seq)?;
    for l in given_lists {
        lists::check_same_blocks(l, &blocks)?;
    }
    let signs = sign_cache(seq, &layers, given_lists, &blocks)?;

    let mut reach: Vec<Vec<bool>> = layers.iter().map(|l| vec![false; l.len()]).collect();
    for flag in &mut reach[n - 1] {
        *flag = true;
    }
    for i in (0..n - 1).rev() {
        for (k, js) in adj[i].iter().enumerate() {
            reach[i][k] = js.iter().any(|&j| reach[i + 1][j]);
        }
    }

    let mut chain = vec![0usize; n];
    let mut seen: u64 = 0;
    let mut satisfying: u64 = 0;
    let mut witness: Option<Vec<RotationSystem>> = None;
    walk_chains(
        &adj,
        &reach,
        0,
        &mut chain,
        caps,
        &mut seen,
        &mut |chain| {
            if chain_satisfies(given_lists, &signs, chain) {
                satisfying += 1;
                if witness.is_none() {
                    witness = Some(
                        chain
                            .iter()
                            .enumerate()
                            .map(|(i, &k)| layers[i][k].clone())
                            .collect(),
                    );
                }
            }
        },
    )?;
    Ok(OracleVerdict { embeddable: satisfying > 0, witness, counted: Some(satisfying) })
}

fn reconstruct_chain(
    layers: &[Vec<RotationSystem>],
    back: &[Vec<Option<usize>>],
    last: usize,
) -> Vec<RotationSystem> {
    let mut indices = vec![last];
    for i in (1..layers.len()).rev() {
        let prev = back[i][*indices.last().unwrap()].expect("positive count has a predecessor");
        indices.push(prev);
    }
    indices.reverse();
    indices
        .into_iter()
        .enumerate()
        .map(|(i, k)| layers[i][k].clone())
        .collect()
}

type SignCache = BTreeMap<(usize, lists::BlockId), Vec<Option<Sign>>>;

fn sign_cache(
    seq: &TemporalSequence,
    layers: &[Vec<RotationSystem>],
    given_lists: &[EmbeddingList],
    blocks: &Blocks,
) -> Result<SignCache> {
    let mut cache = SignCache::new();
    let mut by_graph: BTreeMap<usize, Vec<lists::BlockId>> = BTreeMap::new();
    for &id in blocks.ids() {
        by_graph.entry(id.graph).or_default().push(id);
    }
    for (&graph, ids) in &by_graph {
        let dec = blocks.decomposition(graph).expect("maximal entry");
        for (k, rot) in layers[graph].iter().enumerate() {
            let embedded = EmbeddedGraph::new(seq.graph(graph).clone(), rot.clone())?;
            for &id in ids {
                for (li, l) in given_lists.iter().enumerate() {
                    let reference = l.embedding(id).expect("validated list");
                    let sign = block_sign(&embedded, dec, id.bag, reference)?;
                    cache
                        .entry((li, id))
                        .or_insert_with(|| vec![None; layers[graph].len()])[k] = sign;
                }
            }
        }
    }
    Ok(cache)
}

fn chain_satisfies(given_lists: &[EmbeddingList], signs: &SignCache, chain: &[usize]) -> bool {
    for (li, l) in given_lists.iter().enumerate() {
        for part in l.parts() {
            let mut part_sign: Option<Sign> = None;
            for &id in part {
                let sign = signs[&(li, id)][chain[id.graph]];
                let Some(sign) = sign else {
                    return false;
                };
                match part_sign {
                    None => part_sign = Some(sign),
                    Some(s) if s != sign => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

fn walk_chains(
    adj: &[Vec<Vec<usize>>],
    reach: &[Vec<bool>],
    layer: usize,
    chain: &mut Vec<usize>,
    caps: &OracleCaps,
    seen: &mut u64,
    visit: &mut impl FnMut(&[usize]),
) -> Result<()> {
    fn go(
        adj: &[Vec<Vec<usize>>],
        reach: &[Vec<bool>],
        layer: usize,
        chain: &mut Vec<usize>,
        caps: &OracleCaps,
        seen: &mut u64,
        visit: &mut impl FnMut(&[usize]),
    ) -> Result<()> {
        let last = reach.len() - 1;
        if layer == last {
            *seen += 1;
            if *seen > caps.max_chains {
                return Err(Error::ResourceCap(format!(
                    "more than {} complete chains",
                    caps.max_chains
                )));
            }
            visit(chain);
            return Ok(());
        }
        let k = chain[layer];
        for &j in &adj[layer][k] {
            if reach[layer + 1][j] {
                chain[layer + 1] = j;
                go(adj, reach, layer + 1, chain, caps, seen, visit)?;
            }
        }
        Ok(())
    }
    debug_assert_eq!(layer, 0);
    for k in 0..reach[0].len() {
        if reach[0][k] {
            chain[0] = k;
            go(adj, reach, 0, chain, caps, seen, visit)?;
        }
    }
    Ok(())
}

/// Exact number of simultaneous embeddings.
pub fn count_simultaneous(seq: &TemporalSequence, caps: &OracleCaps) -> Result<u64> {
    let verdict = simultaneous_oracle(seq, &[], caps)?;
    verdict
        .counted
        .ok_or_else(|| Error::Internal("counting path always fills the count".into()))
}

/// Does every planar embedding of `original` arise by replaying
/// `relation` on some planar embedding of `candidate`? This is the
/// lifting property expansions and models promise.
pub fn verify_lifting(
    original: &LabeledGraph,
    candidate: &LabeledGraph,
    relation: &MinorWitness,
    caps: &OracleCaps,
) -> Result<bool> {
    verify_lifting_filtered(original, candidate, relation, caps, |_| Ok(true))
}

/// Same as [`verify_lifting`], but only embeddings of `original`
/// accepted by the filter need to lift.
pub fn verify_lifting_filtered(
    original: &LabeledGraph,
    candidate: &LabeledGraph,
    relation: &MinorWitness,
    caps: &OracleCaps,
    keep: impl Fn(&RotationSystem) -> Result<bool>,
) -> Result<bool> {
    relation
        .verify(candidate, original)
        .map_err(|e| Error::Input(format!("relation does not replay candidate to original: {e}")))?;
    if original.edge_count() > caps.max_edges || candidate.edge_count() > caps.max_edges {
        return Err(Error::ResourceCap("graph exceeds the oracle edge cap".into()));
    }
    let mut induced_keys = std::collections::BTreeSet::new();
    for rot in enumerate_planar_embeddings(candidate, caps.max_embeddings)? {
        induced_keys.insert(induced_key(candidate, &rot, relation)?);
    }
    for rot in enumerate_planar_embeddings(original, caps.max_embeddings)? {
        if !keep(&rot)? {
            continue;
        }
        if !induced_keys.contains(&rotation_key(&rot)) {
            return Ok(false);
        }
    }
    Ok(true)
}
