//! The overlap graph between subgraphs and walks through its spanning tree.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::par;
use crate::rng;

/// `|a ∩ b|` for sorted node lists.
pub fn overlap_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Subgraphs as vertices, joined when their overlap reaches `m1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperGraph {
    m1: usize,
    /// Neighbor lists `(b, Y_ab)`, ordered by overlap descending then index.
    adj: Vec<Vec<(usize, usize)>>,
}

impl SuperGraph {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn neighbors(&self, a: usize) -> &[(usize, usize)] {
        &self.adj[a]
    }

    pub fn overlap(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a].iter().find(|&&(c, _)| c == b).map(|&(_, y)| y)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Builds the super-graph over sorted node subsets. With `candidates`, only
/// those pairs are examined; otherwise all pairs are. Subsets flagged in
/// `excluded` stay isolated.
pub fn build_supergraph(
    samples: &[&[usize]],
    m1: usize,
    candidates: Option<&[(usize, usize)]>,
    excluded: &[bool],
) -> Result<SuperGraph> {
    if m1 == 0 {
        return Err(invalid!("overlap threshold m1 must be at least 1"));
    }
    let t = samples.len();
    let keep = |a: usize| !excluded.get(a).copied().unwrap_or(false);
    let edges: Vec<(usize, usize, usize)> = match candidates {
        Some(pairs) => pairs
            .iter()
            .filter(|&&(a, b)| a != b && a < t && b < t && keep(a) && keep(b))
            .map(|&(a, b)| (a.min(b), a.max(b), overlap_size(samples[a], samples[b])))
            .filter(|&(_, _, y)| y >= m1)
            .collect(),
        None => par::map_indexed(t, |a| {
            if !keep(a) {
                return Vec::new();
            }
            (a + 1..t)
                .filter(|&b| keep(b))
                .map(|b| (a, b, overlap_size(samples[a], samples[b])))
                .filter(|&(_, _, y)| y >= m1)
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect(),
    };
    let mut adj = vec![Vec::new(); t];
    let unique: BTreeSet<(usize, usize, usize)> = edges.into_iter().collect();
    for (a, b, y) in unique {
        adj[a].push((b, y));
        adj[b].push((a, y));
    }
    for list in &mut adj {
        list.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    }
    Ok(SuperGraph { m1, adj })
}

/// Candidate overlapping pairs from sign-random-projection hashes of the
/// subsets' characteristic vectors: `bands` signatures of `bits` hashes each,
/// and a pair is a candidate when any signature agrees.
pub fn lsh_overlap_candidates(
    samples: &[&[usize]],
    n: usize,
    bands: usize,
    bits: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if bands == 0 || bits == 0 || bits > 64 {
        return Err(invalid!("LSH needs bands >= 1 and 1 <= bits <= 64"));
    }
    let mut pairs = BTreeSet::new();
    for band in 0..bands {
        let mut rng = rng::stream(seed, band as u64);
        let planes: Vec<Vec<f64>> =
            (0..bits).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let mut signatures: Vec<(u64, usize)> = samples
            .iter()
            .enumerate()
            .map(|(a, nodes)| {
                let mut sig = 0u64;
                for (bit, plane) in planes.iter().enumerate() {
                    let proj: f64 = nodes.iter().map(|&u| plane[u]).sum();
                    if proj >= 0.0 {
                        sig |= 1 << bit;
                    }
                }
                (sig, a)
            })
            .collect();
        signatures.sort_unstable();
        for bucket in signatures.chunk_by(|x, y| x.0 == y.0) {
            for (i, &(_, a)) in bucket.iter().enumerate() {
                for &(_, b) in &bucket[i + 1..] {
                    pairs.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    Ok(pairs.into_iter().collect())
}

/// A walk through a DFS spanning tree: consecutive entries are tree-adjacent and
/// every reached vertex appears at least once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Traversal {
    pub walk: Vec<usize>,
    /// Vertices not reachable from the start, ascending.
    pub uncovered: Vec<usize>,
}

/// Depth-first traversal from `start`, visiting neighbors by overlap
/// (descending) then index, recording each step down and each return. Trailing
/// returns after the last new vertex are dropped, so `J ≤ 2·reached − 1`.
pub fn spanning_traversal(sg: &SuperGraph, start: usize) -> Result<Traversal> {
    let t = sg.len();
    if start >= t {
        return Err(invalid!("start {start} out of range for {t} subgraphs"));
    }
    let mut visited = vec![false; t];
    visited[start] = true;
    let mut walk = vec![start];
    let mut last_new = 1;
    let mut stack = vec![(start, 0usize)];
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        let nbrs = sg.neighbors(v);
        let mut child = None;
        while *next < nbrs.len() {
            let (c, _) = nbrs[*next];
            *next += 1;
            if !visited[c] {
                child = Some(c);
                break;
            }
        }
        match child {
            Some(c) => {
                visited[c] = true;
                walk.push(c);
                last_new = walk.len();
                stack.push((c, 0));
            }
            None => {
                stack.pop();
                if let Some(&(parent, _)) = stack.last() {
                    walk.push(parent);
                }
            }
        }
    }
    walk.truncate(last_new);
    let uncovered = (0..t).filter(|&a| !visited[a]).collect();
    Ok(Traversal { walk, uncovered })
}
