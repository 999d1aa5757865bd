use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeLabels, Graph};

/// Seed of a reproducible graph generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// An independent child seed (SplitMix64 finalizer over seed and index).
    pub fn derive(self, index: u64) -> RngSeed {
        let mut z = self.0.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }

    pub(crate) fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Connectivity ignoring edge direction. The empty graph counts as
/// connected.
pub fn is_connected(g: &Graph) -> bool {
    let n = g.num_vertices();
    if n == 0 {
        return true;
    }
    let mut nbrs = vec![Vec::new(); n];
    for e in g.edges() {
        nbrs[e.source].push(e.target);
        nbrs[e.target].push(e.source);
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &nbrs[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == n
}

struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), components: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.components -= 1;
        }
    }
}

/// Draws distinct unordered vertex pairs uniformly without replacement via
/// a lazily materialized Fisher–Yates shuffle of the pair indices.
struct PairSampler {
    total: u64,
    drawn: u64,
    swaps: HashMap<u64, u64>,
}

impl PairSampler {
    fn new(n: usize) -> Self {
        let n = n as u64;
        Self { total: n * n.saturating_sub(1) / 2, drawn: 0, swaps: HashMap::new() }
    }

    fn next(&mut self, rng: &mut impl Rng) -> Option<(usize, usize)> {
        if self.drawn == self.total {
            return None;
        }
        let j = rng.gen_range(self.drawn..self.total);
        let picked = *self.swaps.get(&j).unwrap_or(&j);
        let head = *self.swaps.get(&self.drawn).unwrap_or(&self.drawn);
        self.swaps.insert(j, head);
        self.swaps.remove(&self.drawn);
        self.drawn += 1;
        Some(decode_pair(picked))
    }
}

/// Index `k` of the strictly lower triangle, enumerated row by row, to
/// `(column, row)` with `column < row`.
fn decode_pair(k: u64) -> (usize, usize) {
    let mut r = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0).floor() as u64;
    while r * (r - 1) / 2 > k {
        r -= 1;
    }
    while (r + 1) * r / 2 <= k {
        r += 1;
    }
    let c = k - r * (r - 1) / 2;
    (c as usize, r as usize)
}

/// Inserts random edges until `done(edges, components)` holds or the graph
/// is complete.
fn grow(n: usize, seed: RngSeed, done: impl Fn(usize, usize) -> bool) -> Graph {
    let mut rng = seed.rng();
    let mut sampler = PairSampler::new(n);
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::new();
    while !done(edges.len(), uf.components) {
        let Some((i, j)) = sampler.next(&mut rng) else { break };
        uf.union(i, j);
        edges.push(Edge { source: i, target: j, weight: 1.0 });
    }
    Graph::new(n, false, edges, EdgeLabels::None).expect("generated edges are distinct and in range")
}

/// A connected graph on `2^k` vertices with average degree at least 2,
/// grown by inserting uniformly random new edges.
pub fn random_graph_set1(k: u32, seed: RngSeed) -> Result<Graph> {
    if !(1..=24).contains(&k) {
        return Err(Error::InvalidArgument(format!("size exponent {k} outside 1..=24")));
    }
    let n = 1usize << k;
    Ok(grow(n, seed, |m, comps| comps == 1 && m >= n))
}

/// A connected graph on `n` vertices whose adjacency matrix has at least
/// `fill_pct`% nonzero entries, grown by inserting uniformly random new
/// edges. Targets above the density of the complete graph yield the
/// complete graph.
pub fn random_graph_set2(n: usize, fill_pct: f64, seed: RngSeed) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
    }
    if !(fill_pct > 0.0 && fill_pct <= 100.0) {
        return Err(Error::InvalidArgument(format!("fill {fill_pct}% outside (0, 100]")));
    }
    let floor = 200.0 * (n as f64 - 1.0) / (n * n) as f64;
    if fill_pct < floor {
        return Err(Error::InvalidArgument(format!(
            "fill {fill_pct}% is below {floor:.3}%, the density of a spanning tree on {n} vertices"
        )));
    }
    let target = fill_pct / 100.0 * (n * n) as f64;
    Ok(grow(n, seed, |m, comps| comps == 1 && (2 * m) as f64 >= target))
}
