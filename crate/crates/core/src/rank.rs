//! Bucketed rank vectors, the total orders they induce, and the
//! removal/insertion/move operations used throughout the analysis.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{permutations, Vertex};

/// Default cap on the number of vectors an exhaustive enumeration may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 20_000_000;

/// A (bucket, within-bucket position) pair; both 1-based, compared
/// lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rank {
    pub bucket: u32,
    pub position: u32,
}

impl Rank {
    pub const fn new(bucket: u32, position: u32) -> Self {
        Rank { bucket, position }
    }
}

/// Per-vertex bucketed ranks over a subset of the vertices `0..universe`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BucketedRankVector {
    k: u32,
    ranks: Vec<Option<Rank>>,
}

#[derive(Serialize, Deserialize)]
struct RankVectorJson {
    k: u32,
    ranks: BTreeMap<String, [u32; 2]>,
}

impl BucketedRankVector {
    pub fn empty(k: u32, universe: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("bucket count k must be ≥ 1".into()));
        }
        Ok(BucketedRankVector {
            k,
            ranks: vec![None; universe],
        })
    }

    /// Builds and validates a vector from explicit `(vertex, rank)` entries.
    pub fn from_ranks(
        k: u32,
        universe: usize,
        entries: impl IntoIterator<Item = (Vertex, Rank)>,
    ) -> Result<Self> {
        let mut rv = BucketedRankVector::empty(k, universe)?;
        for (v, r) in entries {
            if v >= universe {
                return Err(Error::DomainMismatch(format!(
                    "vertex {v} outside universe of {universe}"
                )));
            }
            if rv.ranks[v].is_some() {
                return Err(Error::DomainMismatch(format!("vertex {v} ranked twice")));
            }
            rv.ranks[v] = Some(r);
        }
        rv.validate()?;
        Ok(rv)
    }

    /// Puts the whole order into bucket 1.
    pub fn from_order(k: u32, universe: usize, order: &[Vertex]) -> Result<Self> {
        BucketedRankVector::from_ranks(
            k,
            universe,
            order
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, Rank::new(1, i as u32 + 1))),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let mut per_bucket: HashMap<u32, Vec<u32>> = HashMap::new();
        for r in self.ranks.iter().flatten() {
            if r.bucket == 0 || r.bucket > self.k {
                return Err(Error::BucketRange {
                    bucket: r.bucket,
                    max: self.k,
                });
            }
            per_bucket.entry(r.bucket).or_default().push(r.position);
        }
        for (bucket, mut ys) in per_bucket {
            ys.sort_unstable();
            if ys.iter().enumerate().any(|(i, &y)| y != i as u32 + 1) {
                return Err(Error::TargetOutOfRange {
                    bucket,
                    position: *ys.last().unwrap_or(&0),
                    reason: "positions in a bucket must be exactly 1..m".into(),
                });
            }
        }
        Ok(())
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn universe(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, v: Vertex) -> Option<Rank> {
        self.ranks.get(v).copied().flatten()
    }

    pub fn bucket(&self, v: Vertex) -> Option<u32> {
        self.rank(v).map(|r| r.bucket)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.rank(v).is_some()
    }

    pub fn len(&self) -> usize {
        self.ranks.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Domain vertices in increasing id order.
    pub fn domain(&self) -> Vec<Vertex> {
        (0..self.ranks.len())
            .filter(|&v| self.ranks[v].is_some())
            .collect()
    }

    pub fn occupancy(&self, bucket: u32) -> u32 {
        self.ranks
            .iter()
            .flatten()
            .filter(|r| r.bucket == bucket)
            .count() as u32
    }

    /// Uniform bucket per vertex, then a uniform order inside each bucket.
    pub fn sample(vertices: &[Vertex], universe: usize, k: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BucketedRankVector::sample_with(vertices, universe, k, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(
        vertices: &[Vertex],
        universe: usize,
        k: u32,
        rng: &mut R,
    ) -> Result<Self> {
        let mut rv = BucketedRankVector::empty(k, universe)?;
        let mut buckets: Vec<Vec<Vertex>> = vec![Vec::new(); k as usize];
        for &v in vertices {
            if v >= universe {
                return Err(Error::DomainMismatch(format!(
                    "vertex {v} outside universe of {universe}"
                )));
            }
            let x = rng.random_range(0..k) as usize;
            buckets[x].push(v);
        }
        for (x, members) in buckets.iter_mut().enumerate() {
            members.shuffle(rng);
            for (y, &v) in members.iter().enumerate() {
                rv.ranks[v] = Some(Rank::new(x as u32 + 1, y as u32 + 1));
            }
        }
        Ok(rv)
    }

    pub fn induced_permutation(&self) -> Permutation {
        let mut order: Vec<(Rank, Vertex)> = self
            .ranks
            .iter()
            .enumerate()
            .filter_map(|(v, r)| r.map(|r| (r, v)))
            .collect();
        order.sort_unstable();
        let order: Vec<Vertex> = order.into_iter().map(|(_, v)| v).collect();
        Permutation::from_order(self.ranks.len(), &order).expect("ranks are injective")
    }

    /// Removes `v`, re-compacting its bucket.
    pub fn remove_vertex(&self, v: Vertex) -> Result<Self> {
        let r = self.rank(v).ok_or(Error::NotInDomain(v))?;
        let mut out = self.clone();
        out.ranks[v] = None;
        for slot in out.ranks.iter_mut().flatten() {
            if slot.bucket == r.bucket && slot.position > r.position {
                slot.position -= 1;
            }
        }
        Ok(out)
    }

    /// Places `v` at `target`, keeping every other vertex's bucket and all
    /// pairwise relative orders. `v` may be absent (insertion).
    pub fn move_vertex(&self, v: Vertex, target: Rank) -> Result<Self> {
        if v >= self.ranks.len() {
            return Err(Error::DomainMismatch(format!(
                "vertex {v} outside universe of {}",
                self.ranks.len()
            )));
        }
        let mut out = if self.contains(v) {
            self.remove_vertex(v)?
        } else {
            self.clone()
        };
        if target.bucket == 0 || target.bucket > self.k {
            return Err(Error::TargetOutOfRange {
                bucket: target.bucket,
                position: target.position,
                reason: format!("bucket must be in 1..={}", self.k),
            });
        }
        let occupancy = out.occupancy(target.bucket);
        if target.position == 0 || target.position > occupancy + 1 {
            return Err(Error::TargetOutOfRange {
                bucket: target.bucket,
                position: target.position,
                reason: format!("position must be in 1..={}", occupancy + 1),
            });
        }
        for slot in out.ranks.iter_mut().flatten() {
            if slot.bucket == target.bucket && slot.position >= target.position {
                slot.position += 1;
            }
        }
        out.ranks[v] = Some(target);
        Ok(out)
    }

    /// Every target `move_vertex(v, ·)` accepts, in increasing order.
    pub fn targets(&self, v: Vertex) -> Result<Vec<Rank>> {
        let base = if self.contains(v) {
            self.remove_vertex(v)?
        } else {
            self.clone()
        };
        let mut out = Vec::new();
        for x in 1..=self.k {
            for y in 1..=base.occupancy(x) + 1 {
                out.push(Rank::new(x, y));
            }
        }
        Ok(out)
    }

    fn json_doc(&self) -> RankVectorJson {
        RankVectorJson {
            k: self.k,
            ranks: self
                .ranks
                .iter()
                .enumerate()
                .filter_map(|(v, r)| r.map(|r| (v.to_string(), [r.bucket, r.position])))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.json_doc()).expect("rank vector serializes")
    }

    /// Parses the JSON form; the universe is the given size.
    pub fn from_json(text: &str, universe: usize) -> Result<Self> {
        let doc: RankVectorJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut entries = Vec::with_capacity(doc.ranks.len());
        for (key, [x, y]) in doc.ranks {
            let v: Vertex = key
                .parse()
                .map_err(|_| Error::Parse(format!("vertex key `{key}` is not an integer")))?;
            entries.push((v, Rank::new(x, y)));
        }
        BucketedRankVector::from_ranks(doc.k, universe, entries)
    }
}

impl Serialize for BucketedRankVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.json_doc().serialize(s)
    }
}

/// A total order on a subset of `0..universe`; ranks are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    rank: Vec<u32>,
    order: Vec<Vertex>,
}

impl Permutation {
    /// `order[i]` gets rank `i + 1`.
    pub fn from_order(universe: usize, order: &[Vertex]) -> Result<Self> {
        let mut rank = vec![0u32; universe];
        for (i, &v) in order.iter().enumerate() {
            if v >= universe {
                return Err(Error::DomainMismatch(format!(
                    "vertex {v} outside universe of {universe}"
                )));
            }
            if rank[v] != 0 {
                return Err(Error::DomainMismatch(format!("vertex {v} listed twice")));
            }
            rank[v] = i as u32 + 1;
        }
        Ok(Permutation {
            rank,
            order: order.to_vec(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let order: Vec<Vertex> = (0..n).collect();
        Permutation::from_order(n, &order).unwrap()
    }

    pub fn universe(&self) -> usize {
        self.rank.len()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn rank(&self, v: Vertex) -> Option<u32> {
        match self.rank.get(v) {
            Some(&r) if r > 0 => Some(r),
            _ => None,
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.rank(v).is_some()
    }

    pub fn order(&self) -> &[Vertex] {
        &self.order
    }

    /// Vertex holding the given 1-based rank.
    pub fn at(&self, rank: u32) -> Option<Vertex> {
        self.order.get((rank as usize).checked_sub(1)?).copied()
    }

    pub fn without(&self, v: Vertex) -> Result<Self> {
        if !self.contains(v) {
            return Err(Error::NotInDomain(v));
        }
        let order: Vec<Vertex> = self.order.iter().copied().filter(|&w| w != v).collect();
        Permutation::from_order(self.universe(), &order)
    }

    /// Places `v` at 1-based rank `new_rank` among the others (σ_v^i).
    pub fn moved(&self, v: Vertex, new_rank: u32) -> Result<Self> {
        let mut order: Vec<Vertex> = self.order.iter().copied().filter(|&w| w != v).collect();
        if new_rank == 0 || new_rank as usize > order.len() + 1 {
            return Err(Error::TargetOutOfRange {
                bucket: 1,
                position: new_rank,
                reason: format!("rank must be in 1..={}", order.len() + 1),
            });
        }
        order.insert(new_rank as usize - 1, v);
        Permutation::from_order(self.universe(), &order)
    }

    /// Swaps `v` with its successor; unchanged when `v` is last.
    pub fn swapped_with_next(&self, v: Vertex) -> Result<Self> {
        let r = self.rank(v).ok_or(Error::NotInDomain(v))? as usize;
        let mut order = self.order.clone();
        if r < order.len() {
            order.swap(r - 1, r);
        }
        Permutation::from_order(self.universe(), &order)
    }
}

/// Probe time of an edge: the lexicographically smaller of the two rank pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeProbeTime {
    pub first: u32,
    pub second: u32,
}

impl EdgeProbeTime {
    pub const START: EdgeProbeTime = EdgeProbeTime {
        first: 1,
        second: 1,
    };
    /// Later than every probe.
    pub const END: EdgeProbeTime = EdgeProbeTime {
        first: u32::MAX,
        second: u32::MAX,
    };

    pub const fn new(first: u32, second: u32) -> Self {
        EdgeProbeTime { first, second }
    }

    pub fn of_edge(order: &Permutation, u: Vertex, v: Vertex) -> Option<Self> {
        let (a, b) = (order.rank(u)?, order.rank(v)?);
        Some(EdgeProbeTime::new(a.min(b), a.max(b)))
    }
}

/// Number of vectors over `n` vertices with `k` buckets: n! · C(n+k−1, k−1).
pub fn rank_vector_count(n: usize, k: u32) -> u128 {
    let mut count: u128 = (1..=n as u128).product();
    // C(n+k-1, n)
    let mut binom: u128 = 1;
    for i in 0..n as u128 {
        binom = binom * (k as u128 + i) / (i + 1);
    }
    count = count.saturating_mul(binom);
    count
}

/// Calls `visit` once per valid vector over `vertices` with its exact
/// probability under the sampling model.
pub fn for_each_rank_vector(
    vertices: &[Vertex],
    universe: usize,
    k: u32,
    budget: u128,
    mut visit: impl FnMut(&BucketedRankVector, &BigRational),
) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("bucket count k must be ≥ 1".into()));
    }
    let count = rank_vector_count(vertices.len(), k);
    if count > budget {
        return Err(Error::EnumerationLimit { count, budget });
    }
    let n = vertices.len();
    let base_weight = BigRational::new(BigInt::one(), BigInt::from(k).pow(n as u32));
    let perm_tables: Vec<Vec<Vec<usize>>> = (0..=n).map(permutations).collect();
    let mut assignment = vec![0u32; n];
    let mut rv = BucketedRankVector::empty(k, universe)?;
    loop {
        let mut groups: Vec<Vec<Vertex>> = vec![Vec::new(); k as usize];
        for (i, &x) in assignment.iter().enumerate() {
            groups[x as usize].push(vertices[i]);
        }
        let denom: BigInt = groups
            .iter()
            .map(|g| (1..=g.len()).fold(BigInt::one(), |acc, i| acc * i))
            .product();
        let weight = &base_weight / BigRational::from_integer(denom);
        // odometer over per-bucket permutations
        let mut choice = vec![0usize; k as usize];
        loop {
            for (x, group) in groups.iter().enumerate() {
                let perm = &perm_tables[group.len()][choice[x]];
                for (y, &p) in perm.iter().enumerate() {
                    rv.ranks[group[p]] = Some(Rank::new(x as u32 + 1, y as u32 + 1));
                }
            }
            visit(&rv, &weight);
            let mut x = 0;
            while x < groups.len() {
                choice[x] += 1;
                if choice[x] < perm_tables[groups[x].len()].len() {
                    break;
                }
                choice[x] = 0;
                x += 1;
            }
            if x == groups.len() {
                break;
            }
        }
        // next bucket assignment
        let mut i = 0;
        while i < n {
            assignment[i] += 1;
            if assignment[i] < k {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if i == n {
            return Ok(());
        }
    }
}

pub fn enumerate_rank_vectors(
    vertices: &[Vertex],
    universe: usize,
    k: u32,
    budget: u128,
) -> Result<Vec<(BucketedRankVector, BigRational)>> {
    let mut out = Vec::new();
    for_each_rank_vector(vertices, universe, k, budget, |rv, w| {
        out.push((rv.clone(), w.clone()))
    })?;
    Ok(out)
}

/// Maximum over permutations of |P(induced order) − 1/n!|, exactly.
pub fn distribution_audit(n: usize, k: u32) -> Result<BigRational> {
    let vertices: Vec<Vertex> = (0..n).collect();
    let mut mass: HashMap<Vec<Vertex>, BigRational> = HashMap::new();
    for_each_rank_vector(&vertices, n, k, DEFAULT_ENUMERATION_BUDGET, |rv, w| {
        let order = rv.induced_permutation().order().to_vec();
        *mass.entry(order).or_insert_with(BigRational::zero) += w;
    })?;
    let n_fact: BigInt = (1..=n).fold(BigInt::one(), |acc, i| acc * i);
    let uniform = BigRational::new(BigInt::one(), n_fact.clone());
    let mut worst = BigRational::zero();
    let mut seen = BigInt::zero();
    for p in mass.values() {
        seen += 1;
        let dev = (p - &uniform).abs();
        if dev > worst {
            worst = dev;
        }
    }
    // permutations never produced carry deviation 1/n!
    if seen < n_fact && uniform > worst {
        worst = uniform;
    }
    Ok(worst)
}
