//! Finite posets, isotone maps, lower subsets and the top-adjoined poset.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("cycle in order relation: {}", .0.join(" <= "))]
    CycleDetected(Vec<String>),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("duplicate element {0:?}")]
    DuplicateElement(String),
    #[error("map is not order-preserving at {0:?} <= {1:?}")]
    NotIsotone(String, String),
    #[error("map is not total: {0:?} has no image")]
    NotTotal(String),
}

/// A finite partial order on named elements.
///
/// The full reflexive-transitive relation is stored twice, as a down-set and
/// an up-set per element, so that `leq` is a single bit probe.
#[derive(Clone)]
pub struct FinPoset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    below: Vec<BitSet>,
    above: Vec<BitSet>,
}

impl FinPoset {
    /// Builds the reflexive-transitive closure of `pairs`, where `(a, b)`
    /// means `a <= b`.
    pub fn new<S: AsRef<str>>(elements: &[S], pairs: &[(S, S)]) -> Result<Self, PosetError> {
        let mut index = HashMap::new();
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(PosetError::DuplicateElement(n.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| PosetError::UnknownElement(s.to_string()))
        };
        let mut edges = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            edges.push((lookup(a.as_ref())?, lookup(b.as_ref())?));
        }
        let n = names.len();
        let mut below: Vec<BitSet> = (0..n).map(BitSet::singleton).collect();
        for &(a, b) in &edges {
            below[b].insert(a);
        }
        for k in 0..n {
            let bk = below[k].clone();
            for set in below.iter_mut() {
                if set.contains(k) {
                    set.union_with(&bk);
                }
            }
        }
        for i in 0..n {
            for j in below[i].iter() {
                if j != i && below[j].contains(i) {
                    let mut path = edge_path(&edges, j, i, n);
                    path.extend(edge_path(&edges, i, j, n).into_iter().skip(1));
                    return Err(PosetError::CycleDetected(
                        path.into_iter().map(|k| names[k].clone()).collect(),
                    ));
                }
            }
        }
        Ok(Self::from_below(names, index, below))
    }

    /// Builds a poset from a relation already known to be a partial order.
    /// Reflexivity and antisymmetry are checked; transitivity is trusted.
    pub fn from_leq_fn(names: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> Self {
        let n = names.len();
        let mut below = vec![BitSet::new(); n];
        for (j, set) in below.iter_mut().enumerate() {
            for i in 0..n {
                if i == j || leq(i, j) {
                    set.insert(i);
                }
            }
        }
        for (j, set) in below.iter().enumerate() {
            for i in set.iter() {
                assert!(i == j || !leq(j, i), "relation is not antisymmetric");
            }
        }
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Self::from_below(names, index, below)
    }

    fn from_below(names: Vec<String>, index: HashMap<String, usize>, below: Vec<BitSet>) -> Self {
        let n = names.len();
        let mut above = vec![BitSet::new(); n];
        for (j, set) in below.iter().enumerate() {
            for i in set.iter() {
                above[i].insert(j);
            }
        }
        Self {
            names,
            index,
            below,
            above,
        }
    }

    pub fn empty() -> Self {
        Self::from_leq_fn(Vec::new(), |_, _| false)
    }

    /// A chain `names[0] < names[1] < ...`.
    pub fn chain(n: usize) -> Self {
        Self::from_leq_fn((0..n).map(|i| format!("c{i}")).collect(), |i, j| i <= j)
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_leq_fn((0..n).map(|i| format!("a{i}")).collect(), |i, j| i == j)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PosetError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| PosetError::UnknownElement(name.to_string()))
    }

    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.below[j].contains(i)
    }

    #[inline]
    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq(i, j) || self.leq(j, i)
    }

    /// `{p : p <= a}`.
    pub fn down_set(&self, a: usize) -> &BitSet {
        &self.below[a]
    }

    /// `{p : a <= p}`.
    pub fn up_set(&self, a: usize) -> &BitSet {
        &self.above[a]
    }

    pub fn down_set_of(&self, name: &str) -> Result<&BitSet, PosetError> {
        Ok(self.down_set(self.index_of(name)?))
    }

    pub fn down_closure(&self, set: &BitSet) -> BitSet {
        let mut out = BitSet::new();
        for i in set.iter() {
            out.union_with(&self.below[i]);
        }
        out
    }

    pub fn up_closure(&self, set: &BitSet) -> BitSet {
        let mut out = BitSet::new();
        for i in set.iter() {
            out.union_with(&self.above[i]);
        }
        out
    }

    pub fn is_lower_set(&self, set: &BitSet) -> bool {
        set.iter().all(|i| self.below[i].is_subset(set))
    }

    /// Maximal members of `set`.
    pub fn maximal(&self, set: &BitSet) -> BitSet {
        set.iter()
            .filter(|&i| {
                let mut strictly_above = self.above[i].intersection(set);
                strictly_above.remove(i);
                strictly_above.is_empty()
            })
            .collect()
    }

    /// Minimal members of `set`.
    pub fn minimal(&self, set: &BitSet) -> BitSet {
        set.iter()
            .filter(|&i| {
                let mut strictly_below = self.below[i].intersection(set);
                strictly_below.remove(i);
                strictly_below.is_empty()
            })
            .collect()
    }

    /// Covering pairs `(a, b)` with `a < b` and nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.len() {
            let mut strict = self.below[b].clone();
            strict.remove(b);
            for a in self.maximal(&strict).iter() {
                out.push((a, b));
            }
        }
        out
    }

    /// Elements sorted so that every element comes after everything below it.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.below[i].len(), i));
        order
    }

    /// All lower subsets, or `None` if there are more than `limit`.
    pub fn lower_sets(&self, limit: usize) -> Option<Vec<BitSet>> {
        let order = self.linear_extension();
        let mut out = Vec::new();
        let mut current = BitSet::new();
        if self.lower_sets_rec(&order, 0, &mut current, &mut out, limit) {
            Some(out)
        } else {
            None
        }
    }

    fn lower_sets_rec(
        &self,
        order: &[usize],
        k: usize,
        current: &mut BitSet,
        out: &mut Vec<BitSet>,
        limit: usize,
    ) -> bool {
        if k == order.len() {
            if out.len() >= limit {
                return false;
            }
            out.push(current.clone());
            return true;
        }
        let i = order[k];
        if !self.lower_sets_rec(order, k + 1, current, out, limit) {
            return false;
        }
        let mut strict = self.below[i].clone();
        strict.remove(i);
        if strict.is_subset(current) {
            current.insert(i);
            let ok = self.lower_sets_rec(order, k + 1, current, out, limit);
            current.remove(i);
            return ok;
        }
        true
    }

    /// The induced subposet on `subset`, in increasing index order.
    pub fn restrict(&self, subset: &BitSet) -> FinPoset {
        let members: Vec<usize> = subset.iter().collect();
        FinPoset::from_leq_fn(
            members.iter().map(|&i| self.names[i].clone()).collect(),
            |a, b| self.leq(members[a], members[b]),
        )
    }

    /// Adds a new element strictly above every existing one.
    pub fn adjoin_top(&self) -> PointedPoset {
        let mut top_name = String::from("∞");
        while self.index.contains_key(&top_name) {
            top_name.push('\'');
        }
        let n = self.len();
        let mut names = self.names.clone();
        names.push(top_name);
        let poset = FinPoset::from_leq_fn(names, |i, j| j == n || (i < n && j < n && self.leq(i, j)));
        PointedPoset { poset, top: n }
    }

    /// An order isomorphism onto `other`, found by backtracking.
    pub fn isomorphism_to(&self, other: &FinPoset) -> Option<Vec<usize>> {
        if self.len() != other.len() {
            return None;
        }
        let sig = |p: &FinPoset, i: usize| (p.below[i].len(), p.above[i].len());
        let mut image = vec![usize::MAX; self.len()];
        let mut used = BitSet::new();
        fn go(
            a: &FinPoset,
            b: &FinPoset,
            k: usize,
            image: &mut Vec<usize>,
            used: &mut BitSet,
            sig: &dyn Fn(&FinPoset, usize) -> (usize, usize),
        ) -> bool {
            if k == a.len() {
                return true;
            }
            for cand in 0..b.len() {
                if used.contains(cand) || sig(a, k) != sig(b, cand) {
                    continue;
                }
                let consistent = (0..k).all(|j| {
                    a.leq(j, k) == b.leq(image[j], cand) && a.leq(k, j) == b.leq(cand, image[j])
                });
                if consistent {
                    image[k] = cand;
                    used.insert(cand);
                    if go(a, b, k + 1, image, used, sig) {
                        return true;
                    }
                    used.remove(cand);
                }
            }
            false
        }
        go(self, other, 0, &mut image, &mut used, &sig).then_some(image)
    }

    /// Every principal filter is a chain. `Down(P)` is completely normal
    /// exactly when this holds.
    pub fn is_root_system(&self) -> bool {
        (0..self.len()).all(|i| {
            let up: Vec<usize> = self.above[i].iter().collect();
            up.iter()
                .all(|&a| up.iter().all(|&b| self.comparable(a, b)))
        })
    }

    pub fn to_json(&self) -> PosetJson {
        PosetJson {
            elements: self.names.clone(),
            leq: self
                .covers()
                .into_iter()
                .map(|(a, b)| (self.names[a].clone(), self.names[b].clone()))
                .collect(),
        }
    }

    pub fn from_json(json: &PosetJson) -> Result<Self, PosetError> {
        FinPoset::new(&json.elements, &json.leq)
    }
}

fn edge_path(edges: &[(usize, usize)], from: usize, to: usize, n: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; n];
    let mut seen = BitSet::singleton(from);
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        for &(a, b) in edges {
            if a == x && seen.insert(b) {
                prev[b] = x;
                queue.push_back(b);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

impl fmt::Debug for FinPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let covers: Vec<String> = self
            .covers()
            .into_iter()
            .map(|(a, b)| format!("{}<{}", self.names[a], self.names[b]))
            .collect();
        write!(f, "FinPoset{{{:?}; {}}}", self.names, covers.join(", "))
    }
}

impl PartialEq for FinPoset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.below == other.below
    }
}

impl Eq for FinPoset {}

/// JSON form: `{"elements": [...], "leq": [[a, b], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetJson {
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
}

/// A poset together with an adjoined top element `∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedPoset {
    pub poset: FinPoset,
    pub top: usize,
}

impl PointedPoset {
    /// The original poset, without `∞`.
    pub fn base(&self) -> FinPoset {
        let mut s = BitSet::full(self.poset.len());
        s.remove(self.top);
        self.poset.restrict(&s)
    }
}

/// An order-preserving map between finite posets, stored as an index table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsotoneMap {
    pub table: Vec<usize>,
}

impl IsotoneMap {
    pub fn new(source: &FinPoset, target: &FinPoset, table: Vec<usize>) -> Result<Self, PosetError> {
        if table.len() != source.len() {
            let missing = source.name(table.len().min(source.len().saturating_sub(1)));
            return Err(PosetError::NotTotal(missing.to_string()));
        }
        for (i, &t) in table.iter().enumerate() {
            if t >= target.len() {
                return Err(PosetError::NotTotal(source.name(i).to_string()));
            }
        }
        for i in 0..source.len() {
            for j in source.up_set(i).iter() {
                if !target.leq(table[i], table[j]) {
                    return Err(PosetError::NotIsotone(
                        source.name(i).to_string(),
                        source.name(j).to_string(),
                    ));
                }
            }
        }
        Ok(Self { table })
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    /// The `⟨f⟩` extension sending `∞` to `∞`.
    pub fn adjoin_top(&self, source: &PointedPoset, target: &PointedPoset) -> IsotoneMap {
        let mut table = vec![target.top; source.poset.len()];
        let mut k = 0;
        for (i, slot) in table.iter_mut().enumerate() {
            if i == source.top {
                continue;
            }
            let t = self.table[k];
            *slot = if t >= target.top { t + 1 } else { t };
            k += 1;
        }
        IsotoneMap { table }
    }
}

/// All posets on `n` elements, one per isomorphism class.
pub fn enumerate_posets(n: usize) -> Vec<FinPoset> {
    assert!(n <= 6, "poset enumeration is only intended for tiny sizes");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .collect();
    let perms = permutations(n);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let rel = |i: usize, j: usize| {
            i == j
                || pairs
                    .iter()
                    .position(|&p| p == (i, j))
                    .is_some_and(|k| mask & (1 << k) != 0)
        };
        let transitive = (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| !(rel(a, b) && rel(b, c)) || rel(a, c)))
        });
        if !transitive {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut bits = 0u64;
                for i in 0..n {
                    for j in 0..n {
                        if rel(i, j) {
                            bits |= 1 << (p[i] * n + p[j]);
                        }
                    }
                }
                bits
            })
            .min()
            .unwrap_or(0);
        if seen.insert(canon) {
            let names = (0..n).map(|i| format!("p{i}")).collect();
            out.push(FinPoset::from_leq_fn(names, rel));
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// A random poset on `n` elements: each pair of a hidden linear order is
/// related with probability `density`, then the relation is closed and the
/// element names are shuffled.
pub fn random_poset<R: Rng>(rng: &mut R, n: usize, density: f64) -> FinPoset {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let names: Vec<String> = labels.iter().map(|l| format!("e{l}")).collect();
    let mut pairs = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if rng.gen_bool(density) {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    FinPoset::new(&names, &pairs).expect("relations follow a linear order")
}
