//! Finite distributive lattices as lower-set lattices of their
//! join-irreducible posets, plus lattice homomorphisms between them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::poset::{FinPoset, IsotoneMap, PosetError, PosetJson};

/// Upper bound on the number of elements materialized by `elements()`.
pub const DEFAULT_ELEMENT_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("{0} is not a lower set of the join-irreducible poset")]
    NotLowerSet(String),
    #[error("{0} is not join-irreducible")]
    NotJoinIrreducible(String),
    #[error("lattice has more than {0} elements")]
    TooManyElements(usize),
    #[error("Cevian law fails: {0}")]
    NotCevian(CevianViolation),
    #[error("homomorphism does not preserve the top element")]
    NotTopPreserving,
    #[error("values are not isotone at {0} <= {1}")]
    NotIsotone(String, String),
    #[error("map does not preserve the meet of {0} and {1}")]
    NotMeetPreserving(String, String),
    #[error("value {0} does not lie in the target lattice")]
    ValueOutsideTarget(String),
    #[error("expected {expected} values, got {got}")]
    WrongArity { expected: usize, got: usize },
}

/// An element of a [`FinDistLattice`]: a lower subset of its
/// join-irreducible poset.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LatElem(BitSet);

impl LatElem {
    /// Wraps a set that the caller knows to be down-closed.
    pub fn from_lower_set_unchecked(bits: BitSet) -> Self {
        LatElem(bits)
    }

    pub fn bits(&self) -> &BitSet {
        &self.0
    }

    pub fn into_bits(self) -> BitSet {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn leq(&self, other: &LatElem) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn join(&self, other: &LatElem) -> LatElem {
        LatElem(self.0.union(&other.0))
    }

    pub fn meet(&self, other: &LatElem) -> LatElem {
        LatElem(self.0.intersection(&other.0))
    }
}

impl fmt::Debug for LatElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A located failure of one of the three Cevian laws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CevianViolation {
    /// 1: `x <= y v (x\y)`, 2: `(x\y) ^ (y\x) = 0`, 3: `x\z <= (x\y) v (y\z)`.
    pub law: u8,
    pub args: Vec<Vec<String>>,
}

impl fmt::Display for CevianViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| format!("{{{}}}", a.join(",")))
            .collect();
        write!(f, "law {} at ({})", self.law, args.join(", "))
    }
}

/// The difference table of a completely normal lattice, indexed like
/// `elements`.
#[derive(Debug, Clone)]
pub struct CevianTable {
    pub elements: Vec<LatElem>,
    pub table: Vec<Vec<usize>>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct FinDistLattice {
    ji: FinPoset,
}

impl FinDistLattice {
    /// The lattice of lower subsets of `ji`.
    pub fn new(ji: FinPoset) -> Self {
        Self { ji }
    }

    /// The chain with `n >= 1` elements.
    pub fn chain(n: usize) -> Self {
        assert!(n >= 1);
        Self::new(FinPoset::chain(n - 1))
    }

    /// The Boolean lattice with `k` atoms.
    pub fn boolean(k: usize) -> Self {
        Self::new(FinPoset::antichain(k))
    }

    pub fn ji(&self) -> &FinPoset {
        &self.ji
    }

    pub fn ji_count(&self) -> usize {
        self.ji.len()
    }

    pub fn bottom(&self) -> LatElem {
        LatElem(BitSet::new())
    }

    pub fn top(&self) -> LatElem {
        LatElem(BitSet::full(self.ji.len()))
    }

    pub fn is_top(&self, x: &LatElem) -> bool {
        x.0.len() == self.ji.len()
    }

    /// `↓p` for a join-irreducible index `p`.
    pub fn principal(&self, p: usize) -> LatElem {
        LatElem(self.ji.down_set(p).clone())
    }

    pub fn element(&self, bits: BitSet) -> Result<LatElem, LatticeError> {
        if bits.iter().any(|i| i >= self.ji.len()) || !self.ji.is_lower_set(&bits) {
            return Err(LatticeError::NotLowerSet(format!("{bits:?}")));
        }
        Ok(LatElem(bits))
    }

    /// Parses an element given by the names of its join-irreducibles.
    pub fn element_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<LatElem, LatticeError> {
        let mut bits = BitSet::new();
        for n in names {
            bits.insert(self.ji.index_of(n.as_ref())?);
        }
        if !self.ji.is_lower_set(&bits) {
            let shown: Vec<&str> = names.iter().map(|s| s.as_ref()).collect();
            return Err(LatticeError::NotLowerSet(format!("{{{}}}", shown.join(","))));
        }
        Ok(LatElem(bits))
    }

    pub fn names_of(&self, x: &LatElem) -> Vec<String> {
        x.0.iter().map(|i| self.ji.name(i).to_string()).collect()
    }

    pub fn show(&self, x: &LatElem) -> String {
        format!("{{{}}}", self.names_of(x).join(","))
    }

    /// `↓(x ∪ y)` closure of an arbitrary set of join-irreducibles.
    pub fn down_closure(&self, bits: &BitSet) -> LatElem {
        LatElem(self.ji.down_closure(bits))
    }

    /// If `x = ↓p` for a single `p`, returns `p`.
    pub fn as_join_irreducible(&self, x: &LatElem) -> Option<usize> {
        let max = self.ji.maximal(&x.0);
        match max.len() {
            1 => max.first(),
            _ => None,
        }
    }

    fn require_ji(&self, x: &LatElem) -> Result<usize, LatticeError> {
        self.as_join_irreducible(x)
            .ok_or_else(|| LatticeError::NotJoinIrreducible(self.show(x)))
    }

    /// `p_*`: the unique lower cover of `↓p`.
    pub fn lower_cover_of(&self, p: usize) -> LatElem {
        let mut bits = self.ji.down_set(p).clone();
        bits.remove(p);
        LatElem(bits)
    }

    pub fn lower_cover(&self, x: &LatElem) -> Result<LatElem, LatticeError> {
        Ok(self.lower_cover_of(self.require_ji(x)?))
    }

    /// `p†`: the largest element not above `↓p`.
    pub fn dagger_of(&self, p: usize) -> LatElem {
        LatElem(self.ji.up_set(p).complement(self.ji.len()))
    }

    pub fn dagger(&self, x: &LatElem) -> Result<LatElem, LatticeError> {
        Ok(self.dagger_of(self.require_ji(x)?))
    }

    /// The largest `z` with `x ^ z <= y`.
    pub fn heyting_implies(&self, x: &LatElem, y: &LatElem) -> LatElem {
        let up = self.ji.up_closure(&x.0.difference(&y.0));
        LatElem(up.complement(self.ji.len()))
    }

    /// The least `z` with `x <= y v z`.
    pub fn dual_diff(&self, x: &LatElem, y: &LatElem) -> LatElem {
        self.down_closure(&x.0.difference(&y.0))
    }

    /// A witness `(u, v)` with `a <= u v b`, `b <= a v v`, `u ^ v = 0`.
    /// The minimal differences are tried; they form a witness whenever
    /// any witness exists.
    pub fn consonance_witness(&self, a: &LatElem, b: &LatElem) -> Option<(LatElem, LatElem)> {
        let u = self.dual_diff(a, b);
        let v = self.dual_diff(b, a);
        u.meet(&v).is_zero().then_some((u, v))
    }

    pub fn is_consonant_pair(&self, a: &LatElem, b: &LatElem) -> bool {
        self.consonance_witness(a, b).is_some()
    }

    /// Complete normality, decided on the join-irreducible poset: it holds
    /// iff the principal filter of every join-irreducible is a chain. On
    /// failure returns a non-consonant pair `(↓q1, ↓q2)` with `q1`, `q2`
    /// incomparable above a common join-irreducible.
    pub fn completely_normal(&self) -> Result<(), (LatElem, LatElem)> {
        for p in 0..self.ji.len() {
            let up: Vec<usize> = self.ji.up_set(p).iter().collect();
            for (k, &q1) in up.iter().enumerate() {
                for &q2 in &up[k + 1..] {
                    if !self.ji.comparable(q1, q2) {
                        return Err((self.principal(q1), self.principal(q2)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_completely_normal(&self) -> bool {
        self.completely_normal().is_ok()
    }

    pub fn elements_limited(&self, limit: usize) -> Result<Vec<LatElem>, LatticeError> {
        self.ji
            .lower_sets(limit)
            .map(|v| v.into_iter().map(LatElem).collect())
            .ok_or(LatticeError::TooManyElements(limit))
    }

    pub fn elements(&self) -> Result<Vec<LatElem>, LatticeError> {
        self.elements_limited(DEFAULT_ELEMENT_LIMIT)
    }

    /// Number of elements, if at most `limit`.
    pub fn size(&self, limit: usize) -> Option<usize> {
        self.ji.lower_sets(limit).map(|v| v.len())
    }

    /// Tabulates the dual difference and checks the three Cevian laws,
    /// pairs first, then triples.
    pub fn cevian_diff(&self) -> Result<CevianTable, LatticeError> {
        let elements = self.elements()?;
        let index: BTreeMap<&LatElem, usize> =
            elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let table: Vec<Vec<usize>> = elements
            .iter()
            .map(|x| {
                elements
                    .iter()
                    .map(|y| index[&self.dual_diff(x, y)])
                    .collect()
            })
            .collect();
        let violation = |law: u8, args: &[&LatElem]| {
            LatticeError::NotCevian(CevianViolation {
                law,
                args: args.iter().map(|a| self.names_of(a)).collect(),
            })
        };
        let n = elements.len();
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (&elements[i], &elements[j]);
                let xy = &elements[table[i][j]];
                if !x.leq(&y.join(xy)) {
                    return Err(violation(1, &[x, y]));
                }
                if j > i && !xy.meet(&elements[table[j][i]]).is_zero() {
                    return Err(violation(2, &[x, y]));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = &elements[table[i][k]];
                    let rhs = elements[table[i][j]].join(&elements[table[j][k]]);
                    if !lhs.leq(&rhs) {
                        return Err(violation(3, &[&elements[i], &elements[j], &elements[k]]));
                    }
                }
            }
        }
        Ok(CevianTable { elements, table })
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            ji_poset: self.ji.to_json(),
        }
    }

    pub fn from_json(json: &LatticeJson) -> Result<Self, LatticeError> {
        Ok(Self::new(FinPoset::from_json(&json.ji_poset)?))
    }
}

impl fmt::Debug for FinDistLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Down({:?})", self.ji)
    }
}

/// JSON form of a lattice: `{"ji_poset": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub ji_poset: PosetJson,
}

/// A 0-lattice homomorphism between finite distributive lattices, stored
/// by its values on the join-irreducibles of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatHom {
    source: FinDistLattice,
    target: FinDistLattice,
    ji_values: Vec<LatElem>,
}

impl LatHom {
    /// Builds the join-extension of `ji_values` and checks that it is a
    /// 0-lattice homomorphism.
    ///
    /// The join-extension of isotone values automatically preserves 0 and
    /// joins. It preserves meets iff, for every target join-irreducible
    /// `r`, the set of source join-irreducibles whose value contains `r` is
    /// empty or has a least element.
    pub fn from_ji_values(
        source: &FinDistLattice,
        target: &FinDistLattice,
        ji_values: Vec<LatElem>,
    ) -> Result<Self, LatticeError> {
        let n = source.ji_count();
        if ji_values.len() != n {
            return Err(LatticeError::WrongArity {
                expected: n,
                got: ji_values.len(),
            });
        }
        for v in &ji_values {
            target.element(v.0.clone())?;
        }
        for p in 0..n {
            for q in source.ji.up_set(p).iter() {
                if !ji_values[p].leq(&ji_values[q]) {
                    return Err(LatticeError::NotIsotone(
                        source.ji.name(p).to_string(),
                        source.ji.name(q).to_string(),
                    ));
                }
            }
        }
        let hom = Self {
            source: source.clone(),
            target: target.clone(),
            ji_values,
        };
        for r in 0..target.ji_count() {
            let support = hom.preimage_support(r);
            let min = source.ji.minimal(&support);
            if min.len() > 1 {
                let mut it = min.iter();
                let (a, b) = (it.next().unwrap(), it.next().unwrap());
                return Err(LatticeError::NotMeetPreserving(
                    source.show(&source.principal(a)),
                    source.show(&source.principal(b)),
                ));
            }
        }
        Ok(hom)
    }

    /// The homomorphism whose Birkhoff dual is `dual`, a partial isotone map
    /// from target join-irreducibles (defined on a lower set) to source
    /// join-irreducibles: `f(x) = {r : dual(r) is defined and in x}`.
    pub fn from_dual(
        source: &FinDistLattice,
        target: &FinDistLattice,
        dual: &[Option<usize>],
    ) -> Result<Self, LatticeError> {
        let values = (0..source.ji_count())
            .map(|p| {
                let bits = dual
                    .iter()
                    .enumerate()
                    .filter(|(_, d)| d.is_some_and(|q| source.ji.leq(q, p)))
                    .map(|(r, _)| r)
                    .collect();
                LatElem(bits)
            })
            .collect();
        Self::from_ji_values(source, target, values)
    }

    /// Samples `f` on principal ideals and checks the result.
    pub fn from_fn(
        source: &FinDistLattice,
        target: &FinDistLattice,
        f: impl Fn(&LatElem) -> LatElem,
    ) -> Result<Self, LatticeError> {
        let values = (0..source.ji_count())
            .map(|p| f(&source.principal(p)))
            .collect();
        Self::from_ji_values(source, target, values)
    }

    pub fn identity(lattice: &FinDistLattice) -> Self {
        Self {
            source: lattice.clone(),
            target: lattice.clone(),
            ji_values: (0..lattice.ji_count()).map(|p| lattice.principal(p)).collect(),
        }
    }

    pub fn source(&self) -> &FinDistLattice {
        &self.source
    }

    pub fn target(&self) -> &FinDistLattice {
        &self.target
    }

    pub fn ji_values(&self) -> &[LatElem] {
        &self.ji_values
    }

    /// `{p : r ∈ f(↓p)}`, an upper set of source join-irreducibles.
    fn preimage_support(&self, r: usize) -> BitSet {
        (0..self.ji_values.len())
            .filter(|&p| self.ji_values[p].0.contains(r))
            .collect()
    }

    pub fn apply(&self, x: &LatElem) -> LatElem {
        let mut out = BitSet::new();
        for p in self.source.ji.maximal(&x.0).iter() {
            out.union_with(&self.ji_values[p].0);
        }
        LatElem(out)
    }

    pub fn preserves_top(&self) -> bool {
        self.target.is_top(&self.apply(&self.source.top()))
    }

    pub fn compose(&self, then: &LatHom) -> LatHom {
        LatHom {
            source: self.source.clone(),
            target: then.target.clone(),
            ji_values: self.ji_values.iter().map(|v| then.apply(v)).collect(),
        }
    }

    /// The isotone map `Ji(target) -> Ji(source)`, `q ↦ min{x : q <= f(x)}`.
    pub fn birkhoff_dual(&self) -> Result<IsotoneMap, LatticeError> {
        let mut table = Vec::with_capacity(self.target.ji_count());
        for q in 0..self.target.ji_count() {
            let min = self.source.ji.minimal(&self.preimage_support(q));
            match min.first() {
                Some(p) => table.push(p),
                None => return Err(LatticeError::NotTopPreserving),
            }
        }
        Ok(IsotoneMap::new(self.target.ji(), self.source.ji(), table)?)
    }

    /// Whether `f` preserves Heyting implication, decided on the dual map:
    /// every `p <= q^f` is the dual image of some `x <= q`.
    pub fn is_heyting(&self) -> Result<bool, LatticeError> {
        let dual = self.birkhoff_dual()?;
        let tj = self.target.ji();
        Ok((0..tj.len()).all(|q| {
            let image: BitSet = tj.down_set(q).iter().map(|x| dual.apply(x)).collect();
            self.source.ji().down_set(dual.apply(q)).is_subset(&image)
        }))
    }

    /// Whether `f` is closed, decided on the dual map: every `p >= q^f` is
    /// the dual image of some `x >= q`.
    pub fn is_closed(&self) -> Result<bool, LatticeError> {
        let dual = self.birkhoff_dual()?;
        let tj = self.target.ji();
        Ok((0..tj.len()).all(|q| {
            let image: BitSet = tj.up_set(q).iter().map(|x| dual.apply(x)).collect();
            self.source.ji().up_set(dual.apply(q)).is_subset(&image)
        }))
    }

    pub fn to_json(&self) -> HomJson {
        HomJson {
            source: self.source.to_json(),
            target: self.target.to_json(),
            values: (0..self.source.ji_count())
                .map(|p| {
                    (
                        self.source.ji.name(p).to_string(),
                        self.target.names_of(&self.ji_values[p]),
                    )
                })
                .collect(),
        }
    }

    pub fn from_json(json: &HomJson) -> Result<Self, LatticeError> {
        let source = FinDistLattice::from_json(&json.source)?;
        let target = FinDistLattice::from_json(&json.target)?;
        let mut values = vec![None; source.ji_count()];
        for (name, names) in &json.values {
            let p = source.ji.index_of(name)?;
            values[p] = Some(target.element_from_names(names)?);
        }
        let values: Option<Vec<LatElem>> = values.into_iter().collect();
        let values = values.ok_or(LatticeError::WrongArity {
            expected: source.ji_count(),
            got: json.values.len(),
        })?;
        Self::from_ji_values(&source, &target, values)
    }
}

/// JSON form of a homomorphism: source, target, and the value of each
/// source join-irreducible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomJson {
    pub source: LatticeJson,
    pub target: LatticeJson,
    pub values: BTreeMap<String, Vec<String>>,
}
