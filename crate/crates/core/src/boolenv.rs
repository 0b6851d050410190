//! The Boolean envelope of a finite distributive lattice, realized as the
//! powerset of its join-irreducibles, and relatively complete subalgebras of
//! finite powerset algebras.

use thiserror::Error;

use crate::bits::BitSet;
use crate::distlat::{FinDistLattice, LatElem, LatHom};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoolEnvError {
    #[error("element {0:?} lies outside the universe of size {1}")]
    OutsideUniverse(BitSet, usize),
    #[error("not a subalgebra: {0}")]
    NotSubalgebra(String),
    #[error("subalgebra has {0} atoms, too many to list its elements")]
    TooLarge(usize),
}

/// An element of an envelope: an arbitrary set of join-irreducibles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EnvElem(pub BitSet);

impl EnvElem {
    pub fn union(&self, o: &EnvElem) -> EnvElem {
        EnvElem(self.0.union(&o.0))
    }

    pub fn intersection(&self, o: &EnvElem) -> EnvElem {
        EnvElem(self.0.intersection(&o.0))
    }

    pub fn difference(&self, o: &EnvElem) -> EnvElem {
        EnvElem(self.0.difference(&o.0))
    }

    pub fn leq(&self, o: &EnvElem) -> bool {
        self.0.is_subset(&o.0)
    }
}

#[derive(Debug, Clone)]
pub struct BoolEnv {
    base: FinDistLattice,
}

impl BoolEnv {
    pub fn new(base: &FinDistLattice) -> Self {
        Self { base: base.clone() }
    }

    pub fn base(&self) -> &FinDistLattice {
        &self.base
    }

    pub fn top(&self) -> EnvElem {
        EnvElem(BitSet::full(self.base.ji_count()))
    }

    pub fn complement(&self, x: &EnvElem) -> EnvElem {
        EnvElem(x.0.complement(self.base.ji_count()))
    }

    pub fn embed(&self, x: &LatElem) -> EnvElem {
        EnvElem(x.bits().clone())
    }

    /// The atom `p ∧ ¬p_*`.
    pub fn atom(&self, p: usize) -> EnvElem {
        EnvElem(BitSet::singleton(p))
    }

    /// `a ∧ ¬b`.
    pub fn diff(&self, a: &LatElem, b: &LatElem) -> EnvElem {
        EnvElem(a.bits().difference(b.bits()))
    }

    pub fn names_of(&self, x: &EnvElem) -> Vec<String> {
        x.0.iter().map(|i| self.base.ji().name(i).to_string()).collect()
    }
}

/// Whether `a1 ∧ ¬b1 <= a2 ∧ ¬b2` in the envelope, decided inside the
/// lattice: `a1 <= a2 ∨ b1` and `a1 ∧ b2 <= b1`.
pub fn diff_leq(a1: &LatElem, b1: &LatElem, a2: &LatElem, b2: &LatElem) -> bool {
    a1.leq(&a2.join(b1)) && a1.meet(b2).leq(b1)
}

/// The join-irreducibles `p <= a` with `p ≰ b`, whose atoms join to
/// `a ∧ ¬b`.
pub fn diff_decompose(a: &LatElem, b: &LatElem) -> BitSet {
    a.bits().difference(b.bits())
}

/// Whether `φ(a) <= φ(b) ∨ c`, checked only on join-irreducibles:
/// `φ(p) <= φ(p_*) ∨ c` for every `p <= a` with `p ≰ b`.
pub fn ineq_criterion(hom: &LatHom, a: &LatElem, b: &LatElem, c: &LatElem) -> bool {
    let source = hom.source();
    diff_decompose(a, b).iter().all(|p| {
        let lower = hom.apply(&source.lower_cover_of(p)).join(c);
        hom.ji_values()[p].leq(&lower)
    })
}

/// The Boolean extension of a 0-lattice homomorphism to the envelopes,
/// stored by its values on atoms.
#[derive(Debug, Clone)]
pub struct EnvHom {
    atom_values: Vec<EnvElem>,
}

impl EnvHom {
    pub fn new(hom: &LatHom) -> Self {
        let source = hom.source();
        let atom_values = (0..source.ji_count())
            .map(|p| {
                let low = hom.apply(&source.lower_cover_of(p));
                EnvElem(hom.ji_values()[p].bits().difference(low.bits()))
            })
            .collect();
        Self { atom_values }
    }

    pub fn apply(&self, x: &EnvElem) -> EnvElem {
        let mut out = BitSet::new();
        for p in x.0.iter() {
            out.union_with(&self.atom_values[p].0);
        }
        EnvElem(out)
    }
}

/// A Boolean subalgebra of the powerset of `{0, ..., n-1}`, kept as its
/// atoms together with the generators it came from.
#[derive(Debug, Clone)]
pub struct BoolSubalgebra {
    universe: usize,
    atoms: Vec<BitSet>,
    generators: Vec<BitSet>,
}

impl BoolSubalgebra {
    /// The subalgebra generated by `generators`. Its atoms are the nonempty
    /// classes of points that no generator separates.
    pub fn generated(universe: usize, generators: &[BitSet]) -> Result<Self, BoolEnvError> {
        for g in generators {
            if g.iter().any(|i| i >= universe) {
                return Err(BoolEnvError::OutsideUniverse(g.clone(), universe));
            }
        }
        let mut atoms: Vec<BitSet> = Vec::new();
        let mut signatures: Vec<Vec<bool>> = Vec::new();
        for i in 0..universe {
            let sig: Vec<bool> = generators.iter().map(|g| g.contains(i)).collect();
            match signatures.iter().position(|s| *s == sig) {
                Some(k) => {
                    atoms[k].insert(i);
                }
                None => {
                    signatures.push(sig);
                    atoms.push(BitSet::singleton(i));
                }
            }
        }
        Ok(Self {
            universe,
            atoms,
            generators: generators.to_vec(),
        })
    }

    /// Accepts an explicit element list, checking closure under the Boolean
    /// operations.
    pub fn from_elements(universe: usize, elements: &[BitSet]) -> Result<Self, BoolEnvError> {
        let alg = Self::generated(universe, elements)?;
        let listed: std::collections::BTreeSet<&BitSet> = elements.iter().collect();
        if listed.len() != 1 << alg.atoms.len().min(30) || !elements.iter().all(|e| alg.contains(e)) {
            return Err(BoolEnvError::NotSubalgebra(format!(
                "{} elements listed, closure has {} atoms",
                listed.len(),
                alg.atoms.len()
            )));
        }
        Ok(alg)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn atoms(&self) -> &[BitSet] {
        &self.atoms
    }

    pub fn generators(&self) -> &[BitSet] {
        &self.generators
    }

    /// All elements, as unions of atoms.
    pub fn elements(&self) -> Result<Vec<BitSet>, BoolEnvError> {
        let k = self.atoms.len();
        if k > 20 {
            return Err(BoolEnvError::TooLarge(k));
        }
        Ok((0u32..1 << k)
            .map(|mask| {
                let mut s = BitSet::new();
                for (i, a) in self.atoms.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        s.union_with(a);
                    }
                }
                s
            })
            .collect())
    }

    pub fn contains(&self, x: &BitSet) -> bool {
        self.atoms
            .iter()
            .all(|a| a.is_subset(x) || a.is_disjoint(x))
            && x.iter().all(|i| i < self.universe)
    }

    /// `(x^A, x_A)`: the least member above `x` and the greatest below.
    pub fn rel_adjoints(&self, x: &BitSet) -> (BitSet, BitSet) {
        let mut upper = BitSet::new();
        let mut lower = BitSet::new();
        for a in &self.atoms {
            if a.intersects(x) {
                upper.union_with(a);
            }
            if a.is_subset(x) {
                lower.union_with(a);
            }
        }
        (upper, lower)
    }
}
