//! Consonance kernels of homomorphisms out of finite distributive lattices.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bits::BitSet;
use crate::distlat::{LatElem, LatHom, LatticeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("range is not consonant: {{{}}} and {{{}}} have no witness", .0.join(","), .1.join(","))]
    NotConsonant(Vec<String>, Vec<String>),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A pair of source elements at which a kernel identity fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelIdentityFailure {
    pub x: LatElem,
    pub y: LatElem,
}

/// A family `(e_p)` indexed by the source join-irreducibles with
/// `f(p) = f(p_*) ∨ e_p` and `e_p ∧ e_q = 0` for incomparable `p`, `q`.
#[derive(Debug, Clone)]
pub struct KernelFamily {
    hom: LatHom,
    values: Vec<LatElem>,
}

impl KernelFamily {
    /// Builds the minimal family `e_p = f(p) ∖ f(p_*)`. If two incomparable
    /// join-irreducibles get overlapping values, their images form a
    /// non-consonant pair.
    pub fn compute(hom: &LatHom) -> Result<Self, KernelError> {
        let source = hom.source();
        let target = hom.target();
        let values: Vec<LatElem> = (0..source.ji_count())
            .map(|p| {
                let lower = hom.apply(&source.lower_cover_of(p));
                target.dual_diff(&hom.ji_values()[p], &lower)
            })
            .collect();
        let ji = source.ji();
        for p in 0..ji.len() {
            for q in p + 1..ji.len() {
                if !ji.comparable(p, q) && !values[p].meet(&values[q]).is_zero() {
                    return Err(KernelError::NotConsonant(
                        target.names_of(&hom.ji_values()[p]),
                        target.names_of(&hom.ji_values()[q]),
                    ));
                }
            }
        }
        let kernel = Self {
            hom: hom.clone(),
            values,
        };
        debug_assert!(kernel.is_valid());
        Ok(kernel)
    }

    /// Wraps an arbitrary family without checking it.
    pub fn from_values_unchecked(hom: &LatHom, values: Vec<LatElem>) -> Self {
        Self {
            hom: hom.clone(),
            values,
        }
    }

    pub fn hom(&self) -> &LatHom {
        &self.hom
    }

    pub fn values(&self) -> &[LatElem] {
        &self.values
    }

    /// Both defining conditions.
    pub fn is_valid(&self) -> bool {
        let source = self.hom.source();
        let ji = source.ji();
        let decomposes = (0..ji.len()).all(|p| {
            let lower = self.hom.apply(&source.lower_cover_of(p));
            lower.join(&self.values[p]) == self.hom.ji_values()[p]
        });
        let disjoint = (0..ji.len()).all(|p| {
            (0..ji.len())
                .all(|q| ji.comparable(p, q) || self.values[p].meet(&self.values[q]).is_zero())
        });
        decomposes && disjoint
    }

    /// `⋁{e_p : p ∈ set}`.
    pub fn join_over(&self, set: &BitSet) -> LatElem {
        set.iter()
            .fold(self.hom.target().bottom(), |acc, p| acc.join(&self.values[p]))
    }

    /// `x ⊘ y`: the join of `e_p` over `p <= x` with `p ≰ y`.
    pub fn diff_op(&self, x: &LatElem, y: &LatElem) -> LatElem {
        self.join_over(&x.bits().difference(y.bits()))
    }

    /// Checks `f(x) = f(x ∧ y) ∨ (x ⊘ y)`, `(x ⊘ y) ∧ (y ⊘ x) = 0` and
    /// `f(x ∧ y) = f(x) ∧ f(y)` on every pair of source elements.
    pub fn check_identities(&self) -> Result<(), KernelIdentityFailure> {
        let els = self
            .hom
            .source()
            .elements()
            .expect("kernel sources are small");
        let images: Vec<LatElem> = els.iter().map(|x| self.hom.apply(x)).collect();
        for (i, x) in els.iter().enumerate() {
            for (j, y) in els.iter().enumerate() {
                let xy = x.meet(y);
                let f_meet = self.hom.apply(&xy);
                let d = self.diff_op(x, y);
                let ok = images[i] == f_meet.join(&d)
                    && d.meet(&self.diff_op(y, x)).is_zero()
                    && f_meet == images[i].meet(&images[j]);
                if !ok {
                    return Err(KernelIdentityFailure {
                        x: x.clone(),
                        y: y.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `⋁{e_p : p <= p_* ∨ a}` where the test is delegated to `below`,
    /// which receives `p` and decides `p <= p_* ∨ a` in the ambient lattice.
    pub fn eval_ambient(&self, below: impl Fn(usize) -> bool) -> LatElem {
        let set: BitSet = (0..self.values.len()).filter(|&p| below(p)).collect();
        self.join_over(&set)
    }

    /// The ambient evaluation for a source lattice embedded into a larger
    /// lattice by `embed`.
    pub fn eval_through(&self, embed: &LatHom, a: &LatElem) -> LatElem {
        let source = self.hom.source();
        self.eval_ambient(|p| {
            let lower = embed.apply(&source.lower_cover_of(p)).join(a);
            embed.ji_values()[p].leq(&lower)
        })
    }

    /// JSON form: join-irreducible name to target element.
    pub fn to_json(&self) -> BTreeMap<String, Vec<String>> {
        let source = self.hom.source();
        let target = self.hom.target();
        (0..self.values.len())
            .map(|p| {
                (
                    source.ji().name(p).to_string(),
                    target.names_of(&self.values[p]),
                )
            })
            .collect()
    }
}
