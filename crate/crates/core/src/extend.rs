//! Extending top-faithful homomorphisms `Op(F) → L ∪ {∞}` to a family
//! enlarged by one functional.
//!
//! `D = Op(F)` sits inside `E = Op(F ∪ {e})`; `a = ⟦e > 0⟧` and
//! `b = ⟦e < 0⟧` are disjoint and generate `E` over `D`. An extension with
//! prescribed values `g(a) = α`, `g(b) = β` exists exactly for admissible
//! pairs, and the pair read off a consonance kernel of `f` is admissible.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::BitSet;
use crate::distlat::{FinDistLattice, LatElem, LatHom, LatticeError};
use crate::kernels::{KernelError, KernelFamily};
use crate::semilinear::arrangement::{Arrangement, Sign};
use crate::semilinear::functional::LinFunctional;
use crate::semilinear::op::{op_closure, OpClosure, OpLattice};
use crate::semilinear::SemilinearError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtendError {
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("bound {0} does not lie in the sublattice")]
    BoundOutsideD(&'static str),
    #[error("the sublattice is not closed under implication in the enlarged lattice")]
    NotSemiHeyting,
    #[error("homomorphism is not top-faithful")]
    NotTopFaithful,
    #[error("pair ({0}, {1}) is not admissible")]
    InadmissiblePair(String, String),
    #[error("candidate extension fails: {0}")]
    NoExtension(String),
    #[error("value {0} is not an element of the target")]
    ValueOutsideTarget(String),
}

/// A finite distributive lattice `L` with a new top `∞` adjoined.
///
/// Elements of `L ∪ {∞}` are lower sets of `Ji(L) ∪ {∞}`; `L` embeds as
/// the lower sets avoiding `∞`, with the same bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    base: FinDistLattice,
    extended: FinDistLattice,
    infinity: usize,
}

impl Target {
    pub fn new(base: FinDistLattice) -> Self {
        let pointed = base.ji().adjoin_top();
        Self {
            infinity: pointed.top,
            extended: FinDistLattice::new(pointed.poset),
            base,
        }
    }

    pub fn base(&self) -> &FinDistLattice {
        &self.base
    }

    pub fn extended(&self) -> &FinDistLattice {
        &self.extended
    }

    /// The top element `∞`.
    pub fn infinity(&self) -> LatElem {
        self.extended.top()
    }

    pub fn is_infinite(&self, x: &LatElem) -> bool {
        x.bits().contains(self.infinity)
    }

    pub fn lift(&self, x: &LatElem) -> LatElem {
        x.clone()
    }

    /// The element of `L` with the same bits, if `x ≠ ∞`.
    pub fn lower(&self, x: &LatElem) -> Option<LatElem> {
        (!self.is_infinite(x)).then(|| x.clone())
    }

    pub fn show(&self, x: &LatElem) -> String {
        if self.is_infinite(x) {
            "∞".to_string()
        } else {
            self.base.show(x)
        }
    }

    /// Extends a 0-lattice homomorphism `L → M` by `∞ ↦ ∞`.
    pub fn map_through(&self, phi: &LatHom, to: &Target, x: &LatElem) -> LatElem {
        match self.lower(x) {
            Some(v) => to.lift(&phi.apply(&v)),
            None => to.infinity(),
        }
    }
}

/// A top-faithful homomorphism from an open-set lattice `Op(F)` (with the
/// whole space) to `L ∪ {∞}`.
#[derive(Debug, Clone)]
pub struct PartialHom {
    domain: OpLattice,
    target: Arc<Target>,
    hom: LatHom,
}

impl PartialHom {
    /// Checks the join-extension of cell values, indexed by the domain's
    /// join-irreducibles.
    pub fn from_ji_values(domain: OpLattice, target: Arc<Target>, values: Vec<LatElem>) -> Result<Self, ExtendError> {
        assert!(domain.with_top(), "domains contain the whole space");
        let hom = LatHom::from_ji_values(domain.lattice(), target.extended(), values)?;
        let out = Self { domain, target, hom };
        if !out.is_top_faithful() {
            return Err(ExtendError::NotTopFaithful);
        }
        Ok(out)
    }

    /// The homomorphism with given values on the generators `⟦f > 0⟧`,
    /// `⟦f < 0⟧` (per column, positive first). Each cell's star is a meet of
    /// generators, which fixes the value on join-irreducibles.
    pub fn from_generator_values(
        arr: Arc<Arrangement>,
        target: Arc<Target>,
        values: &[(LatElem, LatElem)],
    ) -> Result<Self, ExtendError> {
        assert_eq!(values.len(), arr.family().len());
        let domain = OpLattice::new(arr.clone(), true);
        let by_cell = Self::cell_values(&arr, &target, values, &target.infinity());
        let ordered = (0..domain.lattice().ji_count())
            .map(|j| by_cell[domain.cell_of_ji(j)].clone())
            .collect();
        let out = Self::from_ji_values(domain, target, ordered)?;
        for (col, (pos, neg)) in values.iter().enumerate() {
            if out.generator_value(col, Sign::Pos) != *pos || out.generator_value(col, Sign::Neg) != *neg {
                return Err(ExtendError::NoExtension(format!(
                    "generator values of {} are not attained",
                    arr.family()[col]
                )));
            }
        }
        Ok(out)
    }

    /// Per cell: the meet of the generator values over its nonzero signs;
    /// `origin` for the origin cell.
    pub fn cell_values(
        arr: &Arrangement,
        target: &Target,
        values: &[(LatElem, LatElem)],
        origin: &LatElem,
    ) -> Vec<LatElem> {
        (0..arr.len())
            .map(|c| {
                if c == arr.origin() {
                    return origin.clone();
                }
                let signs = arr.cell(c).signs;
                let mut acc = target.infinity();
                for (col, (pos, neg)) in values.iter().enumerate() {
                    match signs.get(col) {
                        Sign::Pos => acc = acc.meet(pos),
                        Sign::Neg => acc = acc.meet(neg),
                        Sign::Zero => {}
                    }
                }
                acc
            })
            .collect()
    }

    /// The zero map on the trivial arrangement over `coords`.
    pub fn zero(coords: &[usize], target: Arc<Target>, cap: usize) -> Self {
        let arr = Arc::new(Arrangement::new(coords.iter().copied(), cap));
        Self::from_generator_values(arr, target, &[]).expect("the zero map is a homomorphism")
    }

    pub fn domain(&self) -> &OpLattice {
        &self.domain
    }

    pub fn arrangement(&self) -> &Arc<Arrangement> {
        self.domain.arrangement()
    }

    pub fn target(&self) -> &Arc<Target> {
        &self.target
    }

    pub fn hom(&self) -> &LatHom {
        &self.hom
    }

    /// Value at a cell, i.e. at its open star.
    pub fn cell_value(&self, cell: usize) -> &LatElem {
        let j = self.domain.ji_of_cell(cell).expect("domains contain every cell");
        &self.hom.ji_values()[j]
    }

    /// Value at an open set given by its cells.
    pub fn value_of_cells(&self, cells: &BitSet) -> Result<LatElem, SemilinearError> {
        Ok(self.hom.apply(&self.domain.element_of_cells(cells)?))
    }

    pub fn generator_value(&self, column: usize, sign: Sign) -> LatElem {
        self.hom.apply(&self.domain.generator(column, sign))
    }

    pub fn generator_values(&self) -> Vec<(LatElem, LatElem)> {
        (0..self.arrangement().family().len())
            .map(|c| (self.generator_value(c, Sign::Pos), self.generator_value(c, Sign::Neg)))
            .collect()
    }

    /// `f(x) = ∞` exactly at the whole space.
    pub fn is_top_faithful(&self) -> bool {
        let origin = self.arrangement().origin();
        (0..self.arrangement().len()).all(|c| self.target.is_infinite(self.cell_value(c)) == (c == origin))
    }

    /// The range: joins of cell values, including `0`.
    pub fn range(&self) -> Vec<LatElem> {
        let mut seen: HashMap<LatElem, ()> = HashMap::new();
        let mut out = vec![self.target.extended().bottom()];
        seen.insert(out[0].clone(), ());
        for v in self.hom.ji_values() {
            let mut fresh = Vec::new();
            for x in &out {
                let y = x.join(v);
                if !seen.contains_key(&y) {
                    seen.insert(y.clone(), ());
                    fresh.push(y);
                }
            }
            out.extend(fresh);
        }
        out
    }

    pub fn hits(&self, c: &LatElem) -> bool {
        let range = self.range();
        range.contains(c)
    }

    /// Whether this map extends `other` along the inclusion of its domain.
    pub fn extends(&self, other: &PartialHom) -> Result<bool, ExtendError> {
        let embed = embedding(other.domain(), &self.domain)?;
        let ji = other.domain.lattice().ji_count();
        Ok((0..ji).all(|p| self.hom.apply(&embed.ji_values()[p]) == other.hom.ji_values()[p]))
    }
}

/// For each cell of `fine`, the cell of `coarse` containing it. The family
/// of `coarse` must be part of that of `fine`, on fewer coordinates.
pub fn coarsening(coarse: &Arrangement, fine: &Arrangement) -> Result<Vec<usize>, SemilinearError> {
    if !coarse.coords().iter().all(|c| fine.coords().binary_search(c).is_ok()) {
        return Err(SemilinearError::CoordsNotSubset);
    }
    let cols = coarse
        .family()
        .iter()
        .map(|d| fine.position_of(d).ok_or(SemilinearError::FamilyMismatch))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fine.coarsen(coarse, &cols))
}

/// The inclusion `Op(F) → Op(G)` (or of the versions without the whole
/// space), as a lattice homomorphism on join-irreducibles: the open star of
/// a coarse cell is the set of fine cells lying in it.
pub fn embedding(sub: &OpLattice, ambient: &OpLattice) -> Result<LatHom, ExtendError> {
    let parent = coarsening(sub.arrangement(), ambient.arrangement())?;
    let n = sub.lattice().ji_count();
    let mut values = vec![BitSet::new(); n];
    for (q, &r) in parent.iter().enumerate() {
        let Some(rj) = sub.ji_of_cell(r) else { continue };
        let Some(qj) = ambient.ji_of_cell(q) else { continue };
        for p in sub.lattice().ji().up_set(rj).iter() {
            values[p].insert(qj);
        }
    }
    let values = values.into_iter().map(LatElem::from_lower_set_unchecked).collect();
    Ok(LatHom::from_ji_values(sub.lattice(), ambient.lattice(), values)?)
}

/// The five bounds of an extension problem, in the Boolean algebra of `F`
/// (sets of cells of the smaller arrangement).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub a_upper: BitSet,
    pub b_upper: BitSet,
    pub a_lower: BitSet,
    pub b_lower: BitSet,
    pub ab_lower: BitSet,
}

/// Extending `f: Op(F) → L ∪ {∞}` to `Op(F ∪ {e})`.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    f: PartialHom,
    ambient: OpLattice,
    embed: LatHom,
    parent: Vec<usize>,
    /// Column of `e` in the enlarged family, and the sign there of `a`.
    column: Option<(usize, Sign)>,
    a: BitSet,
    b: BitSet,
}

impl ExtensionProblem {
    /// Sets up the problem for `a = ⟦e > 0⟧`, `b = ⟦e < 0⟧`; `e` may use
    /// coordinates outside the current space, which are then added.
    pub fn new(f: &PartialHom, e: &LinFunctional) -> Result<Self, ExtendError> {
        if !f.is_top_faithful() {
            return Err(ExtendError::NotTopFaithful);
        }
        let arr = f.arrangement();
        let (ambient_arr, column) = match e.direction() {
            None => (arr.with_coords([]), None),
            Some((dir, flipped)) => {
                let wide = arr.with_coords(dir.support());
                let refined = wide.refine(&dir)?;
                let a_sign = if flipped { Sign::Neg } else { Sign::Pos };
                (refined.arrangement, Some((refined.column, a_sign)))
            }
        };
        Self::assemble(f, Arc::new(ambient_arr), column)
    }

    fn assemble(f: &PartialHom, ambient_arr: Arc<Arrangement>, column: Option<(usize, Sign)>) -> Result<Self, ExtendError> {
        let ambient = OpLattice::new(ambient_arr.clone(), true);
        let embed = embedding(f.domain(), &ambient)?;
        if !embed.is_heyting()? {
            return Err(ExtendError::NotSemiHeyting);
        }
        let parent = coarsening(f.arrangement(), &ambient_arr)?;
        let side = |s: Sign| -> BitSet {
            match column {
                Some((col, _)) => (0..ambient_arr.len())
                    .filter(|&q| ambient_arr.cell(q).signs.get(col) == s)
                    .collect(),
                None => BitSet::new(),
            }
        };
        let (a, b) = match column {
            Some((_, s)) => (side(s), side(s.flip())),
            None => (BitSet::new(), BitSet::new()),
        };
        debug_assert!(a.is_disjoint(&b));
        Ok(Self {
            f: f.clone(),
            ambient,
            embed,
            parent,
            column,
            a,
            b,
        })
    }

    pub fn f(&self) -> &PartialHom {
        &self.f
    }

    pub fn ambient(&self) -> &OpLattice {
        &self.ambient
    }

    pub fn embed(&self) -> &LatHom {
        &self.embed
    }

    /// `a` and `b` as cell sets of the enlarged arrangement.
    pub fn sides(&self) -> (&BitSet, &BitSet) {
        (&self.a, &self.b)
    }

    fn target(&self) -> &Target {
        self.f.target()
    }

    fn adjoints(&self, x: &BitSet) -> (BitSet, BitSet) {
        let mut upper = BitSet::new();
        let mut outside = BitSet::new();
        for (q, &p) in self.parent.iter().enumerate() {
            if x.contains(q) {
                upper.insert(p);
            } else {
                outside.insert(p);
            }
        }
        let lower = self.f.arrangement().all_cells().difference(&outside);
        (upper, lower)
    }

    /// Least and largest `F`-cell unions around `a`, `b` and `a ∨ b`. The
    /// upper bounds of `a` and `b` must be open.
    pub fn bounds(&self) -> Result<Bounds, ExtendError> {
        let (a_upper, a_lower) = self.adjoints(&self.a);
        let (b_upper, b_lower) = self.adjoints(&self.b);
        let (ab_upper, ab_lower) = self.adjoints(&self.a.union(&self.b));
        let arr = self.f.arrangement();
        for (name, set) in [("a^B", &a_upper), ("b^B", &b_upper), ("(a∨b)^B", &ab_upper)] {
            if !arr.is_open(set) {
                return Err(ExtendError::BoundOutsideD(name));
            }
        }
        if ab_lower != a_lower.union(&b_lower) {
            return Err(ExtendError::BoundOutsideD("(a∨b)_B"));
        }
        Ok(Bounds {
            a_upper,
            b_upper,
            a_lower,
            b_lower,
            ab_lower,
        })
    }

    /// `BR(f)(x) ≤ c` for a set `x` of cells: every cell `p` in `x` has
    /// `f(p) ≤ f(p_*) ∨ c`.
    fn envelope_below(&self, x: &BitSet, c: &LatElem) -> bool {
        let dom = self.f.domain();
        let lat = dom.lattice();
        x.iter().all(|cell| {
            let p = dom.ji_of_cell(cell).expect("domain has every cell");
            let lower = self.f.hom().apply(&lat.lower_cover_of(p));
            self.f.hom().ji_values()[p].leq(&lower.join(c))
        })
    }

    /// The admissibility conditions for `g(a) = α`, `g(b) = β`.
    pub fn admissible(&self, alpha: &LatElem, beta: &LatElem) -> Result<bool, ExtendError> {
        let t = self.target();
        if t.is_infinite(alpha) || t.is_infinite(beta) {
            return Ok(false);
        }
        let bounds = self.bounds()?;
        let f_of = |cells: &BitSet| self.f.value_of_cells(cells).map_err(ExtendError::from);
        Ok(alpha.leq(&f_of(&bounds.a_upper)?)
            && beta.leq(&f_of(&bounds.b_upper)?)
            && alpha.meet(beta).is_zero()
            && self.envelope_below(&bounds.a_lower, alpha)
            && self.envelope_below(&bounds.b_lower, beta))
    }

    /// The kernel of `f` evaluated at `a` and `b`.
    pub fn kernel_pair(&self) -> Result<(LatElem, LatElem), ExtendError> {
        let kernel = KernelFamily::compute(self.f.hom())?;
        let a = self.ambient.element_of_cells(&self.a)?;
        let b = self.ambient.element_of_cells(&self.b)?;
        Ok((kernel.eval_through(&self.embed, &a), kernel.eval_through(&self.embed, &b)))
    }

    /// The only candidate extension with `g(a) = α`, `g(b) = β`, verified:
    /// the star of a cell on `a`'s side is the star of its parent met with
    /// `a`, and likewise for `b`.
    pub fn try_extend(&self, alpha: &LatElem, beta: &LatElem) -> Result<PartialHom, ExtendError> {
        let arr = self.ambient.arrangement();
        let values: Vec<LatElem> = (0..self.ambient.lattice().ji_count())
            .map(|j| {
                let q = self.ambient.cell_of_ji(j);
                let base = self.f.cell_value(self.parent[q]).clone();
                match self.column {
                    Some((col, a_sign)) => {
                        let s = arr.cell(q).signs.get(col);
                        if s == Sign::Zero {
                            base
                        } else if s == a_sign {
                            base.meet(alpha)
                        } else {
                            base.meet(beta)
                        }
                    }
                    None => base,
                }
            })
            .collect();
        let g = PartialHom::from_ji_values(self.ambient.clone(), self.f.target().clone(), values)
            .map_err(|e| ExtendError::NoExtension(e.to_string()))?;
        let ji = self.f.domain().lattice().ji_count();
        for p in 0..ji {
            if g.hom().apply(&self.embed.ji_values()[p]) != self.f.hom().ji_values()[p] {
                return Err(ExtendError::NoExtension(format!(
                    "restriction differs at {}",
                    self.f.domain().lattice().ji().name(p)
                )));
            }
        }
        if g.value_of_cells(&self.a)? != *alpha || g.value_of_cells(&self.b)? != *beta {
            return Err(ExtendError::NoExtension("prescribed values are not attained".into()));
        }
        Ok(g)
    }

    /// Extends with an admissible pair.
    pub fn extend(&self, alpha: &LatElem, beta: &LatElem) -> Result<PartialHom, ExtendError> {
        if !self.admissible(alpha, beta)? {
            let t = self.target();
            return Err(ExtendError::InadmissiblePair(t.show(alpha), t.show(beta)));
        }
        self.try_extend(alpha, beta)
    }

    /// Extension by evaluating a witnessing term of every element of the
    /// enlarged lattice, then checking joins and meets on all pairs and the
    /// restriction on all elements of the sublattice. Only for small
    /// arrangements; `None` when no extension exists.
    pub fn extend_by_terms(&self, alpha: &LatElem, beta: &LatElem, cap: usize) -> Result<Option<Vec<(BitSet, LatElem)>>, ExtendError> {
        Ok(self.term_oracle(cap)?.extend(alpha, beta))
    }

    /// Enumerates the enlarged lattice once, for repeated use of
    /// [`TermOracle::extend`].
    pub fn term_oracle(&self, cap: usize) -> Result<TermOracle<'_>, ExtendError> {
        let arr = self.ambient.arrangement();
        let closure = op_closure(arr, true, cap)?;
        let sub_arr = self.f.arrangement();
        let sub_cols: Vec<usize> = sub_arr
            .family()
            .iter()
            .map(|d| arr.position_of(d).expect("family grows"))
            .collect();
        let index: HashMap<&BitSet, usize> = closure.elements.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut pairs = Vec::new();
        for i in 0..closure.elements.len() {
            for j in 0..=i {
                let u = index[&closure.elements[i].union(&closure.elements[j])];
                let m = index[&closure.elements[i].intersection(&closure.elements[j])];
                pairs.push([i, j, u, m]);
            }
        }
        // Every open set of the sublattice, lifted, with its value under `f`.
        let sub_closure = op_closure(sub_arr, true, cap)?;
        let mut restricted = Vec::with_capacity(sub_closure.elements.len());
        for s in &sub_closure.elements {
            let lifted: BitSet = self
                .parent
                .iter()
                .enumerate()
                .filter(|(_, p)| s.contains(**p))
                .map(|(q, _)| q)
                .collect();
            restricted.push((index[&lifted], self.f.value_of_cells(s)?));
        }
        let sides = [index[&self.a], index[&self.b]];
        Ok(TermOracle {
            problem: self,
            sub_gens: self.f.generator_values(),
            closure,
            sub_cols,
            pairs,
            restricted,
            sides,
        })
    }
}

/// The enlarged lattice of an [`ExtensionProblem`] with a witnessing term
/// per element and precomputed join and meet tables.
#[derive(Debug)]
pub struct TermOracle<'a> {
    problem: &'a ExtensionProblem,
    closure: OpClosure,
    sub_gens: Vec<(LatElem, LatElem)>,
    sub_cols: Vec<usize>,
    /// `[i, j, i ∨ j, i ∧ j]` over all `j ≤ i`.
    pairs: Vec<[usize; 4]>,
    restricted: Vec<(usize, LatElem)>,
    sides: [usize; 2],
}

impl TermOracle<'_> {
    /// Evaluates every term with the new generators sent to `alpha` and
    /// `beta`; `None` unless the result is a homomorphism extending `f`
    /// with the prescribed values.
    pub fn extend(&self, alpha: &LatElem, beta: &LatElem) -> Option<Vec<(BitSet, LatElem)>> {
        let problem = self.problem;
        let t = problem.f.target();
        let gen_value = |col: usize, sign: Sign| -> LatElem {
            if let Some((c, a_sign)) = problem.column {
                if col == c && !self.sub_cols.contains(&col) {
                    return if sign == a_sign { alpha.clone() } else { beta.clone() };
                }
            }
            let k = self.sub_cols.iter().position(|&c| c == col).expect("old column");
            if sign == Sign::Pos { self.sub_gens[k].0.clone() } else { self.sub_gens[k].1.clone() }
        };
        let values = self.closure.evaluate(
            t.extended().bottom(),
            t.infinity(),
            gen_value,
            |x, y| x.join(y),
            |x, y| x.meet(y),
        );
        let lawful = self
            .pairs
            .iter()
            .all(|&[i, j, u, m]| values[u] == values[i].join(&values[j]) && values[m] == values[i].meet(&values[j]));
        let restricts = self.restricted.iter().all(|(k, v)| values[*k] == *v);
        let attains = values[self.sides[0]] == *alpha && values[self.sides[1]] == *beta;
        (lawful && restricts && attains).then(|| self.closure.elements.iter().cloned().zip(values).collect())
    }
}

/// Adds `e` to the family, extending with the kernel pair.
pub fn domain_step(f: &PartialHom, e: &LinFunctional) -> Result<PartialHom, ExtendError> {
    let problem = ExtensionProblem::new(f, e)?;
    let (alpha, beta) = problem.kernel_pair()?;
    problem.extend(&alpha, &beta)
}

/// The smallest coordinate outside the current space.
pub fn fresh_coordinate(arr: &Arrangement) -> usize {
    (0..).find(|j| arr.coords().binary_search(j).is_err()).expect("coordinates are finite")
}

/// Adds a fresh coordinate `j` and sends `⟦δ_j > 0⟧ ↦ c`, `⟦δ_j < 0⟧ ↦ 0`.
pub fn range_step(f: &PartialHom, c: &LatElem) -> Result<(PartialHom, usize), ExtendError> {
    let t = f.target();
    if t.is_infinite(c) {
        return Err(ExtendError::ValueOutsideTarget(t.show(c)));
    }
    t.extended().element(c.bits().clone())?;
    let j = fresh_coordinate(f.arrangement());
    let problem = ExtensionProblem::new(f, &LinFunctional::coord(j))?;
    let g = problem.extend(c, &t.extended().bottom())?;
    Ok((g, j))
}
