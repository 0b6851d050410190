//! The lattices of open sets generated by the half-spaces `⟦f > 0⟧`,
//! `⟦f < 0⟧` of a family, with or without the whole space adjoined.
//!
//! An open set is a union of open stars of cells, so the lattice is the
//! lattice of lower sets of the cells ordered by star inclusion. The origin
//! cell sits on top and belongs only to the whole space.

use std::collections::HashMap;
use std::sync::Arc;

use super::arrangement::{Arrangement, Sign};
use super::set::SemilinearSet;
use super::SemilinearError;
use crate::bits::BitSet;
use crate::distlat::{FinDistLattice, LatElem};

/// Default bound on feasible cells for explicit closure enumeration.
pub const CLOSURE_CELL_CAP: usize = 20;

#[derive(Debug, Clone)]
pub struct OpLattice {
    arr: Arc<Arrangement>,
    with_top: bool,
    lattice: FinDistLattice,
    /// Join-irreducible index to cell.
    members: Vec<usize>,
    /// Cell to join-irreducible index.
    ji_of_cell: Vec<Option<usize>>,
}

impl OpLattice {
    pub fn new(arr: Arc<Arrangement>, with_top: bool) -> Self {
        let (poset, members) = arr.star_poset(with_top);
        let mut ji_of_cell = vec![None; arr.len()];
        for (j, &c) in members.iter().enumerate() {
            ji_of_cell[c] = Some(j);
        }
        Self {
            lattice: FinDistLattice::new(poset),
            arr,
            with_top,
            members,
            ji_of_cell,
        }
    }

    pub fn arrangement(&self) -> &Arc<Arrangement> {
        &self.arr
    }

    pub fn with_top(&self) -> bool {
        self.with_top
    }

    pub fn lattice(&self) -> &FinDistLattice {
        &self.lattice
    }

    pub fn cell_of_ji(&self, j: usize) -> usize {
        self.members[j]
    }

    pub fn ji_of_cell(&self, c: usize) -> Option<usize> {
        self.ji_of_cell[c]
    }

    /// Converts an open set to a lattice element.
    pub fn element_of(&self, set: &SemilinearSet) -> Result<LatElem, SemilinearError> {
        let set = if Arc::ptr_eq(set.arrangement(), &self.arr) || **set.arrangement() == *self.arr {
            set.cells().clone()
        } else {
            return Err(SemilinearError::FamilyMismatch);
        };
        self.element_of_cells(&set)
    }

    pub fn element_of_cells(&self, cells: &BitSet) -> Result<LatElem, SemilinearError> {
        if !self.arr.is_open(cells) {
            return Err(SemilinearError::NotOpen);
        }
        let mut bits = BitSet::new();
        for c in cells.iter() {
            match self.ji_of_cell[c] {
                Some(j) => {
                    bits.insert(j);
                }
                None => return Err(SemilinearError::NotOpen),
            }
        }
        Ok(LatElem::from_lower_set_unchecked(bits))
    }

    pub fn cells_of(&self, x: &LatElem) -> BitSet {
        x.bits().iter().map(|j| self.members[j]).collect()
    }

    pub fn set_of(&self, x: &LatElem) -> SemilinearSet {
        SemilinearSet::new(self.arr.clone(), self.cells_of(x))
    }

    /// `⟦f > 0⟧` or `⟦f < 0⟧` for the family member at `column`.
    pub fn generator(&self, column: usize, sign: Sign) -> LatElem {
        let cells: BitSet = (0..self.arr.len())
            .filter(|&c| self.arr.cell(c).signs.get(column) == sign)
            .collect();
        self.element_of_cells(&cells).expect("open half-spaces are open")
    }
}

/// A term over the generators, stored as a node referring to earlier
/// elements of an enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpTerm {
    Bottom,
    Top,
    Gen { column: usize, sign: Sign },
    Join(usize, usize),
    Meet(usize, usize),
}

/// Every element of an open-set lattice with a witnessing term.
#[derive(Debug, Clone)]
pub struct OpClosure {
    pub lattice: OpLattice,
    pub elements: Vec<BitSet>,
    pub terms: Vec<OpTerm>,
}

impl OpClosure {
    /// Evaluates the witnessing term of every element under an assignment
    /// of values to generators, in an arbitrary lattice given by its
    /// operations.
    pub fn evaluate<V: Clone>(
        &self,
        bottom: V,
        top: V,
        gen: impl Fn(usize, Sign) -> V,
        join: impl Fn(&V, &V) -> V,
        meet: impl Fn(&V, &V) -> V,
    ) -> Vec<V> {
        let mut out: Vec<V> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let v = match *t {
                OpTerm::Bottom => bottom.clone(),
                OpTerm::Top => top.clone(),
                OpTerm::Gen { column, sign } => gen(column, sign),
                OpTerm::Join(a, b) => join(&out[a], &out[b]),
                OpTerm::Meet(a, b) => meet(&out[a], &out[b]),
            };
            out.push(v);
        }
        out
    }
}

/// Enumerates the lattice generated by the open half-spaces (and the whole
/// space when `with_top`) by closing under binary joins and meets.
pub fn op_closure(arr: &Arc<Arrangement>, with_top: bool, cap: usize) -> Result<OpClosure, SemilinearError> {
    if arr.len() > cap {
        return Err(SemilinearError::CellCapExceeded {
            cap,
            needed: arr.len(),
        });
    }
    let lattice = OpLattice::new(arr.clone(), with_top);
    let mut elements: Vec<BitSet> = Vec::new();
    let mut terms = Vec::new();
    let mut seen: HashMap<BitSet, usize> = HashMap::new();
    let mut add = |set: BitSet, term: OpTerm, elements: &mut Vec<BitSet>, terms: &mut Vec<OpTerm>| {
        if !seen.contains_key(&set) {
            seen.insert(set.clone(), elements.len());
            elements.push(set);
            terms.push(term);
        }
    };
    add(BitSet::new(), OpTerm::Bottom, &mut elements, &mut terms);
    if with_top {
        add(arr.all_cells(), OpTerm::Top, &mut elements, &mut terms);
    }
    for column in 0..arr.family().len() {
        for sign in [Sign::Pos, Sign::Neg] {
            let cells: BitSet = (0..arr.len())
                .filter(|&c| arr.cell(c).signs.get(column) == sign)
                .collect();
            add(cells, OpTerm::Gen { column, sign }, &mut elements, &mut terms);
        }
    }
    let mut done = 0;
    while done < elements.len() {
        let i = done;
        for j in 0..=i {
            let u = elements[i].union(&elements[j]);
            add(u, OpTerm::Join(i, j), &mut elements, &mut terms);
            let m = elements[i].intersection(&elements[j]);
            add(m, OpTerm::Meet(i, j), &mut elements, &mut terms);
        }
        done += 1;
    }
    Ok(OpClosure {
        lattice,
        elements,
        terms,
    })
}
