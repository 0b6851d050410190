//! Members of the Boolean algebra generated by open half-spaces of a
//! family: sets of feasible cells.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::arrangement::{Arrangement, Sign, SignVec};
use super::functional::{Direction, FunctionalJson, LinFunctional};
use super::SemilinearError;
use crate::bits::BitSet;

#[derive(Debug, Clone)]
pub struct SemilinearSet {
    arr: Arc<Arrangement>,
    cells: BitSet,
}

impl SemilinearSet {
    pub fn new(arr: Arc<Arrangement>, cells: BitSet) -> Self {
        debug_assert!(cells.iter().all(|c| c < arr.len()));
        Self { arr, cells }
    }

    pub fn empty(arr: &Arc<Arrangement>) -> Self {
        Self::new(arr.clone(), BitSet::new())
    }

    pub fn full(arr: &Arc<Arrangement>) -> Self {
        Self::new(arr.clone(), arr.all_cells())
    }

    /// Cells where `f` has the given sign. `f` must be zero or a multiple of
    /// a family member.
    pub fn halfspace(arr: &Arc<Arrangement>, f: &LinFunctional, sign: Sign) -> Result<Self, SemilinearError> {
        let col = arr
            .column_signs(f)
            .ok_or_else(|| SemilinearError::NotInFamily(f.to_string()))?;
        let cells = col
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == sign)
            .map(|(i, _)| i)
            .collect();
        Ok(Self::new(arr.clone(), cells))
    }

    /// `⟦f > 0⟧` (or `⟦f < 0⟧`) over the arrangement of `f` alone.
    pub fn open_halfspace(coords: &[usize], f: &LinFunctional, sign: Sign, cap: usize) -> Result<Self, SemilinearError> {
        let arr = Arc::new(Arrangement::from_functionals(coords.iter().copied(), std::slice::from_ref(f), cap)?);
        Self::halfspace(&arr, f, sign)
    }

    pub fn arrangement(&self) -> &Arc<Arrangement> {
        &self.arr
    }

    pub fn cells(&self) -> &BitSet {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.cells.len() == self.arr.len()
    }

    fn same_family(&self, other: &Self) -> Result<(), SemilinearError> {
        if Arc::ptr_eq(&self.arr, &other.arr) || *self.arr == *other.arr {
            Ok(())
        } else {
            Err(SemilinearError::FamilyMismatch)
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self, SemilinearError> {
        self.same_family(other)?;
        Ok(Self::new(self.arr.clone(), self.cells.union(&other.cells)))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, SemilinearError> {
        self.same_family(other)?;
        Ok(Self::new(self.arr.clone(), self.cells.intersection(&other.cells)))
    }

    pub fn complement(&self) -> Self {
        Self::new(self.arr.clone(), self.cells.complement(self.arr.len()))
    }

    pub fn leq(&self, other: &Self) -> Result<bool, SemilinearError> {
        self.same_family(other)?;
        Ok(self.cells.is_subset(&other.cells))
    }

    /// Rewrites the set over a finer arrangement; `columns[i]` is the
    /// position there of this family's `i`-th functional.
    pub fn lift(&self, fine: &Arc<Arrangement>, columns: &[usize]) -> Self {
        let map = fine.coarsen(&self.arr, columns);
        let cells = map
            .iter()
            .enumerate()
            .filter(|(_, c)| self.cells.contains(**c))
            .map(|(i, _)| i)
            .collect();
        Self::new(fine.clone(), cells)
    }

    /// Rewrites the set over a finer arrangement, locating this family in it.
    pub fn lift_to(&self, fine: &Arc<Arrangement>) -> Result<Self, SemilinearError> {
        let columns = self
            .arr
            .family()
            .iter()
            .map(|d| fine.position_of(d).ok_or(SemilinearError::FamilyMismatch))
            .collect::<Result<Vec<_>, _>>()?;
        if !self.arr.coords().iter().all(|c| fine.coords().binary_search(c).is_ok()) {
            return Err(SemilinearError::CoordsNotSubset);
        }
        Ok(self.lift(fine, &columns))
    }

    /// Both sets over a common refinement.
    pub fn align(&self, other: &Self) -> Result<(Self, Self), SemilinearError> {
        if self.same_family(other).is_ok() {
            return Ok((self.clone(), Self::new(self.arr.clone(), other.cells.clone())));
        }
        let (arr, ca, cb) = Arrangement::common(&self.arr, &other.arr)?;
        let arr = Arc::new(arr);
        Ok((self.lift(&arr, &ca), other.lift(&arr, &cb)))
    }

    pub fn union_any(&self, other: &Self) -> Result<Self, SemilinearError> {
        let (a, b) = self.align(other)?;
        a.union(&b)
    }

    pub fn intersection_any(&self, other: &Self) -> Result<Self, SemilinearError> {
        let (a, b) = self.align(other)?;
        a.intersection(&b)
    }

    /// Inclusion of the denoted point sets, whatever the families.
    pub fn subset_of(&self, other: &Self) -> Result<bool, SemilinearError> {
        let (a, b) = self.align(other)?;
        a.leq(&b)
    }

    /// Equality of the denoted point sets, whatever the families.
    pub fn same_points(&self, other: &Self) -> Result<bool, SemilinearError> {
        let (a, b) = self.align(other)?;
        Ok(a.cells == b.cells)
    }

    pub fn contains_point(&self, point: &BTreeMap<usize, BigRational>) -> bool {
        self.cells.contains(self.arr.locate(point))
    }

    /// Whether the set is a union of open stars, i.e. belongs to the
    /// lattice generated by the open half-spaces and the whole space.
    pub fn is_open(&self) -> bool {
        self.arr.is_open(&self.cells)
    }

    pub fn to_json(&self) -> SetJson {
        let n = self.arr.family().len();
        let mut cells: Vec<String> = self
            .cells
            .iter()
            .map(|c| self.arr.cell(c).signs.render(n))
            .collect();
        cells.sort();
        SetJson {
            coords: self.arr.coords().to_vec(),
            family: self
                .arr
                .family()
                .iter()
                .map(|d| d.to_functional().to_json())
                .collect(),
            cells,
        }
    }

    pub fn from_json(json: &SetJson, cap: usize) -> Result<Self, SemilinearError> {
        let mut dirs: Vec<(Direction, bool)> = Vec::new();
        for f in &json.family {
            let f = LinFunctional::from_json(f)?;
            let d = f
                .direction()
                .ok_or_else(|| SemilinearError::Parse("zero functional in family".into()))?;
            if dirs.iter().any(|(e, _)| *e == d.0) {
                return Err(SemilinearError::Parse(format!("repeated functional {f}")));
            }
            dirs.push(d);
        }
        let plain: Vec<Direction> = dirs.iter().map(|(d, _)| d.clone()).collect();
        let arr = Arc::new(Arrangement::build(json.coords.iter().copied(), &plain, cap)?);
        let mut cells = BitSet::new();
        for s in &json.cells {
            if s.chars().count() != dirs.len() {
                return Err(SemilinearError::Parse(format!(
                    "sign string {s:?} does not match a family of {}",
                    dirs.len()
                )));
            }
            let given = SignVec::parse(s)?;
            // Stored signs refer to the functionals as written.
            let mut v = SignVec::default();
            for (i, (_, flipped)) in dirs.iter().enumerate() {
                let sg = given.get(i);
                v = v.with(i, if *flipped { sg.flip() } else { sg });
            }
            let idx = arr
                .index_of(&v)
                .ok_or_else(|| SemilinearError::InfeasibleCell(s.clone()))?;
            cells.insert(idx);
        }
        Ok(Self::new(arr, cells))
    }
}

/// JSON form: coordinates, family and cells as sign strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetJson {
    #[serde(default)]
    pub coords: Vec<usize>,
    pub family: Vec<FunctionalJson>,
    pub cells: Vec<String>,
}
