//! Central hyperplane arrangements over `Q^J`: the feasible sign cells of a
//! finite family of functionals, each with a rational witness point.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::fm::{self, Rel, Row};
use super::functional::{Direction, LinFunctional};
use super::SemilinearError;
use crate::bits::BitSet;
use crate::poset::FinPoset;

/// The largest family an arrangement can hold.
pub const MAX_FAMILY: usize = 128;

/// Default bound on the number of feasible cells of one arrangement.
pub const DEFAULT_CELL_CAP: usize = 1 << 14;

/// The cell cap, overridable through `CEVIAN_CELL_CAP`.
pub fn cell_cap_from_env() -> usize {
    std::env::var("CEVIAN_CELL_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CELL_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(v: &BigRational) -> Sign {
        if v.is_positive() {
            Sign::Pos
        } else if v.is_negative() {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }

    pub const ALL: [Sign; 3] = [Sign::Neg, Sign::Zero, Sign::Pos];

    pub fn slot(self) -> usize {
        self as usize
    }
}

/// A sign vector over a family of at most [`MAX_FAMILY`] functionals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SignVec {
    pos: u128,
    neg: u128,
}

impl SignVec {
    pub fn get(&self, i: usize) -> Sign {
        if self.pos >> i & 1 == 1 {
            Sign::Pos
        } else if self.neg >> i & 1 == 1 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn with(mut self, i: usize, s: Sign) -> SignVec {
        self.pos &= !(1 << i);
        self.neg &= !(1 << i);
        match s {
            Sign::Pos => self.pos |= 1 << i,
            Sign::Neg => self.neg |= 1 << i,
            Sign::Zero => {}
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.pos == 0 && self.neg == 0
    }

    /// Whether `other` agrees with `self` wherever `self` is nonzero, i.e.
    /// whether `other` lies in the open star of `self`.
    pub fn star_contains(&self, other: &SignVec) -> bool {
        self.pos & !other.pos == 0 && self.neg & !other.neg == 0
    }

    /// The signs at the given positions, renumbered `0..positions.len()`.
    pub fn restrict(&self, positions: &[usize]) -> SignVec {
        let mut out = SignVec::default();
        for (k, &p) in positions.iter().enumerate() {
            out = out.with(k, self.get(p));
        }
        out
    }

    pub fn render(&self, len: usize) -> String {
        (0..len).map(|i| self.get(i).symbol()).collect()
    }

    pub fn parse(s: &str) -> Result<SignVec, SemilinearError> {
        let mut v = SignVec::default();
        for (i, ch) in s.chars().enumerate() {
            let sign = match ch {
                '+' => Sign::Pos,
                '-' => Sign::Neg,
                '0' => Sign::Zero,
                _ => return Err(SemilinearError::Parse(format!("bad sign string {s:?}"))),
            };
            if i >= MAX_FAMILY {
                return Err(SemilinearError::FamilyTooLarge(i + 1));
            }
            v = v.with(i, sign);
        }
        Ok(v)
    }
}

impl fmt::Debug for SignVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let len = 128 - (self.pos | self.neg).leading_zeros() as usize;
        write!(f, "[{}]", self.render(len))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub signs: SignVec,
    /// A point of the cell, indexed like the arrangement's coordinates.
    pub witness: Vec<BigRational>,
}

/// The feasible cells of a family of functionals on `Q^coords`.
#[derive(Clone)]
pub struct Arrangement {
    coords: Vec<usize>,
    family: Vec<Direction>,
    dense: Vec<Vec<BigInt>>,
    cells: Vec<Cell>,
    index: HashMap<SignVec, usize>,
    cap: usize,
}

/// The result of adding one functional: the finer arrangement and how its
/// cells sit inside the old ones.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub arrangement: Arrangement,
    /// New cell to the old cell containing it.
    pub parent: Vec<usize>,
    /// Old cell to its pieces, indexed by [`Sign`] of the new functional.
    pub children: Vec<[Option<usize>; 3]>,
    /// Position of the new functional in the family.
    pub column: usize,
}

impl Arrangement {
    /// The trivial arrangement: no functionals, a single cell.
    pub fn new(coords: impl IntoIterator<Item = usize>, cap: usize) -> Self {
        let mut coords: Vec<usize> = coords.into_iter().collect();
        coords.sort_unstable();
        coords.dedup();
        let cell = Cell {
            signs: SignVec::default(),
            witness: vec![BigRational::zero(); coords.len()],
        };
        Self {
            coords,
            family: Vec::new(),
            dense: Vec::new(),
            index: HashMap::from([(cell.signs, 0)]),
            cells: vec![cell],
            cap,
        }
    }

    /// The arrangement of `family` on the given coordinates, enlarged by
    /// the supports of the family.
    pub fn build(
        coords: impl IntoIterator<Item = usize>,
        family: &[Direction],
        cap: usize,
    ) -> Result<Self, SemilinearError> {
        let mut all: Vec<usize> = coords.into_iter().collect();
        for d in family {
            all.extend(d.support());
        }
        let mut arr = Self::new(all, cap);
        for d in family {
            arr = arr.refine(d)?.arrangement;
        }
        Ok(arr)
    }

    /// Like [`Arrangement::build`] from arbitrary functionals; zero
    /// functionals and repeated directions are dropped.
    pub fn from_functionals(
        coords: impl IntoIterator<Item = usize>,
        functionals: &[LinFunctional],
        cap: usize,
    ) -> Result<Self, SemilinearError> {
        let mut dirs: Vec<Direction> = Vec::new();
        for f in functionals {
            if let Some((d, _)) = f.direction() {
                if !dirs.contains(&d) {
                    dirs.push(d);
                }
            }
        }
        Self::build(coords, &dirs, cap)
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn family(&self) -> &[Direction] {
        &self.family
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn index_of(&self, signs: &SignVec) -> Option<usize> {
        self.index.get(signs).copied()
    }

    /// The cell where every functional vanishes.
    pub fn origin(&self) -> usize {
        self.index[&SignVec::default()]
    }

    pub fn all_cells(&self) -> BitSet {
        BitSet::full(self.cells.len())
    }

    pub fn position_of(&self, d: &Direction) -> Option<usize> {
        self.family.iter().position(|x| x == d)
    }

    /// Signs of `f` on the cells, or `None` if `f` is neither zero nor a
    /// multiple of a family member.
    pub fn column_signs(&self, f: &LinFunctional) -> Option<Vec<Sign>> {
        match f.direction() {
            None => Some(vec![Sign::Zero; self.cells.len()]),
            Some((d, flipped)) => {
                let col = self.position_of(&d)?;
                Some(
                    self.cells
                        .iter()
                        .map(|c| {
                            let s = c.signs.get(col);
                            if flipped {
                                s.flip()
                            } else {
                                s
                            }
                        })
                        .collect(),
                )
            }
        }
    }

    fn dense_of(&self, d: &Direction) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.coords.len()];
        for (i, c) in d.terms() {
            let pos = self
                .coords
                .binary_search(i)
                .expect("functional support inside the coordinates");
            v[pos] = c.clone();
        }
        v
    }

    fn eval_dense(dense: &[BigInt], x: &[BigRational]) -> BigRational {
        dense
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .fold(BigRational::zero(), |acc, (c, v)| {
                acc + BigRational::from_integer(c.clone()) * v
            })
    }

    /// Row system describing a cell.
    pub fn cell_rows(&self, signs: &SignVec) -> Vec<Row> {
        self.dense
            .iter()
            .enumerate()
            .map(|(i, d)| match signs.get(i) {
                Sign::Pos => Row::homogeneous(d.clone(), Rel::Gt),
                Sign::Neg => Row::homogeneous(d.iter().map(|c| -c).collect(), Rel::Gt),
                Sign::Zero => Row::homogeneous(d.clone(), Rel::Eq),
            })
            .collect()
    }

    /// Signs of all family members at a point given by coordinate values.
    pub fn signs_at(&self, point: &BTreeMap<usize, BigRational>) -> SignVec {
        let x: Vec<BigRational> = self
            .coords
            .iter()
            .map(|c| point.get(c).cloned().unwrap_or_else(BigRational::zero))
            .collect();
        self.dense
            .iter()
            .enumerate()
            .fold(SignVec::default(), |v, (i, d)| {
                v.with(i, Sign::of(&Self::eval_dense(d, &x)))
            })
    }

    /// The cell containing a point.
    pub fn locate(&self, point: &BTreeMap<usize, BigRational>) -> usize {
        self.index[&self.signs_at(point)]
    }

    /// The witness of a cell as a coordinate map.
    pub fn witness_point(&self, cell: usize) -> BTreeMap<usize, BigRational> {
        self.coords
            .iter()
            .copied()
            .zip(self.cells[cell].witness.iter().cloned())
            .collect()
    }

    /// The same arrangement read in a larger coordinate space.
    pub fn with_coords(&self, extra: impl IntoIterator<Item = usize>) -> Arrangement {
        let mut coords = self.coords.clone();
        coords.extend(extra);
        coords.sort_unstable();
        coords.dedup();
        if coords == self.coords {
            return self.clone();
        }
        let pos: Vec<usize> = self
            .coords
            .iter()
            .map(|c| coords.binary_search(c).expect("superset"))
            .collect();
        let widen = |w: &[BigRational]| {
            let mut out = vec![BigRational::zero(); coords.len()];
            for (k, v) in w.iter().enumerate() {
                out[pos[k]] = v.clone();
            }
            out
        };
        let cells = self
            .cells
            .iter()
            .map(|c| Cell {
                signs: c.signs,
                witness: widen(&c.witness),
            })
            .collect();
        let mut arr = Arrangement {
            coords,
            family: self.family.clone(),
            dense: Vec::new(),
            cells,
            index: self.index.clone(),
            cap: self.cap,
        };
        arr.dense = arr.family.iter().map(|d| arr.dense_of(d)).collect();
        arr
    }

    /// Coordinates not used by any family member.
    fn free_coords(&self) -> BitSet {
        let mut used = BitSet::new();
        for d in &self.dense {
            for (k, c) in d.iter().enumerate() {
                if !c.is_zero() {
                    used.insert(k);
                }
            }
        }
        used.complement(self.coords.len())
    }

    /// A point beyond `center` on the ray from `from`, still inside the
    /// (relatively open) cell containing both.
    fn beyond(&self, signs: &SignVec, center: &[BigRational], from: &[BigRational]) -> Vec<BigRational> {
        let mut t = BigRational::one();
        for (i, d) in self.dense.iter().enumerate() {
            let s = signs.get(i);
            if s == Sign::Zero {
                continue;
            }
            let mut fc = Self::eval_dense(d, center);
            let mut ff = Self::eval_dense(d, from);
            if s == Sign::Neg {
                fc = -fc;
                ff = -ff;
            }
            if ff > fc {
                let bound = &fc / (&ff - &fc);
                let half = bound / BigRational::from_integer(2.into());
                if half < t {
                    t = half;
                }
            }
        }
        center
            .iter()
            .zip(from)
            .map(|(c, f)| c + &t * (c - f))
            .collect()
    }

    /// Adds a functional, splitting every cell it crosses.
    pub fn refine(&self, g: &Direction) -> Result<Refinement, SemilinearError> {
        if let Some(col) = self.position_of(g) {
            let children = self
                .cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let mut ch = [None; 3];
                    ch[c.signs.get(col).slot()] = Some(i);
                    ch
                })
                .collect();
            return Ok(Refinement {
                arrangement: self.clone(),
                parent: (0..self.cells.len()).collect(),
                children,
                column: col,
            });
        }
        if self.family.len() >= MAX_FAMILY {
            return Err(SemilinearError::FamilyTooLarge(self.family.len() + 1));
        }
        let base = self.with_coords(g.support());
        let col = base.family.len();
        let gd = base.dense_of(g);
        let free = base.free_coords();
        let fresh = (0..base.coords.len()).find(|&k| free.contains(k) && !gd[k].is_zero());

        let mut pieces: Vec<(usize, Sign, Vec<BigRational>)> = Vec::new();
        for (ci, cell) in base.cells.iter().enumerate() {
            let w = &cell.witness;
            let value = Self::eval_dense(&gd, w);
            if let Some(k) = fresh {
                let a = BigRational::from_integer(gd[k].clone());
                for s in Sign::ALL {
                    let target = match s {
                        Sign::Neg => -BigRational::one(),
                        Sign::Zero => BigRational::zero(),
                        Sign::Pos => BigRational::one(),
                    };
                    let mut p = w.clone();
                    p[k] += (target - &value) / &a;
                    pieces.push((ci, s, p));
                }
                continue;
            }
            let s = Sign::of(&value);
            let mut rows = base.cell_rows(&cell.signs);
            if s == Sign::Zero {
                rows.push(Row::homogeneous(gd.clone(), Rel::Gt));
                match fm::feasible(base.coords.len(), &rows) {
                    Some(up) => {
                        let down = base.beyond(&cell.signs, w, &up);
                        pieces.push((ci, Sign::Neg, down));
                        pieces.push((ci, Sign::Zero, w.clone()));
                        pieces.push((ci, Sign::Pos, up));
                    }
                    None => pieces.push((ci, Sign::Zero, w.clone())),
                }
            } else {
                rows.push(Row::homogeneous(gd.clone(), Rel::Eq));
                match fm::feasible(base.coords.len(), &rows) {
                    Some(zero) => {
                        let other = base.beyond(&cell.signs, &zero, w);
                        let (neg, pos) = if s == Sign::Pos {
                            (other, w.clone())
                        } else {
                            (w.clone(), other)
                        };
                        pieces.push((ci, Sign::Neg, neg));
                        pieces.push((ci, Sign::Zero, zero));
                        pieces.push((ci, Sign::Pos, pos));
                    }
                    None => pieces.push((ci, s, w.clone())),
                }
            }
        }
        if pieces.len() > self.cap {
            return Err(SemilinearError::CellCapExceeded {
                cap: self.cap,
                needed: pieces.len(),
            });
        }
        let mut cells = Vec::with_capacity(pieces.len());
        let mut index = HashMap::with_capacity(pieces.len());
        let mut parent = Vec::with_capacity(pieces.len());
        let mut children = vec![[None; 3]; base.cells.len()];
        for (ci, s, witness) in pieces {
            let signs = base.cells[ci].signs.with(col, s);
            debug_assert_eq!(Sign::of(&Self::eval_dense(&gd, &witness)), s);
            children[ci][s.slot()] = Some(cells.len());
            index.insert(signs, cells.len());
            parent.push(ci);
            cells.push(Cell { signs, witness });
        }
        let mut family = base.family.clone();
        family.push(g.clone());
        let mut dense = base.dense.clone();
        dense.push(gd);
        Ok(Refinement {
            arrangement: Arrangement {
                coords: base.coords,
                family,
                dense,
                cells,
                index,
                cap: self.cap,
            },
            parent,
            children,
            column: col,
        })
    }

    /// Refines by every direction of `others` in turn; returns the result
    /// and the position of each of `others` in its family.
    pub fn refine_all(&self, others: &[Direction]) -> Result<(Arrangement, Vec<usize>), SemilinearError> {
        let mut arr = self.clone();
        let mut cols = Vec::with_capacity(others.len());
        for d in others {
            let r = arr.refine(d)?;
            cols.push(r.column);
            arr = r.arrangement;
        }
        Ok((arr, cols))
    }

    /// A common refinement of two arrangements, with the positions of each
    /// one's family inside it.
    pub fn common(a: &Arrangement, b: &Arrangement) -> Result<(Arrangement, Vec<usize>, Vec<usize>), SemilinearError> {
        let base = a.with_coords(b.coords.iter().copied());
        let (arr, cols_b) = base.refine_all(&b.family)?;
        let cols_a = (0..a.family.len()).collect();
        Ok((arr, cols_a, cols_b))
    }

    /// For each cell here, the cell of `coarse` containing it, where
    /// `columns[i]` is the position here of `coarse`'s `i`-th functional.
    pub fn coarsen(&self, coarse: &Arrangement, columns: &[usize]) -> Vec<usize> {
        self.cells
            .iter()
            .map(|c| coarse.index[&c.signs.restrict(columns)])
            .collect()
    }

    /// Join-irreducibles of the lattice of open sets: the cells, ordered by
    /// inclusion of their open stars. The origin cell is the top; it is
    /// left out when `with_origin` is false.
    pub fn star_poset(&self, with_origin: bool) -> (FinPoset, Vec<usize>) {
        let origin = self.origin();
        let members: Vec<usize> = (0..self.cells.len())
            .filter(|&i| with_origin || i != origin)
            .collect();
        let names = members
            .iter()
            .map(|&i| self.cells[i].signs.render(self.family.len()))
            .collect();
        let poset = FinPoset::from_leq_fn(names, |a, b| {
            let (ca, cb) = (&self.cells[members[a]], &self.cells[members[b]]);
            cb.signs.star_contains(&ca.signs)
        });
        (poset, members)
    }

    /// The cells in the open star of `cell`.
    pub fn star(&self, cell: usize) -> BitSet {
        let s = self.cells[cell].signs;
        (0..self.cells.len())
            .filter(|&j| s.star_contains(&self.cells[j].signs))
            .collect()
    }

    /// Whether a set of cells is a union of open stars.
    pub fn is_open(&self, set: &BitSet) -> bool {
        set.iter().all(|i| self.star(i).is_subset(set))
    }
}

impl fmt::Debug for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam: Vec<String> = self.family.iter().map(|d| d.to_string()).collect();
        write!(
            f,
            "Arrangement{{coords: {:?}, family: [{}], cells: {}}}",
            self.coords,
            fam.join(", "),
            self.cells.len()
        )
    }
}

impl PartialEq for Arrangement {
    /// Equal families on equal coordinates have the same cells.
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords && self.family == other.family
    }
}

impl Eq for Arrangement {}
