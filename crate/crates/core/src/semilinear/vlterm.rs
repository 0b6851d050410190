//! Terms of the free vector lattice over the coordinate functionals, and
//! their evaluation as piecewise-linear functions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::arrangement::{Arrangement, Sign};
use super::functional::{Direction, LinFunctional};
use super::set::SemilinearSet;
use super::SemilinearError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VlTerm {
    /// The coordinate functional `δ_i`.
    Gen(usize),
    Scale(BigRational, Box<VlTerm>),
    Add(Box<VlTerm>, Box<VlTerm>),
    Join(Box<VlTerm>, Box<VlTerm>),
    Meet(Box<VlTerm>, Box<VlTerm>),
}

/// A piecewise-linear function: one linear piece per cell.
#[derive(Debug, Clone)]
pub struct Pieces {
    pub arrangement: Arc<Arrangement>,
    pub values: Vec<LinFunctional>,
}

impl VlTerm {
    pub fn gen(i: usize) -> Self {
        VlTerm::Gen(i)
    }

    pub fn scale(self, k: BigRational) -> Self {
        VlTerm::Scale(k, Box::new(self))
    }

    pub fn add(self, other: Self) -> Self {
        VlTerm::Add(Box::new(self), Box::new(other))
    }

    pub fn join(self, other: Self) -> Self {
        VlTerm::Join(Box::new(self), Box::new(other))
    }

    pub fn meet(self, other: Self) -> Self {
        VlTerm::Meet(Box::new(self), Box::new(other))
    }

    /// Generators occurring in the term, sorted.
    pub fn generators(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_generators(&self, out: &mut Vec<usize>) {
        match self {
            VlTerm::Gen(i) => out.push(*i),
            VlTerm::Scale(_, t) => t.collect_generators(out),
            VlTerm::Add(a, b) | VlTerm::Join(a, b) | VlTerm::Meet(a, b) => {
                a.collect_generators(out);
                b.collect_generators(out);
            }
        }
    }

    /// Pointwise value; missing coordinates are zero.
    pub fn eval(&self, point: &BTreeMap<usize, BigRational>) -> BigRational {
        match self {
            VlTerm::Gen(i) => point.get(i).cloned().unwrap_or_else(BigRational::zero),
            VlTerm::Scale(k, t) => k * t.eval(point),
            VlTerm::Add(a, b) => a.eval(point) + b.eval(point),
            VlTerm::Join(a, b) => a.eval(point).max(b.eval(point)),
            VlTerm::Meet(a, b) => a.eval(point).min(b.eval(point)),
        }
    }

    /// A cell decomposition on which the term is linear on every cell.
    pub fn pieces(&self, cap: usize) -> Result<Pieces, SemilinearError> {
        match self {
            VlTerm::Gen(i) => Ok(Pieces {
                arrangement: Arc::new(Arrangement::new([*i], cap)),
                values: vec![LinFunctional::coord(*i)],
            }),
            VlTerm::Scale(k, t) => {
                let p = t.pieces(cap)?;
                Ok(Pieces {
                    values: p.values.iter().map(|v| v.scale(k)).collect(),
                    arrangement: p.arrangement,
                })
            }
            VlTerm::Add(a, b) => {
                let (arr, va, vb) = common_pieces(&a.pieces(cap)?, &b.pieces(cap)?)?;
                let values = va.iter().zip(&vb).map(|(x, y)| x.add(y)).collect();
                Ok(Pieces {
                    arrangement: arr,
                    values,
                })
            }
            VlTerm::Join(a, b) | VlTerm::Meet(a, b) => {
                let take_max = matches!(self, VlTerm::Join(..));
                let (arr, va, vb) = common_pieces(&a.pieces(cap)?, &b.pieces(cap)?)?;
                let diffs: Vec<LinFunctional> = va.iter().zip(&vb).map(|(x, y)| x.sub(y)).collect();
                let (fine, parent) = refine_by(&arr, &diffs)?;
                let values = (0..fine.len())
                    .map(|c| {
                        let p = parent[c];
                        let w = fine.witness_point(c);
                        let d = Sign::of(&diffs[p].eval(&w));
                        let first = (d != Sign::Neg) == take_max;
                        if first { va[p].clone() } else { vb[p].clone() }
                    })
                    .collect();
                Ok(Pieces {
                    arrangement: Arc::new(fine),
                    values,
                })
            }
        }
    }

    /// `⟦t ≠ 0⟧`, over the arrangement of the pieces refined by the pieces'
    /// own values.
    pub fn support(&self, cap: usize) -> Result<SemilinearSet, SemilinearError> {
        let p = self.pieces(cap)?;
        let (fine, parent) = refine_by(&p.arrangement, &p.values)?;
        let cells = (0..fine.len())
            .filter(|&c| !p.values[parent[c]].eval(&fine.witness_point(c)).is_zero())
            .collect();
        Ok(SemilinearSet::new(Arc::new(fine), cells))
    }
}

/// Both piecewise functions over a common refinement.
fn common_pieces(
    a: &Pieces,
    b: &Pieces,
) -> Result<(Arc<Arrangement>, Vec<LinFunctional>, Vec<LinFunctional>), SemilinearError> {
    let (arr, ca, cb) = Arrangement::common(&a.arrangement, &b.arrangement)?;
    let ma = arr.coarsen(&a.arrangement, &ca);
    let mb = arr.coarsen(&b.arrangement, &cb);
    let va = ma.iter().map(|&c| a.values[c].clone()).collect();
    let vb = mb.iter().map(|&c| b.values[c].clone()).collect();
    Ok((Arc::new(arr), va, vb))
}

/// Refines by the directions of the given functionals; returns the finer
/// arrangement and the parent cell of each of its cells.
fn refine_by(arr: &Arrangement, fs: &[LinFunctional]) -> Result<(Arrangement, Vec<usize>), SemilinearError> {
    let mut dirs: Vec<Direction> = Vec::new();
    for f in fs {
        if let Some((d, _)) = f.direction() {
            if !dirs.contains(&d) && arr.position_of(&d).is_none() {
                dirs.push(d);
            }
        }
    }
    let base_len = arr.family().len();
    let (fine, _) = arr
        .with_coords(fs.iter().flat_map(|f| f.support().collect::<Vec<_>>()))
        .refine_all(&dirs)?;
    let cols: Vec<usize> = (0..base_len).collect();
    let parent = fine.coarsen(arr, &cols);
    Ok((fine, parent))
}

impl fmt::Display for VlTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VlTerm::Gen(i) => write!(f, "x{i}"),
            VlTerm::Scale(k, t) => write!(f, "{k}*({t})"),
            VlTerm::Add(a, b) => write!(f, "({a} + {b})"),
            VlTerm::Join(a, b) => write!(f, "({a} v {b})"),
            VlTerm::Meet(a, b) => write!(f, "({a} ^ {b})"),
        }
    }
}
