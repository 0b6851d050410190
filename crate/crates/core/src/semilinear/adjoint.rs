//! Maps between semilinear sets on different coordinate spaces and between
//! the Boolean algebras of two families on the same space.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::arrangement::{Arrangement, Sign};
use super::fm;
use super::functional::{Direction, LinFunctional};
use super::set::SemilinearSet;
use super::SemilinearError;
use crate::bits::BitSet;

/// Reads a set on `Q^I` as the cylinder over it in `Q^J`, `I ⊆ J`.
pub fn eps_embed(set: &SemilinearSet, target: &[usize]) -> Result<SemilinearSet, SemilinearError> {
    let arr = set.arrangement();
    if !arr.coords().iter().all(|c| target.contains(c)) {
        return Err(SemilinearError::CoordsNotSubset);
    }
    let wide = Arc::new(arr.with_coords(target.iter().copied()));
    Ok(SemilinearSet::new(wide, set.cells().clone()))
}

fn check_sub(coords: &[usize], of: &[usize]) -> Result<Vec<usize>, SemilinearError> {
    let mut sorted: Vec<usize> = coords.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.iter().all(|c| of.binary_search(c).is_ok()) {
        Ok(sorted)
    } else {
        Err(SemilinearError::CoordsNotSubset)
    }
}

/// The projection of a set on `Q^J` onto `Q^I`: the least set whose
/// cylinder contains it.
pub fn rho_join(set: &SemilinearSet, coords: &[usize]) -> Result<SemilinearSet, SemilinearError> {
    let arr = set.arrangement();
    let coords = check_sub(coords, arr.coords())?;
    let n = arr.coords().len();
    let keep: BitSet = coords
        .iter()
        .map(|c| arr.coords().binary_search(c).expect("checked subset"))
        .collect();
    let mut pieces: Vec<Vec<fm::Row>> = Vec::new();
    let mut family: Vec<Direction> = Vec::new();
    for c in set.cells().iter() {
        let rows = arr.cell_rows(&arr.cell(c).signs);
        let proj = fm::project(n, &rows, &keep).expect("cells are feasible");
        for row in &proj {
            let f = LinFunctional::from_pairs(
                row.coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (arr.coords()[k], BigRational::from_integer(c.clone()))),
            );
            if let Some((d, _)) = f.direction() {
                if !family.contains(&d) {
                    family.push(d);
                }
            }
        }
        pieces.push(proj);
    }
    let cap = arr.cap();
    let out = Arc::new(Arrangement::build(coords.iter().copied(), &family, cap)?);
    // Evaluate projected rows at each output witness, embedded in Q^J.
    let embed = |w: &[BigRational]| {
        let mut x = vec![BigRational::zero(); n];
        for (k, c) in out.coords().iter().enumerate() {
            x[arr.coords().binary_search(c).expect("subset")] = w[k].clone();
        }
        x
    };
    let cells = (0..out.len())
        .filter(|&i| {
            let x = embed(&out.cell(i).witness);
            pieces.iter().any(|rows| rows.iter().all(|r| r.satisfied_by(&x)))
        })
        .collect();
    Ok(SemilinearSet::new(out, cells))
}

/// The largest set on `Q^I` whose cylinder lies inside the given set.
pub fn rho_meet(set: &SemilinearSet, coords: &[usize]) -> Result<SemilinearSet, SemilinearError> {
    Ok(rho_join(&set.complement(), coords)?.complement())
}

/// Upper and lower adjoints of the inclusion of the algebra of `coarse`
/// into a finer algebra containing `set`: the least union of
/// `coarse`-cells containing `set`, and the largest one inside it.
pub fn rel_adjoints(
    set: &SemilinearSet,
    coarse: &Arrangement,
) -> Result<(SemilinearSet, SemilinearSet), SemilinearError> {
    let base = Arc::new(coarse.with_coords(set.arrangement().coords().iter().copied()));
    let (fine, cols_base, cols_set) = Arrangement::common(&base, set.arrangement())?;
    let fine = Arc::new(fine);
    let lifted = set.lift(&fine, &cols_set);
    let map = fine.coarsen(&base, &cols_base);
    let mut upper = BitSet::new();
    let mut outside = BitSet::new();
    for (cell, &g) in map.iter().enumerate() {
        if lifted.cells().contains(cell) {
            upper.insert(g);
        } else {
            outside.insert(g);
        }
    }
    let lower = base.all_cells().difference(&outside);
    Ok((
        SemilinearSet::new(base.clone(), upper),
        SemilinearSet::new(base, lower),
    ))
}

/// Splits a set covered by `⟦a > 0⟧ ∪ ⟦a < 0⟧` into its parts on either
/// side. Each cell of the set must lie on one side of `a = 0`.
pub fn split_plus_minus(
    set: &SemilinearSet,
    a: &LinFunctional,
) -> Result<(SemilinearSet, SemilinearSet), SemilinearError> {
    let arr = set.arrangement();
    let Some((dir, flipped)) = a.direction() else {
        return if set.is_empty() {
            Ok((set.clone(), set.clone()))
        } else {
            Err(SemilinearError::NotCovered)
        };
    };
    let refined = arr.refine(&dir)?;
    let (pos, neg) = if flipped {
        (Sign::Neg, Sign::Pos)
    } else {
        (Sign::Pos, Sign::Neg)
    };
    let mut plus = BitSet::new();
    let mut minus = BitSet::new();
    for c in set.cells().iter() {
        let ch = &refined.children[c];
        if ch[Sign::Zero.slot()].is_some() {
            return Err(SemilinearError::NotCovered);
        }
        match (ch[pos.slot()].is_some(), ch[neg.slot()].is_some()) {
            (true, true) => return Err(SemilinearError::CellStraddles),
            (true, false) => {
                plus.insert(c);
            }
            (false, true) => {
                minus.insert(c);
            }
            (false, false) => unreachable!("every cell has a piece"),
        }
    }
    Ok((
        SemilinearSet::new(arr.clone(), plus),
        SemilinearSet::new(arr.clone(), minus),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semilinear::arrangement::DEFAULT_CELL_CAP;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn lf(s: &str) -> LinFunctional {
        s.parse().unwrap()
    }

    fn arr(coords: &[usize], fs: &[&str]) -> Arc<Arrangement> {
        let fs: Vec<LinFunctional> = fs.iter().map(|s| lf(s)).collect();
        Arc::new(Arrangement::from_functionals(coords.iter().copied(), &fs, DEFAULT_CELL_CAP).unwrap())
    }

    fn half(a: &Arc<Arrangement>, f: &str, s: Sign) -> SemilinearSet {
        SemilinearSet::halfspace(a, &lf(f), s).unwrap()
    }

    fn point(vals: &[(usize, i64)]) -> BTreeMap<usize, BigRational> {
        vals.iter().map(|&(i, v)| (i, BigRational::from_integer(v.into()))).collect()
    }

    #[test]
    fn projection_examples() {
        let a = arr(&[0, 1], &["x+y"]);
        let up = half(&a, "x+y", Sign::Pos);
        assert!(rho_join(&up, &[0]).unwrap().is_full());
        assert!(rho_meet(&up, &[0]).unwrap().is_empty());
        let q = arr(&[0, 1], &["x", "y"]);
        let quad = half(&q, "x", Sign::Pos).intersection(&half(&q, "y", Sign::Pos)).unwrap();
        let p = rho_join(&quad, &[0]).unwrap();
        let x_pos = SemilinearSet::open_halfspace(&[0], &lf("x"), Sign::Pos, 100).unwrap();
        assert!(p.same_points(&x_pos).unwrap());
        let wide = half(&q, "x", Sign::Pos);
        assert!(rho_meet(&wide, &[0]).unwrap().same_points(&x_pos).unwrap());
        assert!(matches!(rho_join(&quad, &[2]), Err(SemilinearError::CoordsNotSubset)));
    }

    #[test]
    fn embedding_round_trips() {
        let x_pos = SemilinearSet::open_halfspace(&[0], &lf("x"), Sign::Pos, 100).unwrap();
        let e = eps_embed(&x_pos, &[0, 1]).unwrap();
        assert!(e.contains_point(&point(&[(0, 1), (1, -5)])));
        assert!(rho_join(&e, &[0]).unwrap().same_points(&x_pos).unwrap());
        assert!(rho_meet(&e, &[0]).unwrap().same_points(&x_pos).unwrap());
        assert!(eps_embed(&e, &[1]).is_err());
    }

    #[test]
    fn rel_adjoint_examples() {
        let fine = arr(&[0, 1], &["x+y"]);
        let a = half(&fine, "x+y", Sign::Pos);
        let g = Arrangement::from_functionals([0, 1], &[lf("x")], 100).unwrap();
        let (upper, lower) = rel_adjoints(&a, &g).unwrap();
        assert!(upper.is_full());
        assert!(lower.is_empty());
        let (u2, l2) = rel_adjoints(&half(&arr(&[0, 1], &["x"]), "x", Sign::Pos), &g).unwrap();
        assert_eq!(u2.cells(), l2.cells());
        assert_eq!(u2.cells().len(), 1);
    }

    #[test]
    fn split_examples() {
        let q = arr(&[0, 1], &["x", "y"]);
        let u = half(&q, "x", Sign::Pos).union(&half(&q, "x", Sign::Neg)).unwrap();
        let (p, m) = split_plus_minus(&u, &lf("x")).unwrap();
        assert_eq!(p.cells(), half(&q, "x", Sign::Pos).cells());
        assert_eq!(m.cells(), half(&q, "x", Sign::Neg).cells());
        let (p2, m2) = split_plus_minus(&u, &lf("-x")).unwrap();
        assert_eq!(p2.cells(), m.cells());
        assert_eq!(m2.cells(), p.cells());
        assert!(matches!(split_plus_minus(&u, &lf("y")), Err(SemilinearError::NotCovered)));
        let pos_y = half(&q, "y", Sign::Pos);
        assert!(matches!(split_plus_minus(&pos_y, &lf("x+y")), Err(SemilinearError::NotCovered)));
        let c = arr(&[0, 1], &["x-y", "x+y"]);
        let cone = half(&c, "x-y", Sign::Pos).intersection(&half(&c, "x+y", Sign::Pos)).unwrap();
        let (cp, cm) = split_plus_minus(&cone, &lf("x")).unwrap();
        assert_eq!(cp.cells(), cone.cells());
        assert!(cm.is_empty());
        let empty = SemilinearSet::empty(&q);
        assert!(split_plus_minus(&empty, &LinFunctional::zero()).is_ok());
        assert!(split_plus_minus(&u, &LinFunctional::zero()).is_err());
    }

    fn small_functional() -> impl Strategy<Value = LinFunctional> {
        proptest::collection::vec(-2i64..=2, 2).prop_map(|c| LinFunctional::from_ints(&[(0, c[0]), (1, c[1])]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn projections_bracket_fibres(
            fs in proptest::collection::vec(small_functional(), 1..4),
            mask in any::<u32>(),
        ) {
            let a = Arc::new(Arrangement::from_functionals([0, 1], &fs, DEFAULT_CELL_CAP).unwrap());
            let cells: BitSet = (0..a.len()).filter(|i| mask & (1 << (i % 32)) != 0).collect();
            let s = SemilinearSet::new(a.clone(), cells);
            let up = rho_join(&s, &[0]).unwrap();
            let down = rho_meet(&s, &[0]).unwrap();
            prop_assert!(down.subset_of(&up).unwrap());
            // The cylinder over the projection brackets the set.
            prop_assert!(s.subset_of(&eps_embed(&up, &[0, 1]).unwrap()).unwrap());
            prop_assert!(eps_embed(&down, &[0, 1]).unwrap().subset_of(&s).unwrap());
            // Sample points on the line: the fibre meets s iff x lies in up.
            for x in -4i64..=4 {
                let xq = BigRational::from_integer(x.into());
                let mut meets = false;
                let mut inside = true;
                for y in -40i64..=40 {
                    let pt: BTreeMap<usize, BigRational> =
                        [(0, xq.clone()), (1, BigRational::new(y.into(), 4.into()))].into();
                    let hit = s.contains_point(&pt);
                    meets |= hit;
                    inside &= hit;
                }
                let p: BTreeMap<usize, BigRational> = [(0, xq)].into();
                if meets { prop_assert!(up.contains_point(&p)); }
                if !inside { prop_assert!(!down.contains_point(&p)); }
            }
        }
    }
}
