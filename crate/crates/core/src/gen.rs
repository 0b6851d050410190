//! Generators of small test instances: lattice catalogs, exhaustive and
//! random homomorphisms.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitSet;
use crate::distlat::{FinDistLattice, LatHom};
use crate::poset::{enumerate_posets, random_poset};

/// Every completely normal finite distributive lattice whose
/// join-irreducible poset has at most `max_ji` elements, up to isomorphism.
pub fn completely_normal_catalog(max_ji: usize) -> Vec<FinDistLattice> {
    (0..=max_ji)
        .flat_map(enumerate_posets)
        .filter(|p| p.is_root_system())
        .map(FinDistLattice::new)
        .collect()
}

/// Every finite distributive lattice with at most `max_ji` join-irreducibles.
pub fn lattice_catalog(max_ji: usize) -> Vec<FinDistLattice> {
    (0..=max_ji)
        .flat_map(enumerate_posets)
        .map(FinDistLattice::new)
        .collect()
}

/// A random lattice with `ji` join-irreducibles.
pub fn random_lattice<R: Rng>(rng: &mut R, ji: usize, density: f64) -> FinDistLattice {
    FinDistLattice::new(random_poset(rng, ji, density))
}

/// A random completely normal lattice: the join-irreducibles form a forest
/// whose roots are at the top.
pub fn random_completely_normal<R: Rng>(rng: &mut R, ji: usize) -> FinDistLattice {
    let names: Vec<String> = (0..ji).map(|i| format!("j{i}")).collect();
    // parent[i] > i, so every element has a chain of ancestors above it.
    let parent: Vec<Option<usize>> = (0..ji)
        .map(|i| {
            if i + 1 < ji && rng.gen_bool(0.6) {
                Some(rng.gen_range(i + 1..ji))
            } else {
                None
            }
        })
        .collect();
    let pairs: Vec<(String, String)> = parent
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|p| (names[i].clone(), names[p].clone())))
        .collect();
    let poset = crate::poset::FinPoset::new(&names, &pairs).expect("parent pointers go upward");
    FinDistLattice::new(poset)
}

/// All 0-lattice homomorphisms `source -> target`, or only the
/// top-preserving ones. They are enumerated through their Birkhoff duals:
/// isotone maps from a lower set of `Ji(target)` into `Ji(source)`.
pub fn all_homs(source: &FinDistLattice, target: &FinDistLattice, zero_one: bool) -> Vec<LatHom> {
    let tj = target.ji();
    let domains: Vec<BitSet> = if zero_one {
        vec![BitSet::full(tj.len())]
    } else {
        tj.lower_sets(usize::MAX).expect("unbounded")
    };
    let order = tj.linear_extension();
    let mut out = Vec::new();
    for dom in domains {
        let mut dual = vec![None; tj.len()];
        extend_dual(source, target, &order, &dom, 0, &mut dual, &mut out);
    }
    out
}

fn extend_dual(
    source: &FinDistLattice,
    target: &FinDistLattice,
    order: &[usize],
    dom: &BitSet,
    k: usize,
    dual: &mut Vec<Option<usize>>,
    out: &mut Vec<LatHom>,
) {
    if k == order.len() {
        out.push(LatHom::from_dual(source, target, dual).expect("isotone dual gives a hom"));
        return;
    }
    let r = order[k];
    if !dom.contains(r) {
        extend_dual(source, target, order, dom, k + 1, dual, out);
        return;
    }
    for p in candidates(source, target, r, dual).iter() {
        dual[r] = Some(p);
        extend_dual(source, target, order, dom, k + 1, dual, out);
    }
    dual[r] = None;
}

/// Source join-irreducibles above the images of everything below `r`.
fn candidates(
    source: &FinDistLattice,
    target: &FinDistLattice,
    r: usize,
    dual: &[Option<usize>],
) -> BitSet {
    let mut cands = BitSet::full(source.ji_count());
    for s in target.ji().down_set(r).iter() {
        if s != r {
            if let Some(q) = dual[s] {
                cands.intersect_with(source.ji().up_set(q));
            }
        }
    }
    cands
}

/// A random 0-lattice homomorphism; top-preserving if `zero_one`.
pub fn random_hom<R: Rng>(
    rng: &mut R,
    source: &FinDistLattice,
    target: &FinDistLattice,
    zero_one: bool,
) -> LatHom {
    let tj = target.ji();
    let n = source.ji_count();
    if n == 0 {
        return LatHom::from_dual(source, target, &vec![None; tj.len()]).expect("zero map");
    }
    for _ in 0..32 {
        let dom = if zero_one {
            BitSet::full(tj.len())
        } else {
            let seeds: BitSet = (0..tj.len()).filter(|_| rng.gen_bool(0.7)).collect();
            tj.down_closure(&seeds)
        };
        let mut dual = vec![None; tj.len()];
        let mut ok = true;
        for r in tj.linear_extension() {
            if !dom.contains(r) {
                continue;
            }
            let cands: Vec<usize> = candidates(source, target, r, &dual).iter().collect();
            match cands.choose(rng) {
                Some(&p) => dual[r] = Some(p),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return LatHom::from_dual(source, target, &dual).expect("isotone dual gives a hom");
        }
    }
    // A constant dual into one maximal join-irreducible is always isotone.
    let top = source.ji().maximal(&BitSet::full(n)).first().expect("nonempty");
    let dual = vec![if zero_one || rng.gen_bool(0.5) { Some(top) } else { None }; tj.len()];
    LatHom::from_dual(source, target, &dual).expect("constant dual gives a hom")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn catalog_sizes() {
        // Forests with the roots on top: 1, 1, 2, 4, 9 shapes on 0..4 points.
        let counts: Vec<usize> = (0..=4).map(|n| completely_normal_catalog(n).len()).collect();
        assert_eq!(counts, [1, 2, 4, 8, 17]);
    }

    #[test]
    fn hom_counts_match_brute_force() {
        for d in &lattice_catalog(2) {
            let de = d.elements().unwrap();
            for e in &lattice_catalog(3) {
                let ee = e.elements().unwrap();
                // Count join- and meet-preserving maps preserving 0 by brute force
                // over all element tables.
                let mut count = 0usize;
                let mut count01 = 0usize;
                let mut table = vec![0usize; de.len()];
                loop {
                    let f = |x: &crate::LatElem| &ee[table[de.iter().position(|y| y == x).unwrap()]];
                    let is_hom = f(&d.bottom()).is_zero()
                        && de.iter().all(|x| {
                            de.iter().all(|y| {
                                *f(&x.join(y)) == f(x).join(f(y)) && *f(&x.meet(y)) == f(x).meet(f(y))
                            })
                        });
                    if is_hom {
                        count += 1;
                        if e.is_top(f(&d.top())) {
                            count01 += 1;
                        }
                    }
                    let mut i = 0;
                    while i < table.len() && table[i] + 1 == ee.len() {
                        table[i] = 0;
                        i += 1;
                    }
                    if i == table.len() {
                        break;
                    }
                    table[i] += 1;
                }
                assert_eq!(all_homs(d, e, false).len(), count, "{d:?} -> {e:?}");
                assert_eq!(all_homs(d, e, true).len(), count01, "{d:?} -> {e:?}");
            }
        }
    }

    #[test]
    fn random_homs_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let d = random_lattice(&mut rng, 4, 0.4);
            let e = random_lattice(&mut rng, 4, 0.4);
            let h = random_hom(&mut rng, &d, &e, true);
            assert!(h.preserves_top());
            let _ = random_hom(&mut rng, &d, &e, false);
        }
        for _ in 0..50 {
            assert!(random_completely_normal(&mut rng, 5).is_completely_normal());
        }
    }
}
