//! Exact Fourier–Motzkin elimination over the rationals.
//!
//! Rows are integer linear forms `c·x + c0 rel 0` with `rel` one of `=`,
//! `>=`, `>`. Feasibility is decided on a non-strict system obtained by
//! scaling (strict rows of a homogeneous system become `>= 1`), which lets
//! Chernikov's history bound prune redundant combinations safely.
//! Projection keeps strictness and prunes with feasibility-based
//! redundancy tests instead.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bits::BitSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ge,
    Gt,
}

/// `coeffs · x + constant rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub coeffs: Vec<BigInt>,
    pub constant: BigInt,
    pub rel: Rel,
}

impl Row {
    pub fn new(coeffs: Vec<BigInt>, constant: BigInt, rel: Rel) -> Self {
        Self {
            coeffs,
            constant,
            rel,
        }
    }

    pub fn homogeneous(coeffs: Vec<BigInt>, rel: Rel) -> Self {
        Self::new(coeffs, BigInt::zero(), rel)
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// For a row without variables: whether it holds.
    fn holds_constant(&self) -> bool {
        match self.rel {
            Rel::Eq => self.constant.is_zero(),
            Rel::Ge => !self.constant.is_negative(),
            Rel::Gt => self.constant.is_positive(),
        }
    }

    pub fn eval(&self, x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::from_integer(self.constant.clone());
        for (c, v) in self.coeffs.iter().zip(x) {
            if !c.is_zero() {
                acc += BigRational::from_integer(c.clone()) * v;
            }
        }
        acc
    }

    pub fn satisfied_by(&self, x: &[BigRational]) -> bool {
        let v = self.eval(x);
        match self.rel {
            Rel::Eq => v.is_zero(),
            Rel::Ge => !v.is_negative(),
            Rel::Gt => v.is_positive(),
        }
    }

    /// Divides by the content; equalities get a positive leading term.
    fn normalize(&mut self) {
        let mut g = self.constant.abs();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        if !g.is_zero() && !g.is_one() {
            for c in &mut self.coeffs {
                *c /= &g;
            }
            self.constant /= &g;
        }
        if self.rel == Rel::Eq {
            let lead = self.coeffs.iter().find(|c| !c.is_zero());
            if lead.is_some_and(|c| c.is_negative()) {
                for c in &mut self.coeffs {
                    *c = -&*c;
                }
                self.constant = -&self.constant;
            }
        }
    }

    /// The complementary constraint (not defined for equalities).
    pub fn negated(&self) -> Row {
        let rel = match self.rel {
            Rel::Ge => Rel::Gt,
            Rel::Gt => Rel::Ge,
            Rel::Eq => panic!("equalities have no single-row negation"),
        };
        Row::new(
            self.coeffs.iter().map(|c| -c).collect(),
            -&self.constant,
            rel,
        )
    }
}

#[derive(Debug, Clone)]
struct Tracked {
    row: Row,
    history: BitSet,
}

/// `a·p + b·q` for nonnegative `a`, `b` (or any signs when one side is an
/// equality).
fn combine(a: &BigInt, p: &Row, b: &BigInt, q: &Row, rel: Rel) -> Row {
    let coeffs = p
        .coeffs
        .iter()
        .zip(&q.coeffs)
        .map(|(x, y)| a * x + b * y)
        .collect();
    let mut r = Row::new(coeffs, a * &p.constant + b * &q.constant, rel);
    r.normalize();
    r
}

fn stronger(a: Rel, b: Rel) -> Rel {
    a.max(b)
}

enum Step {
    Substitute { var: usize, row: Row },
    Bounds { var: usize, rows: Vec<Row> },
}

/// Removes trivial rows (reporting a contradiction as `None`) and exact or
/// dominated duplicates.
fn tidy(rows: Vec<Tracked>) -> Option<Vec<Tracked>> {
    use std::collections::HashMap;
    let mut by_coeffs: HashMap<(Vec<BigInt>, bool), usize> = HashMap::new();
    let mut out: Vec<Tracked> = Vec::with_capacity(rows.len());
    for mut t in rows {
        t.row.normalize();
        if t.row.is_trivial() {
            if !t.row.holds_constant() {
                return None;
            }
            continue;
        }
        let key = (t.row.coeffs.clone(), t.row.rel == Rel::Eq);
        match by_coeffs.get(&key) {
            Some(&k) => {
                let kept = &mut out[k];
                if t.row.rel == Rel::Eq {
                    if kept.row.constant != t.row.constant {
                        return None;
                    }
                } else {
                    // Same left side: the smaller constant is stronger, and
                    // at equal constants a strict row is stronger.
                    let replace = t.row.constant < kept.row.constant
                        || (t.row.constant == kept.row.constant
                            && t.row.rel > kept.row.rel)
                        || (t.row.constant == kept.row.constant
                            && t.row.rel == kept.row.rel
                            && t.history.len() < kept.history.len());
                    if replace {
                        *kept = t;
                    }
                }
            }
            None => {
                by_coeffs.insert(key, out.len());
                out.push(t);
            }
        }
    }
    Some(out)
}

fn pick_var(rows: &[Tracked], alive: &BitSet) -> Option<(usize, bool)> {
    for t in rows {
        if t.row.rel == Rel::Eq {
            if let Some(v) = alive.iter().find(|&v| !t.row.coeffs[v].is_zero()) {
                return Some((v, true));
            }
        }
    }
    alive
        .iter()
        .map(|v| {
            let pos = rows.iter().filter(|t| t.row.coeffs[v].is_positive()).count();
            let neg = rows.iter().filter(|t| t.row.coeffs[v].is_negative()).count();
            let cost = (pos * neg) as isize - (pos + neg) as isize;
            (cost, v)
        })
        .min()
        .map(|(_, v)| (v, false))
}

/// Eliminates `var` from `rows` using the equality at `eq_index`.
fn substitute(rows: Vec<Tracked>, eq_index: usize, var: usize) -> (Vec<Tracked>, Row) {
    let eq = rows[eq_index].clone();
    let a = eq.row.coeffs[var].clone();
    let mut out = Vec::with_capacity(rows.len());
    for (i, t) in rows.into_iter().enumerate() {
        if i == eq_index {
            continue;
        }
        let b = t.row.coeffs[var].clone();
        if b.is_zero() {
            out.push(t);
            continue;
        }
        // |a|·t - sign(a)·b·eq keeps the direction of t.
        let (ma, mb) = if a.is_positive() {
            (a.clone(), -b)
        } else {
            (-a.clone(), b)
        };
        let row = combine(&ma, &t.row, &mb, &eq.row, t.row.rel);
        out.push(Tracked {
            row,
            history: t.history.union(&eq.history),
        });
    }
    (out, eq.row)
}

/// One Fourier–Motzkin step on `var`; returns the new rows and the rows
/// that bounded `var`.
fn eliminate(rows: Vec<Tracked>, var: usize, history_bound: Option<usize>) -> (Vec<Tracked>, Vec<Row>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for t in rows {
        let c = &t.row.coeffs[var];
        if c.is_positive() {
            pos.push(t);
        } else if c.is_negative() {
            neg.push(t);
        } else {
            out.push(t);
        }
    }
    for p in &pos {
        for n in &neg {
            let history = p.history.union(&n.history);
            if history_bound.is_some_and(|b| history.len() > b) {
                continue;
            }
            let a = -&n.row.coeffs[var];
            let b = p.row.coeffs[var].clone();
            let row = combine(&a, &p.row, &b, &n.row, stronger(p.row.rel, n.row.rel));
            out.push(Tracked { row, history });
        }
    }
    let bounds = pos.into_iter().chain(neg).map(|t| t.row).collect();
    (out, bounds)
}

/// A value of `var` satisfying every bound row, given the other values.
fn choose_value(var: usize, bounds: &[Row], x: &[BigRational]) -> BigRational {
    let mut lower: Option<(BigRational, bool)> = None;
    let mut upper: Option<(BigRational, bool)> = None;
    for r in bounds {
        let a = BigRational::from_integer(r.coeffs[var].clone());
        let mut rest = BigRational::from_integer(r.constant.clone());
        for (i, c) in r.coeffs.iter().enumerate() {
            if i != var && !c.is_zero() {
                rest += BigRational::from_integer(c.clone()) * &x[i];
            }
        }
        let bound = -rest / &a;
        let strict = r.rel == Rel::Gt;
        if a.is_positive() {
            if lower.as_ref().is_none_or(|(l, s)| bound > *l || (bound == *l && strict && !s)) {
                lower = Some((bound, strict));
            }
        } else if upper.as_ref().is_none_or(|(u, s)| bound < *u || (bound == *u && strict && !s)) {
            upper = Some((bound, strict));
        }
    }
    let fits = |v: &BigRational| {
        lower.as_ref().is_none_or(|(l, s)| if *s { v > l } else { v >= l })
            && upper.as_ref().is_none_or(|(u, s)| if *s { v < u } else { v <= u })
    };
    let zero = BigRational::zero();
    if fits(&zero) {
        return zero;
    }
    match (&lower, &upper) {
        (Some((l, _)), Some((u, _))) => {
            let c = l.floor() + BigRational::one();
            if fits(&c) {
                c
            } else if fits(&l.ceil()) {
                l.ceil()
            } else if fits(l) {
                l.clone()
            } else {
                (l + u) / BigRational::from_integer(2.into())
            }
        }
        (Some((l, _)), None) => l.floor() + BigRational::one(),
        (None, Some((u, _))) => u.ceil() - BigRational::one(),
        (None, None) => zero,
    }
}

fn run_elimination(
    nvars: usize,
    rows: Vec<Tracked>,
    keep: &BitSet,
    prune: bool,
) -> Option<(Vec<Tracked>, Vec<Step>)> {
    let mut rows = tidy(rows)?;
    let mut alive: BitSet = (0..nvars).filter(|v| !keep.contains(*v)).collect();
    let mut steps = Vec::new();
    let mut eliminated = 0usize;
    while let Some((var, via_eq)) = pick_var(&rows, &alive) {
        alive.remove(var);
        eliminated += 1;
        if via_eq {
            let eq_index = rows
                .iter()
                .position(|t| t.row.rel == Rel::Eq && !t.row.coeffs[var].is_zero())
                .expect("picked through an equality");
            let (next, eq) = substitute(rows, eq_index, var);
            rows = tidy(next)?;
            steps.push(Step::Substitute { var, row: eq });
        } else {
            let bound = prune.then_some(eliminated + 1);
            let (next, bounds) = eliminate(rows, var, bound);
            rows = tidy(next)?;
            steps.push(Step::Bounds { var, rows: bounds });
        }
    }
    Some((rows, steps))
}

fn back_substitute(nvars: usize, steps: &[Step]) -> Vec<BigRational> {
    let mut x = vec![BigRational::zero(); nvars];
    for step in steps.iter().rev() {
        match step {
            Step::Substitute { var, row } => {
                let a = BigRational::from_integer(row.coeffs[*var].clone());
                let mut rest = BigRational::from_integer(row.constant.clone());
                for (i, c) in row.coeffs.iter().enumerate() {
                    if i != *var && !c.is_zero() {
                        rest += BigRational::from_integer(c.clone()) * &x[i];
                    }
                }
                x[*var] = -rest / a;
            }
            Step::Bounds { var, rows } => {
                x[*var] = choose_value(*var, rows, &x);
            }
        }
    }
    x
}

/// A rational point satisfying every row, if one exists.
pub fn feasible(nvars: usize, rows: &[Row]) -> Option<Vec<BigRational>> {
    let affine = rows.iter().any(|r| !r.constant.is_zero());
    // Homogeneous form: an extra variable `h > 0` carries the constants.
    let total = if affine { nvars + 1 } else { nvars };
    let mut scaled: Vec<Tracked> = Vec::with_capacity(rows.len() + 1);
    let mut push = |coeffs: Vec<BigInt>, rel: Rel, i: usize| {
        let (constant, rel) = match rel {
            Rel::Gt => (-BigInt::one(), Rel::Ge),
            other => (BigInt::zero(), other),
        };
        scaled.push(Tracked {
            row: Row::new(coeffs, constant, rel),
            history: BitSet::singleton(i),
        });
    };
    for (i, r) in rows.iter().enumerate() {
        let mut coeffs = r.coeffs.clone();
        coeffs.resize(nvars, BigInt::zero());
        if affine {
            coeffs.push(r.constant.clone());
        }
        push(coeffs, r.rel, i);
    }
    if affine {
        let mut coeffs = vec![BigInt::zero(); total];
        coeffs[nvars] = BigInt::one();
        push(coeffs, Rel::Gt, rows.len());
    }
    let (_, steps) = run_elimination(total, scaled, &BitSet::new(), true)?;
    let mut x = back_substitute(total, &steps);
    if affine {
        let h = x.pop().expect("homogenizing variable");
        for v in &mut x {
            *v /= &h;
        }
    }
    assert!(
        rows.iter().all(|r| r.satisfied_by(&x)),
        "elimination produced an invalid witness"
    );
    Some(x)
}

pub fn is_feasible(nvars: usize, rows: &[Row]) -> bool {
    feasible(nvars, rows).is_some()
}

/// Drops rows implied by the others.
pub fn remove_redundant(nvars: usize, rows: Vec<Row>) -> Vec<Row> {
    let mut kept = rows;
    let mut i = 0;
    while i < kept.len() {
        if kept[i].rel == Rel::Eq {
            i += 1;
            continue;
        }
        let mut test: Vec<Row> = kept
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r.clone())
            .collect();
        test.push(kept[i].negated());
        if is_feasible(nvars, &test) {
            i += 1;
        } else {
            kept.remove(i);
        }
    }
    kept
}

/// The projection of `{x : rows}` onto the variables in `keep`, described
/// by rows whose other coefficients are zero. `None` if the system is
/// infeasible.
pub fn project(nvars: usize, rows: &[Row], keep: &BitSet) -> Option<Vec<Row>> {
    if !is_feasible(nvars, rows) {
        return None;
    }
    let tracked: Vec<Tracked> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.coeffs.resize(nvars, BigInt::zero());
            Tracked {
                row,
                history: BitSet::singleton(i),
            }
        })
        .collect();
    let mut current = tidy(tracked)?;
    let mut alive: BitSet = (0..nvars).filter(|v| !keep.contains(*v)).collect();
    while let Some((var, via_eq)) = pick_var(&current, &alive) {
        alive.remove(var);
        let next = if via_eq {
            let eq_index = current
                .iter()
                .position(|t| t.row.rel == Rel::Eq && !t.row.coeffs[var].is_zero())
                .expect("picked through an equality");
            substitute(current, eq_index, var).0
        } else {
            eliminate(current, var, None).0
        };
        let next = tidy(next)?;
        let plain: Vec<Row> = next.iter().map(|t| t.row.clone()).collect();
        current = remove_redundant(nvars, plain)
            .into_iter()
            .map(|row| Tracked {
                row,
                history: BitSet::new(),
            })
            .collect();
    }
    Some(current.into_iter().map(|t| t.row).collect())
}
