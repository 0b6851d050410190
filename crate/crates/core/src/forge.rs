//! Finite-stage construction of surjective top-faithful homomorphisms
//! `Op(F) → L ∪ {∞}`, alternating domain steps (new functionals) and range
//! steps (new values), with independently checkable certificates.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distlat::{FinDistLattice, LatElem, LatHom, LatticeError, LatticeJson};
use crate::extend::{domain_step, embedding, range_step, ExtendError, PartialHom, Target};
use crate::semilinear::arrangement::{Arrangement, Sign};
use crate::semilinear::functional::{Direction, FunctionalJson, LinFunctional};
use crate::semilinear::SemilinearError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForgeError {
    #[error("lattice is not completely normal: {0:?} and {1:?} are not consonant")]
    NotCompletelyNormal(Vec<String>, Vec<String>),
    #[error("{got} stages cannot cover {needed} target elements; use at least {needed_steps}")]
    TooFewSteps {
        got: usize,
        needed: usize,
        needed_steps: usize,
    },
    #[error("{0} (try fewer stages or a smaller functional plan)")]
    CellCap(SemilinearError),
    #[error(transparent)]
    Extend(ExtendError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("base map does not fit: {0}")]
    BadBase(String),
    #[error("chain needs one map per consecutive pair of lattices")]
    ChainShape,
    #[error("unreadable certificate: {0}")]
    BadCertificate(String),
}

impl From<ExtendError> for ForgeError {
    fn from(e: ExtendError) -> Self {
        match e {
            ExtendError::Semilinear(s @ SemilinearError::CellCapExceeded { .. }) => ForgeError::CellCap(s),
            other => ForgeError::Extend(other),
        }
    }
}

/// Deterministic enumeration of primitive integer functionals with
/// coefficients in `-max..=max`, ordered by largest coordinate, support
/// size (at most three), height and lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionalPlan {
    pub max_coeff: i64,
    pub max_support: usize,
}

impl Default for FunctionalPlan {
    fn default() -> Self {
        Self {
            max_coeff: 2,
            max_support: 3,
        }
    }
}

impl FunctionalPlan {
    /// Candidates with largest coordinate `top` and exactly `size`
    /// coordinates from `coords`, sorted.
    fn group(&self, coords: &[usize], top: usize, size: usize) -> Vec<Direction> {
        let lower: Vec<usize> = coords.iter().copied().filter(|&c| c < top).collect();
        let mut out = Vec::new();
        let mut pick = Vec::new();
        self.choose(&lower, size - 1, 0, &mut pick, &mut |others| {
            let mut support: Vec<usize> = others.to_vec();
            support.push(top);
            self.coefficients(&support, &mut out);
        });
        out.sort_by_key(|d| {
            let height: BigInt = d.terms().iter().map(|(_, c)| c.abs()).sum();
            (height, d.clone())
        });
        out.dedup();
        out
    }

    fn choose(&self, from: &[usize], k: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if pick.len() == k {
            f(pick);
            return;
        }
        for i in start..from.len() {
            pick.push(from[i]);
            self.choose(from, k, i + 1, pick, f);
            pick.pop();
        }
    }

    fn coefficients(&self, support: &[usize], out: &mut Vec<Direction>) {
        let m = self.max_coeff;
        let values: Vec<i64> = (-m..=m).filter(|v| *v != 0).collect();
        let mut idx = vec![0usize; support.len()];
        loop {
            let coeffs: Vec<i64> = idx.iter().map(|&i| values[i]).collect();
            let g = coeffs.iter().fold(0i64, |g, c| g.gcd(c));
            if coeffs[0] > 0 && g == 1 {
                let f = LinFunctional::from_ints(&support.iter().copied().zip(coeffs).collect::<Vec<_>>());
                out.push(f.direction().expect("nonzero").0);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return;
                }
                idx[k] += 1;
                if idx[k] < values.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// The first planned functional over the arrangement's coordinates that
    /// is not yet in its family.
    pub fn next(&self, arr: &Arrangement) -> Option<Direction> {
        let coords = arr.coords();
        for &top in coords {
            for size in 1..=self.max_support {
                let found = self
                    .group(coords, top, size)
                    .into_iter()
                    .find(|d| arr.position_of(d).is_none());
                if found.is_some() {
                    return found;
                }
            }
        }
        None
    }
}

/// Target elements in the order range steps consume them: `0`, the
/// join-irreducibles along a linear extension, then the rest by size.
pub fn element_plan(l: &FinDistLattice, limit: usize) -> Result<Vec<LatElem>, LatticeError> {
    let mut out = vec![l.bottom()];
    for p in l.ji().linear_extension() {
        out.push(l.principal(p));
    }
    let mut rest: Vec<LatElem> = l
        .elements_limited(limit)?
        .into_iter()
        .filter(|x| !out.contains(x))
        .collect();
    rest.sort_by_key(|x| (x.bits().len(), x.bits().iter().collect::<Vec<_>>()));
    out.extend(rest);
    Ok(out)
}

/// A starting point: `f: Op(F₀) → K ∪ {∞}` and `φ: K → L`. The forge
/// begins from `φ ∘ f`.
#[derive(Debug, Clone)]
pub struct Base {
    pub f: PartialHom,
    pub phi: LatHom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Domain,
    Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageOutcome {
    Extended,
    Unchanged,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub kind: StageKind,
    /// The functional or target element consumed.
    pub input: String,
    pub outcome: StageOutcome,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub hit: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapJson {
    pub coords: Vec<usize>,
    pub family: Vec<FunctionalJson>,
    /// Generator id to target element (join-irreducible names, `∞` for the
    /// adjoined top).
    pub values: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseJson {
    pub lattice: LatticeJson,
    pub phi: BTreeMap<String, Vec<String>>,
    pub map: MapJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub lattice: LatticeJson,
    pub coords: Vec<usize>,
    pub family: Vec<FunctionalJson>,
    pub values: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub base: Option<BaseJson>,
    pub steps: usize,
    pub transcript: Vec<StageRecord>,
    pub coverage: Coverage,
}

/// Generator id of `⟦f > 0⟧` or `⟦f < 0⟧`.
pub fn generator_id(f: &LinFunctional, sign: Sign) -> String {
    match sign {
        Sign::Pos => format!("{f} > 0"),
        Sign::Neg => format!("{f} < 0"),
        Sign::Zero => unreachable!("generators are strict"),
    }
}

pub const WHOLE_SPACE: &str = "Ω";

fn map_json(g: &PartialHom) -> MapJson {
    let arr = g.arrangement();
    let t = g.target().extended();
    let mut values = BTreeMap::new();
    for (col, (pos, neg)) in g.generator_values().into_iter().enumerate() {
        let f = arr.family()[col].to_functional();
        values.insert(generator_id(&f, Sign::Pos), t.names_of(&pos));
        values.insert(generator_id(&f, Sign::Neg), t.names_of(&neg));
    }
    values.insert(WHOLE_SPACE.to_string(), t.names_of(g.cell_value(arr.origin())));
    MapJson {
        coords: arr.coords().to_vec(),
        family: arr.family().iter().map(|d| d.to_functional().to_json()).collect(),
        values,
    }
}

/// Rebuilds the arrangement and the table of generator values of a map.
fn read_map(
    json: &MapJson,
    target: &Target,
    cap: usize,
) -> Result<(Arc<Arrangement>, Vec<(LatElem, LatElem)>, LatElem), String> {
    let mut dirs = Vec::new();
    let mut keyed = Vec::new();
    for fj in &json.family {
        let f = LinFunctional::from_json(fj).map_err(|e| e.to_string())?;
        let (d, flipped) = f.direction().ok_or("zero functional in family")?;
        if dirs.contains(&d) {
            return Err(format!("repeated functional {f}"));
        }
        dirs.push(d);
        keyed.push((f, flipped));
    }
    let arr = Arc::new(Arrangement::build(json.coords.iter().copied(), &dirs, cap).map_err(|e| e.to_string())?);
    let lattice = target.extended();
    let lookup = |key: &str| -> Result<LatElem, String> {
        let names = json.values.get(key).ok_or_else(|| format!("missing value for {key}"))?;
        lattice.element_from_names(names).map_err(|e| format!("{key}: {e}"))
    };
    let mut table = Vec::new();
    for (f, flipped) in &keyed {
        let pos = lookup(&generator_id(f, Sign::Pos))?;
        let neg = lookup(&generator_id(f, Sign::Neg))?;
        table.push(if *flipped { (neg, pos) } else { (pos, neg) });
    }
    let whole = lookup(WHOLE_SPACE)?;
    Ok((arr, table, whole))
}

fn phi_json(phi: &LatHom) -> BTreeMap<String, Vec<String>> {
    let src = phi.source();
    (0..src.ji_count())
        .map(|p| (src.ji().name(p).to_string(), phi.target().names_of(&phi.ji_values()[p])))
        .collect()
}

fn read_phi(json: &BTreeMap<String, Vec<String>>, k: &FinDistLattice, l: &FinDistLattice) -> Result<LatHom, String> {
    let mut values = Vec::new();
    for p in 0..k.ji_count() {
        let name = k.ji().name(p);
        let names = json.get(name).ok_or_else(|| format!("base map has no value at {name}"))?;
        values.push(l.element_from_names(names).map_err(|e| e.to_string())?);
    }
    LatHom::from_ji_values(k, l, values).map_err(|e| e.to_string())
}

/// The outcome of a forge run.
#[derive(Debug, Clone)]
pub struct Forged {
    pub hom: PartialHom,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForgeOptions {
    /// Number of stages; `2·|L|` when absent.
    pub steps: Option<usize>,
    pub cap: usize,
    pub plan: FunctionalPlan,
    /// Shuffles the order in which nonzero elements become values.
    pub seed: Option<u64>,
}

impl Default for ForgeOptions {
    fn default() -> Self {
        Self {
            steps: None,
            cap: crate::semilinear::arrangement::cell_cap_from_env(),
            plan: FunctionalPlan::default(),
            seed: None,
        }
    }
}

const ELEMENT_LIMIT: usize = 1 << 16;

/// Rejects lattices that are not completely normal, with a non-consonant
/// pair.
pub fn require_completely_normal(l: &FinDistLattice) -> Result<(), ForgeError> {
    l.completely_normal()
        .map_err(|(x, y)| ForgeError::NotCompletelyNormal(l.names_of(&x), l.names_of(&y)))
}

/// Runs the even/odd schedule: even stages add the next planned
/// functional, odd stages make the next planned element a value.
pub fn forge_run(l: &FinDistLattice, base: Option<&Base>, options: &ForgeOptions) -> Result<Forged, ForgeError> {
    require_completely_normal(l)?;
    let mut elements = element_plan(l, ELEMENT_LIMIT)?;
    if let Some(seed) = options.seed {
        elements[1..].shuffle(&mut StdRng::seed_from_u64(seed));
    }
    let needed_steps = 2 * elements.len();
    let steps = options.steps.unwrap_or(needed_steps);
    if steps < needed_steps {
        return Err(ForgeError::TooFewSteps {
            got: steps,
            needed: elements.len(),
            needed_steps,
        });
    }
    let target = Arc::new(Target::new(l.clone()));
    let mut g = match base {
        None => PartialHom::zero(&[], target.clone(), options.cap),
        Some(b) => start_from_base(b, &target)?,
    };
    let mut transcript = Vec::with_capacity(steps);
    for stage in 0..steps {
        let record = if stage % 2 == 0 {
            match options.plan.next(g.arrangement()) {
                None => StageRecord {
                    stage,
                    kind: StageKind::Domain,
                    input: String::new(),
                    outcome: StageOutcome::Skipped,
                    cells: g.arrangement().len(),
                },
                Some(d) => {
                    let f = d.to_functional();
                    g = domain_step(&g, &f)?;
                    StageRecord {
                        stage,
                        kind: StageKind::Domain,
                        input: f.to_string(),
                        outcome: StageOutcome::Extended,
                        cells: g.arrangement().len(),
                    }
                }
            }
        } else {
            match elements.get(stage / 2) {
                None => StageRecord {
                    stage,
                    kind: StageKind::Range,
                    input: String::new(),
                    outcome: StageOutcome::Skipped,
                    cells: g.arrangement().len(),
                },
                Some(c) => {
                    let c = target.lift(c);
                    let outcome = if g.hits(&c) {
                        StageOutcome::Unchanged
                    } else {
                        g = range_step(&g, &c)?.0;
                        StageOutcome::Extended
                    };
                    StageRecord {
                        stage,
                        kind: StageKind::Range,
                        input: target.show(&c),
                        outcome,
                        cells: g.arrangement().len(),
                    }
                }
            }
        };
        transcript.push(record);
    }
    let range = g.range();
    let hit = elements.iter().filter(|c| range.contains(&target.lift(c))).count();
    let m = map_json(&g);
    let certificate = Certificate {
        lattice: l.to_json(),
        coords: m.coords,
        family: m.family,
        values: m.values,
        base: base.map(|b| BaseJson {
            lattice: b.phi.source().to_json(),
            phi: phi_json(&b.phi),
            map: map_json(&b.f),
        }),
        steps,
        transcript,
        coverage: Coverage {
            hit,
            total: elements.len(),
        },
    };
    Ok(Forged { hom: g, certificate })
}

fn start_from_base(base: &Base, target: &Arc<Target>) -> Result<PartialHom, ForgeError> {
    if base.phi.target() != target.base() {
        return Err(ForgeError::BadBase("the base map does not land in the target lattice".into()));
    }
    let k = base.f.target();
    if k.base() != base.phi.source() {
        return Err(ForgeError::BadBase("the base map does not start at the intermediate lattice".into()));
    }
    let values = base
        .f
        .hom()
        .ji_values()
        .iter()
        .map(|v| k.map_through(&base.phi, target, v))
        .collect();
    Ok(PartialHom::from_ji_values(base.f.domain().clone(), target.clone(), values)?)
}

/// Reads back the lattice and the map recorded in a certificate.
pub fn read_certificate(cert: &Certificate, cap: usize) -> Result<(FinDistLattice, PartialHom), ForgeError> {
    let l = FinDistLattice::from_json(&cert.lattice)?;
    let target = Arc::new(Target::new(l.clone()));
    let map = MapJson {
        coords: cert.coords.clone(),
        family: cert.family.clone(),
        values: cert.values.clone(),
    };
    let (arr, table, whole) = read_map(&map, &target, cap).map_err(ForgeError::BadCertificate)?;
    let g = PartialHom::from_generator_values(arr, target, &table)?;
    if g.cell_value(g.arrangement().origin()) != &whole {
        return Err(ForgeError::BadCertificate(format!("{WHOLE_SPACE} must map to ∞")));
    }
    Ok((l, g))
}

/// A single stage applied by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Add `⟦e > 0⟧` and `⟦e < 0⟧` to the domain.
    Domain(LinFunctional),
    /// Make an element of the target lattice a value.
    Range(LatElem),
}

/// Applies one step to the map in a certificate and records it as a new
/// stage. The base, if any, is kept.
pub fn extend_certificate(cert: &Certificate, step: &Step, cap: usize) -> Result<Certificate, ForgeError> {
    let (l, g) = read_certificate(cert, cap)?;
    let target = g.target().clone();
    let stage = cert.transcript.len();
    let (g, kind, input, outcome) = match step {
        Step::Domain(e) => {
            let known = e.direction().is_some_and(|(d, _)| {
                g.arrangement().position_of(&d).is_some()
                    && d.support().all(|c| g.arrangement().coords().binary_search(&c).is_ok())
            });
            if e.is_zero() || known {
                (g, StageKind::Domain, e.to_string(), StageOutcome::Unchanged)
            } else {
                (domain_step(&g, e)?, StageKind::Domain, e.to_string(), StageOutcome::Extended)
            }
        }
        Step::Range(c) => {
            l.element(c.bits().clone())?;
            let c = target.lift(c);
            let input = target.show(&c);
            if g.hits(&c) {
                (g, StageKind::Range, input, StageOutcome::Unchanged)
            } else {
                (range_step(&g, &c)?.0, StageKind::Range, input, StageOutcome::Extended)
            }
        }
    };
    let elements = l.elements_limited(ELEMENT_LIMIT)?;
    let range = g.range();
    let hit = elements.iter().filter(|c| range.contains(&target.lift(c))).count();
    let m = map_json(&g);
    let mut transcript = cert.transcript.clone();
    transcript.push(StageRecord {
        stage,
        kind,
        input,
        outcome,
        cells: g.arrangement().len(),
    });
    Ok(Certificate {
        lattice: cert.lattice.clone(),
        coords: m.coords,
        family: m.family,
        values: m.values,
        base: cert.base.clone(),
        steps: cert.steps + 1,
        transcript,
        coverage: Coverage {
            hit,
            total: elements.len(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn push(&mut self, name: &'static str, result: Result<(), String>) {
        let (passed, detail) = match result {
            Ok(()) => (true, String::new()),
            Err(d) => (false, d),
        };
        self.checks.push(Check { name, passed, detail });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "{verdict} {}", c.name)?;
            } else {
                writeln!(f, "{verdict} {}: {}", c.name, c.detail)?;
            }
        }
        Ok(())
    }
}

pub const CHECK_NAMES: [&str; 6] = [
    "schema",
    "hom-law",
    "generator-table",
    "top-faithful",
    "surjective",
    "base-compatible",
];

/// Rebuilds everything from the recorded family and table and checks the
/// homomorphism law, top-faithfulness, surjectivity and compatibility with
/// the base map. Failures are report entries.
pub fn verify_certificate(cert: &Certificate, cap: usize) -> VerifyReport {
    let mut report = VerifyReport::default();
    let fail_rest = |report: &mut VerifyReport, from: usize, why: &str| {
        for name in &CHECK_NAMES[from..] {
            report.push(name, Err(format!("not checked: {why}")));
        }
    };
    let l = match FinDistLattice::from_json(&cert.lattice) {
        Ok(l) => l,
        Err(e) => {
            report.push("schema", Err(format!("lattice: {e}")));
            fail_rest(&mut report, 1, "unreadable lattice");
            return report;
        }
    };
    let target = Arc::new(Target::new(l.clone()));
    let map = MapJson {
        coords: cert.coords.clone(),
        family: cert.family.clone(),
        values: cert.values.clone(),
    };
    let (arr, table, whole) = match read_map(&map, &target, cap) {
        Ok(x) => x,
        Err(e) => {
            report.push("schema", Err(e));
            fail_rest(&mut report, 1, "unreadable map");
            return report;
        }
    };
    report.push("schema", Ok(()));
    let domain = crate::semilinear::op::OpLattice::new(arr.clone(), true);
    let by_cell = PartialHom::cell_values(&arr, &target, &table, &whole);
    let ordered: Vec<LatElem> = (0..domain.lattice().ji_count())
        .map(|j| by_cell[domain.cell_of_ji(j)].clone())
        .collect();
    let hom = match LatHom::from_ji_values(domain.lattice(), target.extended(), ordered) {
        Ok(h) => h,
        Err(e) => {
            report.push("hom-law", Err(e.to_string()));
            fail_rest(&mut report, 2, "no homomorphism");
            return report;
        }
    };
    report.push("hom-law", Ok(()));
    let mut table_errors = Vec::new();
    for (col, (pos, neg)) in table.iter().enumerate() {
        for (sign, want) in [(Sign::Pos, pos), (Sign::Neg, neg)] {
            let got = hom.apply(&domain.generator(col, sign));
            if got != *want {
                table_errors.push(format!(
                    "{} recorded {} but evaluates to {}",
                    generator_id(&arr.family()[col].to_functional(), sign),
                    target.show(want),
                    target.show(&got)
                ));
            }
        }
    }
    report.push(
        "generator-table",
        if table_errors.is_empty() { Ok(()) } else { Err(table_errors.join("; ")) },
    );
    let origin = arr.origin();
    let bad_top: Vec<String> = (0..arr.len())
        .filter(|&c| target.is_infinite(&by_cell[c]) != (c == origin))
        .map(|c| arr.cell(c).signs.render(arr.family().len()))
        .collect();
    report.push(
        "top-faithful",
        if bad_top.is_empty() {
            Ok(())
        } else {
            Err(format!("∞ is wrongly attained or missed at cells {}", bad_top.join(", ")))
        },
    );
    let g = PartialHom::from_ji_values(domain, target.clone(), hom.ji_values().to_vec());
    let surj = match (&g, l.elements_limited(ELEMENT_LIMIT)) {
        (Ok(g), Ok(els)) => {
            let range = g.range();
            let missed: Vec<String> = els
                .iter()
                .filter(|c| !range.contains(&target.lift(c)))
                .map(|c| l.show(c))
                .collect();
            if missed.is_empty() {
                Ok(())
            } else {
                Err(format!("not in range: {}", missed.join(", ")))
            }
        }
        (Err(e), _) => Err(e.to_string()),
        (_, Err(e)) => Err(e.to_string()),
    };
    report.push("surjective", surj);
    let base = match (&cert.base, &g) {
        (None, _) => Ok(()),
        (Some(_), Err(e)) => Err(e.to_string()),
        (Some(b), Ok(g)) => check_base(b, g, &l, cap),
    };
    report.push("base-compatible", base);
    report
}

fn check_base(b: &BaseJson, g: &PartialHom, l: &FinDistLattice, cap: usize) -> Result<(), String> {
    let k = FinDistLattice::from_json(&b.lattice).map_err(|e| e.to_string())?;
    let phi = read_phi(&b.phi, &k, l)?;
    let kt = Arc::new(Target::new(k));
    let (arr, table, whole) = read_map(&b.map, &kt, cap)?;
    let f = PartialHom::from_generator_values(arr, kt.clone(), &table).map_err(|e| format!("base map: {e}"))?;
    if f.cell_value(f.arrangement().origin()) != &whole {
        return Err("base map is not top-faithful".into());
    }
    let embed = embedding(f.domain(), g.domain()).map_err(|e| e.to_string())?;
    let origin = f.arrangement().origin();
    for p in 0..f.domain().lattice().ji_count() {
        let cell = f.domain().cell_of_ji(p);
        if cell == origin {
            continue;
        }
        let left = g.hom().apply(&embed.ji_values()[p]);
        let right = kt.map_through(&phi, g.target(), &f.hom().ji_values()[p]);
        if left != right {
            return Err(format!(
                "at cell {}: {} vs {}",
                f.arrangement().cell(cell).signs.render(f.arrangement().family().len()),
                g.target().show(&left),
                g.target().show(&right)
            ));
        }
    }
    Ok(())
}

/// One naturality square `χ_t ∘ η = φ_{s,t} ∘ χ_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Square {
    pub from: usize,
    pub to: usize,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub levels: Vec<Forged>,
    pub squares: Vec<Square>,
}

impl ChainRun {
    pub fn natural(&self) -> bool {
        self.squares.iter().all(|s| s.holds)
    }
}

/// Forges each lattice of `L₀ → L₁ → ⋯` starting from the previous level
/// pushed forward, and checks every naturality square on the open sets
/// without the whole space.
pub fn forge_chain(lattices: &[FinDistLattice], maps: &[LatHom], options: &ForgeOptions) -> Result<ChainRun, ForgeError> {
    if lattices.is_empty() || maps.len() + 1 != lattices.len() {
        return Err(ForgeError::ChainShape);
    }
    for (t, phi) in maps.iter().enumerate() {
        if phi.source() != &lattices[t] || phi.target() != &lattices[t + 1] {
            return Err(ForgeError::ChainShape);
        }
    }
    let mut levels: Vec<Forged> = Vec::with_capacity(lattices.len());
    for (t, l) in lattices.iter().enumerate() {
        let base = (t > 0).then(|| Base {
            f: levels[t - 1].hom.clone(),
            phi: maps[t - 1].clone(),
        });
        levels.push(forge_run(l, base.as_ref(), options)?);
    }
    let mut squares = Vec::new();
    for s in 0..levels.len() {
        let mut phi = LatHom::identity(&lattices[s]);
        for t in s + 1..levels.len() {
            phi = phi.compose(&maps[t - 1]);
            squares.push(Square {
                from: s,
                to: t,
                holds: square_holds(&levels[s].hom, &levels[t].hom, &phi)?,
            });
        }
    }
    Ok(ChainRun { levels, squares })
}

fn square_holds(lower: &PartialHom, upper: &PartialHom, phi: &LatHom) -> Result<bool, ForgeError> {
    let embed = embedding(lower.domain(), upper.domain())?;
    let origin = lower.arrangement().origin();
    Ok((0..lower.domain().lattice().ji_count()).all(|p| {
        lower.domain().cell_of_ji(p) == origin
            || upper.hom().apply(&embed.ji_values()[p])
                == lower.target().map_through(phi, upper.target(), &lower.hom().ji_values()[p])
    }))
}

/// Whether every coefficient is an integer of absolute value at most `m`.
pub fn within_plan(d: &Direction, m: i64) -> bool {
    d.terms().iter().all(|(_, c)| !c.is_zero() && c.abs() <= BigInt::from(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semilinear::arrangement::DEFAULT_CELL_CAP;

    fn options() -> ForgeOptions {
        ForgeOptions {
            steps: None,
            cap: DEFAULT_CELL_CAP,
            plan: FunctionalPlan::default(),
            seed: None,
        }
    }

    #[test]
    fn plan_order() {
        let plan = FunctionalPlan::default();
        let arr = Arrangement::new([0, 1], 100);
        assert_eq!(plan.next(&arr).unwrap().to_string(), "x0");
        let arr = Arrangement::from_functionals([0, 1], &["x0".parse().unwrap()], 100).unwrap();
        assert_eq!(plan.next(&arr).unwrap().to_string(), "x1");
        let arr = Arrangement::from_functionals([0, 1], &["x0".parse().unwrap(), "x1".parse().unwrap()], 100).unwrap();
        let next = plan.next(&arr).unwrap();
        assert!(next.to_string() == "x0 + x1" || next.to_string() == "x0 - x1", "{next}");
        assert!(within_plan(&next, 2));
        assert!(plan.next(&Arrangement::new([], 10)).is_none());
    }

    #[test]
    fn plan_exhausts_a_line() {
        let plan = FunctionalPlan::default();
        let arr = Arrangement::from_functionals([0], &["x0".parse().unwrap()], 100).unwrap();
        assert!(plan.next(&arr).is_none());
    }

    #[test]
    fn elements_start_with_bottom_and_irreducibles() {
        let l = FinDistLattice::boolean(2);
        let plan = element_plan(&l, 100).unwrap();
        assert_eq!(plan.len(), 4);
        assert!(plan[0].is_zero());
        assert!(l.as_join_irreducible(&plan[1]).is_some());
        assert!(l.as_join_irreducible(&plan[2]).is_some());
        assert!(l.is_top(&plan[3]));
    }

    #[test]
    fn trivial_lattice() {
        let l = FinDistLattice::chain(1);
        let out = forge_run(&l, None, &options()).unwrap();
        assert_eq!(out.certificate.coverage, Coverage { hit: 1, total: 1 });
        assert!(verify_certificate(&out.certificate, DEFAULT_CELL_CAP).all_passed());
    }

    #[test]
    fn two_element_chain() {
        let l = FinDistLattice::chain(2);
        let out = forge_run(&l, None, &ForgeOptions { steps: Some(4), ..options() }).unwrap();
        let one = l.top();
        assert!(out.hom.generator_values().iter().any(|(p, _)| *p == one));
        let report = verify_certificate(&out.certificate, DEFAULT_CELL_CAP);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn boolean_square() {
        let l = FinDistLattice::boolean(2);
        let out = forge_run(&l, None, &ForgeOptions { steps: Some(8), ..options() }).unwrap();
        assert_eq!(out.certificate.coverage.hit, 4);
        let text = serde_json::to_string(&out.certificate).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, out.certificate);
        assert!(verify_certificate(&back, DEFAULT_CELL_CAP).all_passed());
    }

    #[test]
    fn corrupted_certificates_fail() {
        let l = FinDistLattice::boolean(2);
        let out = forge_run(&l, None, &options()).unwrap();
        let mut cert = out.certificate.clone();
        let key = cert.values.keys().find(|k| k.as_str() != WHOLE_SPACE).unwrap().clone();
        let names = l.names_of(&l.top());
        let current = cert.values[&key].clone();
        cert.values.insert(key, if current == names { vec![] } else { names });
        let report = verify_certificate(&cert, DEFAULT_CELL_CAP);
        assert!(!report.all_passed());
        let mut cert = out.certificate.clone();
        cert.values.insert(WHOLE_SPACE.into(), vec![]);
        let report = verify_certificate(&cert, DEFAULT_CELL_CAP);
        assert!(!report.check("top-faithful").unwrap().passed || !report.check("hom-law").unwrap().passed);
    }

    #[test]
    fn down_v_is_rejected_before_any_stage() {
        let v = crate::poset::FinPoset::new(&["p", "q", "r"], &[("p", "q"), ("p", "r")]).unwrap();
        let l = FinDistLattice::new(v);
        assert!(matches!(forge_run(&l, None, &options()), Err(ForgeError::NotCompletelyNormal(..))));
    }

    #[test]
    fn too_few_steps() {
        let l = FinDistLattice::chain(3);
        assert!(matches!(
            forge_run(&l, None, &ForgeOptions { steps: Some(2), ..options() }),
            Err(ForgeError::TooFewSteps { .. })
        ));
    }

    #[test]
    fn chain_of_inclusions_and_a_collapse() {
        let l0 = FinDistLattice::chain(1);
        let l1 = FinDistLattice::chain(2);
        let l2 = FinDistLattice::chain(3);
        let i01 = LatHom::from_dual(&l0, &l1, &[None]).unwrap();
        let i12 = LatHom::from_dual(&l1, &l2, &[Some(0), None]).unwrap();
        let run = forge_chain(&[l0, l1.clone(), l2.clone()], &[i01, i12], &options()).unwrap();
        assert!(run.natural());
        assert_eq!(run.squares.len(), 3);
        for level in &run.levels {
            assert!(verify_certificate(&level.certificate, DEFAULT_CELL_CAP).all_passed());
        }
        let collapse = LatHom::from_dual(&l2, &l1, &[Some(1)]).unwrap();
        let run = forge_chain(&[l2, l1], &[collapse], &options()).unwrap();
        assert!(run.natural());
    }

    #[test]
    fn certificates_read_back_and_extend_by_hand() {
        let l = FinDistLattice::chain(3);
        let forged = forge_run(&l, None, &options()).unwrap();
        let (back, g) = read_certificate(&forged.certificate, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(back, l);
        assert_eq!(g.generator_values(), forged.hom.generator_values());

        let zero = PartialHom::zero(&[], Arc::new(Target::new(l.clone())), DEFAULT_CELL_CAP);
        let mut cert = forged.certificate.clone();
        let m = map_json(&zero);
        (cert.coords, cert.family, cert.values, cert.transcript, cert.steps) = (m.coords, m.family, m.values, vec![], 0);
        let top = Step::Range(l.top());
        let once = extend_certificate(&cert, &top, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(once.transcript[0].outcome, StageOutcome::Extended);
        assert_eq!(once.coverage.hit, 2);
        let twice = extend_certificate(&once, &top, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(twice.transcript[1].outcome, StageOutcome::Unchanged);
        let x: LinFunctional = "x0".parse().unwrap();
        let same = extend_certificate(&twice, &Step::Domain(x), DEFAULT_CELL_CAP).unwrap();
        assert_eq!(same.transcript[2].outcome, StageOutcome::Unchanged);
        let y: LinFunctional = "x0 + x1".parse().unwrap();
        let wider = extend_certificate(&same, &Step::Domain(y), DEFAULT_CELL_CAP).unwrap();
        assert_eq!(wider.transcript[3].outcome, StageOutcome::Extended);
        assert_eq!(wider.coords, vec![0, 1]);
        let report = verify_certificate(&wider, DEFAULT_CELL_CAP);
        assert!(report.check("hom-law").unwrap().passed, "{report}");
        assert!(report.check("top-faithful").unwrap().passed, "{report}");
    }

    #[test]
    fn seeded_orders_still_cover() {
        let l = FinDistLattice::boolean(2);
        for seed in 0..4 {
            let out = forge_run(&l, None, &ForgeOptions { seed: Some(seed), ..options() }).unwrap();
            assert_eq!(out.certificate.coverage.hit, 4);
            assert!(verify_certificate(&out.certificate, DEFAULT_CELL_CAP).all_passed());
        }
    }
}
