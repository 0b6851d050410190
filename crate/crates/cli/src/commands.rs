use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cevian_core::distlat::{HomJson, LatticeJson};
use cevian_core::forge::{
    extend_certificate, forge_chain as run_chain, forge_run, read_certificate, verify_certificate, Certificate,
    ForgeError, ForgeOptions, Step,
};
use cevian_core::kernels::{KernelError, KernelFamily};
use cevian_core::semilinear::adjoint::{eps_embed, rel_adjoints, rho_join};
use cevian_core::semilinear::arrangement::{cell_cap_from_env, Arrangement};
use cevian_core::semilinear::{LinFunctional, SemilinearSet, SetJson};
use cevian_core::{FinDistLattice, LatHom, LatticeError};
use serde::Deserialize;
use serde_json::json;

use crate::report::{emit_artifact, read_json, say, to_pretty, Failure};

const SIZE_LIMIT: usize = 1 << 16;

fn input<E: ToString>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read_lattice(path: &Path) -> Result<FinDistLattice, Failure> {
    let json: LatticeJson = read_json(path)?;
    FinDistLattice::from_json(&json).map_err(input)
}

pub fn check(path: &Path, as_json: bool) -> Result<(), Failure> {
    let l = read_lattice(path)?;
    let ji = l.ji();
    let covers: Vec<(String, String)> = ji
        .covers()
        .into_iter()
        .map(|(a, b)| (ji.name(a).to_string(), ji.name(b).to_string()))
        .collect();
    let size = l.size(SIZE_LIMIT);
    let witness = l.completely_normal().err().map(|(x, y)| (l.names_of(&x), l.names_of(&y)));
    let cevian = l.cevian_diff();
    if as_json {
        let value = json!({
            "join_irreducibles": ji.names(),
            "covers": covers,
            "elements": size,
            "completely_normal": witness.is_none(),
            "witness": witness,
            "cevian": cevian.is_ok(),
            "cevian_failure": cevian.as_ref().err().map(|e| e.to_string()),
        });
        println!("{}", to_pretty(&value));
    } else {
        let size = size.map_or(format!("more than {SIZE_LIMIT}"), |n| n.to_string());
        println!(
            "join-irreducibles: {} ({} covering pairs), elements: {size}",
            ji.len(),
            covers.len()
        );
        for (a, b) in &covers {
            println!("  {a} < {b}");
        }
        match &witness {
            None => println!("completely normal: yes"),
            Some((x, y)) => println!(
                "completely normal: no, {{{}}} and {{{}}} have no consonance witness",
                x.join(","),
                y.join(",")
            ),
        }
        match &cevian {
            Ok(t) => println!("difference table: available ({0} x {0})", t.elements.len()),
            Err(e) => println!("difference table: unavailable, {e}"),
        }
    }
    if witness.is_some() {
        Err(Failure::Negative)
    } else {
        Ok(())
    }
}

fn not_normal(e: &ForgeError, as_json: bool) -> Option<Failure> {
    let ForgeError::NotCompletelyNormal(x, y) = e else {
        return None;
    };
    if as_json {
        println!("{}", to_pretty(&json!({ "completely_normal": false, "witness": [x, y] })));
    } else {
        println!("not completely normal: {{{}}} and {{{}}} have no consonance witness", x.join(","), y.join(","));
    }
    Some(Failure::Negative)
}

fn summary(cert: &Certificate) -> String {
    format!(
        "{} stages, {} coordinates, {} functionals, {} cells; {} of {} elements in range",
        cert.steps,
        cert.coords.len(),
        cert.family.len(),
        cert.transcript.last().map_or(1, |r| r.cells),
        cert.coverage.hit,
        cert.coverage.total
    )
}

pub fn forge(path: &Path, steps: Option<usize>, seed: Option<u64>, out: Option<&Path>, as_json: bool) -> Result<(), Failure> {
    let l = read_lattice(path)?;
    let options = ForgeOptions {
        steps,
        seed,
        ..ForgeOptions::default()
    };
    let forged = match forge_run(&l, None, &options) {
        Ok(f) => f,
        Err(e) => return Err(not_normal(&e, as_json).unwrap_or_else(|| e.into())),
    };
    let cert = &forged.certificate;
    emit_artifact(cert, out)?;
    let text = if as_json {
        to_pretty(&json!({
            "steps": cert.steps,
            "coords": cert.coords,
            "functionals": cert.family.len(),
            "coverage": cert.coverage,
        }))
    } else {
        summary(cert)
    };
    say(&text, out.is_none());
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ChainJson {
    lattices: Vec<LatticeJson>,
    /// For each consecutive pair, the image of each join-irreducible.
    maps: Vec<BTreeMap<String, Vec<String>>>,
}

pub fn forge_chain(path: &Path, out_dir: Option<&Path>, as_json: bool) -> Result<(), Failure> {
    let chain: ChainJson = read_json(path)?;
    let lattices = chain
        .lattices
        .iter()
        .map(FinDistLattice::from_json)
        .collect::<Result<Vec<_>, LatticeError>>()
        .map_err(input)?;
    if chain.maps.len() + 1 != lattices.len() {
        return Err(Failure::Input("a chain needs one map per consecutive pair of lattices".into()));
    }
    let maps = chain
        .maps
        .iter()
        .enumerate()
        .map(|(t, values)| {
            LatHom::from_json(&HomJson {
                source: chain.lattices[t].clone(),
                target: chain.lattices[t + 1].clone(),
                values: values.clone(),
            })
            .map_err(|e| Failure::Input(format!("map {t}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let run = match run_chain(&lattices, &maps, &ForgeOptions::default()) {
        Ok(r) => r,
        Err(e) => return Err(not_normal(&e, as_json).unwrap_or_else(|| e.into())),
    };
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        for (t, level) in run.levels.iter().enumerate() {
            emit_artifact(&level.certificate, Some(&dir.join(format!("level-{t}.json"))))?;
        }
    }
    if as_json {
        let squares: Vec<_> = run
            .squares
            .iter()
            .map(|s| json!({ "from": s.from, "to": s.to, "holds": s.holds }))
            .collect();
        let levels: Vec<_> = run.levels.iter().map(|l| &l.certificate.coverage).collect();
        println!(
            "{}",
            to_pretty(&json!({ "natural": run.natural(), "levels": levels, "squares": squares }))
        );
    } else {
        for (t, level) in run.levels.iter().enumerate() {
            println!("level {t}: {}", summary(&level.certificate));
        }
        for s in &run.squares {
            println!("square {} -> {}: {}", s.from, s.to, if s.holds { "commutes" } else { "FAILS" });
        }
    }
    if run.natural() {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

pub fn verify(path: &Path, as_json: bool) -> Result<(), Failure> {
    let cert: Certificate = read_json(path)?;
    let report = verify_certificate(&cert, cell_cap_from_env());
    if as_json {
        let checks: Vec<_> = report
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect();
        println!("{}", to_pretty(&json!({ "passed": report.all_passed(), "checks": checks })));
    } else {
        print!("{report}");
    }
    match report.check("schema") {
        Some(c) if !c.passed => Err(Failure::Input(c.detail.clone())),
        _ if report.all_passed() => Ok(()),
        _ => Err(Failure::Negative),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Adjoint {
    Project(String),
    Embed(String),
    Upper(String),
    Lower(String),
}

/// Parses `x,y`, `x0,x3` or `0,3`.
fn parse_coords(list: &str) -> Result<Vec<usize>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "x" => Ok(0),
            "y" => Ok(1),
            "z" => Ok(2),
            _ => t
                .strip_prefix('x')
                .unwrap_or(t)
                .parse()
                .map_err(|_| Failure::Input(format!("bad coordinate {t:?}"))),
        })
        .collect()
}

fn parse_functionals(list: &str) -> Result<Vec<LinFunctional>, Failure> {
    list.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<LinFunctional>().map_err(Failure::from))
        .collect()
}

pub fn adjoint(path: &Path, op: &Adjoint, out: Option<&Path>) -> Result<(), Failure> {
    let json: SetJson = read_json(path)?;
    let cap = cell_cap_from_env();
    let set = SemilinearSet::from_json(&json, cap)?;
    let result = match op {
        Adjoint::Project(c) => rho_join(&set, &parse_coords(c)?)?,
        Adjoint::Embed(c) => {
            let mut coords = parse_coords(c)?;
            coords.sort_unstable();
            coords.dedup();
            eps_embed(&set, &coords)?
        }
        Adjoint::Upper(g) | Adjoint::Lower(g) => {
            let fs = parse_functionals(g)?;
            let coords: Vec<usize> = fs.iter().flat_map(|f| f.support().collect::<Vec<_>>()).collect();
            let coarse = Arrangement::from_functionals(coords, &fs, cap)?;
            let (upper, lower) = rel_adjoints(&set, &coarse)?;
            if matches!(op, Adjoint::Upper(_)) {
                upper
            } else {
                lower
            }
        }
    };
    emit_artifact(&result.to_json(), out)
}

pub fn kernel(path: &Path, as_json: bool) -> Result<(), Failure> {
    let json: HomJson = read_json(path)?;
    let hom = LatHom::from_json(&json).map_err(input)?;
    match KernelFamily::compute(&hom) {
        Ok(k) => {
            let table = k.to_json();
            if as_json {
                println!("{}", to_pretty(&json!({ "consonant": true, "kernel": table })));
            } else {
                for (p, e) in &table {
                    println!("e({p}) = {{{}}}", e.join(","));
                }
            }
            Ok(())
        }
        Err(KernelError::NotConsonant(x, y)) => {
            if as_json {
                println!("{}", to_pretty(&json!({ "consonant": false, "witness": [x, y] })));
            } else {
                println!("range is not consonant: {{{}}} and {{{}}} have no witness", x.join(","), y.join(","));
            }
            Err(Failure::Negative)
        }
        Err(e) => Err(input(e)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepArg {
    Functional(String),
    Element(String),
}

pub fn extend(path: &Path, step: &StepArg, out: Option<&Path>, as_json: bool) -> Result<(), Failure> {
    let cert: Certificate = read_json(path)?;
    let cap = cell_cap_from_env();
    let step = match step {
        StepArg::Functional(f) => Step::Domain(f.parse().map_err(Failure::from)?),
        StepArg::Element(names) => {
            let (l, _) = read_certificate(&cert, cap)?;
            let names: Vec<&str> = names.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
            Step::Range(l.element_from_names(&names).map_err(input)?)
        }
    };
    let next = extend_certificate(&cert, &step, cap)?;
    emit_artifact(&next, out)?;
    let last = next.transcript.last().expect("a stage was recorded");
    let text = if as_json {
        to_pretty(&json!({ "stage": last, "coverage": next.coverage }))
    } else {
        format!("stage {} ({:?} {}): {:?}; {}", last.stage, last.kind, last.input, last.outcome, summary(&next))
    };
    say(&text, out.is_none());
    Ok(())
}
