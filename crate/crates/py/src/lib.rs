//! Python bindings: lattices, homomorphisms, semilinear sets and the forge.

use std::collections::{BTreeMap, HashMap};

use cevian_core::distlat::{HomJson, LatticeJson};
use cevian_core::forge::{forge_run, verify_certificate, Certificate, ForgeError, ForgeOptions};
use cevian_core::kernels::KernelFamily;
use cevian_core::semilinear::adjoint::{eps_embed, rel_adjoints, rho_join, rho_meet};
use cevian_core::semilinear::arrangement::{cell_cap_from_env, Arrangement, Sign};
use cevian_core::semilinear::functional::parse_rational;
use cevian_core::semilinear::{LinFunctional, SemilinearError, SetJson};
use cevian_core::{FinDistLattice, FinPoset, LatElem, LatHom};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(cevian, CevianError, PyException);
create_exception!(cevian, CellCapError, CevianError);

fn err<E: ToString>(e: E) -> PyErr {
    CevianError::new_err(e.to_string())
}

fn semilinear_err(e: SemilinearError) -> PyErr {
    match e {
        SemilinearError::CellCapExceeded { .. } => CellCapError::new_err(e.to_string()),
        other => err(other),
    }
}

fn forge_err(e: ForgeError) -> PyErr {
    match e {
        ForgeError::CellCap(_) => CellCapError::new_err(e.to_string()),
        other => err(other),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finite distributive lattice, given by its poset of join-irreducibles.
/// Elements are passed around as lists of join-irreducible names.
#[pyclass(module = "cevian", name = "Lattice", frozen, skip_from_py_object)]
struct PyLattice {
    inner: FinDistLattice,
}

impl PyLattice {
    fn el(&self, names: Vec<String>) -> PyResult<LatElem> {
        self.inner.element_from_names(&names).map_err(err)
    }

    fn names(&self, x: &LatElem) -> Vec<String> {
        self.inner.names_of(x)
    }
}

#[pymethods]
impl PyLattice {
    /// Builds the lattice of down-sets of a poset given by element names and
    /// pairs `(a, b)` meaning `a ≤ b`.
    #[new]
    #[pyo3(signature = (elements, leq = Vec::new()))]
    fn new(elements: Vec<String>, leq: Vec<(String, String)>) -> PyResult<Self> {
        let poset = FinPoset::new(&elements, &leq).map_err(err)?;
        Ok(Self {
            inner: FinDistLattice::new(poset),
        })
    }

    /// The chain with `n ≥ 1` elements.
    #[staticmethod]
    fn chain(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("a chain has at least one element"));
        }
        Ok(Self {
            inner: FinDistLattice::chain(n),
        })
    }

    #[staticmethod]
    fn boolean(k: usize) -> Self {
        Self {
            inner: FinDistLattice::boolean(k),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let json: LatticeJson = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self {
            inner: FinDistLattice::from_json(&json).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("lattices serialize")
    }

    #[getter]
    fn join_irreducibles(&self) -> Vec<String> {
        self.inner.ji().names().to_vec()
    }

    /// Number of elements, or `None` above `limit`.
    #[pyo3(signature = (limit = 1 << 16))]
    fn size(&self, limit: usize) -> Option<usize> {
        self.inner.size(limit)
    }

    fn elements(&self) -> PyResult<Vec<Vec<String>>> {
        Ok(self.inner.elements().map_err(err)?.iter().map(|x| self.names(x)).collect())
    }

    fn bottom(&self) -> Vec<String> {
        self.names(&self.inner.bottom())
    }

    fn top(&self) -> Vec<String> {
        self.names(&self.inner.top())
    }

    fn leq(&self, x: Vec<String>, y: Vec<String>) -> PyResult<bool> {
        Ok(self.el(x)?.leq(&self.el(y)?))
    }

    fn join(&self, x: Vec<String>, y: Vec<String>) -> PyResult<Vec<String>> {
        Ok(self.names(&self.el(x)?.join(&self.el(y)?)))
    }

    fn meet(&self, x: Vec<String>, y: Vec<String>) -> PyResult<Vec<String>> {
        Ok(self.names(&self.el(x)?.meet(&self.el(y)?)))
    }

    fn implies(&self, x: Vec<String>, y: Vec<String>) -> PyResult<Vec<String>> {
        Ok(self.names(&self.inner.heyting_implies(&self.el(x)?, &self.el(y)?)))
    }

    /// The least `z` with `x ≤ y ∨ z`.
    fn dual_diff(&self, x: Vec<String>, y: Vec<String>) -> PyResult<Vec<String>> {
        Ok(self.names(&self.inner.dual_diff(&self.el(x)?, &self.el(y)?)))
    }

    fn is_completely_normal(&self) -> bool {
        self.inner.is_completely_normal()
    }

    /// A pair without a consonance witness, or `None`.
    fn consonance_counterexample(&self) -> Option<(Vec<String>, Vec<String>)> {
        self.inner.completely_normal().err().map(|(x, y)| (self.names(&x), self.names(&y)))
    }

    /// The table `(x, y) ↦ x ∖ y` over all elements; raises when a law fails.
    fn cevian_table(&self) -> PyResult<Vec<(Vec<String>, Vec<String>, Vec<String>)>> {
        let table = self.inner.cevian_diff().map_err(err)?;
        let els = &table.elements;
        let mut out = Vec::with_capacity(els.len() * els.len());
        for (i, row) in table.table.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                out.push((self.names(&els[i]), self.names(&els[j]), self.names(&els[d])));
            }
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("Lattice({:?})", self.inner)
    }

    fn __eq__(&self, other: PyRef<'_, PyLattice>) -> bool {
        self.inner == other.inner
    }
}

/// A 0-lattice homomorphism given by the images of the source
/// join-irreducibles.
#[pyclass(module = "cevian", name = "Hom", frozen, skip_from_py_object)]
struct PyHom {
    inner: LatHom,
}

#[pymethods]
impl PyHom {
    #[new]
    fn new(source: PyRef<'_, PyLattice>, target: PyRef<'_, PyLattice>, values: BTreeMap<String, Vec<String>>) -> PyResult<Self> {
        let json = HomJson {
            source: source.inner.to_json(),
            target: target.inner.to_json(),
            values,
        };
        Ok(Self {
            inner: LatHom::from_json(&json).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let json: HomJson = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self {
            inner: LatHom::from_json(&json).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("homomorphisms serialize")
    }

    fn apply(&self, x: Vec<String>) -> PyResult<Vec<String>> {
        let x = self.inner.source().element_from_names(&x).map_err(err)?;
        Ok(self.inner.target().names_of(&self.inner.apply(&x)))
    }

    fn is_heyting(&self) -> PyResult<bool> {
        self.inner.is_heyting().map_err(err)
    }

    fn is_closed(&self) -> PyResult<bool> {
        self.inner.is_closed().map_err(err)
    }

    /// The consonance kernel `p ↦ e_p`; raises when the range is not
    /// consonant.
    fn kernel(&self) -> PyResult<BTreeMap<String, Vec<String>>> {
        Ok(KernelFamily::compute(&self.inner).map_err(err)?.to_json())
    }
}

/// A finite union of cells of a central hyperplane arrangement over the
/// rationals.
#[pyclass(module = "cevian", name = "SemilinearSet", frozen, skip_from_py_object)]
struct PySet {
    inner: cevian_core::semilinear::SemilinearSet,
}

fn wrap(inner: cevian_core::semilinear::SemilinearSet) -> PySet {
    PySet { inner }
}

fn functionals(list: &[String]) -> PyResult<Vec<LinFunctional>> {
    list.iter().map(|s| s.parse().map_err(semilinear_err)).collect()
}

#[pymethods]
impl PySet {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let json: SetJson = serde_json::from_str(text).map_err(json_err)?;
        cevian_core::semilinear::SemilinearSet::from_json(&json, cell_cap_from_env())
            .map(wrap)
            .map_err(semilinear_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("sets serialize")
    }

    /// `⟦f > 0⟧` (or `⟦f < 0⟧`) over the given coordinates.
    #[staticmethod]
    #[pyo3(signature = (coords, functional, positive = true))]
    fn halfspace(coords: Vec<usize>, functional: &str, positive: bool) -> PyResult<Self> {
        let f: LinFunctional = functional.parse().map_err(semilinear_err)?;
        let sign = if positive { Sign::Pos } else { Sign::Neg };
        cevian_core::semilinear::SemilinearSet::open_halfspace(&coords, &f, sign, cell_cap_from_env())
            .map(wrap)
            .map_err(semilinear_err)
    }

    #[getter]
    fn coords(&self) -> Vec<usize> {
        self.inner.arrangement().coords().to_vec()
    }

    #[getter]
    fn cells(&self) -> Vec<String> {
        self.inner.to_json().cells
    }

    fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    fn is_open(&self) -> bool {
        self.inner.is_open()
    }

    fn union(&self, other: PyRef<'_, PySet>) -> PyResult<Self> {
        self.inner.union_any(&other.inner).map(wrap).map_err(semilinear_err)
    }

    fn intersection(&self, other: PyRef<'_, PySet>) -> PyResult<Self> {
        self.inner.intersection_any(&other.inner).map(wrap).map_err(semilinear_err)
    }

    fn complement(&self) -> Self {
        wrap(self.inner.complement())
    }

    fn subset_of(&self, other: PyRef<'_, PySet>) -> PyResult<bool> {
        self.inner.subset_of(&other.inner).map_err(semilinear_err)
    }

    /// Membership of a point given as `{coordinate: value}`; values may be
    /// integers or strings like `"-3/4"`.
    fn contains(&self, point: HashMap<usize, Bound<'_, PyAny>>) -> PyResult<bool> {
        let mut p = BTreeMap::new();
        for (k, v) in point {
            let text = v.str()?.to_string();
            p.insert(k, parse_rational(&text).map_err(semilinear_err)?);
        }
        Ok(self.inner.contains_point(&p))
    }

    /// Projection onto `coords` (the least set whose preimage contains this
    /// one).
    fn project(&self, coords: Vec<usize>) -> PyResult<Self> {
        rho_join(&self.inner, &coords).map(wrap).map_err(semilinear_err)
    }

    /// The largest set over `coords` whose preimage lies inside this one.
    fn project_inner(&self, coords: Vec<usize>) -> PyResult<Self> {
        rho_meet(&self.inner, &coords).map(wrap).map_err(semilinear_err)
    }

    fn embed(&self, mut coords: Vec<usize>) -> PyResult<Self> {
        coords.sort_unstable();
        coords.dedup();
        eps_embed(&self.inner, &coords).map(wrap).map_err(semilinear_err)
    }

    /// Least union of cells of the arrangement of `family` containing this set.
    fn upper(&self, family: Vec<String>) -> PyResult<Self> {
        Ok(wrap(self.bounds(&family)?.0))
    }

    /// Largest union of cells of the arrangement of `family` inside this set.
    fn lower(&self, family: Vec<String>) -> PyResult<Self> {
        Ok(wrap(self.bounds(&family)?.1))
    }

    fn same_points(&self, other: PyRef<'_, PySet>) -> PyResult<bool> {
        self.inner.same_points(&other.inner).map_err(semilinear_err)
    }
}

impl PySet {
    fn bounds(
        &self,
        family: &[String],
    ) -> PyResult<(cevian_core::semilinear::SemilinearSet, cevian_core::semilinear::SemilinearSet)> {
        let fs = functionals(family)?;
        let coords: Vec<usize> = fs.iter().flat_map(|f| f.support().collect::<Vec<_>>()).collect();
        let coarse = Arrangement::from_functionals(coords, &fs, cell_cap_from_env()).map_err(semilinear_err)?;
        rel_adjoints(&self.inner, &coarse).map_err(semilinear_err)
    }
}

/// Builds a certificate JSON for a surjective map onto `lattice`.
#[pyfunction]
#[pyo3(signature = (lattice, steps = None, seed = None))]
fn forge(lattice: PyRef<'_, PyLattice>, steps: Option<usize>, seed: Option<u64>) -> PyResult<String> {
    let options = ForgeOptions {
        steps,
        seed,
        ..ForgeOptions::default()
    };
    let forged = forge_run(&lattice.inner, None, &options).map_err(forge_err)?;
    Ok(serde_json::to_string(&forged.certificate).expect("certificates serialize"))
}

/// Re-checks a certificate; returns `(name, passed, detail)` per check.
#[pyfunction]
fn verify(certificate: &str) -> PyResult<Vec<(String, bool, String)>> {
    let cert: Certificate = serde_json::from_str(certificate).map_err(json_err)?;
    let report = verify_certificate(&cert, cell_cap_from_env());
    Ok(report
        .checks
        .iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail.clone()))
        .collect())
}

/// Forges a chain `L₀ → L₁ → ⋯`; returns whether every naturality square
/// commutes, and the certificate of each level.
#[pyfunction]
fn forge_chain(lattices: Vec<PyRef<'_, PyLattice>>, maps: Vec<PyRef<'_, PyHom>>) -> PyResult<(bool, Vec<String>)> {
    let ls: Vec<FinDistLattice> = lattices.iter().map(|l| l.inner.clone()).collect();
    let ms: Vec<LatHom> = maps.iter().map(|m| m.inner.clone()).collect();
    let run = cevian_core::forge::forge_chain(&ls, &ms, &ForgeOptions::default()).map_err(forge_err)?;
    let certs = run
        .levels
        .iter()
        .map(|l| serde_json::to_string(&l.certificate).expect("certificates serialize"))
        .collect();
    Ok((run.natural(), certs))
}

#[pymodule]
fn cevian(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CevianError", m.py().get_type::<CevianError>())?;
    m.add("CellCapError", m.py().get_type::<CellCapError>())?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyHom>()?;
    m.add_class::<PySet>()?;
    m.add_function(wrap_pyfunction!(forge, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(forge_chain, m)?)?;
    Ok(())
}
