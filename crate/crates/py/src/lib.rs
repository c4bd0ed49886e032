//! Python bindings for `newform_core`.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use newform_core::characters::{enumerate_characters, format_angle, gauss_sum, HeckeCharacter, NumericalCharacter};
use newform_core::coefficients::{sample_newform, twist_coefficients, FormalNewform, IdealTable};
use newform_core::error::Error;
use newform_core::field::NumberField;
use newform_core::ideal::{parse_ideal, Ideal};
use newform_core::selftest::{run_all, run_check, SuiteConfig};
use newform_core::twist::{classify_regime, decompose_primitive, RegimeInput};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => n.to_string().into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(xs) => {
            let items = xs.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialized<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &v)
}

/// A real quadratic field Q(sqrt d) of narrow class number one.
#[pyclass(name = "Field", frozen)]
struct PyField {
    inner: NumberField,
}

#[pymethods]
impl PyField {
    #[new]
    fn new(d: i64) -> PyResult<Self> {
        Ok(PyField { inner: NumberField::new(d).map_err(err)? })
    }

    #[getter]
    fn d(&self) -> i64 {
        self.inner.d()
    }

    #[getter]
    fn discriminant(&self) -> i64 {
        self.inner.discriminant()
    }

    fn ideal(&self, s: &str) -> PyResult<PyIdeal> {
        Ok(PyIdeal { inner: parse_ideal(self.inner.ring(), s).map_err(err)? })
    }

    /// Integral ideals of norm at most `bound`, ordered by norm.
    fn ideals(&self, bound: u64) -> Vec<PyIdeal> {
        IdealTable::new(&self.inner, bound).ideals().iter().map(|i| PyIdeal { inner: i.clone() }).collect()
    }

    #[pyo3(signature = (modulus, conductor=None, extendable=false))]
    fn characters(&self, modulus: &PyIdeal, conductor: Option<&PyIdeal>, extendable: bool) -> PyResult<Vec<PyCharacter>> {
        let cs = enumerate_characters(&self.inner, &modulus.inner, conductor.map(|c| &c.inner), extendable)
            .map_err(err)?;
        Ok(cs.into_iter().map(|inner| PyCharacter { inner }).collect())
    }

    fn trivial_character(&self, modulus: &PyIdeal) -> PyResult<PyCharacter> {
        Ok(PyCharacter { inner: NumericalCharacter::trivial(&self.inner, &modulus.inner).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.inner.d())
    }
}

/// A fractional ideal in Hermite normal form.
#[pyclass(name = "Ideal", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyIdeal {
    inner: Ideal,
}

#[pymethods]
impl PyIdeal {
    #[getter]
    fn norm(&self) -> i128 {
        self.inner.norm()
    }

    fn is_prime(&self) -> bool {
        self.inner.is_prime()
    }

    fn divides(&self, other: &PyIdeal) -> bool {
        self.inner.divides(&other.inner)
    }

    fn factor(&self) -> PyResult<Vec<(PyIdeal, u32)>> {
        let f = self.inner.factor().map_err(err)?;
        Ok(f.into_iter().map(|(p, e)| (PyIdeal { inner: p }, e)).collect())
    }

    fn __mul__(&self, other: &PyIdeal) -> PyResult<PyIdeal> {
        Ok(PyIdeal { inner: self.inner.try_mul(&other.inner).map_err(err)? })
    }

    fn __pow__(&self, e: u32, _modulo: Option<u32>) -> PyIdeal {
        PyIdeal { inner: self.inner.pow(e) }
    }

    fn __add__(&self, other: &PyIdeal) -> PyIdeal {
        PyIdeal { inner: self.inner.add(&other.inner) }
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Ideal({})", self.inner)
    }
}

/// A character of `(O/N)^x` with values as exact rational angles.
#[pyclass(name = "Character", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyCharacter {
    inner: NumericalCharacter,
}

impl PyCharacter {
    fn hecke(&self) -> PyResult<HeckeCharacter> {
        HeckeCharacter::new(self.inner.clone()).map_err(err)
    }
}

#[pymethods]
impl PyCharacter {
    #[getter]
    fn modulus(&self) -> PyIdeal {
        PyIdeal { inner: self.inner.modulus().clone() }
    }

    #[getter]
    fn angles(&self) -> Vec<String> {
        self.inner.angles().iter().map(format_angle).collect()
    }

    #[getter]
    fn order(&self) -> u64 {
        self.inner.order()
    }

    fn conductor(&self) -> PyIdeal {
        PyIdeal { inner: self.inner.conductor() }
    }

    fn exponential_conductor(&self, p: &PyIdeal) -> u32 {
        self.inner.exponential_conductor(&p.inner)
    }

    fn is_extendable(&self) -> bool {
        self.inner.is_extendable()
    }

    fn conj(&self) -> PyCharacter {
        PyCharacter { inner: self.inner.conj() }
    }

    fn __mul__(&self, other: &PyCharacter) -> PyResult<PyCharacter> {
        Ok(PyCharacter { inner: self.inner.mul(&other.inner).map_err(err)? })
    }

    fn __pow__(&self, k: i64, _modulo: Option<i64>) -> PyCharacter {
        PyCharacter { inner: self.inner.pow(k) }
    }

    fn induce(&self, m: &PyIdeal) -> PyResult<PyCharacter> {
        Ok(PyCharacter { inner: self.inner.induce(&m.inner).map_err(err)? })
    }

    /// `Phi^*(a)` as a complex number (zero when `a` meets the conductor).
    fn ideal_value(&self, a: &PyIdeal) -> PyResult<Complex64> {
        Ok(self.hecke()?.ideal_value_complex(&a.inner))
    }

    fn gauss_sum(&self) -> PyResult<Complex64> {
        Ok(gauss_sum(&self.hecke()?).map_err(err)?.value())
    }

    fn __repr__(&self) -> String {
        format!("Character(modulus={}, angles=[{}])", self.inner.modulus(), self.angles().join(", "))
    }
}

/// A sampled formal newform: level, weight and a seeded eigenvalue system.
#[pyclass(name = "Newform", frozen)]
struct PyNewform {
    inner: FormalNewform,
}

#[pymethods]
impl PyNewform {
    #[new]
    #[pyo3(signature = (level, character, k0=2, seed=0))]
    fn new(level: &PyIdeal, character: &PyCharacter, k0: u32, seed: u64) -> PyResult<Self> {
        let f = sample_newform(&level.inner, &character.hecke()?, k0, seed).map_err(err)?;
        Ok(PyNewform { inner: f })
    }

    #[getter]
    fn level(&self) -> PyIdeal {
        PyIdeal { inner: self.inner.level().clone() }
    }

    #[getter]
    fn k0(&self) -> u32 {
        self.inner.k0()
    }

    fn eigenvalue(&self, q: &PyIdeal) -> PyResult<Complex64> {
        self.inner.eigenvalue(&q.inner).map_err(err)
    }

    fn coefficient(&self, m: &PyIdeal) -> PyResult<Complex64> {
        self.inner.coefficient(&m.inner).map_err(err)
    }

    /// `(ideal, C(ideal))` for every integral ideal of norm at most `bound`,
    /// optionally twisted by `psi`.
    #[pyo3(signature = (bound, psi=None))]
    fn coefficients(&self, bound: u64, psi: Option<&PyCharacter>) -> PyResult<Vec<(PyIdeal, Complex64)>> {
        let table = IdealTable::new(self.inner.field(), bound);
        let mut v = self.inner.truncate(&table, bound).map_err(err)?;
        if let Some(psi) = psi {
            v = twist_coefficients(&v, &psi.hecke()?);
        }
        Ok(v.entries().map(|(m, c)| (PyIdeal { inner: m.clone() }, c)).collect())
    }

    fn check_bad_primes(&self, tol: f64) -> PyResult<Vec<String>> {
        self.inner.check_bad_primes(tol).map_err(err)
    }
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (p, nu, e_phi, e_psi, n0=None, conjugate=false, coprime=false))]
fn classify<'py>(
    py: Python<'py>,
    p: &PyIdeal,
    nu: u32,
    e_phi: u32,
    e_psi: u32,
    n0: Option<&PyIdeal>,
    conjugate: bool,
    coprime: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let n0 = n0.map(|i| i.inner.clone()).unwrap_or_else(|| Ideal::unit(p.inner.ring()));
    let input = RegimeInput { p: p.inner.clone(), nu, e_phi, e_psi, n0, conjugate, coprime };
    serialized(py, &classify_regime(&input).map_err(err)?)
}

#[pyfunction]
fn decompose<'py>(py: Python<'py>, level: &PyIdeal, character: &PyCharacter, p: &PyIdeal) -> PyResult<Bound<'py, PyAny>> {
    let s = decompose_primitive(&level.inner, &character.hecke()?, &p.inner).map_err(err)?;
    serialized(py, &s)
}

#[pyfunction]
#[pyo3(signature = (fields=vec![1, 5], seed=7, bound=2000, check=None))]
fn selftest<'py>(
    py: Python<'py>,
    fields: Vec<i64>,
    seed: u64,
    bound: u64,
    check: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SuiteConfig::new(fields, seed, bound);
    let results = py.detach(|| match check {
        Some(name) => run_check(name, &cfg).map(|r| vec![r]),
        None => Some(run_all(&cfg)),
    });
    let results = results.ok_or_else(|| PyValueError::new_err(format!("unknown check {check:?}")))?;
    serialized(py, &results)
}

#[pymodule]
fn newform_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyIdeal>()?;
    m.add_class::<PyCharacter>()?;
    m.add_class::<PyNewform>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
