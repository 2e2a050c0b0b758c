//! Python bindings. Results come back as plain dicts in the same shape as
//! the `ra` command's JSON output.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde_json::{json, Value};

use rarrival::flow::{flow_to_json, parse_flow, verify_run_like};
use rarrival::line::{self, Claim, Encoding, Ueopl};
use rarrival::reduce;
use rarrival::report::{classification_json, outcome_json, witness_json};
use rarrival::semantics::{self, Limits};
use rarrival::{Error, OverflowPoly};

fn err(e: Error) -> PyErr {
    match e {
        Error::Lemma(_) | Error::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn poly(s: &str) -> PyResult<OverflowPoly> {
    s.parse().map_err(PyValueError::new_err)
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

/// A flow given as a dict `{"flows": {...}}` or as its JSON text.
fn flow_arg(py: Python<'_>, inst: &rarrival::Instance, flow: &Bound<'_, PyAny>) -> PyResult<rarrival::Flow> {
    let text: String = if let Ok(s) = flow.extract::<String>() {
        s
    } else {
        py.import("json")?.call_method1("dumps", (flow,))?.extract()?
    };
    parse_flow(inst, &text).map_err(err)
}

#[pyclass(name = "Instance", frozen)]
pub struct PyInstance {
    inner: rarrival::Instance,
}

#[pymethods]
impl PyInstance {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inst = rarrival::parse_instance(text).map_err(err)?;
        let inner = if inst.is_single_entry() {
            inst
        } else {
            rarrival::model::normalize_single_entry(&inst).0
        };
        Ok(PyInstance { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(components={}, vertices={}, edges={})",
            self.inner.len(),
            self.inner.total_vertices(),
            self.inner.total_edges()
        )
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn total_edges(&self) -> usize {
        self.inner.total_edges()
    }

    #[getter]
    fn exits(&self) -> Vec<String> {
        let main = self.inner.component(0);
        main.exit_vertices().map(|v| main.vertex_name(v).to_string()).collect()
    }

    #[pyo3(signature = (p_poly = "linear", max_steps = None))]
    fn simulate<'py>(&self, py: Python<'py>, p_poly: &str, max_steps: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
        let limits = Limits {
            poly: poly(p_poly)?,
            max_steps,
        };
        let report = semantics::run(&self.inner, limits).map_err(err)?;
        to_py(py, &outcome_json(&self.inner, &report.outcome))
    }

    #[pyo3(signature = (t, p_poly = "linear"))]
    fn profile<'py>(&self, py: Python<'py>, t: u64, p_poly: &str) -> PyResult<Bound<'py, PyAny>> {
        let p = semantics::run_profile(&self.inner, t, Limits::with_poly(poly(p_poly)?)).map_err(err)?;
        to_py(py, &flow_to_json(&self.inner, &p.flow))
    }

    #[pyo3(signature = (p_poly = "linear"))]
    fn walk<'py>(&self, py: Python<'py>, p_poly: &str) -> PyResult<Bound<'py, PyAny>> {
        let w = line::walk(&self.inner, poly(p_poly)?).map_err(err)?;
        to_py(py, &witness_json(&self.inner, &w))
    }

    /// Does the run terminate at exit `target` of component 1?
    #[pyo3(signature = (target, p_poly = "linear"))]
    fn decide(&self, target: &str, p_poly: &str) -> PyResult<bool> {
        let main = self.inner.component(0);
        let d = main
            .vertex_by_name(target)
            .filter(|&v| main.is_exit(v))
            .ok_or_else(|| err(Error::NotAnExit(target.into())))?;
        Ok(line::decide(&self.inner, d, poly(p_poly)?).map_err(err)?.answer)
    }

    #[pyo3(signature = (flow, p_poly = "linear"))]
    fn verify<'py>(&self, py: Python<'py>, flow: &Bound<'py, PyAny>, p_poly: &str) -> PyResult<Bound<'py, PyAny>> {
        let x = flow_arg(py, &self.inner, flow)?;
        let st = verify_run_like(&self.inner, &x, poly(p_poly)?).map_err(err)?;
        let mut doc = classification_json(&self.inner, &st.classification);
        let codes: Vec<&str> = st.classification.reasons().iter().map(|r| r.code()).collect();
        doc["reasons"] = json!(codes);
        doc["valid"] = json!(st.is_run_like());
        to_py(py, &doc)
    }

    /// Check a termination witness. `exit=None` claims non-termination.
    #[pyo3(signature = (flow, exit = None, p_poly = "linear"))]
    fn verify_witness<'py>(
        &self,
        py: Python<'py>,
        flow: &Bound<'py, PyAny>,
        exit: Option<&str>,
        p_poly: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let x = flow_arg(py, &self.inner, flow)?;
        let claim = match exit {
            Some(name) => Claim::TerminatesAt(self.inner.main_exit(name).map_err(err)?),
            None => Claim::DoesNotTerminate,
        };
        let v = line::verify_witness(&self.inner, &x, claim, poly(p_poly)?).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("accepted", v.accepted)?;
        d.set_item("reason", v.reason)?;
        d.set_item("ops", v.ops)?;
        Ok(d)
    }

    /// Apply `S` or `P` to a hex bit string, or evaluate `V`.
    #[pyo3(signature = (bits, func, p_poly = "linear"))]
    fn ueopl_step<'py>(&self, py: Python<'py>, bits: &str, func: &str, p_poly: &str) -> PyResult<Bound<'py, PyAny>> {
        let p = poly(p_poly)?;
        let enc = Encoding::new(&self.inner, p);
        let u = Ueopl::new(&self.inner, p).map_err(err)?;
        let b = enc.from_hex(bits).map_err(err)?;
        Ok(match func {
            "S" => enc.to_hex(&u.s(&b).map_err(err)?).into_pyobject(py)?.into_any(),
            "P" => enc.to_hex(&u.p(&b).map_err(err)?).into_pyobject(py)?.into_any(),
            "V" => u.v(&b).map_err(err)?.into_pyobject(py)?.into_any(),
            _ => return Err(PyValueError::new_err("func must be S, P or V")),
        })
    }
}

/// Translate a circuit netlist. Returns the instance and the 1-based
/// component of each gate.
#[pyfunction]
fn mcvp_to_ra(circuit: &str) -> PyResult<(PyInstance, Vec<(String, usize)>)> {
    let c = reduce::parse_circuit(circuit).map_err(err)?;
    let (inner, map, _) = reduce::mcvp_to_ra(&c);
    let gates = c.names.iter().cloned().zip(map.component.iter().map(|&i| i + 1)).collect();
    Ok((PyInstance { inner }, gates))
}

#[pyfunction]
fn eval_circuit(circuit: &str) -> PyResult<Vec<bool>> {
    let c = reduce::parse_circuit(circuit).map_err(err)?;
    Ok(reduce::eval_circuit(&c))
}

#[pymodule]
fn recursive_arrival(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(mcvp_to_ra, m)?)?;
    m.add_function(wrap_pyfunction!(eval_circuit, m)?)?;
    Ok(())
}
