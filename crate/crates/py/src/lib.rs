//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! JSON reports come back as plain dicts.

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use treemax_core::levelset::{decompose_auto, decompose_maximal, overlap_constant as core_overlap};
use treemax_core::ops::Exponent;
use treemax_core::ops::{batch_eval, OperatorKind};
use treemax_core::rational;
use treemax_core::tree::DEFAULT_VERTEX_CAP;
use treemax_core::verify::{run_scenario as core_run_scenario, ScenarioConfig, SCENARIOS};
use treemax_core::{Error, Rational, SparseFunction, TreeWindow, ValenceSpec, VertexAddress};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::WindowTooSmall { .. } | Error::VertexCap { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format!("{}/{}", r.numer(), r.denom()),))
}

/// Accepts `Fraction`, `int`, or a string like `"3/7"` or `"0.25"`.
fn rational_from(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let s = obj.str()?.to_string();
    rational::parse(&s).map_err(to_py)
}

fn json_value<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.getattr("loads")?.call1((text,))
}

fn function_from(f: &Bound<'_, PyDict>) -> PyResult<SparseFunction> {
    let mut out = SparseFunction::new();
    for (k, v) in f.iter() {
        let addr: VertexAddress = k.extract::<String>()?.parse().map_err(to_py)?;
        out.add(addr, rational_from(&v)?);
    }
    Ok(out)
}

fn spec_from(tree: &str) -> PyResult<ValenceSpec> {
    let r = if tree.trim_start().starts_with('{') {
        ValenceSpec::from_json(tree)
    } else {
        ValenceSpec::preset(tree)
    };
    r.map_err(to_py)
}

fn kind_from(op: &str) -> PyResult<OperatorKind> {
    op.parse().map_err(to_py)
}

/// A finite window `h_min..=h_max` of a tree given by preset name or JSON spec.
#[pyclass(name = "Tree", frozen)]
struct PyTree {
    window: TreeWindow,
}

#[pymethods]
impl PyTree {
    #[new]
    #[pyo3(signature = (tree, h_min, h_max, cap = None))]
    fn new(tree: &str, h_min: i64, h_max: i64, cap: Option<usize>) -> PyResult<Self> {
        let window = TreeWindow::build_with_cap(spec_from(tree)?, h_max, h_min, cap.unwrap_or(DEFAULT_VERTEX_CAP))
            .map_err(to_py)?;
        Ok(Self { window })
    }

    fn __len__(&self) -> usize {
        self.window.len()
    }

    fn __repr__(&self) -> String {
        format!("Tree(h_min={}, h_max={}, vertices={})", self.window.h_min(), self.window.h_max(), self.window.len())
    }

    /// All addresses in the window, or only those on horocycle `h`.
    #[pyo3(signature = (h = None))]
    fn addresses(&self, h: Option<i64>) -> Vec<String> {
        let w = &self.window;
        match h {
            Some(h) => w.horocycle(h).map(|v| w.address_of(v).to_string()).collect(),
            None => w.ids().map(|v| w.address_of(v).to_string()).collect(),
        }
    }

    /// Evaluates operator `op` on `f` (address -> value) over `region`
    /// (default: the whole window). Returns one dict per vertex.
    #[pyo3(signature = (op, f, region = None))]
    fn eval<'py>(
        &self,
        py: Python<'py>,
        op: &str,
        f: &Bound<'py, PyDict>,
        region: Option<Vec<String>>,
    ) -> PyResult<Bound<'py, PyList>> {
        let kind = kind_from(op)?;
        let f = function_from(f)?;
        let w = &self.window;
        let region: Vec<VertexAddress> = match region {
            Some(r) => r.iter().map(|a| a.parse()).collect::<Result<_, _>>().map_err(to_py)?,
            None => w.ids().map(|v| w.address_of(v)).collect(),
        };
        let results = py.allow_threads(|| batch_eval(w, kind, &f, &region)).map_err(to_py)?;
        let out = PyList::empty(py);
        for (x, r) in results {
            let cv = r.map_err(to_py)?;
            let d = PyDict::new(py);
            d.set_item("addr", x.to_string())?;
            d.set_item("value", fraction(py, &cv.value)?)?;
            d.set_item("certified", cv.certified)?;
            d.set_item("tail_bound", fraction(py, &cv.tail_bound)?)?;
            match &cv.witness {
                Some(wit) => d.set_item("witness", (wit.vertex().to_string(), wit.height()))?,
                None => d.set_item("witness", py.None())?,
            }
            out.append(d)?;
        }
        Ok(out)
    }

    /// Maximal-triangle decomposition of `{op f > alpha}` inside this window.
    #[pyo3(signature = (f, alpha, op = "U"))]
    fn decompose<'py>(
        &self,
        py: Python<'py>,
        f: &Bound<'py, PyDict>,
        alpha: &Bound<'py, PyAny>,
        op: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let f = function_from(f)?;
        let alpha = rational_from(alpha)?;
        let kind = kind_from(op)?;
        let rep = py
            .allow_threads(|| decompose_maximal(&self.window, &f, &alpha, kind))
            .map_err(to_py)?;
        json_value(py, &rep.to_json())
    }
}

/// Decomposition on a window sized automatically.
#[pyfunction]
#[pyo3(signature = (tree, f, alpha, op = "U", cap = None))]
fn decompose<'py>(
    py: Python<'py>,
    tree: &str,
    f: &Bound<'py, PyDict>,
    alpha: &Bound<'py, PyAny>,
    op: &str,
    cap: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = spec_from(tree)?;
    let f = function_from(f)?;
    let alpha = rational_from(alpha)?;
    let kind = kind_from(op)?;
    let cap = cap.unwrap_or(DEFAULT_VERTEX_CAP);
    let rep = py
        .allow_threads(|| decompose_auto(&spec, &f, &alpha, kind, cap))
        .map_err(to_py)?;
    json_value(py, &rep.to_json())
}

/// Runs a packaged scenario and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (id, tree = None, window = None, seed = 0, trials = None, cap = None))]
fn run_scenario<'py>(
    py: Python<'py>,
    id: &str,
    tree: Option<String>,
    window: Option<(i64, i64)>,
    seed: u64,
    trials: Option<usize>,
    cap: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    if !SCENARIOS.contains(&id) {
        return Err(PyKeyError::new_err(format!("unknown scenario {id:?}")));
    }
    let cfg = ScenarioConfig {
        tree,
        window,
        seed,
        trials,
        cap: cap.unwrap_or(DEFAULT_VERTEX_CAP),
    };
    let rep = py.allow_threads(|| core_run_scenario(id, &cfg)).map_err(to_py)?;
    json_value(py, &rep.to_json())
}

/// `(exact, upper)`: exact is a Fraction for integer `r`, else None.
#[pyfunction]
fn overlap_constant<'py>(py: Python<'py>, r: &str) -> PyResult<(Option<Bound<'py, PyAny>>, f64)> {
    let r: Exponent = r.parse().map_err(to_py)?;
    let c = core_overlap(&r).map_err(to_py)?;
    let exact = c.exact.as_ref().map(|q| fraction(py, q)).transpose()?;
    Ok((exact, c.upper))
}

#[pymodule]
fn treemax(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTree>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_constant, m)?)?;
    m.add("SCENARIOS", SCENARIOS.to_vec())?;
    Ok(())
}
