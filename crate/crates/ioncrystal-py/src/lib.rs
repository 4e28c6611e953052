//! Python bindings. Results come back as plain dicts and lists.

use ioncrystal::decoherence::{temperature_scan, CouplingScales, DiagramMode, ScanSummary};
use ioncrystal::lattice::{derived_betas, lattice_sums as core_lattice_sums, physical_spacing, PhysicalParams};
use ioncrystal::phonons::{x_direction_path, CrystalModel, Spectrum};
use ioncrystal::spinchain::{self, ChainSpec};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

fn to_py_err(e: ioncrystal::Error) -> PyErr {
    use ioncrystal::Error as E;
    match e {
        E::InvalidParameter(_) | E::LatticeTooSmall { .. } | E::OffGrid { .. } | E::InvalidBasisLabel(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyArithmeticError::new_err(other.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn dump<'py>(py: Python<'py>, value: Result<Value, serde_json::Error>) -> PyResult<Bound<'py, PyAny>> {
    let v = value.map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn params(f_xy: f64, f_z: f64, temperature: f64) -> PyResult<PhysicalParams> {
    PhysicalParams::beryllium(f_xy, f_z, temperature).map_err(to_py_err)
}

/// C1, C2 and beta_xy of an L x L crystal.
#[pyfunction]
fn lattice_sums(py: Python<'_>, l: usize) -> PyResult<Bound<'_, PyAny>> {
    let s = core_lattice_sums(l).map_err(to_py_err)?;
    dump(py, serde_json::to_value(s))
}

/// Spacing and dimensionless scales of a beryllium crystal.
#[pyfunction]
#[pyo3(signature = (f_xy, f_z, l, temperature=1e-3))]
fn derived_scales(py: Python<'_>, f_xy: f64, f_z: f64, l: usize, temperature: f64) -> PyResult<Bound<'_, PyAny>> {
    let p = params(f_xy, f_z, temperature)?;
    let sums = core_lattice_sums(l).map_err(to_py_err)?;
    let mut v = serde_json::to_value(derived_betas(&p, &sums)).map_err(|e| PyValueError::new_err(e.to_string()))?;
    v["spacing"] = Value::from(physical_spacing(&p, &sums));
    json_to_py(py, &v)
}

/// Phonon spectrum of an L x L crystal with omega_z / omega_xy = z_ratio.
#[pyclass(module = "ioncrystal")]
struct Crystal {
    model: CrystalModel,
    spectrum: Spectrum,
}

#[pymethods]
impl Crystal {
    #[new]
    fn new(l: usize, z_ratio: f64) -> PyResult<Self> {
        let model = CrystalModel::new(l, z_ratio).map_err(to_py_err)?;
        let spectrum = model.spectrum().map_err(to_py_err)?;
        Ok(Self { model, spectrum })
    }

    #[getter]
    fn l(&self) -> usize {
        self.spectrum.l
    }

    #[getter]
    fn beta_xy(&self) -> f64 {
        self.spectrum.beta_xy
    }

    /// Dynamical matrix at grid point (n1, n2), row major.
    fn dynamical_matrix(&self, n1: usize, n2: usize) -> PyResult<Vec<Vec<f64>>> {
        let q = self.model.wavevector(n1, n2).map_err(to_py_err)?;
        let d = self.model.dynamical_matrix(&q).map_err(to_py_err)?;
        Ok((0..3).map(|i| (0..3).map(|j| d[(i, j)]).collect()).collect())
    }

    /// Frequencies, eigenvectors and branch labels at (n1, n2).
    fn modes_at<'py>(&self, py: Python<'py>, n1: usize, n2: usize) -> PyResult<Bound<'py, PyAny>> {
        let q = self.model.wavevector(n1, n2).map_err(to_py_err)?;
        dump(py, serde_json::to_value(self.spectrum.get(&q)))
    }

    fn gap_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        dump(py, serde_json::to_value(self.spectrum.gap_report()))
    }

    /// Branch frequencies along the x direction.
    fn band_structure<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let path = x_direction_path(self.spectrum.l);
        let bands = self.model.band_structure(&path).map_err(to_py_err)?;
        dump(py, serde_json::to_value(bands))
    }
}

/// Gate error against temperature for a beryllium crystal.
#[pyfunction]
#[pyo3(signature = (f_xy, f_z, l, gamma, temperatures, exact=false))]
fn decoherence_scan<'py>(
    py: Python<'py>,
    f_xy: f64,
    f_z: f64,
    l: usize,
    gamma: f64,
    temperatures: Vec<f64>,
    exact: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let p = params(f_xy, f_z, temperatures.first().copied().unwrap_or(1e-3))?;
    let sums = core_lattice_sums(l).map_err(to_py_err)?;
    let d = derived_betas(&p, &sums);
    let scales = CouplingScales::from_sign_gate(d.x_ratio, gamma).map_err(to_py_err)?;
    let spectrum = CrystalModel::from_params(l, &p)
        .and_then(|m| m.spectrum())
        .map_err(to_py_err)?;
    let mode = if exact { DiagramMode::Exact } else { DiagramMode::HighTemperature };
    let rows = py
        .detach(|| temperature_scan(&spectrum, &p, &scales, &temperatures, mode))
        .map_err(to_py_err)?;
    let summary = ScanSummary::from_scan(&rows);
    dump(py, serde_json::to_value(serde_json::json!({ "rows": rows, "summary": summary })))
}

/// Pushing-gate diagnostics; rates in units of omega_z unless noted.
#[pyfunction]
fn gate_diagnostics(
    py: Python<'_>,
    eta0: f64,
    beta_z: f64,
    z_ratio: f64,
    gamma_xy: f64,
    n_z: f64,
) -> PyResult<Bound<'_, PyAny>> {
    let d = ioncrystal::gate::diagnose(eta0, beta_z, z_ratio, gamma_xy, n_z).map_err(to_py_err)?;
    dump(py, serde_json::to_value(d))
}

/// Effective spin couplings of an n-ion chain, row major.
#[pyfunction]
#[pyo3(signature = (n, beta_x, detuning, force, omega_x=1.0))]
fn chain_couplings(n: usize, beta_x: f64, detuning: f64, force: f64, omega_x: f64) -> PyResult<Vec<Vec<f64>>> {
    let spec = ChainSpec {
        n_ions: n,
        beta_x,
        omega_x,
        detuning,
        force,
    };
    let modes = spinchain::chain_normal_modes(&spec).map_err(to_py_err)?;
    let j = spinchain::effective_couplings(&spec, &modes).map_err(to_py_err)?.j;
    Ok((0..n).map(|a| (0..n).map(|b| j[(a, b)]).collect()).collect())
}

#[pymodule(name = "ioncrystal")]
fn ioncrystal_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Crystal>()?;
    m.add_function(wrap_pyfunction!(lattice_sums, m)?)?;
    m.add_function(wrap_pyfunction!(derived_scales, m)?)?;
    m.add_function(wrap_pyfunction!(decoherence_scan, m)?)?;
    m.add_function(wrap_pyfunction!(gate_diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(chain_couplings, m)?)?;
    Ok(())
}
