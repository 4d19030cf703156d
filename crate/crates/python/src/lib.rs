//! Python bindings. All quantities are SI (m, Hz, s); frequencies are plain,
//! not angular.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cavleak_core::analysis::{self, AnticrossingData, AnticrossingPoint, SweepConfig};
use cavleak_core::bloch::{self, DynamicsConfig};
use cavleak_core::fencing::{self, FencePlan};
use cavleak_core::helmholtz::{self, EigenOptions};
use cavleak_core::physics::{self, CavityGeometry, CavityModeIndex};
use cavleak_core::pinning::{self, PinningConfig, PinningStatus, Separation};
use cavleak_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NoConvergence { .. } | Error::Unstable { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for cavleak_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// ((n, m, l), f_Hz)
type ModeEntry = ((u32, u32, u32), f64);

/// Rectangular box cavity of size a × b × e with a uniform filling.
#[pyclass(name = "Cavity", frozen, skip_from_py_object, module = "cavleak")]
#[derive(Clone)]
struct PyCavity(CavityGeometry);

#[pymethods]
impl PyCavity {
    #[new]
    #[pyo3(signature = (length_a, height_b, depth_e, eps_r = 1.0))]
    fn new(length_a: f64, height_b: f64, depth_e: f64, eps_r: f64) -> PyResult<Self> {
        CavityGeometry::new(length_a, height_b, depth_e, eps_r)
            .py_err()
            .map(PyCavity)
    }

    fn mode_frequency(&self, n: u32, m: u32, l: u32) -> PyResult<f64> {
        let idx = CavityModeIndex::new(n, m, l).py_err()?;
        physics::mode_frequency(&self.0, idx).py_err()
    }

    /// [((n, m, l), f_Hz), ...] sorted by frequency.
    #[pyo3(signature = (count, max_index = 8))]
    fn lowest_modes(&self, count: usize, max_index: u32) -> PyResult<Vec<ModeEntry>> {
        Ok(physics::lowest_modes(&self.0, count, max_index)
            .py_err()?
            .into_iter()
            .map(|(i, f)| ((i.n, i.m, i.l), f))
            .collect())
    }

    fn zero_point_field(&self, f_c: f64) -> PyResult<f64> {
        physics::zero_point_field(&self.0, f_c).py_err()
    }

    fn __repr__(&self) -> String {
        let g = &self.0;
        format!(
            "Cavity({}, {}, {}, eps_r={})",
            g.length_a, g.height_b, g.depth_e, g.relative_permittivity
        )
    }
}

/// Square cross-section discretized with `resolution` nodes per side,
/// boundary included.
#[pyclass(name = "Grid", frozen, skip_from_py_object, module = "cavleak")]
#[derive(Clone)]
struct PyGrid(helmholtz::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (side, resolution = helmholtz::DEFAULT_RESOLUTION, eps_r = 1.0))]
    fn new(side: f64, resolution: usize, eps_r: f64) -> PyResult<Self> {
        helmholtz::Grid::new(side, resolution)
            .and_then(|g| g.with_permittivity(eps_r))
            .py_err()
            .map(PyGrid)
    }

    #[getter]
    fn side(&self) -> f64 {
        self.0.side
    }

    #[getter]
    fn resolution(&self) -> usize {
        self.0.resolution
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }
}

/// Wire centers (x, z) in meters sharing one diameter.
#[pyclass(name = "WireLayout", frozen, skip_from_py_object, module = "cavleak")]
#[derive(Clone)]
struct PyLayout(fencing::WireLayout);

#[pymethods]
impl PyLayout {
    #[new]
    fn new(centers: Vec<(f64, f64)>, diameter: f64) -> Self {
        PyLayout(fencing::WireLayout { centers, diameter })
    }

    /// Half-wave style fence of the given iteration, coarse wires first.
    #[staticmethod]
    #[pyo3(signature = (iterations, side, diameter, division = 2))]
    fn fence(iterations: u32, side: f64, diameter: f64, division: u32) -> PyResult<Self> {
        let plan = FencePlan::new(division, iterations, side, diameter).py_err()?;
        fencing::generate_fence_layout(&plan).py_err().map(PyLayout)
    }

    #[getter]
    fn centers(&self) -> Vec<(f64, f64)> {
        self.0.centers.clone()
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.0.diameter
    }

    fn validate(&self, side: f64) -> PyResult<()> {
        self.0.validate(side).py_err()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "EigenSolution", frozen, module = "cavleak")]
struct PySolution(helmholtz::EigenSolution);

#[pymethods]
impl PySolution {
    #[getter]
    fn frequency(&self) -> f64 {
        self.0.frequency
    }

    #[getter]
    fn wavenumber(&self) -> f64 {
        self.0.wavenumber
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    /// Interior field as rows of constant z, peak normalized to 1.
    #[getter]
    fn field(&self) -> Vec<Vec<f64>> {
        let n = self.0.field.grid.interior();
        self.0.field.values.chunks(n).map(<[f64]>::to_vec).collect()
    }

    /// ((x, z), value) of the field maximum.
    fn peak(&self) -> ((f64, f64), f64) {
        self.0.field.peak()
    }
}

fn eigen_options(seed: Option<u64>) -> EigenOptions {
    let mut o = EigenOptions::default();
    if let Some(s) = seed {
        o.seed = s;
    }
    o
}

#[pyfunction]
#[pyo3(signature = (grid, layout = None, seed = None))]
fn dominant_eigenmode(
    py: Python<'_>,
    grid: &PyGrid,
    layout: Option<&PyLayout>,
    seed: Option<u64>,
) -> PyResult<PySolution> {
    let grid = grid.0;
    let layout = layout.map(|l| l.0.clone());
    py.detach(|| {
        let mask = match &layout {
            Some(l) => helmholtz::rasterize_wires(&grid, l)?,
            None => helmholtz::ConductorMask::empty(&grid),
        };
        helmholtz::dominant_eigenmode_with(&grid, &mask, &eigen_options(seed))
    })
    .py_err()
    .map(PySolution)
}

#[pyclass(name = "PinningReport", frozen, module = "cavleak")]
struct PyPinningReport(pinning::PinningReport);

#[pymethods]
impl PyPinningReport {
    /// [(iteration, wires_added, N_total, f_c_Hz), ...]
    #[getter]
    fn iterations(&self) -> Vec<(usize, usize, usize, f64)> {
        self.0
            .iterations
            .iter()
            .map(|r| (r.iteration, r.wires_added, r.total_wires, r.frequency))
            .collect()
    }

    #[getter]
    fn layout(&self) -> PyLayout {
        PyLayout(self.0.final_layout.clone())
    }

    #[getter]
    fn status(&self) -> &'static str {
        match self.0.status {
            PinningStatus::TargetReached => "target_reached",
            PinningStatus::WireBudgetReached => "wire_budget_reached",
            PinningStatus::Stagnated => "stagnated",
            PinningStatus::NoPlacement => "no_placement",
        }
    }

    #[getter]
    fn frequency(&self) -> f64 {
        self.0.final_solution.frequency
    }
}

#[pyfunction]
#[pyo3(signature = (
    grid, wire_diameter, max_wires, target_frequency = None, theta = helmholtz::DEFAULT_THRESHOLD,
    separation = None, separation_wavelengths = None, initial = None, seed = None
))]
#[allow(clippy::too_many_arguments)]
fn run_pinning(
    py: Python<'_>,
    grid: &PyGrid,
    wire_diameter: f64,
    max_wires: usize,
    target_frequency: Option<f64>,
    theta: f64,
    separation: Option<f64>,
    separation_wavelengths: Option<f64>,
    initial: Option<&PyLayout>,
    seed: Option<u64>,
) -> PyResult<PyPinningReport> {
    let separation = match (separation, separation_wavelengths) {
        (Some(_), Some(_)) => {
            return Err(PyValueError::new_err(
                "pass at most one of separation and separation_wavelengths",
            ))
        }
        (Some(m), None) => Separation::Fixed(m),
        (None, Some(w)) => Separation::Wavelengths(w),
        (None, None) => Separation::Default,
    };
    let cfg = PinningConfig {
        target_frequency,
        max_wires,
        wire_diameter,
        threshold_theta: theta,
        separation,
        grid: grid.0,
        eigen: eigen_options(seed),
    };
    let initial = initial
        .map(|l| l.0.clone())
        .unwrap_or_else(|| fencing::WireLayout::empty(wire_diameter));
    py.detach(|| pinning::run_pinning(&cfg, &initial))
        .py_err()
        .map(PyPinningReport)
}

/// Time-averaged loss of excited-state population over `horizon`.
#[pyfunction]
#[pyo3(signature = (g, detuning, horizon, gamma_r = 0.0, gamma_d = 0.0))]
fn depolarizing_probability(
    g: f64,
    detuning: f64,
    horizon: f64,
    gamma_r: f64,
    gamma_d: f64,
) -> PyResult<f64> {
    let cfg = DynamicsConfig::undamped(g, detuning, horizon).with_damping(gamma_r, gamma_d);
    bloch::depolarizing_probability(&cfg).py_err()
}

/// Returns (rows, crossing) where rows are dicts keyed like the sweep CSV
/// and crossing is the smallest |Δ| in Hz with p below threshold, or None.
#[pyfunction]
#[pyo3(signature = (
    n_min = 0, n_max = 33, damped = true, f_101 = 3e9, f_q = 6e9, g0 = 4e6,
    horizon = 250e-9, t1 = 100e-6, t2 = 50e-6
))]
#[allow(clippy::too_many_arguments)]
fn leakage_sweep<'py>(
    py: Python<'py>,
    n_min: u64,
    n_max: u64,
    damped: bool,
    f_101: f64,
    f_q: f64,
    g0: f64,
    horizon: f64,
    t1: f64,
    t2: f64,
) -> PyResult<(Vec<Bound<'py, PyDict>>, Option<f64>)> {
    if n_min > n_max {
        return Err(PyValueError::new_err("n_min > n_max"));
    }
    let cfg = SweepConfig {
        f_101,
        f_q,
        g0,
        horizon,
        t1,
        t2,
        n_range: (n_min..=n_max).collect(),
        damped,
        ..SweepConfig::default()
    };
    let result = py.detach(|| analysis::leakage_sweep(&cfg)).py_err()?;
    let rows = result
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("N", r.n)?;
            d.set_item("f_tilde_c", r.f_tilde)?;
            d.set_item("delta_Hz", r.delta)?;
            d.set_item("g_Hz", r.g)?;
            d.set_item("p_undamped", r.p_undamped)?;
            d.set_item("p_damped", r.p_damped)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok((rows, result.threshold_crossing_delta))
}

/// Fit (g, f_c) to both dressed branches. Returns a dict with g, f_c, their
/// 95% half-widths, rms_residual, iterations and degrees_of_freedom.
#[pyfunction]
#[pyo3(signature = (f_r, lower, upper, sigma = None))]
fn fit_anticrossing<'py>(
    py: Python<'py>,
    f_r: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    sigma: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let n = f_r.len();
    if lower.len() != n || upper.len() != n || sigma.as_ref().is_some_and(|s| s.len() != n) {
        return Err(PyValueError::new_err("input sequences differ in length"));
    }
    let points = (0..n)
        .map(|i| AnticrossingPoint {
            f_r: f_r[i],
            lower: lower[i],
            upper: upper[i],
            sigma: sigma.as_ref().map(|s| s[i]),
        })
        .collect();
    let fit = analysis::fit_anticrossing(&AnticrossingData { points }).py_err()?;
    let d = PyDict::new(py);
    d.set_item("g", fit.g)?;
    d.set_item("f_c", fit.f_c)?;
    d.set_item("g_ci95", fit.g_ci95)?;
    d.set_item("f_c_ci95", fit.f_c_ci95)?;
    d.set_item("rms_residual", fit.rms_residual)?;
    d.set_item("iterations", fit.iterations)?;
    d.set_item("degrees_of_freedom", fit.degrees_of_freedom)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (iterations, division = 2))]
fn fence_wire_count(iterations: u32, division: u32) -> u64 {
    fencing::fence_wire_count(iterations, division)
}

#[pyfunction]
#[pyo3(signature = (iterations, division = 2))]
fn fence_scaled_frequency(iterations: u32, division: u32) -> f64 {
    fencing::fence_scaled_frequency(iterations, division)
}

#[pyfunction]
fn frequency_from_wire_count(n_wires: f64) -> f64 {
    fencing::frequency_from_wire_count(n_wires)
}

#[pymodule]
fn cavleak(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCavity>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyLayout>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyPinningReport>()?;
    m.add_function(wrap_pyfunction!(dominant_eigenmode, m)?)?;
    m.add_function(wrap_pyfunction!(run_pinning, m)?)?;
    m.add_function(wrap_pyfunction!(depolarizing_probability, m)?)?;
    m.add_function(wrap_pyfunction!(leakage_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fit_anticrossing, m)?)?;
    m.add_function(wrap_pyfunction!(fence_wire_count, m)?)?;
    m.add_function(wrap_pyfunction!(fence_scaled_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(frequency_from_wire_count, m)?)?;
    Ok(())
}
