//! Propagation of the size distribution from the initial condition
//! delta_{n,1}.
//!
//! Two independent propagators are provided: a dense matrix-exponential path
//! (the reference; scaling-and-squaring, reusing the exponential of each
//! distinct grid step) and an adaptive Runge-Kutta path suited to large N
//! where the banded action keeps the cost linear. The two serve as
//! cross-checks on each other.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::linalg::expm;
use crate::model::ModelSpec;
use crate::ode::{integrate_to_grid, OdeOptions};

/// Dense matrix-exponential propagation is refused above this N.
pub const DENSE_EXPM_CAP_N: usize = 2000;

/// Absolute size of negative weights attributable to propagator rounding.
/// Anything more negative signals a real bug; the invariant tests enforce
/// this bound on whole trajectories.
pub const NEGATIVE_WEIGHT_TOL: f64 = 1e-12;

/// A size distribution at one time instant. Raw weights are stored exactly
/// as produced by the propagator; clipping of tiny negative rounding
/// residues happens only in [`SizeDistribution::clipped_weights`].
#[derive(Debug, Clone)]
pub struct SizeDistribution {
    weights: Vec<f64>,
    time: f64,
}

impl SizeDistribution {
    pub fn new(weights: Vec<f64>, time: f64) -> Self {
        SizeDistribution { weights, time }
    }

    /// delta_{n,1} initial condition for system size N.
    pub fn initial(n_fermions: usize) -> Self {
        let mut weights = vec![0.0; n_fermions + 1];
        weights[1] = 1.0;
        SizeDistribution { weights, time: 0.0 }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Raw weights, including any small negative rounding residues.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights with negative rounding residues clipped to zero. Debug
    /// builds assert the residues are at the rounding scale
    /// (`NEGATIVE_WEIGHT_TOL`); clipping never happens inside the state.
    pub fn clipped_weights(&self) -> Vec<f64> {
        debug_assert!(self.weights.iter().all(|&w| w >= -NEGATIVE_WEIGHT_TOL * 100.0));
        self.weights.iter().map(|&w| w.max(0.0)).collect()
    }

    pub fn normalization(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean_size(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, &w)| n as f64 * w)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean_size();
        let second: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(n, &w)| (n as f64) * (n as f64) * w)
            .sum();
        second - mean * mean
    }

    /// Generating function z(mu) = sum_n exp(-mu n) P(n), mu >= 0.
    pub fn generating_function(&self, mu: f64) -> f64 {
        assert!(mu >= 0.0, "generating function requires mu >= 0");
        self.weights
            .iter()
            .enumerate()
            .map(|(n, &w)| (-mu * n as f64).exp() * w)
            .sum()
    }
}

/// Free-function form of [`SizeDistribution::generating_function`].
pub fn generating_function(dist: &SizeDistribution, mu: f64) -> f64 {
    dist.generating_function(mu)
}

/// Moment time series of a trajectory. `mean_normalized` is mean/normalization,
/// the natural mean under Definition II where total weight decays.
#[derive(Debug, Clone)]
pub struct Moments {
    pub mean_size: Vec<f64>,
    pub normalization: Vec<f64>,
    pub variance: Vec<f64>,
    pub mean_normalized: Vec<f64>,
}

/// Time grid plus distributions and per-time moments.
#[derive(Debug, Clone)]
pub struct Trajectory {
    spec: ModelSpec,
    times: Vec<f64>,
    distributions: Vec<SizeDistribution>,
    mean_size: Vec<f64>,
    normalization: Vec<f64>,
    variance: Vec<f64>,
}

impl Trajectory {
    fn from_states(spec: ModelSpec, times: Vec<f64>, states: Vec<Vec<f64>>) -> Self {
        let distributions: Vec<SizeDistribution> = times
            .iter()
            .zip(states)
            .map(|(&t, w)| SizeDistribution::new(w, t))
            .collect();
        let mean_size = distributions.iter().map(|d| d.mean_size()).collect();
        let normalization = distributions.iter().map(|d| d.normalization()).collect();
        let variance = distributions.iter().map(|d| d.variance()).collect();
        Trajectory {
            spec,
            times,
            distributions,
            mean_size,
            normalization,
            variance,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn distributions(&self) -> &[SizeDistribution] {
        &self.distributions
    }

    pub fn mean_size(&self) -> &[f64] {
        &self.mean_size
    }

    pub fn normalization(&self) -> &[f64] {
        &self.normalization
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Recompute all moment series from the stored distributions.
    pub fn moments(&self) -> Moments {
        let mean_size: Vec<f64> = self.distributions.iter().map(|d| d.mean_size()).collect();
        let normalization: Vec<f64> =
            self.distributions.iter().map(|d| d.normalization()).collect();
        let variance = self.distributions.iter().map(|d| d.variance()).collect();
        let mean_normalized = mean_size
            .iter()
            .zip(&normalization)
            .map(|(&m, &z)| if z != 0.0 { m / z } else { 0.0 })
            .collect();
        Moments {
            mean_size,
            normalization,
            variance,
            mean_normalized,
        }
    }

}

/// Uniform grid of `points` times covering [0, t_max].
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && t_max > 0.0);
    (0..points)
        .map(|k| t_max * k as f64 / (points - 1) as f64)
        .collect()
}

/// Default time horizon: five characteristic times of the fastest coupling.
pub fn default_t_max(spec: &ModelSpec) -> f64 {
    let rate = spec.max_rate();
    if rate > 0.0 {
        5.0 / rate
    } else {
        1.0
    }
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    let mut prev = -f64::INFINITY;
    for (k, &t) in t_grid.iter().enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("invalid grid time {t} at index {k}")));
        }
        if t <= prev {
            return Err(Error::Domain(format!(
                "time grid not strictly increasing at index {k}"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// Reference propagator: P(t) = exp(G t) delta_{n,1} by dense
/// scaling-and-squaring. The exponential of each distinct grid step is
/// computed once and reused across the grid.
pub fn evolve_expm(g: &Generator, t_grid: &[f64]) -> Result<Trajectory> {
    evolve_expm_from(g, &SizeDistribution::initial(g.n_fermions()), t_grid)
}

/// As [`evolve_expm`], restarting from an arbitrary state at `initial.time()`.
pub fn evolve_expm_from(
    g: &Generator,
    initial: &SizeDistribution,
    t_grid: &[f64],
) -> Result<Trajectory> {
    validate_grid(t_grid)?;
    if g.n_fermions() > DENSE_EXPM_CAP_N {
        return Err(Error::ResourceLimit(format!(
            "N = {} exceeds the dense matrix-exponential cap {DENSE_EXPM_CAP_N}; \
             use evolve_ode",
            g.n_fermions()
        )));
    }
    if initial.weights().len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: initial.weights().len(),
        });
    }
    let t_start = initial.time();
    if t_grid[0] < t_start {
        return Err(Error::Domain(format!(
            "grid starts at {} before initial time {t_start}",
            t_grid[0]
        )));
    }

    let dense = g.to_dense();
    let mut p = DVector::from_vec(initial.weights().to_vec());
    let mut t = t_start;
    // Cache of exp(G * dt) per distinct step size.
    let mut cache: Vec<(f64, DMatrix<f64>)> = Vec::new();
    let mut states = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let dt = target - t;
        if dt > 0.0 {
            let propagator = match cache.iter().find(|(h, _)| *h == dt) {
                Some((_, m)) => m,
                None => {
                    let m = expm(&(&dense * dt));
                    cache.push((dt, m));
                    &cache.last().unwrap().1
                }
            };
            p = propagator * p;
            t = target;
        }
        states.push(p.as_slice().to_vec());
    }
    Ok(Trajectory::from_states(*g.spec(), t_grid.to_vec(), states))
}

/// Cross-check propagator: adaptive Runge-Kutta on dP/dt = G P using the
/// banded action only. The step ceiling 0.5/|G|_inf keeps the explicit
/// method inside its stability region.
pub fn evolve_ode(g: &Generator, t_grid: &[f64], rel_tol: f64, abs_tol: f64) -> Result<Trajectory> {
    evolve_ode_from(
        g,
        &SizeDistribution::initial(g.n_fermions()),
        t_grid,
        rel_tol,
        abs_tol,
    )
}

/// As [`evolve_ode`], restarting from an arbitrary state at `initial.time()`.
pub fn evolve_ode_from(
    g: &Generator,
    initial: &SizeDistribution,
    t_grid: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory> {
    validate_grid(t_grid)?;
    if initial.weights().len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: initial.weights().len(),
        });
    }
    let inf_norm = g.inf_norm();
    let opts = OdeOptions {
        rel_tol,
        abs_tol,
        max_step: (inf_norm > 0.0).then(|| 0.5 / inf_norm),
    };
    let rhs = |_t: f64, y: &[f64], out: &mut [f64]| g.apply_into(y, out);
    let states = integrate_to_grid(rhs, initial.weights(), initial.time(), t_grid, &opts)?;
    Ok(Trajectory::from_states(*g.spec(), t_grid.to_vec(), states))
}
