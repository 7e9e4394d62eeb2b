//! Spectrum of the size-1..N restricted generator block and the scaling of
//! the second-largest eigenvalue with system size.
//!
//! Column 0 of the generator vanishes (the size-0 identity sector is
//! decoupled), so G is block triangular: its spectrum is {0} united with the
//! spectrum of the restricted block. The largest real part over the block,
//! `lambda_gap`, sets the slow late-time decay rate; in the scrambling phase
//! it shrinks exponentially with N and eventually sinks below what double
//! precision can resolve, which the `reliable` flag reports.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::linalg::eigenvalues;
use crate::model::{ModelKind, ModelSpec, SizeDefinition};

/// Dense eigensolves are refused above this N.
pub const DENSE_EIG_CAP_N: usize = 400;

/// Factor on machine epsilon * |G|_inf below which a computed gap cannot be
/// distinguished from zero.
const RELIABILITY_FACTOR: f64 = 1e3;

/// Eigenvalue analysis of one generator.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub spec: ModelSpec,
    /// Eigenvalues of the restricted block, sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
    /// Largest real part over the restricted block.
    pub lambda_gap: f64,
    /// False when |lambda_gap| is below the double-precision floor
    /// 1e3 * eps * |G|_inf.
    pub reliable: bool,
}

/// Rows and columns 1..=N of the generator, densely.
pub fn restricted_block(g: &Generator) -> DMatrix<f64> {
    let dense = g.to_dense();
    let n = g.n_fermions();
    dense.view((1, 1), (n, n)).into_owned()
}

/// Eigenvalues of a dense block, sorted by descending real part.
pub fn eigen_spectrum(block: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if block.nrows() > DENSE_EIG_CAP_N {
        return Err(Error::ResourceLimit(format!(
            "block size {} exceeds dense eigensolve cap {DENSE_EIG_CAP_N}",
            block.nrows()
        )));
    }
    eigenvalues(block)
}

/// Restrict, eigensolve, and flag precision reliability.
pub fn spectral_report(g: &Generator) -> Result<SpectralReport> {
    let block = restricted_block(g);
    let eigs = eigen_spectrum(&block)?;
    let lambda_gap = eigs.first().map(|v| v.re).unwrap_or(0.0);
    let floor = RELIABILITY_FACTOR * f64::EPSILON * g.inf_norm();
    Ok(SpectralReport {
        spec: *g.spec(),
        eigenvalues: eigs,
        lambda_gap,
        reliable: lambda_gap.abs() >= floor,
    })
}

/// One row of a gap sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapPoint {
    pub big_n: usize,
    pub lambda_gap: f64,
    pub reliable: bool,
}

/// lambda_gap(N) over a list of system sizes at fixed couplings.
pub fn gap_sweep(
    kind: ModelKind,
    definition: SizeDefinition,
    v1: f64,
    v_int: f64,
    n_list: &[usize],
) -> Result<Vec<GapPoint>> {
    let mut out = Vec::with_capacity(n_list.len());
    for &big_n in n_list {
        let spec = match kind {
            ModelKind::A => ModelSpec::model_a(definition, v1, v_int, big_n)?,
            ModelKind::B => ModelSpec::model_b(definition, v1, v_int, big_n)?,
        };
        let g = Generator::assemble(&spec)?;
        let report = spectral_report(&g)?;
        out.push(GapPoint {
            big_n,
            lambda_gap: report.lambda_gap,
            reliable: report.reliable,
        });
    }
    Ok(out)
}

/// Distance between two eigenvalue multisets: greedy nearest-neighbor
/// matching (largest magnitudes first), returning the worst matched
/// distance. Robust against the reordering of near-degenerate clusters that
/// defeats lexicographic pairing.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| b[j].norm().total_cmp(&b[i].norm()));
    let mut used = vec![false; a.len()];
    let mut worst = 0.0f64;
    for &i in &order {
        let mut best: Option<(usize, f64)> = None;
        for (j, &av) in a.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (av - b[i]).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("equal lengths leave a free partner");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Least-squares line fit with coefficient of determination.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit log|lambda_gap| against N over the reliable, nonzero sweep points.
/// Returns `None` with fewer than three usable points.
pub fn fit_log_gap(points: &[GapPoint]) -> Option<LineFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.reliable && p.lambda_gap != 0.0)
        .map(|p| (p.big_n as f64, p.lambda_gap.abs().ln()))
        .collect();
    if usable.len() < 3 {
        return None;
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|(x, _)| x).sum();
    let sy: f64 = usable.iter().map(|(_, y)| y).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = usable.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = usable.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = usable
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
    })
}
