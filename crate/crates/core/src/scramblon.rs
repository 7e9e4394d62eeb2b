//! Continuum (scaling-limit) size distribution in the scrambling phase of
//! Model A under Definition I, and its comparison against finite-N numerics.
//!
//! In the scaling variable s = n/N the distribution splits into a point mass
//! r = v1/v3 at s = 0 and a regular density supported on [0, (1-r)/2]:
//!
//! ```text
//! P(s, t) = r delta(s) + P_reg(s, t),
//! P_reg(s, t) = theta(1 - 2s/(1-r)) * 2 (1-r)^2 exp(2s / (lambda (r+2s-1)))
//!               / (lambda (r+2s-1)^2),
//! ```
//!
//! with lambda = exp(4 (v3 - v1) t) / C and C = N (1-r)^2 / 2. The point
//! mass is carried as a separate scalar weight, never as a narrow numerical
//! bump. As lambda grows the regular part concentrates at s = (1-r)/2, so
//! the long-time mean of s is (1-r)^2 / 2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagate::SizeDistribution;

/// Parameters of the continuum distribution. `lambda_scr` is always derived
/// from (r, N, t) so the parameterization stays consistent.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScramblonParams {
    pub r: f64,
    pub big_n: usize,
    pub t: f64,
    pub lambda_scr: f64,
}

impl ScramblonParams {
    /// Build from explicit couplings; requires the scrambling phase
    /// r = v1/v3 < 1 and t >= 0.
    pub fn from_couplings(v1: f64, v3: f64, big_n: usize, t: f64) -> Result<Self> {
        if !(v3 > 0.0) || !(v1 >= 0.0) {
            return Err(Error::Domain(format!(
                "couplings v1 = {v1}, v3 = {v3} must satisfy v3 > 0, v1 >= 0"
            )));
        }
        let r = v1 / v3;
        if r >= 1.0 {
            return Err(Error::Domain(format!(
                "r = v1/v3 = {r} is outside the scrambling phase (requires r < 1)"
            )));
        }
        if !(t >= 0.0) || big_n == 0 {
            return Err(Error::Domain("require t >= 0 and N >= 1".into()));
        }
        let c = big_n as f64 * (1.0 - r) * (1.0 - r) / 2.0;
        let lambda_scr = (4.0 * (v3 - v1) * t).exp() / c;
        Ok(ScramblonParams {
            r,
            big_n,
            t,
            lambda_scr,
        })
    }

    /// Upper edge (1-r)/2 of the support of the regular part.
    pub fn support_edge(&self) -> f64 {
        (1.0 - self.r) / 2.0
    }
}

/// Regular part of the continuum density at size fraction s.
///
/// Zero outside [0, (1-r)/2). The exponent is assembled in log space before
/// a single `exp`, which keeps the integrable structure near the support
/// edge (where the density vanishes through an essential singularity) free
/// of overflow.
pub fn p_reg(s: f64, params: &ScramblonParams) -> f64 {
    let r = params.r;
    let lambda = params.lambda_scr;
    let edge = params.support_edge();
    if !(0.0..edge).contains(&s) {
        return 0.0;
    }
    let u = r + 2.0 * s - 1.0; // < 0 inside the support
    let log_density = (2.0 * (1.0 - r) * (1.0 - r) / lambda).ln() - 2.0 * u.abs().ln()
        + 2.0 * s / (lambda * u);
    log_density.exp()
}

/// Total mass of the regular part by adaptive quadrature (analytically 1-r).
pub fn reg_mass(params: &ScramblonParams) -> f64 {
    adaptive_simpson(&|s| p_reg(s, params), 0.0, params.support_edge(), 1e-9, 50)
}

/// Mean of s over the full continuum distribution (delta weight contributes
/// zero) by adaptive quadrature.
pub fn reg_mean(params: &ScramblonParams) -> f64 {
    adaptive_simpson(
        &|s| s * p_reg(s, params),
        0.0,
        params.support_edge(),
        1e-9,
        50,
    )
}

/// Long-time mean of s: (1-r)^2 / 2, from the two-delta limit distribution.
pub fn long_time_mean(r: f64) -> f64 {
    (1.0 - r) * (1.0 - r) / 2.0
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let m = 0.5 * (a + b);
    let whole = simpson(f, a, b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, tol / 2.0, depth - 1)
            + adaptive_simpson(f, m, b, tol / 2.0, depth - 1)
    }
}

/// Comparison of a finite-N distribution (rescaled to s = n/N) against the
/// continuum prediction, away from the delta peak at s = 0 and the support
/// edge.
#[derive(Debug, Clone, Serialize)]
pub struct ScramblonComparison {
    pub r: f64,
    pub big_n: usize,
    pub t: f64,
    pub lambda_scr: f64,
    /// Comparison window in s, [3/N, (1-r)/2 - 3/N].
    pub window: (f64, f64),
    /// sup_s |N P(sN) - P_reg(s)| over the window lattice.
    pub sup_distance: f64,
    /// Trapezoid integral of |N P(sN) - P_reg(s)| over the window.
    pub integrated_distance: f64,
    /// integrated_distance / (trapezoid integral of P_reg over the window).
    pub integrated_relative: f64,
    /// Finite-N weight at n < 3, to be compared with the delta mass r.
    pub weight_near_zero: f64,
    /// Finite-N mean of s.
    pub mean_fraction: f64,
    /// (1-r)^2/2, the long-time plateau value of the mean of s.
    pub plateau_mean: f64,
}

/// Rescale a finite-N distribution for Model A / Definition I in the
/// scrambling phase and compare with [`p_reg`].
pub fn compare_finite_n(
    dist: &SizeDistribution,
    params: &ScramblonParams,
) -> Result<ScramblonComparison> {
    let big_n = params.big_n;
    if dist.weights().len() != big_n + 1 {
        return Err(Error::DimensionMismatch {
            expected: big_n + 1,
            got: dist.weights().len(),
        });
    }
    let delta = 3.0 / big_n as f64;
    let edge = params.support_edge();
    let s_lo = delta;
    let s_hi = edge - delta;
    if s_hi <= s_lo {
        return Err(Error::Domain(format!(
            "window [{s_lo}, {s_hi}] is empty; N too small for r = {}",
            params.r
        )));
    }
    let n_lo = (s_lo * big_n as f64).ceil() as usize;
    let n_hi = (s_hi * big_n as f64).floor() as usize;

    let mut sup = 0.0f64;
    let mut diffs = Vec::with_capacity(n_hi - n_lo + 1);
    let mut refs = Vec::with_capacity(n_hi - n_lo + 1);
    for n in n_lo..=n_hi {
        let s = n as f64 / big_n as f64;
        let numeric = big_n as f64 * dist.weights()[n].max(0.0);
        let reference = p_reg(s, params);
        sup = sup.max((numeric - reference).abs());
        diffs.push((numeric - reference).abs());
        refs.push(reference);
    }
    let h = 1.0 / big_n as f64;
    let trapezoid = |v: &[f64]| -> f64 {
        if v.len() < 2 {
            return 0.0;
        }
        h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
    };
    let integrated = trapezoid(&diffs);
    let ref_mass = trapezoid(&refs);
    let weight_near_zero: f64 = dist.weights()[..3.min(dist.weights().len())]
        .iter()
        .map(|&w| w.max(0.0))
        .sum();
    Ok(ScramblonComparison {
        r: params.r,
        big_n,
        t: params.t,
        lambda_scr: params.lambda_scr,
        window: (s_lo, s_hi),
        sup_distance: sup,
        integrated_distance: integrated,
        integrated_relative: if ref_mass > 0.0 {
            integrated / ref_mass
        } else {
            f64::INFINITY
        },
        weight_near_zero,
        mean_fraction: dist.mean_size() / big_n as f64,
        plateau_mean: long_time_mean(params.r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(r: f64, big_n: usize, t: f64) -> ScramblonParams {
        ScramblonParams::from_couplings(r, 1.0, big_n, t).unwrap()
    }

    #[test]
    fn support_and_positivity() {
        let p = params(0.5, 200, 2.0);
        let edge = p.support_edge();
        assert_eq!(edge, 0.25);
        assert_eq!(p_reg(edge + 1e-9, &p), 0.0);
        assert_eq!(p_reg(0.3, &p), 0.0);
        assert_eq!(p_reg(-0.01, &p), 0.0);
        for k in 0..50 {
            let s = edge * k as f64 / 50.0;
            assert!(p_reg(s, &p) >= 0.0);
        }
        // Value at s = 0 is 2/lambda.
        assert_relative_eq!(p_reg(0.0, &p), 2.0 / p.lambda_scr, max_relative = 1e-12);
    }

    #[test]
    fn regular_mass_is_one_minus_r() {
        for (r, t) in [(0.0, 1.5), (0.3, 2.0), (0.5, 2.5), (0.8, 4.0)] {
            let p = params(r, 200, t);
            assert_abs_diff_eq!(reg_mass(&p), 1.0 - r, epsilon = 1e-6);
        }
    }

    #[test]
    fn mass_concentrates_at_edge_for_long_times() {
        let r = 0.5;
        // Mean of the regular part approaches (1-r) * edge = (1-r)^2/2.
        let mut prev_gap = f64::INFINITY;
        for t in [2.0, 3.0, 4.0, 5.0] {
            let p = params(r, 200, t);
            let gap = (long_time_mean(r) - reg_mean(&p)).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 0.01);
    }

    #[test]
    fn phase_and_domain_errors() {
        assert!(ScramblonParams::from_couplings(1.0, 1.0, 100, 1.0).is_err());
        assert!(ScramblonParams::from_couplings(2.0, 1.0, 100, 1.0).is_err());
        assert!(ScramblonParams::from_couplings(0.5, 0.0, 100, 1.0).is_err());
        assert!(ScramblonParams::from_couplings(0.5, 1.0, 100, -1.0).is_err());
        assert!(ScramblonParams::from_couplings(0.5, 1.0, 0, 1.0).is_err());
    }

    #[test]
    fn lambda_is_derived_not_free() {
        let p = ScramblonParams::from_couplings(0.5, 1.0, 100, 3.0).unwrap();
        let c = 100.0 * 0.25 / 2.0;
        assert_relative_eq!(p.lambda_scr, (4.0f64 * 0.5 * 3.0).exp() / c, max_relative = 1e-14);
    }

    #[test]
    fn comparison_rejects_wrong_length() {
        let p = params(0.5, 100, 2.0);
        let dist = SizeDistribution::new(vec![0.0; 50], 2.0);
        assert!(compare_finite_n(&dist, &p).is_err());
    }

    #[test]
    fn comparison_of_exact_continuum_samples_is_tight() {
        // Feed the comparison the continuum density itself sampled on the
        // lattice (plus the delta mass at n = 0); distances must be ~0.
        let big_n = 400;
        let p = params(0.5, big_n, 2.5);
        let mut w = vec![0.0; big_n + 1];
        for (n, wn) in w.iter_mut().enumerate() {
            *wn = p_reg(n as f64 / big_n as f64, &p) / big_n as f64;
        }
        w[0] += p.r;
        let dist = SizeDistribution::new(w, 2.5);
        let report = compare_finite_n(&dist, &p).unwrap();
        assert!(report.sup_distance < 1e-12);
        assert!(report.integrated_relative < 1e-12);
        assert!((report.weight_near_zero - p.r).abs() < 0.05);
    }
}
