//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 5(4) embedded
//! pair, FSAL) with output at caller-specified grid points.
//!
//! Steps are clamped so every grid point is hit exactly; no interpolation is
//! involved. The caller may impose a hard step-size ceiling, used by the
//! master-equation path to respect stiffness (rates grow like coupling * N).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard ceiling on the step size, if any.
    pub max_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// Fifth-order solution weights (also row 7 of A; first-same-as-last).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;
const MAX_REJECTS_PER_STEP: usize = 60;

/// Integrate dy/dt = rhs(t, y) from `t_start`, recording the state at each
/// point of the strictly increasing `t_grid` (all >= t_start).
pub fn integrate_to_grid<F>(
    mut rhs: F,
    y_start: &[f64],
    t_start: f64,
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    validate_grid(t_grid, t_start)?;
    let dim = y_start.len();
    let mut y = y_start.to_vec();
    let mut t = t_start;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(t_grid.len());

    let t_end = *t_grid.last().unwrap();
    let span = (t_end - t_start).max(f64::MIN_POSITIVE);
    let ceiling = opts.max_step.unwrap_or(span).min(span);
    let h_floor = span * 1e-14;

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut y_stage = vec![0.0; dim];
    let mut y_next = vec![0.0; dim];

    rhs(t, &y, &mut k1);
    let mut h = initial_step(&y, &k1, opts).min(ceiling);

    for &target in t_grid {
        if target == t {
            out.push(y.clone());
            continue;
        }
        while t < target {
            let h_try = h.min(ceiling).min(target - t);
            let mut accepted = false;
            let mut h_cur = h_try;
            for _attempt in 0..MAX_REJECTS_PER_STEP {
                if h_cur < h_floor {
                    return Err(Error::Integration(format!(
                        "step size {h_cur:e} underflowed at t = {t}; \
                         tolerances rel={:e} abs={:e} unreachable",
                        opts.rel_tol, opts.abs_tol
                    )));
                }
                // Stages 2..6.
                for i in 0..dim {
                    y_stage[i] = y[i] + h_cur * A21 * k1[i];
                }
                rhs(t + C2 * h_cur, &y_stage, &mut k2);
                for i in 0..dim {
                    y_stage[i] = y[i] + h_cur * (A31 * k1[i] + A32 * k2[i]);
                }
                rhs(t + C3 * h_cur, &y_stage, &mut k3);
                for i in 0..dim {
                    y_stage[i] = y[i] + h_cur * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
                }
                rhs(t + C4 * h_cur, &y_stage, &mut k4);
                for i in 0..dim {
                    y_stage[i] = y[i]
                        + h_cur * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
                }
                rhs(t + C5 * h_cur, &y_stage, &mut k5);
                for i in 0..dim {
                    y_stage[i] = y[i]
                        + h_cur
                            * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                                + A65 * k5[i]);
                }
                rhs(t + h_cur, &y_stage, &mut k6);
                // Fifth-order solution; k7 = f(t + h, y_next) is FSAL.
                for i in 0..dim {
                    y_next[i] = y[i]
                        + h_cur
                            * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
                }
                rhs(t + h_cur, &y_next, &mut k7);

                // Scaled RMS error of the embedded difference.
                let mut err_sq = 0.0;
                for i in 0..dim {
                    let e = h_cur
                        * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                            + E7 * k7[i]);
                    let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_next[i].abs());
                    err_sq += (e / sc) * (e / sc);
                }
                let err = (err_sq / dim as f64).sqrt();

                if err <= 1.0 {
                    t += h_cur;
                    std::mem::swap(&mut y, &mut y_next);
                    std::mem::swap(&mut k1, &mut k7);
                    let scale = if err == 0.0 {
                        MAX_SCALE
                    } else {
                        (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
                    };
                    h = (h_cur * scale).min(ceiling);
                    accepted = true;
                    break;
                }
                let scale = (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, 1.0);
                h_cur *= scale;
            }
            if !accepted {
                return Err(Error::Integration(format!(
                    "no acceptable step after {MAX_REJECTS_PER_STEP} subdivisions at t = {t}"
                )));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn validate_grid(t_grid: &[f64], t_start: f64) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    let mut prev = t_start;
    for (k, &t) in t_grid.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::Domain(format!("non-finite grid time at index {k}")));
        }
        if k == 0 {
            if t < t_start {
                return Err(Error::Domain(format!(
                    "grid starts at {t} before integration start {t_start}"
                )));
            }
        } else if t <= prev {
            return Err(Error::Domain(format!(
                "time grid not strictly increasing at index {k}"
            )));
        }
        prev = t;
    }
    Ok(())
}

fn initial_step(y: &[f64], f0: &[f64], opts: &OdeOptions) -> f64 {
    let d0 = rms(y, opts);
    let d1 = rms(f0, opts);
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * (d0 / d1)
    }
}

fn rms(v: &[f64], opts: &OdeOptions) -> f64 {
    let s: f64 = v
        .iter()
        .map(|&x| {
            let sc = opts.abs_tol + opts.rel_tol * x.abs();
            (x / sc) * (x / sc)
        })
        .sum();
    (s / v.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let rhs = |_t: f64, y: &[f64], out: &mut [f64]| out[0] = -3.0 * y[0];
        let grid = [0.0, 0.5, 1.0, 2.0];
        let sol = integrate_to_grid(rhs, &[1.0], 0.0, &grid, &OdeOptions::default()).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            assert_abs_diff_eq!(sol[k][0], (-3.0 * t).exp(), epsilon = 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let rhs = |_t: f64, y: &[f64], out: &mut [f64]| {
            out[0] = y[1];
            out[1] = -y[0];
        };
        let grid = [std::f64::consts::PI];
        let sol = integrate_to_grid(rhs, &[1.0, 0.0], 0.0, &grid, &OdeOptions::default()).unwrap();
        assert_abs_diff_eq!(sol[0][0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol[0][1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_rhs_is_constant() {
        let rhs = |_t: f64, _y: &[f64], out: &mut [f64]| out.fill(0.0);
        let sol =
            integrate_to_grid(rhs, &[0.3, -0.7], 0.0, &[1.0, 5.0], &OdeOptions::default())
                .unwrap();
        assert_eq!(sol[1], vec![0.3, -0.7]);
    }

    #[test]
    fn grid_validation() {
        let rhs = |_t: f64, _y: &[f64], out: &mut [f64]| out.fill(0.0);
        assert!(integrate_to_grid(rhs, &[1.0], 0.0, &[], &OdeOptions::default()).is_err());
        let rhs = |_t: f64, _y: &[f64], out: &mut [f64]| out.fill(0.0);
        assert!(
            integrate_to_grid(rhs, &[1.0], 0.0, &[1.0, 0.5], &OdeOptions::default()).is_err()
        );
        let rhs = |_t: f64, _y: &[f64], out: &mut [f64]| out.fill(0.0);
        assert!(
            integrate_to_grid(rhs, &[1.0], 2.0, &[1.0], &OdeOptions::default()).is_err()
        );
    }

    #[test]
    fn respects_step_ceiling_on_stiff_problem() {
        // lambda = -2000 with a ceiling keeping the explicit method stable.
        let rhs = |_t: f64, y: &[f64], out: &mut [f64]| out[0] = -2000.0 * y[0];
        let opts = OdeOptions {
            max_step: Some(0.5 / 2000.0),
            ..OdeOptions::default()
        };
        let sol = integrate_to_grid(rhs, &[1.0], 0.0, &[0.01], &opts).unwrap();
        assert_abs_diff_eq!(sol[0][0], (-20.0f64).exp(), epsilon = 1e-10);
    }
}
