//! Eigenvalues of a real non-symmetric matrix.
//!
//! Pipeline: Parlett–Reinsch balancing (diagonal similarity scaling by
//! powers of two), Householder reduction to upper Hessenberg form, then the
//! Francis implicit double-shift QR iteration. The QR stage follows the
//! classic EISPACK `hqr` routine (by way of its JAMA translation), with
//! eigenvector accumulation stripped out and an explicit iteration cap.
//!
//! Balancing matters here: size-transition generators carry entries spanning
//! several orders of magnitude in N, and the scaling keeps the QR rounding
//! errors proportional to the balanced norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 100;

/// All eigenvalues, sorted by descending real part (ties: descending
/// imaginary part). Complex eigenvalues of the real input come in conjugate
/// pairs.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalues requires a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(a[(0, 0)], 0.0)]);
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let (re, im) = hqr(&mut h)?;
    let mut vals: Vec<Complex64> = re
        .into_iter()
        .zip(im)
        .map(|(r, i)| Complex64::new(r, i))
        .collect();
    vals.sort_by(|a, b| {
        b.re.total_cmp(&a.re)
            .then_with(|| b.im.total_cmp(&a.im))
    });
    Ok(vals)
}

/// In-place diagonal similarity scaling (radix 2) equalizing row and column
/// norms. Eigenvalues are unchanged.
pub fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for _pass in 0..100 {
        let mut done = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&j| j != i).map(|j| a[(j, i)].abs()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 || !c.is_finite() || !r.is_finite() {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                f *= 2.0;
                c *= 4.0;
            }
            while c >= r * 2.0 {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(h: &mut DMatrix<f64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += h[(i, m - 1)].abs();
        }
        if scale != 0.0 {
            let mut hh = 0.0;
            for i in (m..=high).rev() {
                ort[i] = h[(i, m - 1)] / scale;
                hh += ort[i] * ort[i];
            }
            let mut g = hh.sqrt();
            if ort[m] > 0.0 {
                g = -g;
            }
            hh -= ort[m] * g;
            ort[m] -= g;

            // Apply (I - u u^T / hh) from the left, then from the right.
            for j in m..n {
                let mut f = 0.0;
                for i in (m..=high).rev() {
                    f += ort[i] * h[(i, j)];
                }
                f /= hh;
                for i in m..=high {
                    h[(i, j)] -= f * ort[i];
                }
            }
            for i in 0..=high {
                let mut f = 0.0;
                for j in (m..=high).rev() {
                    f += ort[j] * h[(i, j)];
                }
                f /= hh;
                for j in m..=high {
                    h[(i, j)] -= f * ort[j];
                }
            }
            h[(m, m - 1)] = scale * g;
        }
    }
    // Clear the sub-Hessenberg remainders left by the reflections.
    for i in 2..n {
        for j in 0..(i - 1) {
            h[(i, j)] = 0.0;
        }
    }
}

fn dump_matrix(h: &DMatrix<f64>) -> String {
    if h.nrows() > 16 {
        return format!("{}x{} matrix (too large to dump)", h.nrows(), h.ncols());
    }
    let mut s = String::new();
    for i in 0..h.nrows() {
        let row: Vec<String> = (0..h.ncols()).map(|j| format!("{:.6e}", h[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Francis double-shift QR on an upper Hessenberg matrix; returns the real
/// and imaginary parts of the eigenvalues.
#[allow(clippy::needless_range_loop)]
fn hqr(hm: &mut DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = hm.nrows();
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];

    let low: isize = 0;
    let mut n: isize = nn as isize - 1;
    let eps = 2f64.powi(-52);
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);
    p = 0.0;
    q = 0.0;
    r = 0.0;

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += hm[(i, j)].abs();
        }
    }
    if norm == 0.0 {
        return Ok((d, e));
    }

    let mut iter = 0usize;
    while n >= low {
        // Look for a single small sub-diagonal element.
        let mut l = n;
        while l > low {
            let (lu, _) = (l as usize, ());
            s = hm[(lu - 1, lu - 1)].abs() + hm[(lu, lu)].abs();
            if s == 0.0 {
                s = norm;
            }
            if hm[(lu, lu - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            let nu = n as usize;
            hm[(nu, nu)] += exshift;
            d[nu] = hm[(nu, nu)];
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            let nu = n as usize;
            w = hm[(nu, nu - 1)] * hm[(nu - 1, nu)];
            p = (hm[(nu - 1, nu - 1)] - hm[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            hm[(nu, nu)] += exshift;
            hm[(nu - 1, nu - 1)] += exshift;
            x = hm[(nu, nu)];

            if q >= 0.0 {
                // Real pair.
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
                x = hm[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (nu - 1)..nn {
                    z = hm[(nu - 1, j)];
                    hm[(nu - 1, j)] = q * z + p * hm[(nu, j)];
                    hm[(nu, j)] = q * hm[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = hm[(i, nu - 1)];
                    hm[(i, nu - 1)] = q * z + p * hm[(i, nu)];
                    hm[(i, nu)] = q * hm[(i, nu)] - p * z;
                }
            } else {
                // Complex conjugate pair.
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // No convergence yet: form a shift.
            let nu = n as usize;
            x = hm[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = hm[(nu - 1, nu - 1)];
                w = hm[(nu, nu - 1)] * hm[(nu - 1, nu)];
            }

            // Wilkinson's original ad hoc shift.
            if iter == 10 {
                exshift += x;
                for i in (low as usize)..=nu {
                    hm[(i, i)] -= x;
                }
                s = hm[(nu, nu - 1)].abs() + hm[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }

            // MATLAB's ad hoc shift.
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in (low as usize)..=nu {
                        hm[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            if iter > MAX_ITER_PER_EIGENVALUE {
                return Err(Error::Eigensolve(format!(
                    "QR iteration did not converge after {MAX_ITER_PER_EIGENVALUE} \
                     sweeps at eigenvalue index {n}\n{}",
                    dump_matrix(hm)
                )));
            }

            // Look for two consecutive small sub-diagonal elements.
            let mut m = n - 2;
            while m >= l {
                let mu = m as usize;
                z = hm[(mu, mu)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / hm[(mu + 1, mu)] + hm[(mu, mu + 1)];
                q = hm[(mu + 1, mu + 1)] - z - r - s;
                r = hm[(mu + 2, mu + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if hm[(mu, mu - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (hm[(mu - 1, mu - 1)].abs()
                                + z.abs()
                                + hm[(mu + 1, mu + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            let mu = m as usize;
            for i in (mu + 2)..=nu {
                hm[(i, i - 2)] = 0.0;
                if i > mu + 2 {
                    hm[(i, i - 3)] = 0.0;
                }
            }

            // Double QR sweep on rows l..=n and columns m..=n.
            for k in mu..nu {
                let notlast = k != nu - 1;
                if k != mu {
                    p = hm[(k, k - 1)];
                    q = hm[(k + 1, k - 1)];
                    r = if notlast { hm[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != mu {
                        hm[(k, k - 1)] = -s * x;
                    } else if l != m {
                        hm[(k, k - 1)] = -hm[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = hm[(k, j)] + q * hm[(k + 1, j)];
                        if notlast {
                            p += r * hm[(k + 2, j)];
                            hm[(k + 2, j)] -= p * z;
                        }
                        hm[(k, j)] -= p * x;
                        hm[(k + 1, j)] -= p * y;
                    }

                    for i in 0..=nu.min(k + 3) {
                        p = x * hm[(i, k)] + y * hm[(i, k + 1)];
                        if notlast {
                            p += z * hm[(i, k + 2)];
                            hm[(i, k + 2)] -= p * r;
                        }
                        hm[(i, k)] -= p;
                        hm[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }

    Ok((d, e))
}
