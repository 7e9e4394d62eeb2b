//! Matrix exponential via scaling-and-squaring with diagonal Padé
//! approximants, after Higham, "The Scaling and Squaring Method for the
//! Matrix Exponential Revisited", SIAM J. Matrix Anal. Appl. 26(4), 2005.
//!
//! The approximation order is chosen from the 1-norm against the theta
//! thresholds of that paper; above theta_13 the argument is halved s times
//! and the result squared s times.

use nalgebra::DMatrix;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|x| x.abs()).sum();
        worst = worst.max(s);
    }
    worst
}

/// exp(A) for a square real matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if n == 1 {
        return DMatrix::from_element(1, 1, a[(0, 0)].exp());
    }

    let norm = one_norm(a);
    let eye = DMatrix::identity(n, n);

    let (u, v) = if norm <= THETA_9 {
        let a2 = a * a;
        if norm <= THETA_3 {
            pade_low(a, &a2, &eye, &B3)
        } else if norm <= THETA_5 {
            pade_low(a, &a2, &eye, &B5)
        } else if norm <= THETA_7 {
            pade_low(a, &a2, &eye, &B7)
        } else {
            pade_low(a, &a2, &eye, &B9)
        }
    } else {
        let squarings = ((norm / THETA_13).log2().ceil().max(0.0)) as u32;
        let scaled = a / 2f64.powi(squarings as i32);
        let (u, v) = pade13(&scaled, &eye);
        let mut result = pade_solve(u, v);
        for _ in 0..squarings {
            result = &result * &result;
        }
        return result;
    };
    pade_solve(u, v)
}

/// U and V for the orders sharing the plain even/odd polynomial layout
/// (m = 3, 5, 7, 9): U = A * (sum b_{2k+1} A^{2k}), V = sum b_{2k} A^{2k}.
fn pade_low(
    a: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    eye: &DMatrix<f64>,
    b: &[f64],
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut even = eye * b[0];
    let mut odd = eye * b[1];
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut k = 2;
    while k < b.len() {
        power = &power * a2;
        even += &power * b[k];
        if k + 1 < b.len() {
            odd += &power * b[k + 1];
        }
        k += 2;
    }
    (a * odd, even)
}

/// U and V for m = 13 in the nested form of Higham (2005), eq. (10.33).
fn pade13(a: &DMatrix<f64>, eye: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let w1 = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let w2 = &w1 * &a6 + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + eye * b[1];
    let u = a * w2;
    let z1 = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &z1 * &a6 + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + eye * b[0];
    (u, v)
}

/// (V - U)^{-1} (V + U); the denominator is nonsingular for arguments within
/// the theta bounds.
fn pade_solve(u: DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
    let numer = &v + &u;
    let denom = v - u;
    denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator singular: argument outside scaling bounds")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exp_of_zero_is_identity() {
        let a = DMatrix::zeros(5, 5);
        let e = expm(&a);
        assert_eq!(e, DMatrix::identity(5, 5));
    }

    #[test]
    fn diagonal_matrix_exponentiates_elementwise() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            -1.0, 0.5, -30.0, 2.0,
        ]));
        let e = expm(&a);
        for (i, &d) in [-1.0f64, 0.5, -30.0, 2.0].iter().enumerate() {
            assert_abs_diff_eq!(e[(i, i)], d.exp(), epsilon = 1e-13 * d.exp());
        }
    }

    #[test]
    fn nilpotent_block_matches_series() {
        // exp([[0, a], [0, 0]]) = [[1, a], [0, 1]] exactly.
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = 3.5;
        let e = expm(&a);
        assert_abs_diff_eq!(e[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(0, 1)], 3.5, epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(1, 1)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_generator_gives_sine_cosine() {
        // exp(t J) with J = [[0, -1], [1, 0]] is a rotation by t.
        for t in [0.3, 2.0, 11.0] {
            let mut j = DMatrix::zeros(2, 2);
            j[(0, 1)] = -t;
            j[(1, 0)] = t;
            let e = expm(&j);
            assert_abs_diff_eq!(e[(0, 0)], t.cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(e[(0, 1)], -t.sin(), epsilon = 1e-12);
            assert_abs_diff_eq!(e[(1, 0)], t.sin(), epsilon = 1e-12);
            assert_abs_diff_eq!(e[(1, 1)], t.cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn semigroup_property_random_matrix() {
        // Fixed pseudo-random entries; exp(A) exp(A) = exp(2A).
        let n = 8;
        let mut a = DMatrix::zeros(n, n);
        let mut state = 1234567u64;
        for i in 0..n {
            for j in 0..n {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                a[(i, j)] = ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0;
            }
        }
        let e1 = expm(&a);
        let e2 = expm(&(&a * 2.0));
        let prod = &e1 * &e1;
        let scale = one_norm(&e2);
        assert!(one_norm(&(&prod - &e2)) <= 1e-12 * scale);
    }
}
