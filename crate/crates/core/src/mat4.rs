//! Dense complex matrix helpers for the 4x4 covariance algebra: the fixed
//! Pauli/Kronecker constants and a pivoted-LU determinant/inverse.
//!
//! The LU routines work for any square size but are only used at n = 4; the
//! near-singular guard compares |det| against `1e-12 * ||M||_1^n`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Array2<C64>;

const SINGULAR_REL_TOL: f64 = 1e-12;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Kronecker product of two 2x2 blocks into a 4x4 matrix.
pub fn kron2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> CMat {
    let mut m = Array2::zeros((4, 4));
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[[2 * i + k, 2 * j + l]] = c(a[i][j] * b[k][l]);
                }
            }
        }
    }
    m
}

const SIGMA1: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
const SIGMA3: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];
const IDENT2: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// sigma_1 (x) I_2: swaps the conjugation blocks, diagonal in the mode index.
pub fn s1_i() -> CMat {
    kron2(&SIGMA1, &IDENT2)
}

/// I_2 (x) sigma_1: swaps the mode index within each conjugation block.
pub fn i_s1() -> CMat {
    kron2(&IDENT2, &SIGMA1)
}

/// sigma_1 (x) sigma_1: swaps both factors (the exchange channel).
pub fn s1_s1() -> CMat {
    kron2(&SIGMA1, &SIGMA1)
}

/// sigma_3 (x) I_2.
pub fn s3_i() -> CMat {
    kron2(&SIGMA3, &IDENT2)
}

/// The realignment permutation: identity except that it swaps the second and
/// third basis slots.
pub fn realign_perm() -> CMat {
    let mut z = Array2::zeros((4, 4));
    z[[0, 0]] = c(1.0);
    z[[3, 3]] = c(1.0);
    z[[1, 2]] = c(1.0);
    z[[2, 1]] = c(1.0);
    z
}

/// The sign-dressed permutation (sigma_3 (x) I_2) Z (sigma_3 (x) I_2) used by
/// the time-evolution matrices.
pub fn realign_perm_signed() -> CMat {
    let s = s3_i();
    s.dot(&realign_perm()).dot(&s)
}

fn one_norm(m: &CMat) -> f64 {
    let n = m.nrows();
    (0..n)
        .map(|j| (0..n).map(|i| m[[i, j]].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

struct Lu {
    lu: CMat,
    pivots: Vec<usize>,
    sign: f64,
}

fn lu_factor(m: &CMat) -> Lu {
    let n = m.nrows();
    let mut lu = m.clone();
    let mut pivots = Vec::with_capacity(n);
    let mut sign = 1.0;
    for k in 0..n {
        let mut p = k;
        let mut best = lu[[k, k]].norm();
        for i in k + 1..n {
            let v = lu[[i, k]].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        pivots.push(p);
        if p != k {
            sign = -sign;
            for j in 0..n {
                let tmp = lu[[k, j]];
                lu[[k, j]] = lu[[p, j]];
                lu[[p, j]] = tmp;
            }
        }
        let piv = lu[[k, k]];
        if piv.norm() == 0.0 {
            continue;
        }
        for i in k + 1..n {
            let f = lu[[i, k]] / piv;
            lu[[i, k]] = f;
            for j in k + 1..n {
                let s = lu[[k, j]];
                lu[[i, j]] -= f * s;
            }
        }
    }
    Lu { lu, pivots, sign }
}

/// Determinant by pivoted LU.
pub fn det(m: &CMat) -> C64 {
    let f = lu_factor(m);
    let n = m.nrows();
    let mut d = c(f.sign);
    for k in 0..n {
        d *= f.lu[[k, k]];
    }
    d
}

fn singular_tol(m: &CMat) -> f64 {
    let n = m.nrows() as i32;
    SINGULAR_REL_TOL * one_norm(m).powi(n)
}

/// Inverse by pivoted LU. `name` identifies the matrix in the error when it
/// is singular within tolerance.
pub fn inverse(m: &CMat, name: &'static str) -> Result<CMat> {
    let n = m.nrows();
    let f = lu_factor(m);
    let d: C64 = (0..n).map(|k| f.lu[[k, k]]).product();
    let tol = singular_tol(m);
    if d.norm() < tol {
        return Err(Error::SingularMatrix {
            name,
            det: d.norm(),
            tol,
        });
    }
    let mut inv = Array2::zeros((n, n));
    for col in 0..n {
        // forward: permuted unit vector through L
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[col] = c(1.0);
        for (k, &p) in f.pivots.iter().enumerate() {
            x.swap(k, p);
        }
        for i in 0..n {
            for j in 0..i {
                let lij = f.lu[[i, j]];
                let xj = x[j];
                x[i] -= lij * xj;
            }
        }
        // back-substitution through U
        for i in (0..n).rev() {
            for j in i + 1..n {
                let uij = f.lu[[i, j]];
                let xj = x[j];
                x[i] -= uij * xj;
            }
            x[i] /= f.lu[[i, i]];
        }
        for i in 0..n {
            inv[[i, col]] = x[i];
        }
    }
    Ok(inv)
}

/// Determinant with the same singular guard as [`inverse`].
pub fn det_checked(m: &CMat, name: &'static str) -> Result<C64> {
    let d = det(m);
    let tol = singular_tol(m);
    if d.norm() < tol {
        return Err(Error::SingularMatrix {
            name,
            det: d.norm(),
            tol,
        });
    }
    Ok(d)
}

/// Project a matrix onto the two-parameter family `u * s1_i + w * i_s1`,
/// returning (u, w) and the Frobenius residual of what is left over.
pub fn weight_family_projection(m: &CMat) -> (f64, f64, f64) {
    let u = 0.25 * m.dot(&s1_i()).diag().iter().sum::<C64>().re;
    let w = 0.25 * m.dot(&i_s1()).diag().iter().sum::<C64>().re;
    let mut resid = 0.0;
    let model = {
        let mut t = s1_i();
        t.mapv_inplace(|v| v * c(u));
        let mut t2 = i_s1();
        t2.mapv_inplace(|v| v * c(w));
        t + t2
    };
    for (a, b) in m.iter().zip(model.iter()) {
        resid += (a - b).norm_sqr();
    }
    (u, w, resid.sqrt())
}
