//! The combinatorial pairing engine.
//!
//! Every criterion in this crate reduces to evaluating an operator of the
//! form `sum_{m,n} A_m A_n^* d^{2m+2n}/(dx1^m dx2^m dy1^n dy2^n)` on an
//! exponential of a quadratic pairing form
//!
//! ```text
//! exp[ p (x1 y1 + x2 y2) + q (x1 x2 + y1 y2) + s (x1 y2 + x2 y1) ]
//! ```
//!
//! Counting Wick pairings gives the closed double sum implemented by
//! [`pairing_sum`]; [`symbolic_pairing_oracle`] re-derives the same value by
//! brute-force truncated polynomial expansion and exists purely to validate
//! the closed form.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest coefficient-sequence order accepted by the pairing sums.
pub const MAX_ORDER: usize = 64;

/// Largest order the brute-force oracle will expand (cost grows fast).
pub const MAX_ORACLE_ORDER: usize = 8;

/// Finite sequence of complex coefficients `A_0 ... A_M`, index m = number of
/// photon pairs subtracted or added.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    coeffs: Vec<C64>,
}

impl CoeffSeq {
    /// Requires at least one nonzero entry. Trailing zeros are kept (the
    /// index is meaningful).
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::EmptyCoefficients);
        }
        Ok(Self { coeffs })
    }

    pub fn from_reals(vals: &[f64]) -> Result<Self> {
        Self::new(vals.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Highest index M.
    pub fn max_index(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// A sequence is a *coherent* superposition when at least two entries
    /// are nonzero; single-term sequences are plain photon subtraction or
    /// addition.
    pub fn is_coherent(&self) -> bool {
        self.coeffs.iter().filter(|c| c.norm() > 0.0).count() >= 2
    }

    /// Phase of `A_m`.
    pub fn phase(&self, m: usize) -> f64 {
        self.coeffs[m].arg()
    }

    /// `m! A_m`, the natural scale for the pairing sums.
    pub fn scaled(&self) -> Vec<C64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, a)| a * factorial(m))
            .collect()
    }

    /// Normalized coefficients `C_m = m! A_m / sqrt(sum_n |n! A_n|^2)`.
    pub fn normalized(&self) -> Vec<C64> {
        let scaled = self.scaled();
        let norm = scaled.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        scaled.into_iter().map(|c| c / norm).collect()
    }

    /// The normalized sequence as a new `CoeffSeq` (for the pure-state
    /// criteria that take `C_m` directly).
    pub fn to_normalized_seq(&self) -> Self {
        Self {
            coeffs: self.normalized(),
        }
    }

    /// `B_mn = m! n! (A_m A_n^* + A_n A_m^*)`, real and symmetric.
    pub fn b_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.coeffs.len();
        let mut b = vec![vec![0.0; n]; n];
        for m in 0..n {
            for k in 0..n {
                b[m][k] = factorial(m)
                    * factorial(k)
                    * 2.0
                    * (self.coeffs[m] * self.coeffs[k].conj()).re;
            }
        }
        b
    }
}

/// Weights of the three pairing channels.
///
/// `p` couples same-index cross pairs (x_i y_i), `q` couples within-side
/// pairs (x1 x2 and y1 y2), `s` couples exchange pairs (x1 y2 and x2 y1).
/// `p` and `s` enter through even powers only, so their signs are
/// irrelevant; the sign of `q` matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingWeights {
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl PairingWeights {
    pub fn new(p: f64, q: f64, s: f64) -> Self {
        Self { p, q, s }
    }
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    for (m, row) in t.iter_mut().enumerate() {
        row[0] = 1.0;
        for k in 1..=m {
            row[k] = if k == m { 1.0 } else { 0.0 };
        }
    }
    for m in 2..=n {
        for k in 1..m {
            t[m][k] = t[m - 1][k - 1] + t[m - 1][k];
        }
    }
    t
}

fn pow_even(x: f64, half_exp: usize) -> f64 {
    if half_exp == 0 {
        1.0
    } else {
        (x * x).powi(half_exp as i32)
    }
}

fn pow_int(x: f64, e: usize) -> f64 {
    if e == 0 {
        1.0
    } else {
        x.powi(e as i32)
    }
}

/// Pairing sum over pre-scaled coefficients `u_m = m! A_m`.
///
/// Working with `u` directly avoids the factorial round trip for the
/// normalized pure-state criteria, where `u_m = C_m`.
pub fn pairing_sum_scaled(u: &[C64], w: PairingWeights) -> Result<C64> {
    let order = u.len().saturating_sub(1);
    if order > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order,
            max: MAX_ORDER,
        });
    }
    let binom = binomial_table(order);
    let mut total = C64::new(0.0, 0.0);
    for m in 0..u.len() {
        if u[m].norm() == 0.0 {
            continue;
        }
        for n in 0..u.len() {
            if u[n].norm() == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for k in 0..=m.min(n) {
                let mut sub = 0.0;
                for l in 0..=(m.min(n) - k) {
                    sub += binom[m - k][l]
                        * binom[n - k][l]
                        * pow_int(w.q, m + n - 2 * k - 2 * l)
                        * pow_even(w.p, l);
                }
                inner += binom[m][k] * binom[n][k] * pow_even(w.s, k) * sub;
            }
            total += u[m] * u[n].conj() * inner;
        }
    }
    Ok(total)
}

/// Pairing sum over raw coefficients: folds `m! n!` into the contraction.
pub fn pairing_sum(a: &CoeffSeq, w: PairingWeights) -> Result<C64> {
    pairing_sum_scaled(&a.scaled(), w)
}

/// Dense polynomial in four formal variables, truncated to per-variable
/// degree `cap`. Coefficients stay real because the pairing weights are.
struct Poly4 {
    cap: usize,
    c: Vec<f64>,
}

impl Poly4 {
    fn zeros(cap: usize) -> Self {
        Self {
            cap,
            c: vec![0.0; (cap + 1).pow(4)],
        }
    }

    fn idx(&self, e: [usize; 4]) -> usize {
        let n = self.cap + 1;
        ((e[0] * n + e[1]) * n + e[2]) * n + e[3]
    }

    fn exponents(&self, mut i: usize) -> [usize; 4] {
        let n = self.cap + 1;
        let e3 = i % n;
        i /= n;
        let e2 = i % n;
        i /= n;
        let e1 = i % n;
        let e0 = i / n;
        [e0, e1, e2, e3]
    }

    /// self * (coef * v_a * v_b), truncating exponents above `cap`.
    fn mul_monomial_into(&self, out: &mut Poly4, coef: f64, a: usize, b: usize) {
        for (i, &v) in self.c.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let mut e = self.exponents(i);
            e[a] += 1;
            e[b] += 1;
            if e[a] > self.cap || e[b] > self.cap {
                continue;
            }
            out.c[self.idx(e)] += coef * v;
        }
    }
}

/// Brute-force evaluation of the same quantity as [`pairing_sum`]: expand
/// the exponential of the pairing form as a truncated polynomial in the four
/// formal variables (x1, x2, y1, y2) and read mixed-derivative coefficients
/// off it. Rejects orders above [`MAX_ORACLE_ORDER`].
pub fn symbolic_pairing_oracle(a: &CoeffSeq, w: PairingWeights) -> Result<C64> {
    let order = a.max_index();
    if order > MAX_ORACLE_ORDER {
        return Err(Error::OrderTooLarge {
            order,
            max: MAX_ORACLE_ORDER,
        });
    }
    // variables: 0 = x1, 1 = x2, 2 = y1, 3 = y2
    let monomials = [
        (w.p, 0, 2),
        (w.p, 1, 3),
        (w.q, 0, 1),
        (w.q, 2, 3),
        (w.s, 0, 3),
        (w.s, 1, 2),
    ];
    let cap = order;
    let mut expansion = Poly4::zeros(cap);
    let unit = expansion.idx([0, 0, 0, 0]);
    expansion.c[unit] = 1.0;
    let mut term = Poly4::zeros(cap);
    term.c[unit] = 1.0;
    for j in 1..=2 * order {
        let mut next = Poly4::zeros(cap);
        for &(coef, va, vb) in &monomials {
            if coef != 0.0 {
                term.mul_monomial_into(&mut next, coef / j as f64, va, vb);
            }
        }
        if next.c.iter().all(|&v| v == 0.0) {
            break;
        }
        for (acc, &v) in expansion.c.iter_mut().zip(next.c.iter()) {
            *acc += v;
        }
        term = next;
    }
    let coeffs = a.coeffs();
    let mut total = C64::new(0.0, 0.0);
    for m in 0..coeffs.len() {
        for n in 0..coeffs.len() {
            let coeff = expansion.c[expansion.idx([m, m, n, n])];
            let fm = factorial(m);
            let fn_ = factorial(n);
            total += coeffs[m] * coeffs[n].conj() * coeff * fm * fm * fn_ * fn_;
        }
    }
    Ok(total)
}

/// The root-pattern polynomial
/// `f_{m,n}(x) = sum_l C(m,l) C(n,l) (x^{2l} - x^{m+n-2l})`.
///
/// Identically zero on the diagonal m = n; for m != n it vanishes at x = 1
/// (and at x = -1 when m + n is even) and is positive on (-1, 1).
pub fn f_poly(m: usize, n: usize, x: f64) -> f64 {
    if m == n {
        return 0.0;
    }
    let binom = binomial_table(m.max(n));
    let mut acc = 0.0;
    for l in 0..=m.min(n) {
        acc += binom[m][l] * binom[n][l] * (pow_even(x, l) - pow_int(x, m + n - 2 * l));
    }
    acc
}

/// Outcome of a grid scan of `f_{m,n}` positivity.
#[derive(Debug, Clone)]
pub struct PositivityReport {
    pub max_order: usize,
    pub grid_step: f64,
    pub pairs_checked: usize,
    pub min_value: f64,
    /// (m, n, x) where the minimum was found.
    pub min_at: (usize, usize, f64),
    /// Any non-positive evaluations (m, n, x, value).
    pub violations: Vec<(usize, usize, f64, f64)>,
}

impl PositivityReport {
    pub fn all_positive(&self) -> bool {
        self.violations.is_empty() && self.min_value > 0.0
    }
}

/// Evaluate `f_{m,n}` for all m != n up to `max_order` on the grid
/// `x in (-1 + grid_step .. 1 - grid_step)` and report the minimum value
/// found together with any non-positive hit. Diagonal pairs are excluded
/// (identically zero).
pub fn verify_f_positivity(max_order: usize, grid_step: f64) -> Result<PositivityReport> {
    if max_order > 200 {
        return Err(Error::OrderTooLarge {
            order: max_order,
            max: 200,
        });
    }
    if !(grid_step > 0.0 && grid_step < 1.0) {
        return Err(Error::InvalidParameter {
            name: "grid_step",
            value: grid_step,
            constraint: "must lie in (0, 1)",
        });
    }
    let pairs: Vec<(usize, usize)> = (0..=max_order)
        .flat_map(|m| (0..m).map(move |n| (m, n)))
        .collect();
    let steps = ((2.0 - 2.0 * grid_step) / grid_step).floor() as usize;
    let per_pair: Vec<(usize, usize, f64, f64, Vec<(usize, usize, f64, f64)>)> = pairs
        .par_iter()
        .map(|&(m, n)| {
            let binom = binomial_table(m);
            let mut min_v = f64::INFINITY;
            let mut min_x = 0.0;
            let mut bad = Vec::new();
            for i in 0..=steps {
                let x = -1.0 + grid_step + i as f64 * grid_step;
                if x >= 1.0 - grid_step + 1e-15 {
                    break;
                }
                let mut v = 0.0;
                for l in 0..=n {
                    v += binom[m][l] * binom[n][l] * (pow_even(x, l) - pow_int(x, m + n - 2 * l));
                }
                if v < min_v {
                    min_v = v;
                    min_x = x;
                }
                if v <= 0.0 {
                    bad.push((m, n, x, v));
                }
            }
            (m, n, min_v, min_x, bad)
        })
        .collect();
    let mut report = PositivityReport {
        max_order,
        grid_step,
        pairs_checked: pairs.len(),
        min_value: f64::INFINITY,
        min_at: (0, 0, 0.0),
        violations: Vec::new(),
    };
    for (m, n, min_v, min_x, bad) in per_pair {
        if min_v < report.min_value {
            report.min_value = min_v;
            report.min_at = (m, n, min_x);
        }
        report.violations.extend(bad);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cseq(vals: &[(f64, f64)]) -> CoeffSeq {
        CoeffSeq::new(vals.iter().map(|&(r, i)| C64::new(r, i)).collect()).unwrap()
    }

    #[test]
    fn rejects_all_zero_sequence() {
        assert!(matches!(
            CoeffSeq::new(vec![C64::new(0.0, 0.0); 3]),
            Err(Error::EmptyCoefficients)
        ));
    }

    #[test]
    fn coherence_needs_two_nonzero_entries() {
        assert!(!cseq(&[(0.0, 0.0), (1.0, 0.0)]).is_coherent());
        assert!(cseq(&[(1.0, 0.0), (1.0, 0.0)]).is_coherent());
    }

    #[test]
    fn single_constant_term_gives_unit_sum() {
        let a = cseq(&[(1.0, 0.0)]);
        let v = pairing_sum(&a, PairingWeights::new(0.7, -1.3, 0.4)).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_weights_kill_all_pairings() {
        let a = cseq(&[(1.0, 0.0), (1.0, 0.0)]);
        let v = pairing_sum(&a, PairingWeights::new(0.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_pair_term_expands_by_hand() {
        // A = {0, 1}: value is 1!1!(q^2 + p^2) for s = 0
        let a = cseq(&[(0.0, 0.0), (1.0, 0.0)]);
        let (p, q) = (0.8, -0.35);
        let v = pairing_sum(&a, PairingWeights::new(p, q, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, p * p + q * q, epsilon = 1e-15);
        // with exchange weight: p^2 + q^2 + s^2
        let s = 0.6;
        let v = pairing_sum(&a, PairingWeights::new(p, q, s)).unwrap();
        assert_abs_diff_eq!(v.re, p * p + q * q + s * s, epsilon = 1e-15);
    }

    #[test]
    fn oracle_matches_hand_expansion() {
        let a = cseq(&[(0.0, 0.0), (1.0, 0.0)]);
        let w = PairingWeights::new(0.8, -0.35, 0.0);
        let v = symbolic_pairing_oracle(&a, w).unwrap();
        assert_abs_diff_eq!(v.re, 0.8 * 0.8 + 0.35 * 0.35, epsilon = 1e-14);
    }

    #[test]
    fn oracle_rejects_large_orders() {
        let mut coeffs = vec![C64::new(0.0, 0.0); 10];
        coeffs[9] = C64::new(1.0, 0.0);
        let a = CoeffSeq::new(coeffs).unwrap();
        assert!(matches!(
            symbolic_pairing_oracle(&a, PairingWeights::new(1.0, 1.0, 0.0)),
            Err(Error::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn scaled_entry_point_matches_raw() {
        let a = cseq(&[(1.0, 0.2), (0.0, -0.5), (0.3, 0.0), (0.1, 0.1)]);
        let w = PairingWeights::new(0.4, 0.9, 0.2);
        let direct = pairing_sum(&a, w).unwrap();
        let scaled = pairing_sum_scaled(&a.scaled(), w).unwrap();
        assert_abs_diff_eq!(direct.re, scaled.re, epsilon = 1e-13);
        assert_abs_diff_eq!(direct.im, scaled.im, epsilon = 1e-13);
    }

    #[test]
    fn f_poly_fixed_values() {
        // f_{1,0}(x) = 1 - x
        assert_abs_diff_eq!(f_poly(1, 0, 0.5), 0.5, epsilon = 1e-15);
        // diagonal is identically zero
        assert_abs_diff_eq!(f_poly(3, 3, 0.7), 0.0, epsilon = 1e-15);
        // f_{2,1}(x) = 1 - x^3 + 2x^2 - 2x, root at x = 1
        assert_abs_diff_eq!(f_poly(2, 1, 1.0), 0.0, epsilon = 1e-12);
        let x = 0.3f64;
        assert_abs_diff_eq!(
            f_poly(2, 1, x),
            1.0 - x.powi(3) + 2.0 * x * x - 2.0 * x,
            epsilon = 1e-15
        );
    }

    #[test]
    fn f_poly_roots_at_unit_arguments() {
        for m in 0..=40usize {
            for n in 0..m {
                let scale = f_poly(m, n, 0.5).abs().max(1.0);
                assert!(
                    f_poly(m, n, 1.0).abs() / scale < 1e-12,
                    "f({m},{n},1) != 0"
                );
                if (m + n) % 2 == 0 {
                    assert!(
                        f_poly(m, n, -1.0).abs() / scale < 1e-12,
                        "f({m},{n},-1) != 0"
                    );
                }
                assert_abs_diff_eq!(f_poly(m, n, 0.0), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn f_poly_degree_by_finite_differences() {
        // the (m+n+1)-th forward difference of a degree-(m+n) polynomial
        // vanishes; the (m+n)-th does not
        for &(m, n) in &[(1usize, 0usize), (2, 1), (3, 0), (4, 2), (5, 3)] {
            let deg = m + n;
            let sample = |i: usize| f_poly(m, n, 0.1 * i as f64);
            let diff = |order: usize| -> f64 {
                (0..=order)
                    .map(|k| {
                        let sign = if (order - k) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binomial_table(order)[order][k] * sample(k)
                    })
                    .sum()
            };
            assert!(diff(deg).abs() > 1e-9, "degree of f({m},{n}) below {deg}");
            assert!(
                diff(deg + 1).abs() < 1e-9 * diff(deg).abs().max(1.0),
                "degree of f({m},{n}) above {deg}"
            );
        }
    }

    #[test]
    fn positivity_scan_small_order() {
        let report = verify_f_positivity(5, 0.01).unwrap();
        assert!(report.all_positive(), "min = {}", report.min_value);
        assert_eq!(report.pairs_checked, 15);
    }

    #[test]
    fn b_matrix_fixed_values() {
        let b = cseq(&[(1.0, 0.0), (1.0, 0.0)]).b_matrix();
        assert_abs_diff_eq!(b[0][1], 2.0, epsilon = 1e-15);
        // orthogonal phases cancel
        let b = cseq(&[(1.0, 0.0), (0.0, 1.0)]).b_matrix();
        assert_abs_diff_eq!(b[0][1], 0.0, epsilon = 1e-15);
        // B_01 = 2 cos(pi/6) = sqrt(3)
        let phi = std::f64::consts::PI / 6.0;
        let b = cseq(&[(phi.cos(), phi.sin()), (1.0, 0.0)]).b_matrix();
        assert_abs_diff_eq!(b[0][1], 3.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn normalized_coeffs_have_unit_norm() {
        let a = cseq(&[(1.0, 0.0), (0.5, -0.2), (0.0, 0.3)]);
        let c = a.normalized();
        let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn pairing_sum_matches_oracle(
            re in proptest::collection::vec(-1.0f64..1.0, 1..=6),
            im in proptest::collection::vec(-1.0f64..1.0, 1..=6),
            p in -2.0f64..2.0,
            q in -2.0f64..2.0,
            s in -2.0f64..2.0,
        ) {
            let n = re.len().min(im.len());
            let coeffs: Vec<C64> = (0..n).map(|i| C64::new(re[i], im[i])).collect();
            prop_assume!(coeffs.iter().any(|c| c.norm() > 1e-3));
            let a = CoeffSeq::new(coeffs).unwrap();
            let w = PairingWeights::new(p, q, s);
            let fast = pairing_sum(&a, w).unwrap();
            let slow = symbolic_pairing_oracle(&a, w).unwrap();
            let scale = fast.norm().max(slow.norm()).max(1e-30);
            prop_assert!((fast - slow).norm() / scale < 1e-10,
                "fast {fast} vs oracle {slow}");
        }

        #[test]
        fn pairing_sum_is_real_for_any_real_weights(
            re in proptest::collection::vec(-1.0f64..1.0, 1..=5),
            im in proptest::collection::vec(-1.0f64..1.0, 1..=5),
            p in -2.0f64..2.0,
            q in -2.0f64..2.0,
        ) {
            let n = re.len().min(im.len());
            let coeffs: Vec<C64> = (0..n).map(|i| C64::new(re[i], im[i])).collect();
            prop_assume!(coeffs.iter().any(|c| c.norm() > 1e-3));
            let a = CoeffSeq::new(coeffs).unwrap();
            let v = pairing_sum(&a, PairingWeights::new(p, q, 0.3)).unwrap();
            prop_assert!(v.im.abs() <= 1e-12 * v.norm().max(1.0));
        }
    }
}
