//! Nijenhuis torsion at a point, computed two independent ways.
//!
//! [`torsion_coordinate`] contracts exact entry gradients with the
//! coordinate formula
//!
//! ```text
//! N^i_jk = L^l_j ∂_l L^i_k − L^l_k ∂_l L^i_j − L^i_l ∂_j L^l_k + L^i_l ∂_k L^l_j .
//! ```
//!
//! [`torsion_bracket_fd`] evaluates the invariant definition
//! `N(u, v) = L²[u, v] + [Lu, Lv] − L[u, Lv] − L[Lu, v]` on the coordinate
//! fields `u = ∂_j`, `v = ∂_k`, with every Lie bracket of vector fields
//! taken by central finite differences of the fields' components. It only
//! ever sees matrix values of `L`, never the jets.

use std::time::Instant;

use crate::field::{FieldError, OperatorField};
use crate::linalg::Matrix;
use crate::report::VerificationReport;
use crate::sampling::BoxDomain;
use crate::{Error, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Points where the operator's regularity denominator (`f_y`, `det J`) is
/// smaller than this are rejected by sweeps.
pub const DEFAULT_MIN_DENOMINATOR: f64 = 0.05;

/// Components `N^i_jk` of the torsion at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionValue {
    n: usize,
    /// Flattened as `[(i * n + j) * n + k]`.
    components: Vec<f64>,
    point: Vec<f64>,
}

impl TorsionValue {
    fn zeros(n: usize, point: &[f64]) -> Self {
        Self {
            n,
            components: vec![0.0; n * n * n],
            point: point.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// `N^i_jk`, 0-based.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.components[(i * self.n + j) * self.n + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.components[(i * self.n + j) * self.n + k] = v;
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest componentwise difference to another torsion value.
    pub fn max_diff(&self, other: &TorsionValue) -> f64 {
        assert_eq!(self.n, other.n);
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Nonzero components as `(i, j, k, value)`, 1-based.
    pub fn nonzero(&self, threshold: f64) -> Vec<(usize, usize, usize, f64)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    if v.abs() > threshold {
                        out.push((i + 1, j + 1, k + 1, v));
                    }
                }
            }
        }
        out
    }
}

/// Coordinate-formula torsion of `l` at `p`.
///
/// With `A^i_jk = L^l_j ∂_l L^i_k − L^i_l ∂_j L^l_k` the formula is
/// `N^i_jk = A^i_jk − A^i_kj`; computing it that way makes the
/// antisymmetry in `(j, k)` exact.
pub fn torsion_coordinate(l: &OperatorField, p: &[f64]) -> Result<TorsionValue, FieldError> {
    let e = l.eval(p)?;
    let n = e.dim();
    let lv = &e.values;
    let mut a = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for m in 0..n {
                    acc += lv[(m, j)] * e.grad(i, k, m) - lv[(i, m)] * e.grad(m, k, j);
                }
                a[(i * n + j) * n + k] = acc;
            }
        }
    }
    let mut out = TorsionValue::zeros(n, p);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    out.set(i, j, k, a[(i * n + j) * n + k] - a[(i * n + k) * n + j]);
                }
            }
        }
    }
    Ok(out)
}

/// Values of `L` at `p` and at `p ± h e_l` for every axis `l`.
struct Stencil {
    center: Matrix,
    plus: Vec<Matrix>,
    minus: Vec<Matrix>,
    h: f64,
}

impl Stencil {
    fn new(l: &OperatorField, p: &[f64], h: f64) -> Result<Self, FieldError> {
        let n = p.len();
        let shifted = |axis: usize, step: f64| {
            let mut q = p.to_vec();
            q[axis] += step;
            l.eval(&q).map(|e| e.values)
        };
        Ok(Self {
            center: l.eval(p)?.values,
            plus: (0..n).map(|a| shifted(a, h)).collect::<Result<_, _>>()?,
            minus: (0..n).map(|a| shifted(a, -h)).collect::<Result<_, _>>()?,
            h,
        })
    }
}

/// A vector field determined pointwise by the value of `L`.
type PointwiseField<'a> = &'a dyn Fn(&Matrix) -> Vec<f64>;

fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    let n = m.dim();
    (0..n).map(|i| (0..n).map(|k| m[(i, k)] * v[k]).sum()).collect()
}

/// `[X, Y]^i = X^l ∂_l Y^i − Y^l ∂_l X^i` at the stencil center, with the
/// partial derivatives replaced by central differences.
fn lie_bracket_fd(s: &Stencil, x: PointwiseField, y: PointwiseField) -> Vec<f64> {
    let n = s.center.dim();
    let x0 = x(&s.center);
    let y0 = y(&s.center);
    let mut out = vec![0.0; n];
    for axis in 0..n {
        let dx: Vec<f64> = x(&s.plus[axis])
            .iter()
            .zip(x(&s.minus[axis]))
            .map(|(a, b)| (a - b) / (2.0 * s.h))
            .collect();
        let dy: Vec<f64> = y(&s.plus[axis])
            .iter()
            .zip(y(&s.minus[axis]))
            .map(|(a, b)| (a - b) / (2.0 * s.h))
            .collect();
        for i in 0..n {
            out[i] += x0[axis] * dy[i] - y0[axis] * dx[i];
        }
    }
    out
}

/// Torsion from the invariant bracket definition with finite-difference
/// Lie brackets of step `h`. Agrees with [`torsion_coordinate`] to `O(h²)`.
pub fn torsion_bracket_fd(l: &OperatorField, p: &[f64], h: f64) -> Result<TorsionValue, FieldError> {
    let n = l.dim();
    let s = Stencil::new(l, p, h)?;
    let unit = |j: usize| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        e
    };
    let mut out = TorsionValue::zeros(n, p);
    for j in 0..n {
        for k in 0..n {
            let u = move |_: &Matrix| unit(j);
            let v = move |_: &Matrix| unit(k);
            let lu = move |m: &Matrix| mat_vec(m, &unit(j));
            let lv = move |m: &Matrix| mat_vec(m, &unit(k));

            let uv = lie_bracket_fd(&s, &u, &v);
            let l2_uv = mat_vec(&s.center, &mat_vec(&s.center, &uv));
            let lu_lv = lie_bracket_fd(&s, &lu, &lv);
            let l_u_lv = mat_vec(&s.center, &lie_bracket_fd(&s, &u, &lv));
            let l_lu_v = mat_vec(&s.center, &lie_bracket_fd(&s, &lu, &v));
            for i in 0..n {
                out.set(i, j, k, l2_uv[i] + lu_lv[i] - l_u_lv[i] - l_lu_v[i]);
            }
        }
    }
    Ok(out)
}

/// Disagreements above this are dominated by the `O(h²)` truncation term.
pub const TRUNCATION_FLOOR: f64 = 1e-8;

/// Coordinate torsion against the bracket oracle at steps `h`, `h/2`, `h/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub step: f64,
    /// `max |N_fd(h / 2^k) − N_coord|` for `k = 0, 1, 2`.
    pub disagreement: [f64; 3],
    /// `max |L^i_j|` at the point.
    pub entry_max: f64,
}

impl OracleComparison {
    /// Whether each halving shrinks the disagreement by at least `3.5×`.
    ///
    /// Central differences are exact on entries of degree at most two, in
    /// which case the disagreement is rounding noise of size
    /// `~1e-11 (1 + max|L|)²` and has nothing to converge. A halving is
    /// therefore only required to shrink by `3.5×` when the coarser value is
    /// above [`TRUNCATION_FLOOR`]; below it the finer value must stay within
    /// that rounding allowance of `coarse / 3.5`.
    pub fn converges_quadratically(&self) -> bool {
        let allowance = 1e-11 * (1.0 + self.entry_max).powi(2);
        self.disagreement.windows(2).all(|w| {
            let (coarse, fine) = (w[0], w[1]);
            if coarse >= TRUNCATION_FLOOR {
                fine * 3.5 <= coarse
            } else {
                fine <= coarse / 3.5 + allowance
            }
        })
    }

    /// `disagreement[k] / disagreement[k + 1]`.
    pub fn ratios(&self) -> [f64; 2] {
        let d = self.disagreement;
        [d[0] / d[1], d[1] / d[2]]
    }
}

/// Runs [`torsion_bracket_fd`] at `h`, `h/2` and `h/4` against
/// [`torsion_coordinate`].
pub fn compare_with_oracle(l: &OperatorField, p: &[f64], h: f64) -> Result<OracleComparison, FieldError> {
    let exact = torsion_coordinate(l, p)?;
    let mut disagreement = [0.0; 3];
    for (k, d) in disagreement.iter_mut().enumerate() {
        *d = torsion_bracket_fd(l, p, h / f64::powi(2.0, k as i32))?.max_diff(&exact);
    }
    Ok(OracleComparison {
        step: h,
        disagreement,
        entry_max: l.eval(p)?.values.max_abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Reject points whose regularity denominator is below this in
    /// absolute value.
    pub min_denominator: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            min_denominator: DEFAULT_MIN_DENOMINATOR,
        }
    }
}

/// Screens a sample point against the operator's regularity guard.
pub(crate) fn accepts(l: &OperatorField, p: &[f64], opts: &SweepOptions) -> bool {
    match l.guard_value(p) {
        None => true,
        Some(Ok(d)) => d.abs() >= opts.min_denominator,
        Some(Err(_)) => false,
    }
}

/// Samples `samples` points of `domain` and checks `N_L = 0` at each.
///
/// A point passes when `max |N^i_jk| ≤ tol · (1 + max |L^i_j|)`. Points
/// where the guard denominator is small or evaluation fails are rejected
/// and counted.
pub fn verify_zero_torsion(
    l: &OperatorField,
    domain: &BoxDomain,
    samples: usize,
    seed: u64,
    tol: f64,
    opts: &SweepOptions,
) -> Result<VerificationReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    if domain.dim() != l.dim() {
        return Err(Error::InvalidInput(format!(
            "box has dimension {}, operator has {}",
            domain.dim(),
            l.dim()
        )));
    }
    let start = Instant::now();
    let mut report = VerificationReport::new(format!("zero torsion of {}", l.label()))
        .param("n", l.dim())
        .param("samples", samples)
        .param("seed", seed)
        .param("tol", tol)
        .param("min_denominator", opts.min_denominator);
    for p in domain.sample(samples, seed) {
        if !accepts(l, &p, opts) {
            report.rejected += 1;
            continue;
        }
        let (Ok(t), Ok(e)) = (torsion_coordinate(l, &p), l.eval(&p)) else {
            report.rejected += 1;
            continue;
        };
        let raw = t.max_abs();
        report.observe(&p, raw, raw / (1.0 + e.values.max_abs()));
    }
    if report.accepted == 0 {
        return Err(Error::DomainSingular { samples });
    }
    let rel = report.max_relative;
    report.push_check("torsion", rel, rel <= tol);
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_morse_canonical, build_theorem1};
    use crate::field::ScalarField;

    fn diag_yx() -> OperatorField {
        OperatorField::diagonal(vec![
            ScalarField::parse("y", 2).unwrap(),
            ScalarField::parse("x1", 2).unwrap(),
        ])
    }

    #[test]
    fn constant_operator_is_torsion_free() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 0.5], [3.0, 4.0, -1.0], [0.0, 2.0, 7.0]]);
        let l = OperatorField::constant(m);
        let p = [0.1, 0.2, 0.3];
        assert_eq!(torsion_coordinate(&l, &p).unwrap().max_abs(), 0.0);
        assert!(torsion_bracket_fd(&l, &p, 1e-4).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn diagonal_witness_hand_values() {
        // N(∂_1, ∂_2) = (λ1 − λ2)(∂_2 λ1 ∂_1 + ∂_1 λ2 ∂_2) with λ1 = y, λ2 = x
        let t = torsion_coordinate(&diag_yx(), &[1.0, 2.0]).unwrap();
        assert_eq!(t.get(0, 0, 1), 1.0);
        assert_eq!(t.get(1, 0, 1), 1.0);
        assert_eq!(t.get(0, 1, 0), -1.0);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(t.get(i, j, j), 0.0);
            }
        }
        let oracle = torsion_bracket_fd(&diag_yx(), &[1.0, 2.0], 1e-4).unwrap();
        assert!((oracle.get(0, 0, 1) - 1.0).abs() < 1e-7);
        assert!(oracle.max_diff(&t) < 1e-7);
    }

    #[test]
    fn coordinate_torsion_is_exactly_antisymmetric() {
        let l = OperatorField::from_scalar_entries(
            3,
            "generic",
            ["x1*y", "sin(x2)", "y^2", "1", "x1*x2", "exp(y)", "x2", "cos(x1*y)", "x1^3"]
                .iter()
                .map(|s| ScalarField::parse(s, 3).unwrap())
                .collect(),
        );
        let t = torsion_coordinate(&l, &[0.3, -0.7, 1.1]).unwrap();
        assert!(t.max_abs() > 0.1);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(t.get(i, j, k), -t.get(i, k, j));
                }
            }
        }
    }

    #[test]
    fn normal_form_is_torsion_free() {
        let l = build_morse_canonical(3, 1.0).unwrap();
        let d = BoxDomain::uniform(3, -1.0, 1.0).unwrap();
        for p in d.sample(20, 3) {
            assert!(torsion_coordinate(&l, &p).unwrap().max_abs() <= 1e-13);
        }
    }

    #[test]
    fn oracle_matches_coordinate_formula_on_rational_entries() {
        let f = ScalarField::parse("y^3 + y + x1", 3).unwrap();
        let l = build_theorem1(&f, 3).unwrap();
        let p = [0.4, -0.3, 0.6];
        let a = torsion_coordinate(&l, &p).unwrap();
        let b = torsion_bracket_fd(&l, &p, 1e-4).unwrap();
        assert!(a.max_diff(&b) <= 1e-6);
    }

    #[test]
    fn torsion_is_shift_invariant() {
        let l = OperatorField::from_scalar_entries(
            2,
            "m",
            ["x1*y", "y^2", "sin(x1)", "x1 - y"]
                .iter()
                .map(|s| ScalarField::parse(s, 2).unwrap())
                .collect(),
        );
        let p = [0.6, -0.2];
        let a = torsion_coordinate(&l, &p).unwrap();
        let b = torsion_coordinate(&l.shifted(3.7), &p).unwrap();
        assert!(a.max_diff(&b) <= 1e-12);
    }

    #[test]
    fn sweep_counts_rejections() {
        let f = ScalarField::parse("y^2", 3).unwrap();
        let l = build_theorem1(&f, 3).unwrap();
        let d = BoxDomain::uniform(3, -1.0, 1.0).unwrap();
        let r = verify_zero_torsion(&l, &d, 500, 1, 1e-11, &SweepOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.rejected > 0);
        assert_eq!(r.accepted + r.rejected, 500);
    }

    #[test]
    fn sweep_errors_when_everything_is_singular() {
        let f = ScalarField::parse("x1", 2).unwrap();
        let l = build_theorem1(&f, 2).unwrap();
        let d = BoxDomain::uniform(2, -1.0, 1.0).unwrap();
        let err = verify_zero_torsion(&l, &d, 10, 1, 1e-11, &SweepOptions::default()).unwrap_err();
        assert_eq!(err, Error::DomainSingular { samples: 10 });
    }
}
