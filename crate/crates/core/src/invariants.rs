//! Characteristic-polynomial coefficients and invariant recovery sweeps.
//!
//! Convention: `det(t·Id − M) = tⁿ + σ_1 tⁿ⁻¹ + … + σ_n`, so
//! `σ_1 = −tr M` and `σ_n = (−1)ⁿ det M`.

use std::time::Instant;

use serde::Serialize;

use crate::construct::SigmaFields;
use crate::field::{OperatorField, ScalarField};
use crate::linalg::Matrix;
use crate::report::VerificationReport;
use crate::sampling::BoxDomain;
use crate::torsion::{accepts, SweepOptions};
use crate::{Error, Result};

pub const DEFAULT_SIGMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharPolyCoeffs {
    /// `σ_1 … σ_n`.
    pub sigma: Vec<f64>,
}

impl CharPolyCoeffs {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// `χ(t) = tⁿ + σ_1 tⁿ⁻¹ + … + σ_n` by Horner's rule.
    pub fn eval(&self, t: f64) -> f64 {
        self.sigma.iter().fold(1.0, |acc, s| acc * t + s)
    }
}

/// Faddeev–LeVerrier: `M_1 = Id`, `σ_k = −tr(A·M_k)/k`,
/// `M_{k+1} = A·M_k + σ_k·Id`.
///
/// The constant term is cross-checked against `(−1)ⁿ det M` computed by
/// elimination; a disagreement beyond rounding is reported as an error.
pub fn charpoly(m: &Matrix) -> Result<CharPolyCoeffs> {
    if !m.is_finite() {
        return Err(Error::CharPoly("matrix has non-finite entries".into()));
    }
    let n = m.dim();
    let mut sigma = Vec::with_capacity(n);
    let mut mk = Matrix::identity(n);
    for k in 1..=n {
        let amk = m * &mk;
        let s = -amk.trace() / k as f64;
        sigma.push(s);
        mk = &amk + &Matrix::identity(n).scale(s);
    }
    let coeffs = CharPolyCoeffs { sigma };

    let det = m.determinant();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let scale = (1.0 + m.max_abs()).powi(n as i32);
    let constant = coeffs.sigma.last().copied().unwrap_or(0.0);
    if (constant - sign * det).abs() > 1e-9 * scale {
        return Err(Error::CharPoly(format!(
            "constant term {constant:e} disagrees with (-1)^n det = {:e}",
            sign * det
        )));
    }
    Ok(coeffs)
}

/// `max |Mⁿ + σ_1 Mⁿ⁻¹ + … + σ_n Id|`.
pub fn cayley_hamilton_residual(m: &Matrix, c: &CharPolyCoeffs) -> f64 {
    let n = m.dim();
    let mut acc = Matrix::identity(n);
    for s in &c.sigma {
        acc = &(m * &acc) + &Matrix::identity(n).scale(*s);
    }
    acc.max_abs()
}

/// Samples `domain` and compares `charpoly(L(p))` with `expected(p)`.
///
/// A point passes when the largest deviation is at most
/// `tol · (1 + max |L^i_j|)`.
pub fn verify_sigma(
    l: &OperatorField,
    expected: &SigmaFields,
    domain: &BoxDomain,
    samples: usize,
    seed: u64,
    tol: f64,
    opts: &SweepOptions,
) -> Result<VerificationReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    if expected.dim() != l.dim() || domain.dim() != l.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: operator {}, sigma {}, box {}",
            l.dim(),
            expected.dim(),
            domain.dim()
        )));
    }
    let start = Instant::now();
    let mut report = VerificationReport::new(format!("invariants of {}", l.label()))
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
        let (Ok(e), Ok(want)) = (l.eval(&p), expected.values(&p)) else {
            report.rejected += 1;
            continue;
        };
        let got = charpoly(&e.values)?;
        let dev = got
            .sigma
            .iter()
            .zip(&want)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        report.observe(&p, dev, dev / (1.0 + e.values.max_abs()));
    }
    if report.accepted == 0 {
        return Err(Error::DomainSingular { samples });
    }
    let rel = report.max_relative;
    report.push_check("sigma", rel, rel <= tol);
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// [`verify_sigma`] against `σ = (x_1, …, x_{n−1}, f)`.
pub fn verify_sigma_coords(
    l: &OperatorField,
    f: &ScalarField,
    domain: &BoxDomain,
    samples: usize,
    seed: u64,
    tol: f64,
    opts: &SweepOptions,
) -> Result<VerificationReport> {
    verify_sigma(l, &SigmaFields::coordinates_with(f), domain, samples, seed, tol, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_2d, build_morse_canonical, build_theorem1};
    use proptest::prelude::*;

    #[test]
    fn worked_normal_form_example() {
        let m = Matrix::from_rows(&[[-1.0, 1.0, 0.0], [1.0, 0.0, 4.0], [-1.0, 0.0, 0.0]]);
        let c = charpoly(&m).unwrap();
        for (got, want) in c.sigma.iter().zip([1.0, -1.0, 4.0]) {
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn identity_and_zero() {
        assert_eq!(charpoly(&Matrix::identity(3)).unwrap().sigma, vec![-3.0, 3.0, -1.0]);
        assert_eq!(charpoly(&Matrix::zeros(4)).unwrap().sigma, vec![0.0; 4]);
        let mut bad = Matrix::zeros(2);
        bad[(0, 1)] = f64::NAN;
        assert!(charpoly(&bad).is_err());
    }

    #[test]
    fn sign_conventions() {
        let m = Matrix::from_rows(&[[2.0, 1.0, 0.0], [0.5, -1.0, 3.0], [1.0, 0.0, 4.0]]);
        let c = charpoly(&m).unwrap();
        assert!((c.sigma[0] + m.trace()).abs() < 1e-14);
        assert!((c.sigma[2] + m.determinant()).abs() < 1e-12);
        // χ(t) vanishes at an eigenvalue: upper-triangular test matrix
        let u = Matrix::from_rows(&[[2.0, 5.0], [0.0, -3.0]]);
        let cu = charpoly(&u).unwrap();
        assert_eq!(cu.eval(2.0), 0.0);
        assert_eq!(cu.eval(-3.0), 0.0);
    }

    #[test]
    fn sweeps_recover_prescribed_invariants() {
        let opts = SweepOptions::default();
        let d3 = BoxDomain::uniform(3, -1.0, 1.0).unwrap();
        let l = build_morse_canonical(3, 1.0).unwrap();
        let y2 = ScalarField::parse("y^2", 3).unwrap();
        let r = verify_sigma_coords(&l, &y2, &d3, 300, 5, 1e-12, &opts).unwrap();
        assert!(r.pass && r.max_residual <= 1e-12, "{r:?}");

        let f = ScalarField::parse("y^3 + x2", 3).unwrap();
        let l = build_theorem1(&f, 3).unwrap();
        let r = verify_sigma_coords(&l, &f, &d3, 300, 5, 1e-9, &opts).unwrap();
        assert!(r.max_residual <= 1e-10, "{r:?}");
        assert!(r.rejected > 0);

        let d2 = BoxDomain::uniform(2, -1.0, 1.0).unwrap();
        let f = ScalarField::parse("y", 2).unwrap();
        let l = build_2d(&f).unwrap();
        let expected = SigmaFields::new(vec![ScalarField::parse("-x1", 2).unwrap(), f]).unwrap();
        let r = verify_sigma(&l, &expected, &d2, 300, 5, 1e-12, &opts).unwrap();
        assert!(r.max_residual <= 1e-12, "{r:?}");
    }

    fn matrix(n: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| Matrix::from_fn(n, |i, j| v[i * n + j]))
    }

    proptest! {
        #[test]
        fn cayley_hamilton_holds(m in (2usize..=7).prop_flat_map(matrix)) {
            let c = charpoly(&m).unwrap();
            let n = m.dim() as i32;
            prop_assert!(cayley_hamilton_residual(&m, &c) <= 1e-9 * (1.0 + m.max_abs()).powi(n));
        }

        #[test]
        fn invariants_survive_conjugation(m in matrix(4), a in matrix(4)) {
            let a = &a + &Matrix::identity(4).scale(5.0);
            let conj = &(&a.inverse().unwrap() * &m) * &a;
            let (c1, c2) = (charpoly(&m).unwrap(), charpoly(&conj).unwrap());
            for (x, y) in c1.sigma.iter().zip(&c2.sigma) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
            }
        }
    }
}
