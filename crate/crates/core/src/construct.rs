//! Builders for the explicit operator families.
//!
//! All of them are instances of `L = J⁻¹ L̃ J`, where `L̃` is the companion
//! form of the prescribed coefficients `σ_i` of
//! `det(t·Id − L) = tⁿ + σ_1 tⁿ⁻¹ + … + σ_n` and `J = (∂σ_i/∂x^j)`.
//!
//! | builder | coefficients | coordinates |
//! |---|---|---|
//! | [`build_diff_nondegenerate`] | arbitrary `σ` | any, `det J ≠ 0` |
//! | [`build_2d`] | `σ = (−x, f)` | `(x, y)` |
//! | [`build_theorem1`] | `σ = (x_1, …, x_{n−1}, f)` | `(x_1, …, x_{n−1}, y)` |
//! | [`build_morse_canonical`] | `σ = (x_1, …, x_{n−1}, ±y²)` | same, smooth across `y = 0` |
//!
//! The explicit families are written out entry by entry rather than
//! computed through the generic conjugation, so that
//! [`verify_conjugation`] is a genuine check.

use std::time::Instant;

use crate::field::{Family, FieldError, OperatorEval, OperatorField, ScalarField};
use crate::jet::{Jet1, JetError};
use crate::linalg::Matrix;
use crate::report::VerificationReport;
use crate::sampling::BoxDomain;
use crate::torsion::{accepts, SweepOptions};
use crate::{Error, Result};

/// Jacobian determinants with `|det J| < EPS_DET_PER_DIM · n` are refused.
pub const EPS_DET_PER_DIM: f64 = 1e-10;

/// The prescribed coefficients `σ_1, …, σ_n` as scalar fields.
#[derive(Debug, Clone)]
pub struct SigmaFields {
    fields: Vec<ScalarField>,
}

impl SigmaFields {
    pub fn new(fields: Vec<ScalarField>) -> Result<Self> {
        let n = fields.len();
        if n == 0 {
            return Err(Error::InvalidDimension {
                what: "sigma fields",
                requirement: ">= 1",
                n,
            });
        }
        if let Some(bad) = fields.iter().find(|f| f.dim() != n) {
            return Err(Error::InvalidInput(format!(
                "sigma field {} has dimension {}, expected {n}",
                bad.label(),
                bad.dim()
            )));
        }
        Ok(Self { fields })
    }

    /// `σ = (x_1, …, x_{n−1}, f)`.
    pub fn coordinates_with(f: &ScalarField) -> Self {
        let n = f.dim();
        let mut fields: Vec<ScalarField> = (1..n).map(|i| ScalarField::coordinate(i, n)).collect();
        fields.push(f.clone());
        Self { fields }
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn values(&self, p: &[f64]) -> std::result::Result<Vec<f64>, FieldError> {
        self.fields.iter().map(|s| Ok(s.eval(p)?.value())).collect()
    }
}

fn require_dim(what: &'static str, requirement: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::InvalidDimension { what, requirement, n })
    } else {
        Ok(())
    }
}

/// The companion form: first column `−σ`, ones on the superdiagonal.
pub fn companion_matrix(sigma: &[f64]) -> Result<Matrix> {
    let n = sigma.len();
    require_dim("companion matrix", ">= 2", n, 2)?;
    Ok(Matrix::from_fn(n, |i, j| match j {
        0 => -sigma[i],
        _ if j == i + 1 => 1.0,
        _ => 0.0,
    }))
}

/// The companion form as an operator field, `x ↦ L̃(σ(x))`. Not a
/// Nijenhuis operator in general.
pub fn build_companion(sigma: &SigmaFields) -> Result<OperatorField> {
    let n = sigma.dim();
    require_dim("companion operator", ">= 2", n, 2)?;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(match j {
                0 => sigma.fields[i].scaled(-1.0),
                _ if j == i + 1 => ScalarField::constant(1.0, n),
                _ => ScalarField::constant(0.0, n),
            });
        }
    }
    let label = format!(
        "companion(sigma = [{}])",
        sigma.fields.iter().map(|s| s.label().to_string()).collect::<Vec<_>>().join(", ")
    );
    Ok(OperatorField::from_scalar_entries(n, label, entries).with_family(Family::Companion))
}

/// `J_ij = ∂σ_i/∂x^j` at `p`.
pub fn jacobi_matrix(sigma: &SigmaFields, p: &[f64]) -> Result<Matrix> {
    let n = sigma.dim();
    let mut j = Matrix::zeros(n);
    for (i, s) in sigma.fields.iter().enumerate() {
        let jet = s.eval(p)?;
        for (k, d) in jet.gradient().iter().enumerate() {
            j[(i, k)] = *d;
        }
    }
    Ok(j)
}

/// `L = J⁻¹ L̃(σ) J` for arbitrary functionally independent `σ`.
///
/// The entry gradients use `∂L = J⁻¹ (∂L̃·J + L̃·∂J − ∂J·L)`, obtained by
/// differentiating `J·L = L̃·J`; `∂J` comes from the Hessians of `σ`.
pub fn build_diff_nondegenerate(sigma: &SigmaFields) -> Result<OperatorField> {
    let n = sigma.dim();
    require_dim("differentially nondegenerate operator", ">= 2", n, 2)?;
    let eps_det = EPS_DET_PER_DIM * n as f64;
    let label = format!(
        "diffnondeg(sigma = [{}])",
        sigma.fields.iter().map(|s| s.label().to_string()).collect::<Vec<_>>().join(", ")
    );
    let rule_sigma = sigma.clone();
    let guard_sigma = sigma.clone();
    let field = OperatorField::new(n, Family::DiffNondegenerate, label, move |p| {
        let jets = rule_sigma
            .fields
            .iter()
            .map(|s| s.eval(p))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let jac = Matrix::from_fn(n, |i, k| jets[i].gradient()[k]);
        let det = jac.determinant();
        if !(det.abs() >= eps_det) {
            return Err(FieldError::Degenerate { det });
        }
        let jac_inv = jac.inverse().ok_or(FieldError::Degenerate { det })?;
        let values: Vec<f64> = jets.iter().map(|j| j.value()).collect();
        let comp = companion_matrix(&values).expect("n >= 2");
        let l = &(&jac_inv * &comp) * &jac;

        let mut entry_grads = vec![0.0; n * n * n];
        for dir in 0..n {
            let d_jac = Matrix::from_fn(n, |i, k| jets[i].hessian_at(k, dir));
            let d_comp = Matrix::from_fn(n, |i, k| if k == 0 { -jets[i].gradient()[dir] } else { 0.0 });
            let rhs = &(&(&d_comp * &jac) + &(&comp * &d_jac)) - &(&d_jac * &l);
            let d_l = &jac_inv * &rhs;
            for i in 0..n {
                for k in 0..n {
                    entry_grads[(i * n + k) * n + dir] = d_l[(i, k)];
                }
            }
        }
        Ok(OperatorEval { values: l, entry_grads })
    });
    Ok(field.with_guard(move |p| Ok(jacobi_matrix(&guard_sigma, p).map_err(into_field_error)?.determinant())))
}

fn into_field_error(e: Error) -> FieldError {
    match e {
        Error::Field(f) => f,
        other => panic!("unexpected error while evaluating sigma: {other}"),
    }
}

fn f_y_guard(f: &ScalarField) -> impl Fn(&[f64]) -> std::result::Result<f64, FieldError> + Send + Sync + 'static {
    let f = f.clone();
    move |p| Ok(f.eval(p)?.gradient()[p.len() - 1])
}

/// The two-dimensional family with `tr L = x` and `det L = f(x, y)`:
///
/// ```text
/// L = [ x − f_x                    −f_y ]
///     [ (−x f_x + f_x² + f) / f_y   f_x ]
/// ```
pub fn build_2d(f: &ScalarField) -> Result<OperatorField> {
    if f.dim() != 2 {
        return Err(Error::InvalidDimension {
            what: "two-dimensional family",
            requirement: "= 2",
            n: f.dim(),
        });
    }
    let g = f.clone();
    let field = OperatorField::new(2, Family::TwoDim, format!("2d(f = {})", f.label()), move |p| {
        let fj = g.eval(p)?;
        let x = Jet1::coord(1, p)?;
        let fx = fj.partial(0);
        let fy = fj.partial(1);
        let fv = fj.first_order();
        OperatorEval::from_entries(2, |i, j| match (i, j) {
            (0, 0) => x.try_sub(&fx),
            (0, 1) => Ok(fy.scale(-1.0)),
            (1, 0) => {
                let num = fx.try_mul(&fx)?.try_sub(&x.try_mul(&fx)?)?.try_add(&fv)?;
                num.try_div(&fy)
            }
            _ => Ok(fx.clone()),
        })
    });
    Ok(field.with_guard(f_y_guard(f)))
}

/// Jets needed by the coordinate-family entries at one point.
struct CoordinateJets {
    /// `x_1 … x_{n−1}` as jets.
    x: Vec<Jet1>,
    /// `f_{x_1} … f_{x_{n−1}}`.
    fx: Vec<Jet1>,
    fy: Jet1,
    f: Jet1,
}

impl CoordinateJets {
    fn at(f: &ScalarField, p: &[f64]) -> std::result::Result<Self, FieldError> {
        let n = p.len();
        let fj = f.eval(p)?;
        Ok(Self {
            x: (1..n).map(|i| Jet1::coord(i, p)).collect::<std::result::Result<_, _>>()?,
            fx: (0..n - 1).map(|i| fj.partial(i)).collect(),
            fy: fj.partial(n - 1),
            f: fj.first_order(),
        })
    }

    /// Entry `(i, j)` (0-based) of the coordinate-family matrix.
    fn entry(&self, n: usize, i: usize, j: usize) -> std::result::Result<Jet1, JetError> {
        let zero = || Jet1::constant(0.0, n);
        let last = n - 2;
        if i + 2 < n {
            // companion-like rows
            return Ok(match j {
                0 => self.x[i].scale(-1.0),
                _ if j == i + 1 => Jet1::constant(1.0, n),
                _ => zero(),
            });
        }
        if i == n - 2 {
            return Ok(match j {
                0 => self.fx[0].try_sub(&self.x[last])?,
                _ if j == n - 1 => self.fy.clone(),
                _ => self.fx[j].clone(),
            });
        }
        let f_last = &self.fx[last];
        match j {
            0 => {
                let mut num = self.fx[0].try_mul(f_last)?.try_add(&self.f)?.scale(-1.0);
                for (xi, fi) in self.x.iter().zip(&self.fx) {
                    num = num.try_add(&xi.try_mul(fi)?)?;
                }
                num.try_div(&self.fy)
            }
            _ if j == n - 1 => Ok(f_last.scale(-1.0)),
            _ => {
                let num = self.fx[j - 1].try_add(&self.fx[j].try_mul(f_last)?)?;
                Ok(num.try_div(&self.fy)?.scale(-1.0))
            }
        }
    }
}

/// The family with `σ_i = x_i` (`i < n`) and `σ_n = f`, written out
/// explicitly. Rows `1 … n−2` are companion-like; the last two rows carry
/// `f` and the quotients by `f_y`.
///
/// For `n = 2` only the last two rows exist:
/// `[[−x_1 + f_{x_1}, f_y], [(x_1 f_{x_1} − f_{x_1}² − f)/f_y, −f_{x_1}]]`.
pub fn build_theorem1(f: &ScalarField, n: usize) -> Result<OperatorField> {
    require_dim("coordinate family", ">= 2", n, 2)?;
    if f.dim() != n {
        return Err(Error::InvalidInput(format!(
            "f has dimension {}, expected {n}",
            f.dim()
        )));
    }
    let g = f.clone();
    let field = OperatorField::new(n, Family::Coordinate, format!("theorem1(n = {n}, f = {})", f.label()), move |p| {
        let jets = CoordinateJets::at(&g, p)?;
        OperatorEval::from_entries(n, |i, j| jets.entry(n, i, j))
    });
    Ok(field.with_guard(f_y_guard(f)))
}

/// The polynomial normal form at a Morse singularity of the determinant,
/// `f = sign · y²`:
///
/// ```text
/// row k (k ≤ n−2):  −x_k at column 1, 1 at column k+1
/// row n−1:          −x_{n−1} at column 1, sign·2y at column n
/// row n:            −y/2 at column 1
/// ```
pub fn build_morse_canonical(n: usize, sign: f64) -> Result<OperatorField> {
    require_dim("Morse normal form", "> 2", n, 3)?;
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidInput(format!("sign must be +1 or -1, got {sign}")));
    }
    let label = format!("theorem2(n = {n}, sign = {sign:+})");
    Ok(OperatorField::new(n, Family::MorseCanonical, label, move |p| {
        if p.len() != n {
            return Err(FieldError::DimensionMismatch { expected: n, got: p.len() });
        }
        let y = Jet1::coord(n, p)?;
        OperatorEval::from_entries(n, |i, j| {
            Ok(match (i, j) {
                (i, 0) if i + 1 < n => Jet1::coord(i + 1, p)?.scale(-1.0),
                (_, 0) => y.scale(-0.5),
                (i, j) if i + 2 < n && j == i + 1 => Jet1::constant(1.0, n),
                (i, j) if i == n - 2 && j == n - 1 => y.scale(2.0 * sign),
                _ => Jet1::constant(0.0, n),
            })
        })
    }))
}

/// Outcome of [`verify_conjugation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugationCheck {
    /// `max |(J·L − L̃·J)_ij|`.
    pub residual: f64,
    /// `1 + max|J| · max|L|`, the size of the products being compared.
    pub scale: f64,
}

impl ConjugationCheck {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

/// Checks `J·L = L̃·J` for the coordinate-family operator of `f` at `p`, with `J`
/// the identity over the gradient row of `f` and `L̃` the companion form of
/// `(x_1, …, x_{n−1}, f)`.
pub fn verify_conjugation(f: &ScalarField, n: usize, p: &[f64]) -> Result<ConjugationCheck> {
    conjugation_at(&build_theorem1(f, n)?, &SigmaFields::coordinates_with(f), p)
}

/// `J·L − L̃·J` at `p` for any operator field and prescribed invariants.
pub fn conjugation_at(l: &OperatorField, sigma: &SigmaFields, p: &[f64]) -> Result<ConjugationCheck> {
    if l.dim() != sigma.dim() {
        return Err(Error::InvalidInput(format!(
            "operator has dimension {}, sigma has {}",
            l.dim(),
            sigma.dim()
        )));
    }
    let l = l.eval(p)?.values;
    let jac = jacobi_matrix(sigma, p)?;
    let comp = companion_matrix(&sigma.values(p)?)?;
    let residual = (&(&jac * &l) - &(&comp * &jac)).max_abs();
    Ok(ConjugationCheck {
        residual,
        scale: 1.0 + jac.max_abs().max(comp.max_abs()) * l.max_abs().max(1.0),
    })
}

/// Samples `domain` and checks `J·L = L̃·J` to relative tolerance `tol`.
pub fn verify_conjugation_sweep(
    l: &OperatorField,
    sigma: &SigmaFields,
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
    let mut report = VerificationReport::new(format!("conjugation identity of {}", l.label()))
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
        match conjugation_at(l, sigma, &p) {
            Ok(c) => report.observe(&p, c.residual, c.relative()),
            Err(Error::Field(_)) => report.rejected += 1,
            Err(e) => return Err(e),
        }
    }
    if report.accepted == 0 {
        return Err(Error::DomainSingular { samples });
    }
    let rel = report.max_relative;
    report.push_check("conjugation", rel, rel <= tol);
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(text: &str, n: usize) -> ScalarField {
        ScalarField::parse(text, n).unwrap()
    }

    fn assert_matrix_close(a: &Matrix, b: &Matrix, tol: f64) {
        assert_eq!(a.dim(), b.dim());
        let err = (a - b).max_abs();
        assert!(err <= tol, "{a:?} vs {b:?}: {err:e}");
    }

    #[test]
    fn companion_examples() {
        assert_eq!(
            companion_matrix(&[1.0, 2.0, 3.0]).unwrap(),
            Matrix::from_rows(&[[-1.0, 1.0, 0.0], [-2.0, 0.0, 1.0], [-3.0, 0.0, 0.0]])
        );
        assert_eq!(
            companion_matrix(&[0.0, 0.0]).unwrap(),
            Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]])
        );
        assert!(companion_matrix(&[1.0]).is_err());
    }

    #[test]
    fn jacobi_examples() {
        let f = field("y^2 + x1*y", 3);
        let j = jacobi_matrix(&SigmaFields::coordinates_with(&f), &[1.0, -1.0, 2.0]).unwrap();
        assert_eq!(j, Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 5.0]]));

        let coords = SigmaFields::new((1..=3).map(|i| ScalarField::coordinate(i, 3)).collect()).unwrap();
        assert_eq!(jacobi_matrix(&coords, &[0.3, 0.1, 0.2]).unwrap(), Matrix::identity(3));

        let morse = SigmaFields::coordinates_with(&field("y^2", 3));
        let j = jacobi_matrix(&morse, &[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(j.determinant(), 0.0);
    }

    #[test]
    fn diff_nondegenerate_reproduces_2d_family() {
        let f = field("x1*y + y^3 + 2*y", 2);
        let sigma = SigmaFields::new(vec![field("-x1", 2), f.clone()]).unwrap();
        let conj = build_diff_nondegenerate(&sigma).unwrap();
        let explicit = build_2d(&f).unwrap();
        for p in [[0.3, 0.4], [-0.7, 1.1], [1.5, -0.2]] {
            let a = conj.eval(&p).unwrap();
            let b = explicit.eval(&p).unwrap();
            assert_matrix_close(&a.values, &b.values, 1e-13);
            for (u, v) in a.entry_grads.iter().zip(&b.entry_grads) {
                assert!((u - v).abs() < 1e-12, "{u} vs {v}");
            }
        }
    }

    #[test]
    fn diff_nondegenerate_with_identity_jacobian_is_companion() {
        let n = 3;
        let sigma = SigmaFields::new((1..=n).map(|i| ScalarField::coordinate(i, n)).collect()).unwrap();
        let l = build_diff_nondegenerate(&sigma).unwrap();
        let p = [0.2, -0.4, 0.9];
        assert_eq!(l.eval(&p).unwrap().values, companion_matrix(&p).unwrap());
    }

    #[test]
    fn diff_nondegenerate_refuses_degenerate_points() {
        let sigma = SigmaFields::coordinates_with(&field("y^2", 3));
        let l = build_diff_nondegenerate(&sigma).unwrap();
        assert!(matches!(l.eval(&[0.1, 0.2, 0.0]), Err(FieldError::Degenerate { .. })));
    }

    #[test]
    fn two_dim_examples() {
        let l = build_2d(&field("y", 2)).unwrap();
        let p = [0.7, -1.3];
        assert_eq!(l.eval(&p).unwrap().values, Matrix::from_rows(&[[0.7, -1.0], [-1.3, 0.0]]));

        let l = build_2d(&field("y + 2.5", 2)).unwrap();
        assert_eq!(l.eval(&p).unwrap().values, Matrix::from_rows(&[[0.7, -1.0], [-1.3 + 2.5, 0.0]]));

        let l = build_2d(&field("x1", 2)).unwrap();
        let err = l.eval(&p).unwrap_err();
        assert!(matches!(err, FieldError::Entry { row: 2, col: 1, .. }));
    }

    #[test]
    fn coordinate_family_n3_with_square_matches_normal_form() {
        let l = build_theorem1(&field("y^2", 3), 3).unwrap();
        let p = [0.4, -0.3, 0.8];
        let expected = Matrix::from_rows(&[[-0.4, 1.0, 0.0], [0.3, 0.0, 1.6], [-0.4, 0.0, 0.0]]);
        assert_matrix_close(&l.eval(&p).unwrap().values, &expected, 1e-15);

        let err = l.eval(&[0.4, -0.3, 0.0]).unwrap_err();
        assert!(matches!(err, FieldError::Entry { row: 3, col: 1, .. }), "{err:?}");
    }

    #[test]
    fn coordinate_family_entry_singular_in_column_two() {
        let l = build_theorem1(&field("y^2 + x1", 3), 3).unwrap();
        let e = l.eval(&[0.0, 0.0, 0.25]).unwrap().values;
        // −(f_{x1} + f_{x2}²)/f_y = −1/(2y)
        assert!((e[(2, 1)] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn coordinate_family_trace_is_minus_x1() {
        for (text, n) in [("y^3 + y + x1", 3), ("y^2 + x1*x2 + 0.3*y", 4), ("exp(y) + x1*x4", 5), ("y", 2)] {
            let l = build_theorem1(&field(text, n), n).unwrap();
            for k in 0..10 {
                let p: Vec<f64> = (0..n).map(|i| 0.1 * (k as f64) - 0.3 * i as f64 + 0.05).collect();
                let Ok(e) = l.eval(&p) else { continue };
                assert!((e.values.trace() + p[0]).abs() <= 1e-14, "{text} at {p:?}");
            }
        }
    }

    #[test]
    fn morse_canonical_examples() {
        let l = build_morse_canonical(3, 1.0).unwrap();
        let e = l.eval(&[1.0, -1.0, 2.0]).unwrap();
        assert_eq!(e.values, Matrix::from_rows(&[[-1.0, 1.0, 0.0], [1.0, 0.0, 4.0], [-1.0, 0.0, 0.0]]));

        let l = build_morse_canonical(4, -1.0).unwrap();
        let e = l.eval(&[0.1, 0.2, 0.3, 0.5]).unwrap().values;
        assert_eq!(e[(2, 3)], -1.0);
        assert_eq!(e[(3, 0)], -0.25);
        assert_eq!((e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 2)]), (-0.1, 1.0, -0.2, 1.0));
        assert_eq!(e[(3, 1)] + e[(3, 2)] + e[(3, 3)], 0.0);

        assert!(build_morse_canonical(2, 1.0).is_err());
        assert!(build_morse_canonical(3, 0.5).is_err());
    }

    #[test]
    fn morse_canonical_agrees_with_coordinate_family_off_the_singular_locus() {
        for n in 3..=6 {
            for sign in [1.0, -1.0] {
                let canonical = build_morse_canonical(n, sign).unwrap();
                let t1 = build_theorem1(&field("y^2", n).scaled(sign), n).unwrap();
                for k in 0..20 {
                    let mut p: Vec<f64> = (0..n).map(|i| ((k * 7 + i * 3) % 11) as f64 / 5.5 - 1.0).collect();
                    if p[n - 1].abs() < 0.1 {
                        p[n - 1] = 0.1 + 0.01 * k as f64;
                    }
                    let a = canonical.eval(&p).unwrap().values;
                    let b = t1.eval(&p).unwrap().values;
                    assert_matrix_close(&a, &b, 1e-13);
                }
            }
        }
    }

    #[test]
    fn conjugation_examples() {
        let c = verify_conjugation(&field("y^2 + x1*x2", 3), 3, &[0.3, -0.8, 0.6]).unwrap();
        assert!(c.residual <= 1e-12, "{c:?}");
        let c = verify_conjugation(&field("y", 2), 2, &[1.7, -0.4]).unwrap();
        assert!(c.residual <= 1e-13);
        assert!(verify_conjugation(&field("y^2", 3), 3, &[0.3, 0.2, 0.0]).is_err());
    }
}
