//! Scalar fields and operator fields.
//!
//! An [`OperatorField`] is a rule `p ↦ (L(p), ∂L(p))` for an `n × n` matrix
//! of scalar fields `L^i_j`. Entries are closures over the jets of the
//! defining functions rather than expanded formulas, because the entries of
//! the conjugated families are quotients of derivatives of `f`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{self, Expr, ParseError, VarSpace};
use crate::jet::{Jet1, Jet2, JetError};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("point has {got} coordinates, field expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("entry ({row},{col}): {source}")]
    Entry {
        /// 1-based row index.
        row: usize,
        /// 1-based column index.
        col: usize,
        source: JetError,
    },
    #[error("differentially degenerate at point (det J = {det:e})")]
    Degenerate { det: f64 },
}

impl FieldError {
    /// The offending denominator, if this is a vanishing-denominator failure.
    pub fn denominator(&self) -> Option<f64> {
        match self {
            FieldError::Jet(JetError::DenominatorVanishes { value })
            | FieldError::Entry {
                source: JetError::DenominatorVanishes { value },
                ..
            } => Some(*value),
            FieldError::Degenerate { det } => Some(*det),
            _ => None,
        }
    }
}

type ScalarRule = dyn Fn(&[f64]) -> Result<Jet2, JetError> + Send + Sync;

/// A smooth function of `dim` coordinates, evaluated to order-2 jets.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    label: String,
    rule: Arc<ScalarRule>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({}; dim {})", self.label, self.dim)
    }
}

impl ScalarField {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        rule: impl Fn(&[f64]) -> Result<Jet2, JetError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            label: label.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn from_expr(expr: Expr, dim: usize) -> Self {
        let label = expr.to_string();
        Self::new(dim, label, move |p| expr.eval(p))
    }

    /// Parses `text` in the coordinates `x1 … x(n-1), y`.
    pub fn parse(text: &str, n: usize) -> Result<Self, ParseError> {
        Ok(Self::from_expr(expr::parse(text, n)?, n))
    }

    /// Parses `text` in the base coordinates `x1 … xm` (no `y`).
    pub fn parse_base(text: &str, m: usize) -> Result<Self, ParseError> {
        Ok(Self::from_expr(expr::parse_in(text, VarSpace::x_only(m))?, m))
    }

    /// The coordinate function `x_index` (1-based).
    pub fn coordinate(index: usize, dim: usize) -> Self {
        Self::new(dim, format!("coord{index}"), move |p| Jet2::coord(index, p))
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        Self::new(dim, value.to_string(), move |p| Ok(Jet2::constant(value, p.len())))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, p: &[f64]) -> Result<Jet2, FieldError> {
        check_point(self.dim, p)?;
        Ok((self.rule)(p)?)
    }

    /// `sign · self`.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.clone();
        Self::new(self.dim, format!("{factor}*({})", self.label), move |p| {
            Ok((inner.rule)(p)?.scale(factor))
        })
    }
}

fn check_point(dim: usize, p: &[f64]) -> Result<(), FieldError> {
    if p.len() == dim {
        Ok(())
    } else {
        Err(FieldError::DimensionMismatch {
            expected: dim,
            got: p.len(),
        })
    }
}

/// Values and first derivatives of an operator field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorEval {
    /// `values[(i, j)] = L^i_j(p)`.
    pub values: Matrix,
    /// `∂L^i_j/∂x^l`, flattened as `[(i * n + j) * n + l]`.
    pub entry_grads: Vec<f64>,
}

impl OperatorEval {
    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    /// `∂L^i_j / ∂x^l` (0-based indices).
    pub fn grad(&self, i: usize, j: usize, l: usize) -> f64 {
        let n = self.dim();
        self.entry_grads[(i * n + j) * n + l]
    }

    pub fn entry_gradient(&self, i: usize, j: usize) -> &[f64] {
        let n = self.dim();
        &self.entry_grads[(i * n + j) * n..(i * n + j + 1) * n]
    }

    /// Assembles an evaluation from per-entry first-order jets, tagging
    /// failures with the (1-based) entry index.
    pub fn from_entries(
        n: usize,
        mut entry: impl FnMut(usize, usize) -> Result<Jet1, JetError>,
    ) -> Result<Self, FieldError> {
        let mut values = Matrix::zeros(n);
        let mut entry_grads = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                let jet = entry(i, j).map_err(|source| FieldError::Entry {
                    row: i + 1,
                    col: j + 1,
                    source,
                })?;
                debug_assert_eq!(jet.dim(), n);
                let (v, g) = jet.into_parts();
                values[(i, j)] = v;
                entry_grads.extend(g);
            }
        }
        Ok(Self {
            values,
            entry_grads,
        })
    }
}

/// Which construction produced an operator field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Companion,
    DiffNondegenerate,
    TwoDim,
    Coordinate,
    MorseCanonical,
    Literal,
    Composite,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Companion => "companion",
            Family::DiffNondegenerate => "diffnondeg",
            Family::TwoDim => "2d",
            Family::Coordinate => "theorem1",
            Family::MorseCanonical => "theorem2",
            Family::Literal => "matrix",
            Family::Composite => "composite",
        }
    }
}

type OperatorRule = dyn Fn(&[f64]) -> Result<OperatorEval, FieldError> + Send + Sync;
type GuardRule = dyn Fn(&[f64]) -> Result<f64, FieldError> + Send + Sync;

/// An `n × n` field of (1,1)-tensor components `L^i_j(x)`.
#[derive(Clone)]
pub struct OperatorField {
    dim: usize,
    family: Family,
    label: String,
    rule: Arc<OperatorRule>,
    guard: Option<Arc<GuardRule>>,
}

impl fmt::Debug for OperatorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorField({}; n = {})", self.label, self.dim)
    }
}

impl OperatorField {
    pub fn new(
        dim: usize,
        family: Family,
        label: impl Into<String>,
        rule: impl Fn(&[f64]) -> Result<OperatorEval, FieldError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            family,
            label: label.into(),
            rule: Arc::new(rule),
            guard: None,
        }
    }

    /// Attaches the denominator that governs regularity (e.g. `f_y` or
    /// `det J`). Sweeps reject points where it is small.
    pub fn with_guard(
        mut self,
        guard: impl Fn(&[f64]) -> Result<f64, FieldError> + Send + Sync + 'static,
    ) -> Self {
        self.guard = Some(Arc::new(guard));
        self
    }

    /// Relabels the construction that produced this field.
    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    /// Operator with the given scalar fields as entries, row-major.
    pub fn from_scalar_entries(n: usize, label: impl Into<String>, entries: Vec<ScalarField>) -> Self {
        assert_eq!(entries.len(), n * n, "need n² entries");
        assert!(entries.iter().all(|e| e.dim == n), "entries must share dimension n");
        Self::new(n, Family::Literal, label, move |p| {
            check_point(n, p)?;
            OperatorEval::from_entries(n, |i, j| (entries[i * n + j].rule)(p).map(|jet| jet.first_order()))
        })
    }

    /// `diag(d_1, …, d_n)`.
    pub fn diagonal(entries: Vec<ScalarField>) -> Self {
        let n = entries.len();
        let label = format!(
            "diag({})",
            entries.iter().map(|e| e.label().to_string()).collect::<Vec<_>>().join(", ")
        );
        let mut all = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                all.push(if i == j {
                    entries[i].clone()
                } else {
                    ScalarField::constant(0.0, n)
                });
            }
        }
        Self::from_scalar_entries(n, label, all)
    }

    pub fn constant(m: Matrix) -> Self {
        let n = m.dim();
        Self::new(n, Family::Literal, format!("constant{m:?}"), move |p| {
            check_point(n, p)?;
            Ok(OperatorEval {
                values: m.clone(),
                entry_grads: vec![0.0; n * n * n],
            })
        })
    }

    /// Pointwise sum `self + other`.
    pub fn sum(&self, other: &OperatorField) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions must agree");
        let (a, b) = (self.clone(), other.clone());
        let label = format!("({}) + ({})", self.label, other.label);
        let guard_a = self.guard.clone();
        let mut out = Self::new(self.dim, Family::Composite, label, move |p| {
            let ea = a.eval(p)?;
            let eb = b.eval(p)?;
            Ok(OperatorEval {
                values: &ea.values + &eb.values,
                entry_grads: ea.entry_grads.iter().zip(&eb.entry_grads).map(|(x, y)| x + y).collect(),
            })
        });
        out.guard = guard_a.or_else(|| other.guard.clone());
        out
    }

    /// `self + c · Id`.
    pub fn shifted(&self, c: f64) -> Self {
        self.sum(&Self::constant(Matrix::identity(self.dim).scale(c)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, p: &[f64]) -> Result<OperatorEval, FieldError> {
        check_point(self.dim, p)?;
        (self.rule)(p)
    }

    /// Value of the regularity denominator at `p`, if this field has one.
    pub fn guard_value(&self, p: &[f64]) -> Option<Result<f64, FieldError>> {
        self.guard.as_ref().map(|g| g(p))
    }
}

/// Values and entry gradients of `L` at `p`.
pub fn operator_eval(l: &OperatorField, p: &[f64]) -> Result<OperatorEval, FieldError> {
    l.eval(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_yx() -> OperatorField {
        OperatorField::diagonal(vec![
            ScalarField::parse("y", 2).unwrap(),
            ScalarField::parse("x1", 2).unwrap(),
        ])
    }

    #[test]
    fn constant_operator_has_zero_gradients() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let e = operator_eval(&OperatorField::constant(m.clone()), &[0.3, 0.4]).unwrap();
        assert_eq!(e.values, m);
        assert!(e.entry_grads.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn diagonal_coordinate_operator() {
        let e = operator_eval(&diag_yx(), &[1.0, 2.0]).unwrap();
        assert_eq!(e.values, Matrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]));
        assert_eq!(e.entry_gradient(0, 0), &[0.0, 1.0]);
        assert_eq!(e.entry_gradient(1, 1), &[1.0, 0.0]);
        assert_eq!(e.entry_gradient(0, 1), &[0.0, 0.0]);
        assert_eq!(e.entry_gradient(1, 0), &[0.0, 0.0]);
    }

    #[test]
    fn entry_failures_carry_the_index() {
        let entries = vec![
            ScalarField::parse("1", 2).unwrap(),
            ScalarField::parse("x1/y", 2).unwrap(),
            ScalarField::parse("0", 2).unwrap(),
            ScalarField::parse("1", 2).unwrap(),
        ];
        let l = OperatorField::from_scalar_entries(2, "m", entries);
        let err = l.eval(&[1.0, 0.0]).unwrap_err();
        assert_eq!(
            err,
            FieldError::Entry {
                row: 1,
                col: 2,
                source: JetError::DenominatorVanishes { value: 0.0 }
            }
        );
        assert_eq!(err.denominator(), Some(0.0));
        assert!(matches!(
            l.eval(&[1.0]),
            Err(FieldError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn evaluation_is_linear() {
        let a = diag_yx();
        let b = OperatorField::from_scalar_entries(
            2,
            "b",
            ["x1*y", "sin(y)", "1", "x1^2"]
                .iter()
                .map(|s| ScalarField::parse(s, 2).unwrap())
                .collect(),
        );
        let p = [0.4, -0.9];
        let s = a.sum(&b).eval(&p).unwrap();
        let (ea, eb) = (a.eval(&p).unwrap(), b.eval(&p).unwrap());
        assert_eq!(s.values, &ea.values + &eb.values);
        for k in 0..8 {
            assert_eq!(s.entry_grads[k], ea.entry_grads[k] + eb.entry_grads[k]);
        }
    }

    #[test]
    fn scalar_field_is_deterministic() {
        let f = ScalarField::parse("exp(x1)*cos(y) + y^3", 2).unwrap();
        assert_eq!(f.eval(&[0.2, 0.7]).unwrap(), f.eval(&[0.2, 0.7]).unwrap());
    }
}
