//! Order-2 jets: value, gradient and Hessian of a scalar quantity at a point.
//!
//! Every operator entry built by this crate is a rational expression in a
//! user function `f` and its first partial derivatives. The torsion formula
//! needs the gradients of those entries, so `f` itself has to be carried
//! with its Hessian. [`Jet2`] is that carrier. [`Jet1`] is the truncated
//! (value, gradient) jet obtained from a partial derivative of a [`Jet2`];
//! operator entries are evaluated in it.
//!
//! Hessians are stored as full row-major `n × n` matrices. Every constructor
//! fills the upper triangle and mirrors it, so `H[i][j] == H[j][i]` holds
//! bit-for-bit.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Relative threshold under which a division is refused.
///
/// A denominator `b` is rejected when `|b| < EPS_DIV * max(1, |a|)`.
pub const EPS_DIV: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("denominator vanishes (value {value:e})")]
    DenominatorVanishes { value: f64 },
    #[error("{function} is not differentiable at {value:e}")]
    Domain { function: &'static str, value: f64 },
}

fn check_dims(a: usize, b: usize) -> Result<(), JetError> {
    if a == b {
        Ok(())
    } else {
        Err(JetError::DimensionMismatch { left: a, right: b })
    }
}

fn check_denominator(numerator: f64, denominator: f64) -> Result<(), JetError> {
    if !denominator.is_finite() || denominator.abs() < EPS_DIV * numerator.abs().max(1.0) {
        Err(JetError::DenominatorVanishes { value: denominator })
    } else {
        Ok(())
    }
}

/// Value, gradient and symmetric Hessian of a scalar field at a point.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.hessian.chunks(self.dim().max(1)).collect();
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("gradient", &self.gradient)
            .field("hessian", &rows)
            .finish()
    }
}

impl Jet2 {
    /// Builds a jet from raw parts, symmetrizing the Hessian.
    ///
    /// # Panics
    ///
    /// Panics if `hessian.len() != gradient.len()²`.
    pub fn from_parts(value: f64, gradient: Vec<f64>, hessian: Vec<f64>) -> Self {
        let n = gradient.len();
        assert_eq!(hessian.len(), n * n, "hessian must be n×n");
        let hessian = symmetric(n, |i, j| 0.5 * (hessian[i * n + j] + hessian[j * n + i]));
        Self {
            value,
            gradient,
            hessian,
        }
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            gradient: vec![0.0; dim],
            hessian: vec![0.0; dim * dim],
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(0.0, dim)
    }

    /// The coordinate function `x_index` (1-based) at `point`.
    pub fn coord(index: usize, point: &[f64]) -> Result<Self, JetError> {
        let dim = point.len();
        if index == 0 || index > dim {
            return Err(JetError::IndexOutOfRange { index, dim });
        }
        let mut jet = Self::constant(point[index - 1], dim);
        jet.gradient[index - 1] = 1.0;
        Ok(jet)
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    /// Row-major `n × n` Hessian.
    pub fn hessian(&self) -> &[f64] {
        &self.hessian
    }

    pub fn hessian_at(&self, i: usize, j: usize) -> f64 {
        self.hessian[i * self.dim() + j]
    }

    /// First-order part of the jet.
    pub fn first_order(&self) -> Jet1 {
        Jet1 {
            value: self.value,
            gradient: self.gradient.clone(),
        }
    }

    /// The partial derivative `∂/∂x_index` (0-based) as a first-order jet:
    /// its value is `gradient[index]`, its gradient is Hessian row `index`.
    pub fn partial(&self, index: usize) -> Jet1 {
        let n = self.dim();
        Jet1 {
            value: self.gradient[index],
            gradient: self.hessian[index * n..(index + 1) * n].to_vec(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, JetError> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Leibniz rule to second order.
    pub fn try_mul(&self, other: &Self) -> Result<Self, JetError> {
        check_dims(self.dim(), other.dim())?;
        let n = self.dim();
        let (a, b) = (self, other);
        let gradient = (0..n)
            .map(|i| a.value * b.gradient[i] + b.value * a.gradient[i])
            .collect();
        let hessian = symmetric(n, |i, j| {
            // pairwise sums keep the product bitwise commutative
            (a.value * b.hessian[i * n + j] + b.value * a.hessian[i * n + j])
                + (a.gradient[i] * b.gradient[j] + b.gradient[i] * a.gradient[j])
        });
        Ok(Self {
            value: a.value * b.value,
            gradient,
            hessian,
        })
    }

    /// Quotient rule to second order.
    ///
    /// Solved from `a = q·b` so that `(a / b) · b` reproduces `a` to
    /// rounding. Refuses denominators below [`EPS_DIV`].
    pub fn try_div(&self, other: &Self) -> Result<Self, JetError> {
        check_dims(self.dim(), other.dim())?;
        check_denominator(self.value, other.value)?;
        let n = self.dim();
        let (a, b) = (self, other);
        let q = a.value / b.value;
        let gq: Vec<f64> = (0..n)
            .map(|i| (a.gradient[i] - q * b.gradient[i]) / b.value)
            .collect();
        let hessian = symmetric(n, |i, j| {
            (a.hessian[i * n + j]
                - q * b.hessian[i * n + j]
                - gq[i] * b.gradient[j]
                - b.gradient[i] * gq[j])
                / b.value
        });
        Ok(Self {
            value: q,
            gradient: gq,
            hessian,
        })
    }

    /// Composes a univariate outer function with this jet, given the outer
    /// value and its first two derivatives at `self.value()`.
    pub fn chain(&self, g_value: f64, g_prime: f64, g_second: f64) -> Self {
        let n = self.dim();
        let u = self;
        Self {
            value: g_value,
            gradient: u.gradient.iter().map(|d| g_prime * d).collect(),
            hessian: symmetric(n, |i, j| {
                g_prime * u.hessian[i * n + j] + g_second * u.gradient[i] * u.gradient[j]
            }),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    /// Integer power. Negative exponents require a nonzero base.
    pub fn powi(&self, exponent: i32) -> Result<Self, JetError> {
        let u = self.value;
        if exponent == 0 {
            return Ok(Self::constant(1.0, self.dim()));
        }
        if exponent < 0 {
            check_denominator(1.0, u)?;
        }
        let k = exponent as f64;
        let g1 = if exponent == 1 { 1.0 } else { k * u.powi(exponent - 1) };
        let g2 = match exponent {
            1 => 0.0,
            2 => 2.0,
            _ => k * (k - 1.0) * u.powi(exponent - 2),
        };
        Ok(self.chain(u.powi(exponent), g1, g2))
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let u = self.value;
        if u == 0.0 && self.is_constant() {
            return Ok(self.clone());
        }
        if u <= 0.0 {
            return Err(JetError::Domain {
                function: "sqrt",
                value: u,
            });
        }
        let s = u.sqrt();
        Ok(self.chain(s, 0.5 / s, -0.25 / (u * s)))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c, -s, -c)
    }

    /// Largest `|H_ij - H_ji|`; zero for every jet built by this module.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.hessian[i * n + j] - self.hessian[j * n + i]).abs());
            }
        }
        worst
    }

    fn is_constant(&self) -> bool {
        self.gradient.iter().chain(&self.hessian).all(|&v| v == 0.0)
    }

    fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        Self {
            value: op(self.value),
            gradient: self.gradient.iter().map(|&v| op(v)).collect(),
            hessian: self.hessian.iter().map(|&v| op(v)).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            value: op(self.value, other.value),
            gradient: zip(&self.gradient, &other.gradient, &op),
            hessian: zip(&self.hessian, &other.hessian, &op),
        }
    }
}

fn zip(a: &[f64], b: &[f64], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| op(x, y)).collect()
}

fn symmetric(n: usize, entry: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = entry(i, j);
            h[i * n + j] = v;
            h[j * n + i] = v;
        }
    }
    h
}

macro_rules! panicking_ops {
    ($ty:ident) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                self.try_add(rhs).expect("jet dimensions must agree")
            }
        }

        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                self.try_sub(rhs).expect("jet dimensions must agree")
            }
        }

        impl Mul for &$ty {
            type Output = $ty;
            fn mul(self, rhs: &$ty) -> $ty {
                self.try_mul(rhs).expect("jet dimensions must agree")
            }
        }

        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scale(-1.0)
            }
        }

        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                &self + &rhs
            }
        }

        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                &self - &rhs
            }
        }

        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                &self * &rhs
            }
        }

        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                -&self
            }
        }
    };
}

panicking_ops!(Jet2);
panicking_ops!(Jet1);

/// Value and gradient only.
///
/// Produced by [`Jet2::partial`]; operator entries that are rational in the
/// first derivatives of `f` are evaluated in this type.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    value: f64,
    gradient: Vec<f64>,
}

impl Jet1 {
    pub fn new(value: f64, gradient: Vec<f64>) -> Self {
        Self { value, gradient }
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            gradient: vec![0.0; dim],
        }
    }

    pub fn coord(index: usize, point: &[f64]) -> Result<Self, JetError> {
        Jet2::coord(index, point).map(|j| j.first_order())
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    pub fn into_parts(self) -> (f64, Vec<f64>) {
        (self.value, self.gradient)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            value: self.value + other.value,
            gradient: zip(&self.gradient, &other.gradient, |a, b| a + b),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, JetError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            value: self.value - other.value,
            gradient: zip(&self.gradient, &other.gradient, |a, b| a - b),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, JetError> {
        check_dims(self.dim(), other.dim())?;
        let (a, b) = (self, other);
        Ok(Self {
            value: a.value * b.value,
            gradient: zip(&a.gradient, &b.gradient, |da, db| a.value * db + b.value * da),
        })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, JetError> {
        check_dims(self.dim(), other.dim())?;
        check_denominator(self.value, other.value)?;
        let q = self.value / other.value;
        Ok(Self {
            value: q,
            gradient: zip(&self.gradient, &other.gradient, |da, db| {
                (da - q * db) / other.value
            }),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            value: factor * self.value,
            gradient: self.gradient.iter().map(|d| factor * d).collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        Self {
            value: self.value + c,
            gradient: self.gradient.clone(),
        }
    }
}
