//! Tools for the locus `f_y = 0`, where the last coefficient stops being a
//! coordinate.
//!
//! * [`smoothness_numerators`] evaluates the numerators of the quotients by
//!   `f_y` that appear in the explicit operator and classifies the point.
//! * [`pde_residuals`] evaluates the equations a remainder `R(x)` must
//!   satisfy when `f = ±y² + R(x)`.
//! * [`morse_reduce`] brings `f` to the form `±ỹ² + R(x)` on a fiber `x`
//!   by locating the critical point of `y ↦ f(x, y)` with Newton's method.

use std::time::Instant;

use serde::Serialize;

use crate::field::{FieldError, ScalarField};
use crate::jet::{Jet2, EPS_DIV};
use crate::report::VerificationReport;
use crate::sampling::{linspace, BoxDomain};
use crate::{Error, Result};

/// Below this `|f_yy|` a critical point is not Morse.
pub const EPS_MORSE: f64 = 1e-6;
/// Inside `|y − c| < DELTA_TAYLOR` the Morse factor is taken from `f_yy`.
pub const DELTA_TAYLOR: f64 = 1e-3;
/// Relative threshold for calling a numerator zero.
pub const TOL_NUM: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// `f_y ≠ 0`: every quotient is smooth here.
    Regular,
    /// `f_y = 0` and every numerator vanishes.
    SingularZeroNumerators,
    /// `f_y = 0` but some numerator does not vanish: the entries blow up.
    Obstructed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionDiagnostic {
    pub point: Vec<f64>,
    /// `N_0 = Σ x_i f_{x_i} − f_{x_1} f_{x_{n−1}} − f`, then
    /// `N_j = f_{x_{j−1}} + f_{x_j} f_{x_{n−1}}` for `j = 2 … n−1`.
    pub numerators: Vec<f64>,
    pub denominator: f64,
    pub verdict: Verdict,
}

/// Numerators and denominator of the quotients by `f_y` at `p`.
///
/// Never fails on a vanishing `f_y`; that is the case it exists for.
pub fn smoothness_numerators(f: &ScalarField, n: usize, p: &[f64]) -> Result<FractionDiagnostic> {
    if n < 2 || f.dim() != n || p.len() != n {
        return Err(Error::InvalidInput(format!(
            "need n >= 2 and f, p of dimension n (n = {n}, f: {}, p: {})",
            f.dim(),
            p.len()
        )));
    }
    let jet = f.eval(p)?;
    let g = jet.gradient();
    let m = n - 1;
    let f_last = g[m - 1];
    let mut scale = 1.0 + jet.value().abs() + (g[0] * f_last).abs();
    let mut n0 = -g[0] * f_last - jet.value();
    for i in 0..m {
        n0 += p[i] * g[i];
        scale += (p[i] * g[i]).abs();
    }
    let mut numerators = vec![n0];
    for j in 1..m {
        numerators.push(g[j - 1] + g[j] * f_last);
        scale += g[j - 1].abs() + (g[j] * f_last).abs();
    }
    let denominator = g[m];
    let biggest = numerators.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let verdict = if denominator.abs() >= EPS_DIV * biggest.max(1.0) {
        Verdict::Regular
    } else if biggest > TOL_NUM * scale {
        Verdict::Obstructed
    } else {
        Verdict::SingularZeroNumerators
    };
    Ok(FractionDiagnostic {
        point: p.to_vec(),
        numerators,
        denominator,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdeResiduals {
    /// `Σ x_i R_i − R_1 R_{n−1} − R`.
    pub r0: f64,
    /// `R_{j−1} + R_j R_{n−1}`, `j = 2 … n−1`.
    pub chain: Vec<f64>,
    /// `R_{n−i} − (−1)^{i−1} R_{n−1}^i`, `i = 2 … n−1`.
    pub relations: Vec<f64>,
    /// `n R_1 + (n−1) x_1 R_2 + … + 2 x_{n−2} R_{n−1} − x_{n−1}`.
    pub factor2: f64,
}

impl PdeResiduals {
    /// Largest residual of the system itself (`r0`, chain, relations).
    /// `factor2` is excluded: `R ≡ 0` solves the system without it.
    pub fn system_max(&self) -> f64 {
        self.chain
            .iter()
            .chain(&self.relations)
            .fold(self.r0.abs(), |m, v| m.max(v.abs()))
    }

    pub fn is_solution(&self, tol: f64) -> bool {
        self.system_max() <= tol
    }
}

/// Residuals of the remainder system at a base point `p = (x_1 … x_{n−1})`.
pub fn pde_residuals(r: &ScalarField, n: usize, p: &[f64]) -> Result<PdeResiduals> {
    if n < 2 || r.dim() != n - 1 {
        return Err(Error::InvalidInput(format!(
            "R must be a function of n - 1 = {} variables, got {}",
            n.saturating_sub(1),
            r.dim()
        )));
    }
    Ok(pde_residuals_from_jet(&r.eval(p)?, n, p))
}

/// [`pde_residuals`] from a precomputed jet of `R` at `p`.
pub fn pde_residuals_from_jet(jet: &Jet2, n: usize, p: &[f64]) -> PdeResiduals {
    let m = n - 1;
    let d = |i: usize| jet.gradient()[i - 1];
    let r_last = d(m);
    let mut r0 = -d(1) * r_last - jet.value();
    for i in 1..=m {
        r0 += p[i - 1] * d(i);
    }
    let chain = (2..=m).map(|j| d(j - 1) + d(j) * r_last).collect();
    let relations = (2..=m)
        .map(|i| {
            let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
            d(n - i) - sign * r_last.powi(i as i32)
        })
        .collect();
    let mut factor2 = n as f64 * d(1) - p[m - 1];
    for k in 2..=m {
        factor2 += (n - k + 1) as f64 * p[k - 2] * d(k);
    }
    PdeResiduals {
        r0,
        chain,
        relations,
        factor2,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MorseError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("non-Morse critical point: f_yy = {f_yy:e} at y = {y}")]
    NonMorse { y: f64, f_yy: f64 },
    #[error("Newton iteration diverged after {iters} steps (y = {y})")]
    Diverged { iters: usize, y: f64 },
    #[error("{0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseOptions {
    pub y0: f64,
    pub max_iters: usize,
    pub tol_newton: f64,
}

impl Default for MorseOptions {
    fn default() -> Self {
        Self {
            y0: 0.0,
            max_iters: 50,
            tol_newton: 1e-13,
        }
    }
}

/// Result of reducing `f(x, ·)` to `sign · ỹ² + R(x)` on one fiber.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseData {
    pub x: Vec<f64>,
    /// Critical point of `y ↦ f(x, y)`.
    pub c: f64,
    /// `R(x) = f(x, c(x))`.
    pub r: f64,
    pub sign: f64,
    pub f_yy: f64,
    pub newton_iters: usize,
    /// Gradient of `R` in `x`.
    pub r_gradient: Vec<f64>,
    #[serde(skip)]
    r_jet: Jet2,
}

impl MorseData {
    /// Jet of `R` at `x`, from the envelope rule `R_i = f_{x_i}` and the
    /// implicit-function Hessian `R_ij = f_ij − f_iy f_jy / f_yy`.
    pub fn remainder_jet(&self) -> &Jet2 {
        &self.r_jet
    }
}

fn fiber_point(x: &[f64], y: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    p.push(y);
    p
}

/// Newton on `y ↦ f_y(x, y)` from `opts.y0`, then the Morse data at the
/// limit.
pub fn morse_reduce(f: &ScalarField, n: usize, x: &[f64], opts: &MorseOptions) -> Result<MorseData, MorseError> {
    if f.dim() != n || x.len() + 1 != n {
        return Err(MorseError::InvalidInput(format!(
            "f must have dimension n = {n} and x must have n - 1 coordinates (got {} and {})",
            f.dim(),
            x.len()
        )));
    }
    let last = n - 1;
    let mut y = opts.y0;
    let mut iters = 0;
    let mut converged = false;
    while iters < opts.max_iters {
        let jet = f.eval(&fiber_point(x, y))?;
        let (fy, fyy) = (jet.gradient()[last], jet.hessian_at(last, last));
        if fyy.abs() < EPS_MORSE {
            return Err(MorseError::NonMorse { y, f_yy: fyy });
        }
        let step = fy / fyy;
        y -= step;
        iters += 1;
        if !y.is_finite() {
            return Err(MorseError::Diverged { iters, y });
        }
        if step.abs() <= opts.tol_newton * (1.0 + y.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MorseError::Diverged { iters, y });
    }

    let jet = f.eval(&fiber_point(x, y))?;
    let fy = jet.gradient()[last];
    let fyy = jet.hessian_at(last, last);
    if fyy.abs() < EPS_MORSE {
        return Err(MorseError::NonMorse { y, f_yy: fyy });
    }
    let m = last;
    let c_grad: Vec<f64> = (0..m).map(|i| -jet.hessian_at(i, last) / fyy).collect();
    let r_gradient: Vec<f64> = (0..m).map(|i| jet.gradient()[i] + fy * c_grad[i]).collect();
    let r_hessian: Vec<f64> = (0..m * m)
        .map(|k| {
            let (i, j) = (k / m, k % m);
            jet.hessian_at(i, j) - jet.hessian_at(i, last) * jet.hessian_at(j, last) / fyy
        })
        .collect();
    Ok(MorseData {
        x: x.to_vec(),
        c: y,
        r: jet.value(),
        sign: fyy.signum(),
        f_yy: fyy,
        newton_iters: iters,
        r_gradient: r_gradient.clone(),
        r_jet: Jet2::from_parts(jet.value(), r_gradient, r_hessian),
    })
}

/// The reduced coordinate `ỹ = (y − c)·√|g|`, `g = (f − R)/(y − c)²`.
///
/// Near `y = c` the quotient is replaced by `f_yy(x, c + (y − c)/3)/2`,
/// which matches `g` through first order in `y − c`. `ỹ` increases with `y`
/// through `c`.
pub fn morse_coordinate(f: &ScalarField, data: &MorseData, y: f64) -> Result<f64, MorseError> {
    let t = y - data.c;
    let g = if t.abs() >= DELTA_TAYLOR {
        (f.eval(&fiber_point(&data.x, y))?.value() - data.r) / (t * t)
    } else {
        let last = data.x.len();
        let jet = f.eval(&fiber_point(&data.x, data.c + t / 3.0))?;
        0.5 * jet.hessian_at(last, last)
    };
    Ok(t * g.abs().sqrt())
}

/// Checks `f(x, y) = sign · ỹ(x, y)² + R(x)` on a tensor grid of `domain`
/// with `per_axis` points per axis.
pub fn verify_morse_normal_form(
    f: &ScalarField,
    n: usize,
    domain: &BoxDomain,
    per_axis: usize,
    tol: f64,
    opts: &MorseOptions,
) -> Result<VerificationReport> {
    if domain.dim() != n || n < 2 {
        return Err(Error::InvalidInput(format!(
            "box has dimension {}, expected n = {n} >= 2",
            domain.dim()
        )));
    }
    let start = Instant::now();
    let base = BoxDomain::new(domain.lo()[..n - 1].to_vec(), domain.hi()[..n - 1].to_vec())?;
    let ys = linspace(domain.lo()[n - 1], domain.hi()[n - 1], per_axis);
    let mut report = VerificationReport::new(format!("Morse normal form of {}", f.label()))
        .param("n", n)
        .param("grid", per_axis)
        .param("tol", tol);
    for x in base.grid(per_axis) {
        let data = morse_reduce(f, n, &x, opts)?;
        for &y in &ys {
            let yt = morse_coordinate(f, &data, y)?;
            let fv = f.eval(&fiber_point(&x, y))?.value();
            let defect = (fv - (data.sign * yt * yt + data.r)).abs();
            report.observe(&fiber_point(&x, y), defect, defect / (1.0 + fv.abs()));
        }
    }
    let max = report.max_residual;
    report.push_check("morse_normal_form", max, max <= tol);
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Where the remainder `R` comes from in a PDE sweep.
#[derive(Debug, Clone)]
pub enum Remainder {
    /// `R(x_1 … x_{n−1})` given directly.
    Explicit(ScalarField),
    /// `R(x) = f(x, c(x))` from a Morse reduction of `f`.
    FromMorse(ScalarField, MorseOptions),
}

/// Samples base points `x` of `domain` (dimension `n − 1`) and checks that
/// the remainder solves the system to `tol`.
pub fn verify_pde(
    remainder: &Remainder,
    n: usize,
    domain: &BoxDomain,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    if n < 2 || domain.dim() != n - 1 {
        return Err(Error::InvalidInput(format!(
            "base box must have dimension n - 1 = {}, got {}",
            n.saturating_sub(1),
            domain.dim()
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let start = Instant::now();
    let subject = match remainder {
        Remainder::Explicit(r) => format!("remainder system for R = {}", r.label()),
        Remainder::FromMorse(f, _) => format!("remainder system for the Morse reduction of {}", f.label()),
    };
    let mut report = VerificationReport::new(subject)
        .param("n", n)
        .param("samples", samples)
        .param("seed", seed)
        .param("tol", tol);
    let mut factor2_max = 0.0f64;
    for x in domain.sample(samples, seed) {
        let res = match remainder {
            Remainder::Explicit(r) => pde_residuals(r, n, &x)?,
            Remainder::FromMorse(f, opts) => {
                let data = morse_reduce(f, n, &x, opts)?;
                pde_residuals_from_jet(data.remainder_jet(), n, &x)
            }
        };
        factor2_max = factor2_max.max(res.factor2.abs());
        let r = res.system_max();
        report.observe(&x, r, r);
    }
    report = report.param("max_factor2", factor2_max);
    let max = report.max_residual;
    report.push_check("pde_system", max, max <= tol);
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(text: &str, n: usize) -> ScalarField {
        ScalarField::parse(text, n).unwrap()
    }

    fn r(text: &str, m: usize) -> ScalarField {
        ScalarField::parse_base(text, m).unwrap()
    }

    #[test]
    fn square_is_removable_at_y_zero() {
        let d = smoothness_numerators(&f("y^2", 3), 3, &[0.4, -0.6, 0.0]).unwrap();
        assert_eq!(d.verdict, Verdict::SingularZeroNumerators);
        assert_eq!(d.numerators, vec![0.0, 0.0]);
        assert_eq!(d.denominator, 0.0);

        let d = smoothness_numerators(&f("y^2", 3), 3, &[0.4, -0.6, 0.5]).unwrap();
        assert_eq!(d.verdict, Verdict::Regular);
        assert_eq!(d.numerators[0], -0.25);
    }

    #[test]
    fn linear_term_obstructs() {
        let d = smoothness_numerators(&f("y^2 + x1", 3), 3, &[0.2, 0.3, 0.0]).unwrap();
        assert_eq!(d.verdict, Verdict::Obstructed);
        assert!((d.numerators[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn unit_slope_is_regular() {
        let d = smoothness_numerators(&f("y + x1^2", 2), 2, &[0.9, 0.1]).unwrap();
        assert_eq!(d.verdict, Verdict::Regular);
        assert_eq!(d.numerators.len(), 1);
        // x f_x − f_x² − f
        assert!((d.numerators[0] - (0.9 * 1.8 - 1.8 * 1.8 - 0.91)).abs() < 1e-15);
    }

    #[test]
    fn pde_residual_examples() {
        let res = pde_residuals(&r("0", 3), 4, &[0.2, 0.3, 0.7]).unwrap();
        assert_eq!(res.r0, 0.0);
        assert_eq!(res.chain, vec![0.0, 0.0]);
        assert_eq!(res.relations, vec![0.0, 0.0]);
        assert_eq!(res.factor2, -0.7);
        assert!(res.is_solution(0.0));

        for x in [-0.8, 0.1, 1.3] {
            let res = pde_residuals(&r("x1^2/4", 1), 2, &[x]).unwrap();
            assert!(res.r0.abs() <= 1e-15);
            assert!(res.chain.is_empty() && res.relations.is_empty());
        }

        let res = pde_residuals(&r("x1 + x2", 2), 3, &[0.3, -0.4]).unwrap();
        assert_eq!(res.chain, vec![2.0]);
        assert!((res.r0 + 1.0).abs() < 1e-15);
    }

    #[test]
    fn relations_agree_with_chain_on_solutions_of_the_chain() {
        // n = 3: the chain R_1 + R_2² = 0 is the relation R_1 = −R_2².
        // R = −(a²) x1 + a x2 satisfies it for every a.
        for a in [0.0, 0.5, -1.3] {
            let text = format!("-({a})^2*x1 + ({a})*x2");
            let res = pde_residuals(&r(&text, 2), 3, &[0.25, -0.5]).unwrap();
            assert!(res.chain[0].abs() <= 1e-12);
            assert!((res.relations[0] - res.chain[0]).abs() <= 1e-12);
        }
        // n = 4, R = φ(x3): R_1 = R_2 = 0 forces φ' = 0 for the chain; the
        // relations encode the same constraint.
        let res = pde_residuals(&r("x3^2", 3), 4, &[0.1, 0.2, 0.3]).unwrap();
        assert!((res.chain[1] - 0.36).abs() < 1e-15);
        assert!((res.relations[0] - 0.36).abs() < 1e-15);
        assert!((res.relations[1] + 0.216).abs() < 1e-15);
    }

    #[test]
    fn morse_reduce_completes_the_square() {
        let red = morse_reduce(&f("y^2 + x1*y", 2), 2, &[1.0], &MorseOptions::default()).unwrap();
        assert!((red.c + 0.5).abs() < 1e-15);
        assert!((red.r + 0.25).abs() < 1e-15);
        assert_eq!(red.sign, 1.0);

        let red = morse_reduce(&f("y^2", 3), 3, &[0.3, -0.2], &MorseOptions::default()).unwrap();
        assert_eq!((red.c, red.r, red.sign, red.newton_iters), (0.0, 0.0, 1.0, 1));

        let red = morse_reduce(&f("-y^2 + x2", 3), 3, &[0.0, 0.7], &MorseOptions::default()).unwrap();
        assert_eq!((red.c, red.r, red.sign), (0.0, 0.7, -1.0));
    }

    #[test]
    fn morse_reduce_rejects_degenerate_critical_points() {
        let err = morse_reduce(&f("y^3", 2), 2, &[0.0], &MorseOptions::default()).unwrap_err();
        assert!(matches!(err, MorseError::NonMorse { .. }));
        let opts = MorseOptions { y0: 0.4, ..Default::default() };
        let err = morse_reduce(&f("y^3", 2), 2, &[0.0], &opts).unwrap_err();
        assert!(matches!(err, MorseError::NonMorse { .. }), "{err:?}");
    }

    #[test]
    fn morse_reduce_is_idempotent_on_normal_forms() {
        for (text, sign) in [("y^2 + x1*x2 - x1^3", 1.0), ("-y^2 + sin(x1) + x2^2", -1.0)] {
            let red = morse_reduce(&f(text, 3), 3, &[0.4, -0.9], &MorseOptions::default()).unwrap();
            assert_eq!(red.c, 0.0);
            assert_eq!(red.sign, sign);
            let expected = f(text, 3).eval(&[0.4, -0.9, 0.0]).unwrap().value();
            assert!((red.r - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn newton_converges_quickly() {
        let opts = MorseOptions { y0: 0.3, ..Default::default() };
        for text in ["y^2 + x1*y", "y^4 + y^2 + 0.2*x1*y", "2*y^2 - y^3 + x1*y"] {
            for x in [-0.4, 0.0, 0.4] {
                let red = morse_reduce(&f(text, 2), 2, &[x], &opts).unwrap();
                assert!(red.newton_iters <= 8, "{text} at {x}: {}", red.newton_iters);
                let fy = f(text, 2).eval(&[x, red.c]).unwrap().gradient()[1];
                assert!(fy.abs() <= 1e-12 * (1.0 + red.f_yy.abs()));
            }
        }
    }

    #[test]
    fn remainder_jet_matches_closed_form() {
        // f = (y + x1/2)² − x1²/4 + x2: R = −x1²/4 + x2
        let red = morse_reduce(&f("y^2 + x1*y + x2", 3), 3, &[0.6, -0.3], &MorseOptions::default()).unwrap();
        let j = red.remainder_jet();
        assert!((j.value() - (-0.09 - 0.3)).abs() < 1e-15);
        assert!((j.gradient()[0] + 0.3).abs() < 1e-15);
        assert!((j.gradient()[1] - 1.0).abs() < 1e-15);
        assert!((j.hessian_at(0, 0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn normal_form_identity_on_grids() {
        let d2 = BoxDomain::uniform(2, -1.0, 1.0).unwrap();
        let rep = verify_morse_normal_form(&f("y^2 + x1*y", 2), 2, &d2, 21, 1e-10, &MorseOptions::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
        let d3 = BoxDomain::uniform(3, -1.0, 1.0).unwrap();
        let rep =
            verify_morse_normal_form(&f("-y^2 + x2*y + x2", 3), 3, &d3, 11, 1e-9, &MorseOptions::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
        let err = verify_morse_normal_form(&f("y^3", 2), 2, &d2, 5, 1e-9, &MorseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Morse(MorseError::NonMorse { .. })));
    }

    #[test]
    fn taylor_branch_matches_quotient_branch() {
        let g = f("y^2 + y^3/3 + x1*y", 2);
        let red = morse_reduce(&g, 2, &[0.2], &MorseOptions::default()).unwrap();
        let just_inside = morse_coordinate(&g, &red, red.c + 0.999e-3).unwrap();
        let just_outside = morse_coordinate(&g, &red, red.c + 1.001e-3).unwrap();
        // ỹ is continuous across the switch with slope √(f_yy/2) at c
        let slope = (just_outside - just_inside) / 2e-6;
        assert!((slope - (0.5 * red.f_yy).sqrt()).abs() < 1e-2, "{slope}");
    }
}
