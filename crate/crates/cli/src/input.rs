//! Turning flag values into fields, operators, points and boxes.

use nijenhuis::construct::{
    build_2d, build_companion, build_diff_nondegenerate, build_morse_canonical, build_theorem1,
};
use nijenhuis::expr::{parse_in, VarSpace};
use nijenhuis::{BoxDomain, OperatorField, ScalarField, SigmaFields};

use crate::args::{FamilyArg, Opts};
use crate::error::CliError;

/// A resolved operator together with what is known about its invariants.
pub struct Operator {
    pub field: OperatorField,
    pub n: usize,
    /// Prescribed `σ`, when the construction fixes them.
    pub sigma: Option<SigmaFields>,
    /// The last coefficient `f` for the coordinate families.
    pub f: Option<ScalarField>,
    /// Every entry is a constant (literal matrices only).
    pub constant: bool,
}

/// Splits at commas (or `sep`) outside parentheses, keeping byte offsets.
pub fn split_top_level(text: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth <= 0 => {
                out.push((start, &text[start..i]));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((start, &text[start..]));
    out
}

fn parse_field(flag: &'static str, text: &str, offset: usize, vars: VarSpace) -> Result<ScalarField, CliError> {
    parse_in(text, vars)
        .map(|e| ScalarField::from_expr(e, vars.dim()))
        .map_err(|e| CliError::Parse {
            flag,
            message: format!("{} at byte {}", e.kind, e.position + offset),
            position: e.position + offset,
        })
}

fn require_n(opts: &Opts, what: &str) -> Result<usize, CliError> {
    let n = opts.n.ok_or_else(|| CliError::Usage(format!("{what} needs --n")))?;
    if n < 2 {
        return Err(CliError::Config(format!("--n must be >= 2, got {n}")));
    }
    Ok(n)
}

/// `f` over `x1 … x(n-1), y` from `--f`.
pub fn f_field(opts: &Opts, n: usize) -> Result<ScalarField, CliError> {
    let text = opts
        .f
        .as_deref()
        .ok_or_else(|| CliError::Usage("this command needs --f".into()))?;
    parse_field("--f", text, 0, VarSpace::with_y(n))
}

/// `R` over `x1 … x(n-1)` from `--R`.
pub fn r_field(text: &str, n: usize) -> Result<ScalarField, CliError> {
    parse_field("--R", text, 0, VarSpace::x_only(n - 1))
}

pub fn sign(opts: &Opts) -> Result<f64, CliError> {
    match opts.sign.as_deref() {
        None | Some("+1") | Some("1") | Some("+") => Ok(1.0),
        Some("-1") | Some("-") => Ok(-1.0),
        Some(other) => Err(CliError::Config(format!("--sign must be +1 or -1, got {other:?}"))),
    }
}

pub fn dimension(opts: &Opts, what: &str) -> Result<usize, CliError> {
    require_n(opts, what)
}

fn sigma_fields(opts: &Opts) -> Result<SigmaFields, CliError> {
    let text = opts
        .sigma
        .as_deref()
        .ok_or_else(|| CliError::Usage("this family needs --sigma".into()))?;
    let parts = split_top_level(text, ',');
    let n = parts.len();
    if let Some(m) = opts.n {
        if m != n {
            return Err(CliError::Config(format!("--sigma has {n} entries but --n is {m}")));
        }
    }
    if n < 2 {
        return Err(CliError::Config("--sigma needs at least two entries".into()));
    }
    let fields = parts
        .into_iter()
        .map(|(off, s)| parse_field("--sigma", s, off, VarSpace::with_y(n)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SigmaFields::new(fields)?)
}

fn literal_matrix(opts: &Opts, text: &str) -> Result<Operator, CliError> {
    let (body, prefix) = match text.strip_prefix("diag:") {
        Some(rest) => (rest, 5),
        None => (text, 0),
    };
    let rows: Vec<Vec<(usize, &str)>> = if prefix > 0 {
        vec![split_top_level(body, ',')]
    } else {
        split_top_level(body, ';')
            .into_iter()
            .map(|(off, row)| {
                split_top_level(row, ',')
                    .into_iter()
                    .map(|(o, s)| (off + o, s))
                    .collect()
            })
            .collect()
    };
    let n = if prefix > 0 { rows[0].len() } else { rows.len() };
    if prefix == 0 {
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(CliError::Config(format!(
                "--matrix: row {} has {} entries, expected {n}",
                bad + 1,
                rows[bad].len()
            )));
        }
    }
    if let Some(m) = opts.n {
        if m != n {
            return Err(CliError::Config(format!("--matrix is {n} x {n} but --n is {m}")));
        }
    }
    if n < 2 {
        return Err(CliError::Config("--matrix must be at least 2 x 2".into()));
    }
    let mut constant = true;
    let mut parse_entry = |off: usize, s: &str| {
        constant &= parse_in(s, VarSpace::x_only(0)).is_ok();
        parse_field("--matrix", s, prefix + off, VarSpace::with_y(n))
    };
    let field = if prefix > 0 {
        let entries = rows[0]
            .iter()
            .map(|&(off, s)| parse_entry(off, s))
            .collect::<Result<Vec<_>, _>>()?;
        OperatorField::diagonal(entries)
    } else {
        let entries = rows
            .iter()
            .flatten()
            .map(|&(off, s)| parse_entry(off, s))
            .collect::<Result<Vec<_>, _>>()?;
        OperatorField::from_scalar_entries(n, format!("matrix({text})"), entries)
    };
    Ok(Operator {
        field,
        n,
        sigma: None,
        f: None,
        constant,
    })
}

/// Resolves `--family`/`--matrix` into an operator field.
pub fn operator(opts: &Opts) -> Result<Operator, CliError> {
    match (opts.family, opts.matrix.as_deref()) {
        (Some(_), Some(_)) => Err(CliError::Usage("--family and --matrix are mutually exclusive".into())),
        (None, None) => Err(CliError::Usage("one of --family or --matrix is required".into())),
        (None, Some(text)) => literal_matrix(opts, text),
        (Some(family), None) => {
            let (field, sigma, f) = match family {
                FamilyArg::Theorem1 => {
                    let n = require_n(opts, "--family theorem1")?;
                    let f = f_field(opts, n)?;
                    (build_theorem1(&f, n)?, SigmaFields::coordinates_with(&f), Some(f))
                }
                FamilyArg::Theorem2 => {
                    let n = require_n(opts, "--family theorem2")?;
                    let s = sign(opts)?;
                    let f = ScalarField::parse("y^2", n)
                        .expect("fixed expression")
                        .scaled(s);
                    (build_morse_canonical(n, s)?, SigmaFields::coordinates_with(&f), Some(f))
                }
                FamilyArg::TwoDim => {
                    if let Some(m) = opts.n.filter(|&m| m != 2) {
                        return Err(CliError::Config(format!("--family 2d has n = 2, got --n {m}")));
                    }
                    let f = f_field(opts, 2)?;
                    let minus_x = ScalarField::coordinate(1, 2).scaled(-1.0);
                    let sigma = SigmaFields::new(vec![minus_x, f.clone()])?;
                    (build_2d(&f)?, sigma, Some(f))
                }
                FamilyArg::Diffnondeg => {
                    let sigma = sigma_fields(opts)?;
                    (build_diff_nondegenerate(&sigma)?, sigma, None)
                }
                FamilyArg::Companion => {
                    let sigma = sigma_fields(opts)?;
                    (build_companion(&sigma)?, sigma, None)
                }
            };
            Ok(Operator {
                n: field.dim(),
                field,
                sigma: Some(sigma),
                f,
                constant: false,
            })
        }
    }
}

/// `--point` values, each required to have `dim` coordinates.
pub fn points(opts: &Opts, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    for (k, p) in opts.point.iter().enumerate() {
        if p.len() != dim {
            return Err(CliError::Config(format!(
                "--point #{} has {} coordinates, expected {dim}",
                k + 1,
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("--point #{} is not finite", k + 1)));
        }
    }
    Ok(opts.point.clone())
}

/// `--box` as a `dim`-dimensional box, default `[-1, 1]^dim`.
pub fn domain(opts: &Opts, dim: usize) -> Result<BoxDomain, CliError> {
    let b = opts.bounds.as_deref().unwrap_or(&[-1.0, 1.0]);
    let (lo, hi): (Vec<f64>, Vec<f64>) = if b.len() == 2 {
        (vec![b[0]; dim], vec![b[1]; dim])
    } else if b.len() == 2 * dim {
        (b.iter().step_by(2).copied().collect(), b.iter().skip(1).step_by(2).copied().collect())
    } else {
        return Err(CliError::Config(format!(
            "--box takes 2 values or 2 per axis ({}), got {}",
            2 * dim,
            b.len()
        )));
    };
    Ok(BoxDomain::new(lo, hi)?)
}

/// The first `m` axes of a box.
pub fn domain_prefix(domain: &BoxDomain, m: usize) -> Result<BoxDomain, CliError> {
    Ok(BoxDomain::new(domain.lo()[..m].to_vec(), domain.hi()[..m].to_vec())?)
}

pub fn check_samples(opts: &Opts) -> Result<(), CliError> {
    if opts.samples == 0 {
        return Err(CliError::Config("--samples must be >= 1".into()));
    }
    if !(opts.fd_step > 0.0 && opts.fd_step.is_finite()) {
        return Err(CliError::Config("--fd-step must be positive".into()));
    }
    if let Some(t) = opts.tol {
        if !(t >= 0.0) {
            return Err(CliError::Config("--tol must be non-negative".into()));
        }
    }
    Ok(())
}
