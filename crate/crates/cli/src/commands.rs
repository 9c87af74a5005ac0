use nijenhuis::construct::verify_conjugation_sweep;
use nijenhuis::invariants::{cayley_hamilton_residual, charpoly, verify_sigma, DEFAULT_SIGMA_TOL};
use nijenhuis::singularity::{
    morse_reduce, pde_residuals_from_jet, smoothness_numerators, verify_morse_normal_form, verify_pde, MorseOptions,
    PdeResiduals, Remainder, Verdict,
};
use nijenhuis::torsion::{torsion_bracket_fd, torsion_coordinate, verify_zero_torsion, SweepOptions};
use nijenhuis::{ScalarField, VerificationReport};
use serde_json::{json, Value};

use crate::args::{Check, FamilyArg, Opts};
use crate::error::CliError;
use crate::input::{self, Operator};
use crate::output::{coordinate_names, Cell, Outcome, Table};

pub const TORSION_TOL: f64 = 1e-11;
pub const CONJUGATION_TOL: f64 = 1e-11;
pub const PDE_TOL: f64 = 1e-10;
pub const MORSE_TOL: f64 = 1e-9;

fn sweep_options(opts: &Opts) -> SweepOptions {
    SweepOptions {
        min_denominator: opts.min_denominator,
    }
}

fn describe(op: &Operator) -> VerificationReport {
    VerificationReport::new(op.field.label().to_string())
        .param("n", op.n)
        .param("family", op.field.family().name())
}

fn matrix_json(m: &nijenhuis::Matrix) -> Value {
    json!(m.rows().map(|r| r.to_vec()).collect::<Vec<_>>())
}

pub fn construct(opts: &Opts) -> Result<Outcome, CliError> {
    let op = input::operator(opts)?;
    let points = input::points(opts, op.n)?;
    let mut report = describe(&op);
    report.subject = format!("construct {}", op.field.label());
    let mut header = coordinate_names(op.n, true);
    for i in 1..=op.n {
        for j in 1..=op.n {
            header.push(format!("L{i}_{j}"));
        }
    }
    let mut table = Table::new(header);
    let mut evaluated = Vec::new();
    for p in &points {
        let e = op.field.eval(p)?;
        let mut row: Vec<Cell> = p.iter().map(|&v| v.into()).collect();
        row.extend(e.values.as_slice().iter().map(|&v| Cell::Num(v)));
        table.push(row);
        let guard = op.field.guard_value(p).and_then(|g| g.ok());
        evaluated.push(json!({ "point": p, "matrix": matrix_json(&e.values), "denominator": guard }));
        report.accepted += 1;
    }
    Ok(Outcome {
        report,
        data: Some(json!({ "points": evaluated })),
        table: Some(table),
    })
}

pub fn torsion(opts: &Opts) -> Result<Outcome, CliError> {
    input::check_samples(opts)?;
    let op = input::operator(opts)?;
    let points = input::points(opts, op.n)?;
    if points.is_empty() {
        return Err(CliError::Usage("torsion needs at least one --point".into()));
    }
    let tol = opts.tol.unwrap_or(TORSION_TOL);
    let mut report = describe(&op).param("tol", tol).param("fd_step", opts.fd_step);
    report.subject = format!("torsion of {}", op.field.label());
    let mut header = coordinate_names(op.n, true);
    header.extend(["i", "j", "k", "N"].map(String::from));
    let mut table = Table::new(header);
    let mut per_point = Vec::new();
    for p in &points {
        let t = torsion_coordinate(&op.field, p)?;
        let oracle = torsion_bracket_fd(&op.field, p, opts.fd_step)?;
        let scale = 1.0 + op.field.eval(p)?.values.max_abs();
        let raw = t.max_abs();
        report.observe(p, raw, raw / scale);
        let nonzero = t.nonzero(0.0);
        for &(i, j, k, v) in &nonzero {
            let mut row: Vec<Cell> = p.iter().map(|&x| x.into()).collect();
            row.extend([i.into(), j.into(), k.into(), v.into()]);
            table.push(row);
        }
        per_point.push(json!({
            "point": p,
            "max_abs": raw,
            "relative": raw / scale,
            "fd_oracle_max_diff": t.max_diff(&oracle),
            "components": nonzero
                .iter()
                .map(|&(i, j, k, v)| json!({ "i": i, "j": j, "k": k, "value": v }))
                .collect::<Vec<_>>(),
        }));
    }
    let rel = report.max_relative;
    report.push_check("torsion", rel, rel <= tol);
    Ok(Outcome {
        report,
        data: Some(json!({ "points": per_point })),
        table: Some(table),
    })
}

fn pde_remainder(opts: &Opts, op: Option<&Operator>, n: usize) -> Result<Remainder, CliError> {
    if let Some(text) = opts.r.as_deref() {
        return Ok(Remainder::Explicit(input::r_field(text, n)?));
    }
    let f = match op {
        Some(op) if matches!(opts.family, Some(FamilyArg::Theorem1 | FamilyArg::Theorem2)) => op.f.clone(),
        Some(_) => None,
        None => Some(input::f_field(opts, n)?),
    };
    f.map(|f| Remainder::FromMorse(f, MorseOptions::default())).ok_or_else(|| {
        CliError::Config("the pde check needs --R, or --family theorem1/theorem2 with f".into())
    })
}

pub fn verify(opts: &Opts, check: Check) -> Result<Outcome, CliError> {
    input::check_samples(opts)?;
    let op = input::operator(opts)?;
    let n = op.n;
    let domain = input::domain(opts, n)?;
    let sweep = sweep_options(opts);
    let (samples, seed) = (opts.samples, opts.seed);
    let explicit = check != Check::All;
    let wants = |c: Check| check == c || check == Check::All;
    let mut parts = Vec::new();

    if wants(Check::Torsion) {
        let tol = opts.tol.unwrap_or(TORSION_TOL);
        parts.push(verify_zero_torsion(&op.field, &domain, samples, seed, tol, &sweep)?);
    }
    for (c, name) in [(Check::Conjugation, "conjugation"), (Check::Sigma, "sigma")] {
        if !wants(c) {
            continue;
        }
        let Some(sigma) = &op.sigma else {
            if explicit {
                return Err(CliError::Config(format!(
                    "the {name} check needs an operator family with prescribed invariants"
                )));
            }
            continue;
        };
        parts.push(if c == Check::Conjugation {
            let tol = opts.tol.unwrap_or(CONJUGATION_TOL);
            verify_conjugation_sweep(&op.field, sigma, &domain, samples, seed, tol, &sweep)?
        } else {
            let tol = opts.tol.unwrap_or(DEFAULT_SIGMA_TOL);
            verify_sigma(&op.field, sigma, &domain, samples, seed, tol, &sweep)?
        });
    }
    if check == Check::Pde || (check == Check::All && opts.r.is_some()) {
        let remainder = pde_remainder(opts, Some(&op), n)?;
        let base = input::domain_prefix(&domain, n - 1)?;
        let tol = opts.tol.unwrap_or(PDE_TOL);
        parts.push(verify_pde(&remainder, n, &base, samples, seed, tol)?);
    }

    let mut report = VerificationReport::merge(format!("verify {}", op.field.label()), parts);
    report.params.insert("family".into(), json!(op.field.family().name()));
    report.params.insert("check".into(), json!(format!("{check:?}").to_lowercase()));
    let maxima: serde_json::Map<String, Value> = report
        .checks
        .iter()
        .map(|c| (format!("max_{}", c.name), json!(c.max)))
        .collect();
    Ok(Outcome {
        report,
        data: Some(Value::Object(maxima)),
        table: None,
    })
}

pub fn charpoly_cmd(opts: &Opts) -> Result<Outcome, CliError> {
    let op = input::operator(opts)?;
    let n = op.n;
    let mut points = input::points(opts, n)?;
    if points.is_empty() {
        if !op.constant {
            return Err(CliError::Usage("charpoly needs --point unless every matrix entry is constant".into()));
        }
        points.push(vec![0.0; n]);
    }
    let tol = opts.tol.unwrap_or(DEFAULT_SIGMA_TOL);
    let mut report = describe(&op).param("tol", tol);
    report.subject = format!("characteristic polynomial of {}", op.field.label());
    let mut header = coordinate_names(n, true);
    header.extend((1..=n).map(|i| format!("sigma{i}")));
    let mut table = Table::new(header);
    let mut per_point = Vec::new();
    let mut ch_max = 0.0f64;
    for p in &points {
        let m = op.field.eval(p)?.values;
        let c = charpoly(&m)?;
        let scale = 1.0 + m.max_abs();
        ch_max = ch_max.max(cayley_hamilton_residual(&m, &c) / scale.powi(n as i32));
        let expected = match &op.sigma {
            Some(s) => Some(s.values(p)?),
            None => None,
        };
        let dev = expected.as_ref().map(|e| {
            c.sigma
                .iter()
                .zip(e)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
        });
        report.observe(p, dev.unwrap_or(0.0), dev.unwrap_or(0.0) / scale);
        let mut row: Vec<Cell> = p.iter().map(|&v| v.into()).collect();
        row.extend(c.sigma.iter().map(|&v| Cell::Num(v)));
        table.push(row);
        per_point.push(json!({ "point": p, "sigma": c.sigma, "expected": expected }));
    }
    report.push_check("cayley_hamilton", ch_max, ch_max <= 1e-9);
    if op.sigma.is_some() {
        let rel = report.max_relative;
        report.push_check("sigma", rel, rel <= tol);
    }
    Ok(Outcome {
        report,
        data: Some(json!({ "points": per_point })),
        table: Some(table),
    })
}

pub fn diagnose(opts: &Opts) -> Result<Outcome, CliError> {
    let n = input::dimension(opts, "diagnose")?;
    let f = input::f_field(opts, n)?;
    let mut points = input::points(opts, n)?;
    if points.is_empty() {
        points = input::domain(opts, n)?.grid(opts.grid);
    }
    let mut report = VerificationReport::new(format!("smoothness of the quotients by f_y for f = {}", f.label()))
        .param("n", n)
        .param("f", f.label());
    let mut header = coordinate_names(n, true);
    header.extend((0..n - 1).map(|j| if j == 0 { "N0".to_string() } else { format!("N{}", j + 1) }));
    header.extend(["f_y", "verdict"].map(String::from));
    let mut table = Table::new(header);
    let mut counts = [0usize; 3];
    for p in &points {
        let d = smoothness_numerators(&f, n, p)?;
        let biggest = d.numerators.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let verdict = match d.verdict {
            Verdict::Regular => {
                counts[0] += 1;
                "regular"
            }
            Verdict::SingularZeroNumerators => {
                counts[1] += 1;
                "singular-denominator-zero-numerators"
            }
            Verdict::Obstructed => {
                counts[2] += 1;
                "obstructed"
            }
        };
        let residual = if d.verdict == Verdict::Regular { 0.0 } else { biggest };
        report.observe(p, residual, residual);
        let mut row: Vec<Cell> = p.iter().map(|&v| v.into()).collect();
        row.extend(d.numerators.iter().map(|&v| Cell::Num(v)));
        row.push(d.denominator.into());
        row.push(verdict.into());
        table.push(row);
    }
    report.push_check("smoothness", counts[2] as f64, counts[2] == 0);
    Ok(Outcome {
        report,
        data: Some(json!({
            "regular": counts[0],
            "singular_denominator_zero_numerators": counts[1],
            "obstructed": counts[2],
        })),
        table: Some(table),
    })
}

fn pde_row(p: &[f64], r: &PdeResiduals) -> Vec<Cell> {
    let mut row: Vec<Cell> = p.iter().map(|&v| v.into()).collect();
    row.push(r.r0.into());
    row.extend(r.chain.iter().map(|&v| Cell::Num(v)));
    row.extend(r.relations.iter().map(|&v| Cell::Num(v)));
    row.push(r.factor2.into());
    row
}

pub fn pde_check(opts: &Opts) -> Result<Outcome, CliError> {
    input::check_samples(opts)?;
    let n = input::dimension(opts, "pde-check")?;
    let remainder = pde_remainder(opts, None, n)?;
    let m = n - 1;
    let mut points = input::points(opts, m)?;
    if points.is_empty() {
        points = input::domain(opts, m)?.sample(opts.samples, opts.seed);
    }
    let tol = opts.tol.unwrap_or(PDE_TOL);
    let subject = match &remainder {
        Remainder::Explicit(r) => format!("remainder system for R = {}", r.label()),
        Remainder::FromMorse(f, _) => format!("remainder system for the Morse reduction of {}", f.label()),
    };
    let mut report = VerificationReport::new(subject)
        .param("n", n)
        .param("tol", tol)
        .param("seed", opts.seed);
    let mut header = coordinate_names(m, false);
    header.push("r0".into());
    header.extend((2..=m).map(|j| format!("chain{j}")));
    header.extend((2..=m).map(|i| format!("relation{i}")));
    header.push("factor2".into());
    let mut table = Table::new(header);
    let mut factor2_max = 0.0f64;
    for p in &points {
        let res = match &remainder {
            Remainder::Explicit(r) => pde_residuals_from_jet(&r.eval(p)?, n, p),
            Remainder::FromMorse(f, o) => pde_residuals_from_jet(morse_reduce(f, n, p, o)?.remainder_jet(), n, p),
        };
        let s = res.system_max();
        report.observe(p, s, s);
        factor2_max = factor2_max.max(res.factor2.abs());
        table.push(pde_row(p, &res));
    }
    report = report.param("max_factor2", factor2_max);
    let max = report.max_residual;
    report.push_check("pde_system", max, max <= tol);
    Ok(Outcome {
        report,
        data: None,
        table: Some(table),
    })
}

pub fn morse(opts: &Opts) -> Result<Outcome, CliError> {
    let n = input::dimension(opts, "morse-reduce")?;
    let f: ScalarField = input::f_field(opts, n)?;
    let domain = input::domain(opts, n)?;
    if opts.grid < 2 {
        return Err(CliError::Config("--grid must be >= 2".into()));
    }
    let mut base_points = input::points(opts, n - 1)?;
    if base_points.is_empty() {
        base_points = input::domain_prefix(&domain, n - 1)?.grid(opts.grid);
    }
    let tol = opts.tol.unwrap_or(MORSE_TOL);
    let mo = MorseOptions::default();
    let mut header = coordinate_names(n - 1, false);
    header.extend(["c", "R", "sign", "f_yy", "newton_iters"].map(String::from));
    let mut table = Table::new(header);
    let mut fibers = Vec::new();
    for x in &base_points {
        let d = morse_reduce(&f, n, x, &mo)?;
        let mut row: Vec<Cell> = x.iter().map(|&v| v.into()).collect();
        row.extend([d.c.into(), d.r.into(), d.sign.into(), d.f_yy.into(), d.newton_iters.into()]);
        table.push(row);
        fibers.push(serde_json::to_value(&d).expect("serializable"));
    }
    let mut report = verify_morse_normal_form(&f, n, &domain, opts.grid, tol, &mo)?;
    report.params.insert("f".into(), json!(f.label()));
    Ok(Outcome {
        report,
        data: Some(json!({ "fibers": fibers })),
        table: Some(table),
    })
}
