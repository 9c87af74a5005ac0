use nijenhuis::construct::build_theorem1;
use nijenhuis::singularity::{
    morse_reduce, pde_residuals, smoothness_numerators, verify_morse_normal_form, MorseOptions, Verdict,
};
use nijenhuis::{BoxDomain, ScalarField};
use proptest::prelude::*;

fn field(text: &str, n: usize) -> ScalarField {
    ScalarField::parse(text, n).unwrap()
}

fn base(text: &str, m: usize) -> ScalarField {
    ScalarField::parse_base(text, m).unwrap()
}

/// Largest last-row entry of the coordinate-family operator at `p`.
fn last_row_max(f: &ScalarField, p: &[f64]) -> f64 {
    let n = p.len();
    let l = build_theorem1(f, n).unwrap().eval(p).unwrap().values;
    (0..n).fold(0.0f64, |m, j| m.max(l[(n - 1, j)].abs()))
}

#[test]
fn obstructed_points_blow_up_and_removable_ones_do_not() {
    let x = [0.2, 0.3];
    let obstructed = field("y^2 + x1", 3);
    let d = smoothness_numerators(&obstructed, 3, &[x[0], x[1], 0.0]).unwrap();
    assert_eq!(d.verdict, Verdict::Obstructed);
    let big = d.numerators.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let removable = field("y^2", 3);
    let d = smoothness_numerators(&removable, 3, &[x[0], x[1], 0.0]).unwrap();
    assert_eq!(d.verdict, Verdict::SingularZeroNumerators);

    // |f_y| = 2|y| runs through [1e-12, 0.01]
    for y in [5e-3, 1e-3, 1e-4, 1e-6, 1e-9, 1e-11] {
        let p = [x[0], x[1], y];
        assert!(last_row_max(&obstructed, &p) >= big / (2.0 * 0.01), "y = {y}");
        assert!(last_row_max(&removable, &p) <= 1.0, "y = {y}");
    }
}

#[test]
fn classification_along_the_singular_locus() {
    for n in 2..=5 {
        let sq = field("y^2", n);
        for p in BoxDomain::uniform(n, -1.0, 1.0).unwrap().sample(30, 3) {
            let mut q = p.clone();
            q[n - 1] = 0.0;
            assert_eq!(smoothness_numerators(&sq, n, &q).unwrap().verdict, Verdict::SingularZeroNumerators);
            if p[n - 1].abs() > 1e-3 {
                assert_eq!(smoothness_numerators(&sq, n, &p).unwrap().verdict, Verdict::Regular);
            }
        }
    }
}

/// Text of a random linear or quadratic form in `x1 … xm`.
fn random_remainder(c: &[f64], m: usize, quadratic: bool) -> String {
    let mut terms = vec![format!("({})", c[0])];
    for i in 1..=m {
        terms.push(format!("({})*x{i}", c[i]));
    }
    if quadratic {
        let mut k = m + 1;
        for i in 1..=m {
            for j in i..=m {
                terms.push(format!("({})*x{i}*x{j}", c[k]));
                k += 1;
            }
        }
    }
    terms.join(" + ")
}

#[test]
fn only_the_zero_remainder_solves_the_system() {
    for n in [3, 4] {
        let m = n - 1;
        let count = 1 + m + m * (m + 1) / 2;
        let coeffs = BoxDomain::uniform(count, -1.0, 1.0).unwrap().sample(200, 99);
        let points = BoxDomain::uniform(m, -1.0, 1.0).unwrap().sample(200, 100);
        let mut tried = 0;
        for (k, (c, p)) in coeffs.iter().zip(&points).enumerate() {
            let quadratic = k % 2 == 1;
            let used = if quadratic { count } else { 1 + m };
            let norm = c[..used].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 0.1 {
                continue;
            }
            tried += 1;
            let text = random_remainder(c, m, quadratic);
            let res = pde_residuals(&base(&text, m), n, p).unwrap();
            assert!(res.system_max() > 1e-6, "n = {n}: R = {text} passes at {p:?}: {res:?}");
        }
        assert!(tried >= 100);
        for p in &points {
            assert!(pde_residuals(&base("0", m), n, p).unwrap().is_solution(0.0));
        }
    }
}

#[test]
fn constant_remainders_satisfy_the_chain_and_relations_but_not_r0() {
    for n in 3..=5 {
        let res = pde_residuals(&base("0.7", n - 1), n, &vec![0.4; n - 1]).unwrap();
        assert!(res.chain.iter().chain(&res.relations).all(|v| *v == 0.0));
        assert_eq!(res.r0, -0.7);
    }
}

#[test]
fn normal_form_defect_is_small_on_grids() {
    let mo = MorseOptions::default();
    for (text, n) in [("y^2 + x1*y", 2), ("-y^2 + x1*y + sin(x1)", 2), ("2*y^2 + x1*x2*y + x2", 3), ("y^2 + y^3/5 + x1*y", 2)] {
        let d = BoxDomain::uniform(n, -1.0, 1.0).unwrap();
        let report = verify_morse_normal_form(&field(text, n), n, &d, 11, 1e-9, &mo).unwrap();
        assert!(report.pass, "{text}: {report:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_is_idempotent_on_normal_forms(
        c in prop::collection::vec(-1.0f64..1.0, 6),
        sign in prop::sample::select(vec![1.0, -1.0]),
        x in prop::array::uniform2(-1.0f64..1.0),
    ) {
        let r = random_remainder(&c, 2, true);
        let f = field(&format!("({sign})*y^2 + {r}"), 3);
        let red = morse_reduce(&f, 3, &x, &MorseOptions::default()).unwrap();
        prop_assert_eq!(red.c, 0.0);
        prop_assert_eq!(red.sign, sign);
        let want = base(&r, 2).eval(&x).unwrap().value();
        prop_assert!((red.r - want).abs() <= 1e-12);
    }

    #[test]
    fn newton_converges_in_few_steps(
        a in 0.25f64..2.0,
        b in -0.1f64..0.1,
        e in -1.0f64..1.0,
        x in -1.0f64..1.0,
        offset in -0.5f64..0.5,
    ) {
        let f = field(&format!("({a})*y^2 + ({b})*y^3 + ({e})*x1*y"), 2);
        let c = morse_reduce(&f, 2, &[x], &MorseOptions::default()).unwrap();
        // f_yy = 2a + 6by stays above 0.5 on every start within 0.5 of c
        prop_assume!(2.0 * a - 6.0 * b.abs() * (c.c.abs() + 0.5) >= 0.5);
        let opts = MorseOptions { y0: c.c + offset, ..Default::default() };
        let again = morse_reduce(&f, 2, &[x], &opts).unwrap();
        prop_assert!(again.newton_iters <= 8, "{} iterations", again.newton_iters);
        prop_assert!((again.c - c.c).abs() <= 1e-12);
    }
}
