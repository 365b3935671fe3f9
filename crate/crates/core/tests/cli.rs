use dche::cli::{run, Outcome};
use dche::oracle::CompareReport;
use dche::report::{CoeffTable, DeriveDump, EvalTable, TerminateOutput, VerifyOutcome};
use dche::scalar::ScalarRepr;
use dche::termination::ExplicitForm;

fn dche(args: &str) -> Outcome {
    run(std::iter::once("dche").chain(args.split_whitespace()))
}

fn ok(args: &str) -> String {
    let o = dche(args);
    assert_eq!(o.code, 0, "{args}\n{}", o.stderr);
    o.stdout
}

fn re(v: &ScalarRepr) -> f64 {
    match v {
        ScalarRepr::Complex { re, .. } => *re,
        ScalarRepr::Exact(s) => {
            let r = dche::scalar::parse_rational(s).unwrap();
            dche::Scalar::to_complex(&r).re
        }
    }
}

const POLY: &str = "--family three-term-a --alpha -1 --gamma 3 --delta 2 --epsilon 1 --q 1";
const EXP: &str = "--family three-term-c --alpha 2 --gamma 2 --delta 0.7 --epsilon 1 --q -0.7";

#[test]
fn coeffs_example() {
    let out = ok("coeffs --family three-term-a --alpha 1 --gamma 2 --delta 0.5 --epsilon 1 --q 3 --terms 5");
    let t: CoeffTable = serde_json::from_str(&out).unwrap();
    assert_eq!(t.rows.len(), 6);
    assert_eq!(re(&t.rows[1].a), -1.5);
    assert_eq!(t.letter_names, ["R", "Q", "P"]);
}

#[test]
fn coeffs_zero_terms() {
    let t: CoeffTable = serde_json::from_str(&ok("coeffs --terms 0")).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0].n, 0);
    assert_eq!(re(&t.rows[0].a), 1.0);
}

#[test]
fn degenerate_family_needs_zero_delta() {
    let o = dche("coeffs --family three-term-deg --delta 0.3 --alpha 1 --q 1");
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("requires δ = 0"), "{}", o.stderr);
}

#[test]
fn eval_polynomial_case() {
    let t: EvalTable = serde_json::from_str(&ok(&format!("eval {POLY} --z 1 --terms 10"))).unwrap();
    let row = &t.rows[0];
    assert!((row.u.re - 1.0).abs() < 1e-14 && row.u.im == 0.0);
    assert!(row.residual <= 1e-12);
}

#[test]
fn eval_grid_through_origin_is_domain_error() {
    assert_eq!(dche(&format!("eval {POLY} --z-grid -1:1:3")).code, 5);
}

#[test]
fn eval_exponential_case() {
    let t: EvalTable = serde_json::from_str(&ok(&format!("eval {EXP} --z 2 --terms 10"))).unwrap();
    assert!((t.rows[0].u.re - (-2.0f64).exp()).abs() <= 1e-12);
}

#[test]
fn eval_grid_has_requested_points() {
    let out = ok(&format!("eval {POLY} --z-grid 0.5:3:6 --format csv"));
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "z,u,du,d2u,residual,terms_used,tail");
    assert_eq!(lines.count(), 6);
}

#[test]
fn terminate_quadratic_spectrum() {
    let out = ok("terminate --family three-term-a --order 1 --gamma 3 --delta 2 --epsilon 1");
    let TerminateOutput::Spectrum(s) = serde_json::from_str(&out).unwrap() else {
        panic!("expected a spectrum");
    };
    let mut roots: Vec<f64> = s.roots.iter().map(|r| r.value.re).collect();
    roots.sort_by(f64::total_cmp);
    assert!((roots[0] - 1.0).abs() < 1e-12 && (roots[1] - 2.0).abs() < 1e-12);
    assert!(s.roots.iter().all(|r| r.certified()));
}

#[test]
fn terminate_exact_gives_rational_roots_and_polynomials() {
    let out = ok("terminate --family three-term-a --order 1 --gamma 3 --delta 2 --epsilon 1 --mode exact");
    let TerminateOutput::Spectrum(s) = serde_json::from_str(&out).unwrap() else {
        panic!("expected a spectrum");
    };
    let mut seen = Vec::new();
    for r in &s.roots {
        let cert = r.certificate.as_ref().unwrap();
        let ExplicitForm::Polynomial { coeffs } = &cert.explicit else {
            panic!("expected a polynomial");
        };
        let text = |v: &ScalarRepr| v.to_string();
        seen.push((
            text(r.exact.as_ref().unwrap()),
            coeffs.iter().map(text).collect::<Vec<_>>(),
        ));
    }
    seen.sort();
    let s = |v: &str| v.to_string();
    assert_eq!(
        seen,
        vec![(s("1"), vec![s("2/3"), s("1/3")]), (s("2"), vec![s("1/3"), s("1/3")])]
    );
}

#[test]
fn terminate_three_term_c_order_zero() {
    let out = ok("terminate --family three-term-c --order 0 --gamma 2 --epsilon 1 --delta 0.7");
    let TerminateOutput::Spectrum(s) = serde_json::from_str(&out).unwrap() else {
        panic!("expected a spectrum");
    };
    assert_eq!(s.roots.len(), 1);
    assert!((s.roots[0].value.re + 0.7).abs() < 1e-12);
}

#[test]
fn terminate_with_violated_condition() {
    let o = dche("terminate --family three-term-a --order 1 --alpha 0.5 --gamma 3 --delta 2 --epsilon 1");
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("α/ε = −N"), "{}", o.stderr);
}

#[test]
fn derive_seven_term_rows() {
    let d: DeriveDump = serde_json::from_str(&ok(
        "derive --family seven-term-v --alpha 2 --gamma 1.5 --delta 0.5 --q 1 --terms 3",
    ))
    .unwrap();
    assert_eq!(d.window.1 - d.window.0 + 1, 7);
    assert_eq!(d.rows.len(), 4);
    assert!(d.rows.iter().all(|r| r.entries.len() == 7));
}

#[test]
fn derive_wrong_upper_parameter() {
    let o = dche("derive --family three-term-a --alpha 1 --alpha0 2 --terms 1");
    assert_eq!(o.code, 2);
    assert!(
        o.stderr.contains("irreducible residual: z·u_n coefficient nonzero"),
        "{}",
        o.stderr
    );
}

#[test]
fn derive_exact_prints_fractions() {
    let d: DeriveDump = serde_json::from_str(&ok(
        "derive --family five-term --alpha 1/3 --gamma 5/2 --delta 2/7 --epsilon 3/2 --q 1/5 --terms 2 --mode exact",
    ))
    .unwrap();
    for e in d.rows.iter().flat_map(|r| &r.entries) {
        assert!(matches!(&e.value, ScalarRepr::Exact(s) if dche::scalar::parse_rational(s).is_some()));
    }
}

#[test]
fn verify_exact_draw_passes() {
    let v: VerifyOutcome = serde_json::from_str(&ok(&format!("verify {EXP} --mode exact"))).unwrap();
    assert!(v.passed && v.checks.iter().all(|c| c.passed));
}

#[test]
fn verify_surfaces_constraint() {
    assert_eq!(
        dche("verify --family three-term-deg --delta 0.3 --alpha 1 --q 1").code,
        2
    );
}

#[test]
fn verify_catches_corrupted_coefficient() {
    let o = dche(&format!("verify {EXP} --corrupt-coefficient 2"));
    assert_eq!(o.code, 6);
    let v: VerifyOutcome = serde_json::from_str(&o.stdout).unwrap();
    assert!(!v.passed);
    assert!(v.checks.iter().any(|c| c.name == "residual" && !c.passed));
}

#[test]
fn resonance_exit_code() {
    let o = dche("coeffs --family five-term --gamma0 4 --alpha 1 --gamma 2 --delta 1 --epsilon 1 --q 3 --terms 6");
    assert_eq!(o.code, 3, "{}", o.stderr);
}

#[test]
fn convergence_exit_code() {
    let o = dche("oracle-compare --family three-term-a --alpha 0.7 --gamma 1.8 --delta 0.4 --q 0.3 --z-grid 0.5:2:4");
    assert_eq!(o.code, 4, "{}", o.stderr);
}

#[test]
fn invalid_flag_value_is_constraint_exit() {
    assert_eq!(dche("coeffs --alpha x").code, 2);
    assert_eq!(dche("coeffs --mode exact --alpha 0.5,1").code, 2);
}

#[test]
fn oracle_compare_polynomial_case() {
    let r: CompareReport =
        serde_json::from_str(&ok(&format!("oracle-compare {POLY} --z-grid 0.5:3:6 --tol 1e-10"))).unwrap();
    assert_eq!(r.rows.len(), 6);
    assert!(r.max_deviation <= 1e-9);
}

#[test]
fn exact_mode_is_deterministic() {
    for cmd in [
        format!("coeffs {POLY} --terms 8 --mode exact"),
        format!("derive {POLY} --terms 4 --mode exact --format table"),
        "terminate --family three-term-a --order 2 --gamma 3 --delta 2 --epsilon 1 --mode exact".to_string(),
    ] {
        assert_eq!(ok(&cmd), ok(&cmd));
    }
}

#[test]
fn json_round_trips() {
    fn again<T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug>(out: &str) {
        let v: T = serde_json::from_str(out).unwrap();
        let text = serde_json::to_string_pretty(&v).unwrap() + "\n";
        assert_eq!(text, out);
        assert_eq!(serde_json::from_str::<T>(&text).unwrap(), v);
    }
    again::<CoeffTable>(&ok(
        "coeffs --family five-term --alpha 0.3,0.2 --gamma 2 --delta 0.5 --q 1 --terms 6",
    ));
    again::<CoeffTable>(&ok(&format!("coeffs {POLY} --mode exact")));
    again::<EvalTable>(&ok(&format!("eval {EXP} --z-grid 0.5:2:4")));
    again::<TerminateOutput>(&ok(
        "terminate --family three-term-a --order 2 --gamma 3 --delta 2 --epsilon 1",
    ));
    again::<TerminateOutput>(&ok(
        "terminate --family seven-term-v --order 2 --alpha 2 --gamma 1.5 --q 1",
    ));
    again::<DeriveDump>(&ok(&format!("derive {POLY} --terms 3")));
    again::<VerifyOutcome>(&ok(&format!("verify {EXP}")));
    again::<CompareReport>(&ok(&format!("oracle-compare {POLY} --z-grid 0.5:3:3")));
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("dche-cli-{}.csv", std::process::id()));
    let o = dche(&format!(
        "coeffs {POLY} --terms 3 --format csv --output {}",
        path.display()
    ));
    assert_eq!(o.code, 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(text.lines().next().unwrap(), "n,a_n,R_n,Q_n,P_n");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn help_documents_columns_and_exit_codes() {
    let o = dche("coeffs --help");
    assert_eq!(o.code, 0);
    for needle in [
        "z, u, du, d2u, residual",
        "n, offset, letter, value",
        "re+imi",
        "6 verification failure",
    ] {
        assert!(o.stdout.contains(needle), "{needle}");
    }
}

#[test]
fn table_format_is_aligned() {
    let out = ok(&format!("coeffs {POLY} --terms 2 --format table"));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("n "));
    assert!(lines[1].chars().all(|ch| ch == '-' || ch == ' '));
    assert_eq!(lines.len(), 5);
}
