use ranking_core::gain::PriceTable;
use ranking_lp::mps::MpsDocument;
use ranking_lp::*;

const PUBLISHED: [f64; 6] = [0.5, 0.5, 0.50347, 0.51052, 0.51625, 0.52068];

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn small_k_values_and_coherence() {
    let mut previous = 0.0;
    for k in 1..=6u32 {
        let m = build_lp(k).unwrap();
        let s = solve(&m, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.alpha - PUBLISHED[k as usize - 1]).abs() <= 1e-4, "k={k}: {}", s.alpha);
        assert!(s.alpha >= previous - 1e-9, "α must not decrease in k");
        previous = s.alpha;

        let report = verify_solution(&m, &s, 1e-8).unwrap();
        assert!(report.pass, "k={k}: {report:?}");
        let e = evaluate_price_table(&s.f_table).unwrap();
        assert!((e.alpha - s.alpha).abs() <= 1e-6, "k={k}: evaluator {} vs solver {}", e.alpha, s.alpha);
        let mean: f64 = s.alpha_i.iter().sum::<f64>() / k as f64;
        assert!((mean - s.alpha).abs() < 1e-9);
    }
}

#[test]
fn formulations_agree() {
    for k in 1..=4u32 {
        let sub = solve(&build_lp_with(k, Formulation::Substituted).unwrap(), &opts()).unwrap();
        let naive = solve(&build_lp_with(k, Formulation::Naive).unwrap(), &opts()).unwrap();
        let agg = solve(&build_lp_with(k, Formulation::Aggregated).unwrap(), &opts()).unwrap();
        assert!((sub.alpha - naive.alpha).abs() <= 1e-8, "k={k}: {} vs {}", sub.alpha, naive.alpha);
        assert!((sub.alpha - agg.alpha).abs() <= 1e-8, "k={k}: {} vs {}", sub.alpha, agg.alpha);
    }
}

#[test]
fn bland_rule_reaches_the_same_optimum() {
    let m = build_lp(3).unwrap();
    let bland = SolverOptions {
        pivot_rule: PivotRule::Bland,
        ..opts()
    };
    let a = solve(&m, &bland).unwrap();
    let b = solve(&m, &opts()).unwrap();
    assert_eq!(a.status, LpStatus::Optimal);
    assert!((a.alpha - b.alpha).abs() < 1e-9);
}

#[test]
fn solves_are_deterministic() {
    let m = build_lp(5).unwrap();
    let a = solve(&m, &opts()).unwrap();
    let b = solve(&m, &opts()).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.values, b.values);
}

#[test]
fn broken_monotonicity_is_reported() {
    let m = build_lp(2).unwrap();
    let mut values = solve(&m, &opts()).unwrap().values;
    values[m.f_index(1, 1)] = 0.7;
    values[m.f_index(2, 1)] = 0.8;
    let report = verify_values(&m, &values, values[m.alpha_index()], 1e-8).unwrap();
    assert!(!report.pass);
    assert!(report.violated_rows.iter().any(|(name, v)| name == "mono_r_1_1" && (v - 0.1).abs() < 1e-9));
}

#[test]
fn incomplete_and_unknown_assignments_are_rejected() {
    let m = build_lp(1).unwrap();
    assert!(matches!(import_solution(&m, "alpha=0.5\n"), Err(LpError::IncompleteSolution(_))));
    let s = solve(&m, &opts()).unwrap();
    let mut text = s.to_assignment_text(&m);
    let back = import_solution(&m, &text).unwrap();
    assert_eq!(back.values, s.values);
    text.push_str("bogus=1\n");
    assert!(matches!(import_solution(&m, &text), Err(LpError::UnknownVariable(_))));
}

#[test]
fn external_solution_for_k3() {
    let m = build_lp(3).unwrap();
    let s = import_solution(&m, include_str!("data/k3_external_solution.txt")).unwrap();
    let report = verify_solution(&m, &s, 1e-8).unwrap();
    assert!(report.pass, "{report:?}");
    assert!((s.alpha - 0.50347).abs() <= 1e-4);
}

#[test]
fn mps_reexport_is_bitwise_identical() {
    for k in 1..=3 {
        let text = MpsDocument::from_model(&build_lp(k).unwrap()).to_text();
        let again = MpsDocument::parse(&text).unwrap().to_text();
        assert_eq!(text, again);
    }
}

#[test]
fn export_to_file_validates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k4.mps");
    let mut file = std::fs::File::create(&path).unwrap();
    let written = export_mps(&build_lp(4).unwrap(), &mut file).unwrap();
    drop(file);
    let reader = std::io::BufReader::new(std::fs::File::open(&path).unwrap());
    assert_eq!(validate_mps(reader).unwrap(), written);
}

#[test]
fn evaluator_handles_published_small_tables() {
    let f = PriceTable::from_rows(1, &[vec![0.5]]).unwrap();
    assert!((evaluate_price_table(&f).unwrap().alpha - 0.5).abs() < 1e-12);
}
