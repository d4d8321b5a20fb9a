use hindpo_core::evalharness::{evaluate, generate, parse_table, report_table, Decoding, EvalError, MetricReport};
use hindpo_core::hindpo::{LossConfig, LossMode};
use hindpo_core::policy::{BigramPolicy, Init};
use hindpo_core::textmetrics::CharNgramCosine;
use hindpo_core::toy::{separable_pairs, separable_stage, separable_vocab};
use hindpo_core::trainer::{train, TrainConfig};

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn identity_scores_one() {
    let texts = strings(&["यह दावा गलत है", "the photo was altered", "सरकार ने घोषणा नहीं की"]);
    let r = evaluate("base", &texts, &texts, &CharNgramCosine::default()).unwrap();
    assert_eq!((r.r1, r.r2, r.rl, r.semantic), (1.0, 1.0, 1.0, 1.0));
}

#[test]
fn disjoint_tokens_score_zero() {
    let g = strings(&["a b c", "x y"]);
    let r = strings(&["d e f", "z w"]);
    let rep = evaluate("base", &g, &r, &CharNgramCosine::default()).unwrap();
    assert_eq!((rep.r1, rep.r2, rep.rl, rep.meteor), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn corpus_score_is_mean_of_hand_computed_pairs() {
    let g = strings(&["a b c d", "x y", "p q"]);
    let r = strings(&["a c d", "x y", "r s"]);
    let rep = evaluate("dpo", &g, &r, &CharNgramCosine::default()).unwrap();
    // LCS 3: P = 3/4, R = 1 -> F1 = 6/7
    assert_eq!(rep.rl, (6.0 / 7.0 + 1.0 + 0.0) / 3.0);
}

#[test]
fn evaluate_is_permutation_equivariant() {
    let g = strings(&["a b c d", "x y", "p q", "m n o"]);
    let r = strings(&["a c d", "x y z", "q r s", "o n m"]);
    let s = CharNgramCosine::default();
    let base = evaluate("x", &g, &r, &s).unwrap();
    let perm = [2, 0, 3, 1];
    let gp: Vec<String> = perm.iter().map(|&i| g[i].clone()).collect();
    let rp: Vec<String> = perm.iter().map(|&i| r[i].clone()).collect();
    let shuffled = evaluate("x", &gp, &rp, &s).unwrap();
    for (a, b) in base.values().iter().zip(shuffled.values()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn evaluate_rejects_mismatched_lengths() {
    let err = evaluate("x", &strings(&["a"]), &strings(&["a", "b"]), &CharNgramCosine::default()).unwrap_err();
    assert!(matches!(err, EvalError::LengthMismatch { generated: 1, references: 2 }));
}

#[test]
fn trained_policy_greedily_emits_the_preferred_token() {
    let vocab = separable_vocab().unwrap();
    let stage = separable_stage(&vocab, 50, 1.0, 0.01);
    let cfg = TrainConfig {
        loss: LossConfig::with_mode(LossMode::Dpo),
        ..TrainConfig::toy_preset()
    };
    let (policy, _) = train(&[stage], BigramPolicy::new(vocab.clone(), Init::Zeros).unwrap(), &cfg).unwrap();
    let prompts: Vec<String> = separable_pairs(&vocab, 50, 1.0, 0.01)
        .iter()
        .map(|p| vocab.decode(&p.prompt).join())
        .collect();
    let out = generate(&policy, &prompts, 4, Decoding::Greedy).unwrap();
    let hits = out.iter().filter(|t| t.split(' ').next() == Some("a")).count();
    assert!(hits as f64 >= 0.95 * prompts.len() as f64, "{out:?}");
}

#[test]
fn generation_edge_cases() {
    let vocab = separable_vocab().unwrap();
    let policy = BigramPolicy::new(vocab, Init::Noise { std: 1.0, seed: 1 }).unwrap();
    assert!(generate(&policy, &[], 5, Decoding::Greedy).unwrap().is_empty());
    let prompts = strings(&["p0", "p1 p2", "p3"]);
    let sample = Decoding::Sample { temperature: 1.0, seed: 4 };
    assert_eq!(
        generate(&policy, &prompts, 6, sample).unwrap(),
        generate(&policy, &prompts, 6, sample).unwrap()
    );
    assert!(matches!(
        generate(&policy, &strings(&["unknown"]), 5, Decoding::Greedy),
        Err(EvalError::Policy(_))
    ));
}

fn report(name: &str, v: [f64; 5]) -> MetricReport {
    MetricReport::from_values(name, v)
}

fn marked(table: &str, row: &str) -> Vec<bool> {
    let line = table.lines().find(|l| l.split('|').next().unwrap().trim() == row).unwrap();
    line.split('|').skip(1).map(|c| c.trim().ends_with('*')).collect()
}

#[test]
fn single_config_is_best_everywhere() {
    let t = report_table(&[report("base", [0.1, 0.2, 0.3, 0.4, 0.5])]).unwrap();
    assert_eq!(marked(&t.text, "base"), [true; 5]);
}

#[test]
fn best_marking_and_row_order() {
    let reports = [
        report("hin_dpo", [0.5, 0.1, 0.3, 0.2, 0.9]),
        report("base", [0.4, 0.2, 0.3, 0.1, 0.95]),
    ];
    let t = report_table(&reports).unwrap();
    let names: Vec<&str> = t.text.lines().skip(2).map(|l| l.split('|').next().unwrap().trim()).collect();
    assert_eq!(names, ["base", "hin_dpo"]);
    assert_eq!(marked(&t.text, "base"), [false, true, true, false, true]);
    assert_eq!(marked(&t.text, "hin_dpo"), [true, false, true, true, false]);
    let json: serde_json::Value = serde_json::from_str(&t.json).unwrap();
    assert_eq!(json["hin_dpo"]["r1"], 0.5);
}

#[test]
fn rendered_table_parses_back() {
    let reports: Vec<MetricReport> = ["dpo_fin", "dpo", "base", "hin_dpo", "dpo_act"]
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let k = i as f64;
            report(n, [0.123456 + k * 0.01, 0.5, 0.98765 - k * 0.001, 0.0, 1.0])
        })
        .collect();
    let t = report_table(&reports).unwrap();
    let parsed = parse_table(&t.text).unwrap();
    let names: Vec<&str> = parsed.iter().map(|r| r.config_name.as_str()).collect();
    assert_eq!(names, ["base", "dpo", "dpo_act", "dpo_fin", "hin_dpo"]);
    for p in &parsed {
        let original = reports.iter().find(|r| r.config_name == p.config_name).unwrap();
        for (a, b) in p.values().iter().zip(original.values()) {
            assert!((a - b).abs() <= 0.5e-4 + 1e-12);
        }
    }
    assert_eq!(report_table(&parsed).unwrap().text, t.text);
}
