use dexsel_core::analysis::{pearson, Pooling};
use dexsel_core::corpus::synthetic::{generate_synthetic_corpus, model_id, score_synthetic_corpus};
use dexsel_core::corpus::{GeneratedCandidate, TargetKind};
use dexsel_core::des::{
    derive_des4_weights, model_mean, select_by_length, select_experts, selection_mean, Criterion, DesConfig,
    LengthSelectConfig, Scope,
};
use dexsel_core::scores::{MissingPolicy, ScoreRow, ScoreTable, OVERALL};
use dexsel_core::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn grid() -> impl Iterator<Item = [usize; 3]> {
    let steps: Vec<usize> = (40..=260).step_by(5).collect();
    let s = steps.clone();
    steps.into_iter().flat_map(move |a| {
        let s2 = s.clone();
        s.clone()
            .into_iter()
            .flat_map(move |b| s2.clone().into_iter().map(move |c| [a, b, c]))
    })
}

#[test]
fn length_rule_matches_interpreter_on_full_grid() {
    let cfg = LengthSelectConfig::new(vec!["a".into(), "b".into(), "c".into()]);
    let mut n = 0;
    for counts in grid() {
        let (got, _) = cfg.pick(&counts);
        assert_eq!(got, dexsel_oracles::length_rule(&counts, 100, 180, 70), "{counts:?}");
        n += 1;
    }
    assert_eq!(n, 45 * 45 * 45);
}

#[test]
fn length_selection_uses_ranking_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ranking = vec!["m2".to_string(), "m0".to_string(), "m1".to_string()];
    let cfg = LengthSelectConfig::new(ranking.clone());
    let mut candidates = Vec::new();
    let mut expected = Vec::new();
    for d in 0..300 {
        let counts: [usize; 3] = std::array::from_fn(|_| rng.random_range(8..53) * 5);
        for (m, n) in counts.iter().enumerate() {
            let text = vec!["w"; *n].join(" ");
            candidates.push(GeneratedCandidate::new(
                format!("d{d:03}"),
                format!("m{m}"),
                TargetKind::Di,
                text,
            ));
        }
        let ranked: Vec<usize> = ranking
            .iter()
            .map(|r| counts[r[1..].parse::<usize>().unwrap()])
            .collect();
        expected.push(ranking[dexsel_oracles::length_rule(&ranked, 100, 180, 70)].clone());
    }
    let result = select_by_length(&candidates, TargetKind::Di, &cfg).unwrap();
    let got: Vec<String> = result.choices.iter().map(|c| c.model_id.clone()).collect();
    assert_eq!(got, expected);
}

#[test]
fn weighted_selection_matches_oracle_with_ties() {
    // Small integer scores so ties and constant columns are common.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let metrics = ["a", "b", "c", "d", "e"];
    for case in 0..500 {
        let n_models = rng.random_range(1..=6);
        let n_metrics = rng.random_range(1..=5);
        let raw: Vec<Vec<f64>> = (0..n_models)
            .map(|_| (0..n_metrics).map(|_| rng.random_range(0..3) as f64).collect())
            .collect();
        let weights: Vec<f64> = (0..n_metrics).map(|_| rng.random_range(-2..=2) as f64 / 2.0).collect();
        let mut rows = Vec::new();
        for (m, values) in raw.iter().enumerate() {
            for (k, v) in values.iter().enumerate() {
                rows.push(ScoreRow {
                    hadm_id: "d".into(),
                    model_id: format!("m{m}"),
                    target: TargetKind::Bhc,
                    metric: metrics[k].into(),
                    value: *v,
                });
            }
        }
        let table = ScoreTable::from_rows(&rows).unwrap();
        let config = DesConfig::new(
            "t",
            weights
                .iter()
                .enumerate()
                .map(|(k, w)| Criterion::new(metrics[k], *w, Scope::Both))
                .collect(),
        )
        .unwrap();
        let got = select_experts(
            &table,
            &config,
            TargetKind::Bhc,
            MissingPolicy::Strict,
            Execution::Sequential,
        )
        .unwrap();
        let want = dexsel_oracles::weighted_argmax(&raw, &weights);
        assert_eq!(got.winner("d").unwrap(), format!("m{want}"), "case {case}");
    }
}

#[test]
fn oracle_criterion_dominates_every_model() {
    for seed in [1, 7] {
        let corpus = generate_synthetic_corpus(60, 4, seed);
        let table = score_synthetic_corpus(&corpus, seed, Execution::Sequential).unwrap();
        let config = DesConfig::new("oracle", vec![Criterion::new(OVERALL, 1.0, Scope::Both)]).unwrap();
        for t in TargetKind::ALL {
            let r = select_experts(&table, &config, t, MissingPolicy::Strict, Execution::Sequential).unwrap();
            let best = selection_mean(&table, &r, OVERALL).unwrap();
            for m in 0..4 {
                assert!(best >= model_mean(&table, &model_id(m), t, OVERALL).unwrap());
            }
        }
    }
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

#[test]
fn pearson_recovers_planted_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x = normals(&mut rng, 10_000);
    let z = normals(&mut rng, 10_000);
    let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 0.6 * a + 0.8 * b).collect();
    let r = pearson(&x, &y).unwrap();
    assert!((r - 0.6).abs() < 0.03, "{r}");
    assert!((r - dexsel_oracles::pearson(&x, &y)).abs() < 1e-9);
}

#[test]
fn pearson_matches_textbook_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(3..60);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let r = pearson(&x, &y).unwrap();
        assert!((r - dexsel_oracles::pearson(&x, &y)).abs() < 1e-9);
    }
}

#[test]
fn des4_weights_recover_planted_correlations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let planted = [("medcon_ds", 0.6), ("fkgl", -0.3), ("cli", 0.0)];
    let mut rows = Vec::new();
    for i in 0..5000 {
        let overall: f64 = StandardNormal.sample(&mut rng);
        let target = if i % 2 == 0 { TargetKind::Bhc } else { TargetKind::Di };
        let mut push = |metric: &str, value: f64| {
            rows.push(ScoreRow {
                hadm_id: format!("d{}", i / 2),
                model_id: "m".into(),
                target,
                metric: metric.into(),
                value,
            })
        };
        push(OVERALL, overall);
        for (metric, r) in planted {
            let noise: f64 = StandardNormal.sample(&mut rng);
            push(metric, r * overall + (1.0 - r * r).sqrt() * noise);
        }
    }
    let table = ScoreTable::from_rows(&rows).unwrap();
    let metrics: Vec<&str> = planted.iter().map(|p| p.0).collect();
    let config = derive_des4_weights(&table, &table, OVERALL, &metrics, Pooling::Pooled).unwrap();
    for (c, (metric, r)) in config.criteria.iter().zip(planted) {
        assert_eq!(c.metric, metric);
        assert!((c.weight - r).abs() < 0.04, "{metric}: {}", c.weight);
    }
}
