use fairscreen_core::prefmodel::{derive_constraints, objective, signed_differences, train, TrainConfig};
use fairscreen_core::stats::{box_stats, kurtosis};
use fairscreen_core::Score;
use serde::Deserialize;

#[derive(Deserialize)]
struct Cases<T> {
    cases: Vec<T>,
}

#[derive(Deserialize)]
struct QpCase {
    rows: Vec<Vec<f64>>,
    scores: Vec<u8>,
    c: f64,
    optimum: f64,
}

#[derive(Deserialize)]
struct StatsCase {
    values: Vec<f64>,
    quartiles: [f64; 5],
    kurtosis: Option<f64>,
}

fn load<T: for<'de> Deserialize<'de>>(name: &str) -> Vec<T> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    serde_json::from_str::<Cases<T>>(&std::fs::read_to_string(path).unwrap()).unwrap().cases
}

#[test]
fn solver_reaches_qp_optimum() {
    for (k, case) in load::<QpCase>("qp_oracle.json").iter().enumerate() {
        let scores: Vec<Score> = case.scores.iter().map(|s| Score::new(*s).unwrap()).collect();
        let constraints = derive_constraints(&scores).unwrap();
        let config = TrainConfig { c: case.c, ..TrainConfig::default() };
        let solution = train(&constraints, &case.rows, &config).unwrap();
        let recomputed = objective(&solution.weights, &signed_differences(&constraints, &case.rows), case.c);
        assert!((recomputed - solution.objective).abs() < 1e-9, "case {k}");
        assert!(solution.objective >= case.optimum - 1e-6, "case {k}: below the optimum");
        let gap = (solution.objective - case.optimum) / case.optimum;
        assert!(gap < 0.01, "case {k}: {} vs optimum {} ({:.3}%)", solution.objective, case.optimum, gap * 100.0);
    }
}

#[test]
fn box_stats_match_numpy() {
    for (k, case) in load::<StatsCase>("stats_oracle.json").iter().enumerate() {
        let b = box_stats(&case.values).unwrap();
        let got = [b.min, b.q1, b.median, b.q3, b.max];
        for (g, e) in got.iter().zip(case.quartiles) {
            assert!((g - e).abs() <= 1e-9 * e.abs().max(1.0), "case {k}: {got:?} vs {:?}", case.quartiles);
        }
    }
}

#[test]
fn kurtosis_matches_scipy() {
    for (k, case) in load::<StatsCase>("stats_oracle.json").iter().enumerate() {
        match case.kurtosis {
            Some(e) => {
                let g = kurtosis(&case.values).unwrap();
                assert!((g - e).abs() <= 1e-9 * e.abs().max(1.0), "case {k}: {g} vs {e}");
            }
            None => assert!(kurtosis(&case.values).is_err(), "case {k}"),
        }
    }
}
