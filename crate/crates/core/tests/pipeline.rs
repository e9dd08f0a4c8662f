use hipea::binary::BinaryFraction;
use hipea::engine::oracle::{path_probability, self_consistent_schedule};
use hipea::extraction::{
    experiment_count_bounds, run_hipea1, run_hipea2, run_hipea3, ExtractionOptions, Schedule,
};
use hipea::fixture;
use hipea::numerics::{direct_solve, relative_error};
use hipea::reconstruction::{reconstruct, SignNoise};
use proptest::prelude::*;

fn lsb_first(label: &str) -> Vec<u8> {
    label.bytes().rev().map(|c| c - b'0').collect()
}

#[test]
fn pruned_suffixes_carry_no_weight() {
    let demo = fixture::demo();
    let r = run_hipea3(&demo.spectrum, 3, &ExtractionOptions::exact()).unwrap();
    let Schedule::Parallel { pruned, survivors_per_iteration, experiments_per_iteration, .. } = &r.schedule else {
        panic!("parallel schedule expected");
    };
    assert_eq!(experiments_per_iteration, &[4, 12, 16]);
    assert_eq!(survivors_per_iteration[0], ["000", "110", "011"]);
    assert!(!pruned.is_empty());
    for label in pruned {
        let path = lsb_first(label);
        let p = path_probability(&demo.spectrum, &path, &self_consistent_schedule(&path));
        assert_eq!(p, 0.0, "pruned {label}");
    }
}

#[test]
fn hipea2_ancilla_growth() {
    let demo = fixture::demo();
    let r = run_hipea2(&demo.spectrum, &ExtractionOptions::exact()).unwrap();
    let Schedule::MultiAncilla { ancillas_per_iteration, .. } = &r.schedule else { panic!() };
    assert_eq!(ancillas_per_iteration, &[1, 2, 3, 3, 3, 3, 4, 4, 4]);
}

#[test]
fn ancilla_budget_is_enforced() {
    let demo = fixture::demo();
    let opts = ExtractionOptions { ancilla_budget: Some(2), ..ExtractionOptions::exact() };
    assert!(run_hipea2(&demo.spectrum, &opts).is_err());
}

#[test]
fn parallel_experiment_counts_respect_bounds_when_bits_divide_evenly() {
    for seed in 0..20u64 {
        let f = fixture::random(seed, 4, 6, 1e-4);
        for n_top in [1usize, 2, 3] {
            let r = run_hipea3(&f.spectrum, n_top, &ExtractionOptions::exact()).unwrap();
            let (min, max) = experiment_count_bounds(4, 6, n_top as u32);
            let got = r.resources.experiments as u64;
            assert!(min <= got && got <= max, "seed {seed} n_top {n_top}: {got} not in [{min}, {max}]");
        }
    }
}

#[test]
fn sampled_hipea1_is_close() {
    let demo = fixture::demo();
    let r = run_hipea1(&demo.spectrum, &ExtractionOptions::sampled(100_000, 42)).unwrap();
    assert_eq!(r.experiments.len(), 4);
    assert!(r.experiments.iter().all(|e| e.records.len() == 9));
    let rec = reconstruct(
        &r.bitstrings(),
        &r.beta_abs(),
        &r.distributions(),
        &demo.b,
        SignNoise::Sampled { path_shots: 100_000, bottom_shots: 100_000 },
    )
    .unwrap();
    let eps = relative_error(&direct_solve(&demo.spectrum).unwrap(), &rec.x).unwrap();
    assert!(eps < 0.03, "eps {eps}");
}

#[test]
fn algorithms_agree_on_bitstrings() {
    let demo = fixture::demo();
    let opts = ExtractionOptions::exact();
    let sorted = |mut v: Vec<BinaryFraction>| {
        v.sort_by_key(|b| b.numerator());
        v
    };
    let a = sorted(run_hipea1(&demo.spectrum, &opts).unwrap().bitstrings());
    let b = sorted(run_hipea2(&demo.spectrum, &opts).unwrap().bitstrings());
    let c = sorted(run_hipea3(&demo.spectrum, 2, &opts).unwrap().bitstrings());
    assert_eq!(a, b);
    assert_eq!(a, c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_algorithm_recovers_the_solution(seed in any::<u64>(), m in 3u32..8, n_top in 1usize..4) {
        let f = fixture::random(seed, 4, m, 1e-6);
        let reference = direct_solve(&f.spectrum).unwrap();
        let opts = ExtractionOptions::exact();
        for r in [run_hipea1(&f.spectrum, &opts), run_hipea2(&f.spectrum, &opts), run_hipea3(&f.spectrum, n_top, &opts)] {
            let r = r.unwrap();
            prop_assert_eq!(r.pairs.len(), 4);
            let rec = reconstruct(&r.bitstrings(), &r.beta_abs(), &r.distributions(), &f.b, SignNoise::Exact).unwrap();
            prop_assert!(relative_error(&reference, &rec.x).unwrap() < 1e-9);
        }
    }
}
