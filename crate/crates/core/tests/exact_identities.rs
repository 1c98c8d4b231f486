mod common;

use influence_core::exact::{count_influential_edges, exact_influence, is_monotone, kkl_from_table, tabulate, MAX_EXACT_N};
use influence_core::zoo::{closed_form_influence, make_counting_oracle};
use influence_core::{FunctionSpec, RngStream};
use rand::RngCore;

#[test]
fn edge_count_is_half_cube_times_influence() {
    for n in 8..=14 {
        for spec in common::full_zoo(n) {
            let p = exact_influence(&mut make_counting_oracle(&spec), Some(1)).unwrap();
            let edges = count_influential_edges(&mut make_counting_oracle(&spec)).unwrap();
            // 2^{n-1} I[f] = sum_i flips_i / 2
            assert_eq!(2 * edges, p.total_numerator(), "{} n={n}", spec.label());
            assert_eq!(edges, p.edge_count);
            assert!(p.band_edge_count().unwrap() <= p.edge_count);
        }
    }
}

#[test]
fn closed_form_matches_brute_force_threshold_grid() {
    for k in 1..=14 {
        for t in 0..=k {
            let spec = FunctionSpec::threshold(k, k, t).unwrap();
            let brute = exact_influence(&mut make_counting_oracle(&spec), None).unwrap().total();
            let closed = closed_form_influence(&spec).unwrap();
            assert!((brute - closed).abs() <= 1e-14 * brute.max(1.0), "k={k} t={t}: {brute} vs {closed}");
        }
    }
}

#[test]
fn zoo_monotone_families_pass_monotonicity() {
    for n in [6, 10, 16] {
        for spec in common::monotone_zoo(n) {
            assert!(spec.is_monotone_by_construction());
            assert!(is_monotone(&mut make_counting_oracle(&spec)).unwrap().0, "{} n={n}", spec.label());
        }
    }
}

#[test]
fn kkl_on_random_functions() {
    let mut rng = RngStream::new(2024, 0);
    for _ in 0..1000 {
        let words: Vec<u64> = (0..16).map(|_| rng.next_u64()).collect();
        let spec = FunctionSpec::truth_table_from_fn(10, |x| words[(x / 64) as usize] >> (x % 64) & 1 == 1).unwrap();
        let table = tabulate(&mut make_counting_oracle(&spec), MAX_EXACT_N).unwrap();
        let k = kkl_from_table(&table);
        assert!(k.holds, "lhs {} rhs {}", k.lhs, k.rhs);
    }
}

#[test]
fn monotone_influence_at_most_sqrt_n() {
    for n in 2..=20u64 {
        for t in 0..=n {
            let i = closed_form_influence(&FunctionSpec::threshold(n as usize, n as usize, t as usize).unwrap()).unwrap();
            assert!(i <= (n as f64).sqrt(), "n={n} t={t}: {i}");
        }
    }
    for n in [8, 14, 20] {
        for spec in common::monotone_zoo(n) {
            let i = exact_influence(&mut make_counting_oracle(&spec), None).unwrap().total();
            assert!(i <= (n as f64).sqrt(), "{} n={n}: {i}", spec.label());
        }
    }
}
