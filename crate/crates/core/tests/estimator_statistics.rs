use influence_core::estimator::{walk_trial, edge_trial};
use influence_core::exact::{exact_walk_disagreement_probability, exact_walk_success_probability};
use influence_core::lattice::{cutoff_level, walk_down, walk_down_weight, UniformWeightSampler};
use influence_core::zoo::make_counting_oracle;
use influence_core::{FunctionSpec, Point, RngStream};

fn frequency(spec: &FunctionSpec, w: u64, s_star: Option<u64>, fast: bool, trials: u64, seed: u64) -> f64 {
    let n = spec.dim() as u64;
    let cutoff = s_star.and_then(|s| cutoff_level(n, s));
    let mut o = make_counting_oracle(spec);
    if !fast {
        o.disable_weight_path();
    }
    let sampler = UniformWeightSampler::new(n);
    let mut rng = RngStream::new(seed, 0);
    let hits: u64 = (0..trials).map(|_| walk_trial(&mut o, w, cutoff, Some(&sampler), &mut rng).unwrap() as u64).sum();
    assert_eq!(o.query_count(), 2 * trials);
    hits as f64 / trials as f64
}

fn within_4se(freq: f64, p: f64, trials: u64) -> bool {
    (freq - p).abs() < 4.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[test]
fn walk_success_frequency_matches_dp_at_13() {
    let spec = FunctionSpec::majority(13);
    let (w, s) = (2, Some(2));
    let p: f64 = exact_walk_success_probability(&mut make_counting_oracle(&spec), w, s).unwrap();
    let trials = 1_000_000;
    for fast in [true, false] {
        let f = frequency(&spec, w, s, fast, trials, 5);
        assert!(within_4se(f, p, trials), "fast={fast}: {f} vs {p}");
    }
}

#[test]
fn parity_walk_frequency_matches_disagreement_dp() {
    let spec = FunctionSpec::parity_all(10);
    let (w, s) = (3, None);
    let p = exact_walk_disagreement_probability(&mut make_counting_oracle(&spec), w, s).unwrap();
    let trials = 200_000;
    let f = frequency(&spec, w, s, false, trials, 6);
    assert!(within_4se(f, p, trials), "{f} vs {p}");
}

#[test]
fn weight_path_agrees_with_points_exhaustively() {
    let mut rng = RngStream::new(17, 0);
    for n in 1..=16usize {
        let specs = [
            FunctionSpec::majority(n),
            FunctionSpec::parity_all(n),
            FunctionSpec::threshold(n, n, n / 3).unwrap(),
            FunctionSpec::constant(n, true),
        ];
        for spec in &specs {
            let mut o = make_counting_oracle(spec);
            for x in 0..1u64 << n {
                let v = Point::from_u64(n, x);
                let h = v.hamming_weight() as u64;
                let w = x % 4;
                let cutoff = if x % 3 == 0 { None } else { Some((n / 3) as u64) };
                let u = walk_down(&v, w, cutoff, &mut rng);
                assert_eq!(o.evaluate(&u).unwrap(), o.evaluate_at_weight(walk_down_weight(h, w, cutoff)).unwrap());
                assert_eq!(o.evaluate(&v).unwrap(), o.evaluate_at_weight(h).unwrap());
            }
        }
    }
}

#[test]
fn edge_trial_frequency_is_influence_over_n() {
    // Pr[success] = I[f] / n = 12012 / (4096 * 13) for majority at 13.
    let spec = FunctionSpec::majority(13);
    let p = 12012.0 / 4096.0 / 13.0;
    let trials = 400_000u64;
    for fast in [true, false] {
        let mut o = make_counting_oracle(&spec);
        if !fast {
            o.disable_weight_path();
        }
        let sampler = UniformWeightSampler::new(13);
        let mut rng = RngStream::new(8, fast as u64);
        let hits: u64 = (0..trials).map(|_| edge_trial(&mut o, Some(&sampler), &mut rng).unwrap() as u64).sum();
        let f = hits as f64 / trials as f64;
        assert!(within_4se(f, p, trials), "fast={fast}: {f} vs {p}");
    }
}
