#![allow(dead_code)]

use influence_core::zoo::{FunctionKind, FunctionSpec, PrefixSet};
use influence_core::RngStream;

/// Monotone members of the zoo at dimension `n >= 6`.
pub fn monotone_zoo(n: usize) -> Vec<FunctionSpec> {
    let mut rng = RngStream::new(0x5eed, n as u64);
    let r = PrefixSet::sample_weight_class(4, 2, 3, &mut rng).unwrap();
    vec![
        FunctionSpec::constant(n, false),
        FunctionSpec::constant(n, true),
        FunctionSpec::dictator(n, 1).unwrap(),
        FunctionSpec::dictator(n, n).unwrap(),
        FunctionSpec::majority(n),
        FunctionSpec::threshold(n, n, 1).unwrap(),
        FunctionSpec::threshold(n, n, n).unwrap(),
        FunctionSpec::threshold(n, n, n / 3).unwrap(),
        FunctionSpec::threshold(n, 5, 3).unwrap(),
        FunctionSpec::threshold(n, n - 2, (n - 2) / 2).unwrap(),
        FunctionSpec::new(n, FunctionKind::MonotoneLowerBound { k: 4, t: 2, r, i_star: 0.0 }).unwrap(),
    ]
}

/// Every zoo member at dimension `n`, monotone or not.
pub fn full_zoo(n: usize) -> Vec<FunctionSpec> {
    let mut rng = RngStream::new(0xfeed, n as u64);
    let mut out = monotone_zoo(n);
    out.push(FunctionSpec::parity_all(n));
    out.push(FunctionSpec::parity(n, 2, 4).unwrap());
    let r = PrefixSet::sample_uniform(3, 2, &mut rng).unwrap();
    out.push(FunctionSpec::new(n, FunctionKind::GeneralLowerBound { k: 3, r }).unwrap());
    out
}
