mod common;

use common::compare_with_oracle;

#[test]
fn truncated_channel_matches_exact_expansion() {
    let mut largest = 0;
    for seed in 0..150 {
        let c = compare_with_oracle(seed);
        assert!(c.channel_err < 1e-12, "seed {seed}: channel off by {}", c.channel_err);
        assert!(c.p_success_err < 1e-12, "seed {seed}: acceptance off by {}", c.p_success_err);
        assert!(c.eta + 1e-12 >= c.gap, "seed {seed}: eta {} below gap {}", c.eta, c.gap);
        assert!((c.eta - c.gap).abs() < 1e-10);
        largest = largest.max(c.m);
    }
    assert!(largest >= 10);
}
