use protosphere::{estimate_prototypes, geometry_report, UniformityConfig};

/// With 100 prototypes the self-pairs dominate the log-mean normalizer, which
/// shrinks the gradient; a larger step reaches the simplex in the same budget.
#[test]
fn hundred_prototypes_reach_the_simplex_with_a_larger_step() {
    let cfg = UniformityConfig { learning_rate: 10.0, ..UniformityConfig::default() };
    let r = geometry_report(&estimate_prototypes(100, 100, &cfg).unwrap());
    assert!(r.etf_gap <= 0.02, "{r}");
    assert!(r.max_cos.abs() <= 0.02 && (r.min_cos + 0.01).abs() <= 0.02, "{r}");
}

#[test]
fn default_schedule_reaches_the_simplex_when_c_is_small() {
    for (d, c) in [(32, 10), (16, 8)] {
        let r = geometry_report(&estimate_prototypes(d, c, &UniformityConfig::default()).unwrap());
        assert!(r.etf_gap <= 0.02, "({d},{c}) {r}");
    }
}
