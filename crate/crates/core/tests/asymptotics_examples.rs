use dipolenet::asymptotics::{
    big_jump_check, feasibility_event_decay, mz_slln_check, poisson_slln_check, violation_probability,
    x_for_tail_mass, FeasibilitySchedule,
};
use dipolenet::channel::tail_probability;
use dipolenet::params::{DEFAULT_BANDWIDTH_HZ, DEFAULT_R_MIN};

#[test]
fn mz_medians_decrease_for_alpha_three() {
    let r = mz_slln_check(0.5, 3.0, &[1_000, 10_000, 100_000, 1_000_000], 100, 7).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.statistic_per_size.windows(2).all(|w| w[1] < w[0]), "{:?}", r.statistic_per_size);
    for k in 0..r.sample_sizes.len() {
        assert!(r.lower_per_size[k] <= r.statistic_per_size[k] && r.statistic_per_size[k] <= r.upper_per_size[k]);
    }
}

#[test]
fn poisson_index_medians_track_fixed_index() {
    let sizes = [1_000, 10_000, 100_000, 1_000_000];
    let fixed = mz_slln_check(0.5, 3.0, &sizes, 100, 8).unwrap();
    let poisson = poisson_slln_check(0.5, 3.0, &sizes, 100, 9).unwrap();
    for (a, b) in fixed.statistic_per_size.iter().zip(&poisson.statistic_per_size) {
        let ratio = a / b;
        assert!((0.5..=2.0).contains(&ratio), "{a} vs {b}");
    }
    assert!(poisson.pass);
}

#[test]
fn zero_poisson_mean_gives_zero_statistic() {
    let r = poisson_slln_check(0.5, 3.0, &[0], 10, 1).unwrap();
    assert_eq!(r.statistic_per_size, vec![0.0]);
}

#[test]
fn checkers_are_reproducible() {
    let a = poisson_slln_check(0.5, 3.0, &[100, 1_000], 30, 42).unwrap();
    let b = poisson_slln_check(0.5, 3.0, &[100, 1_000], 30, 42).unwrap();
    assert_eq!(a, b);
    let x = x_for_tail_mass(5, 3.0, 0.01).unwrap();
    assert_eq!(
        big_jump_check(5, 3.0, &[x], 50_000, 3).unwrap(),
        big_jump_check(5, 3.0, &[x], 50_000, 3).unwrap()
    );
}

#[test]
fn single_summand_ratio_is_one() {
    let xs = [x_for_tail_mass(1, 3.0, 0.05).unwrap(), x_for_tail_mass(1, 3.0, 0.01).unwrap()];
    let r = big_jump_check(1, 3.0, &xs, 1_000_000, 4).unwrap();
    for k in 0..xs.len() {
        assert!(r.lower_per_size[k] <= 1.0 && 1.0 <= r.upper_per_size[k], "{r:?}");
    }
    assert_eq!(r.max_to_sum_ratio, Some(1.0));
}

#[test]
fn big_jump_fifty_summands() {
    let x = x_for_tail_mass(50, 3.0, 0.01).unwrap();
    let r = big_jump_check(50, 3.0, &[x], 1_000_000, 5).unwrap();
    assert!(r.pass, "{r:?}");
    assert!((0.8..=1.25).contains(&r.statistic_per_size[0]));
    let ratio = r.max_to_sum_ratio.unwrap();
    assert!((0.9..=1.0).contains(&ratio), "{ratio}");
}

fn schedule() -> FeasibilitySchedule {
    FeasibilitySchedule {
        delta: 0.2,
        gamma_exp: 0.4,
        p: 0.6,
        alpha: 3.0,
        r_min_nats: DEFAULT_R_MIN / DEFAULT_BANDWIDTH_HZ,
    }
}

#[test]
fn feasibility_violations_decay() {
    let r = feasibility_event_decay(&schedule(), &[1e3, 1e4, 1e5], 200_000, 6).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.statistic_per_size.windows(2).all(|w| w[1] < w[0]), "{:?}", r.statistic_per_size);
    assert_eq!(r.sample_sizes, vec![4, 7, 10]);
    assert_eq!(r.reference.as_ref().map(Vec::len), Some(3));
}

#[test]
fn feasibility_rejects_bad_ordering() {
    let s = FeasibilitySchedule { delta: 0.45, ..schedule() };
    assert!(feasibility_event_decay(&s, &[1e3, 1e4], 10, 1).is_err());
}

#[test]
fn thinned_tail_identity() {
    // P(h 1[d > h0] > z) = P(h > z) P(d > h0) = tail(z) n^-gamma
    let (n, gamma) = (100.0f64, 0.4);
    let h0 = gamma * n.ln();
    let reps = 1_000_000;
    for z in [2.0, 5.0, 20.0] {
        let (hits, ci) = violation_probability(1, z, h0, 0.6, 3.0, reps, 10 + z as u64);
        let expected = tail_probability(z, 3.0).unwrap() * n.powf(-gamma);
        assert!(ci.contains(expected), "z = {z}: {hits}/{reps} vs {expected}, {ci:?}");
    }
}

#[test]
fn empty_and_singleton_sets() {
    let (hits, ci) = violation_probability(0, 0.1, 0.0, 0.6, 3.0, 10_000, 2);
    assert_eq!(hits, 0);
    assert_eq!(ci.lower, 0.0);
    // with h0 = 0 every draw counts: the singleton event is just h > eps
    let (hits, ci) = violation_probability(1, 3.0, 0.0, 0.6, 3.0, 200_000, 3);
    let expected = tail_probability(3.0, 3.0).unwrap();
    assert!(ci.contains(expected), "{hits} {ci:?} {expected}");
}
