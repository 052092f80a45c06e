use entropy_bump::lab::{
    corollary_experiment, domination_sweep, fs_sweep, main_theorem_experiment, replay_instance, split_sweep,
    ExperimentReport, TrialConfig,
};

#[test]
fn main_quotients_invariant_under_weight_scaling() {
    let base_cfg = TrialConfig::new(8, 64, 41);
    let base = main_theorem_experiment(&base_cfg).unwrap();
    for c in [2.0, 1024.0] {
        let mut cfg = base_cfg.clone();
        cfg.weight_scale = c;
        let scaled = main_theorem_experiment(&cfg).unwrap();
        for (a, b) in base.records.iter().zip(&scaled.records) {
            let rel = (a.quotient - b.quotient).abs() / a.quotient.abs().max(1e-300);
            assert!(rel < 1e-12, "trial {} at c={c}: {} vs {}", a.trial, a.quotient, b.quotient);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let cfg = TrialConfig::new(7, 40, 99);
    let runs: Vec<[String; 4]> = (0..2)
        .map(|_| {
            [
                main_theorem_experiment(&cfg).unwrap().to_json().unwrap(),
                fs_sweep(&cfg).unwrap().to_json().unwrap(),
                split_sweep(&cfg, &[2.5, 4.0]).unwrap().to_json().unwrap(),
                domination_sweep(&cfg).unwrap().to_json().unwrap(),
            ]
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let other = main_theorem_experiment(&TrialConfig::new(7, 40, 100)).unwrap();
    assert_ne!(other.to_json().unwrap(), runs[0][0]);
}

#[test]
fn reports_round_trip_through_json() {
    let rep = corollary_experiment(&[0.0, 0.5], &TrialConfig::new(6, 20, 5)).unwrap();
    let back = ExperimentReport::from_json(&rep.to_json().unwrap()).unwrap();
    assert_eq!(back, rep);
    let mut again = back.clone();
    again.recompute_aggregates();
    assert_eq!(again.aggregates, rep.aggregates);
}

#[test]
fn unweighted_corollary_is_stable_in_resolution() {
    let maxima: Vec<f64> = [6, 9, 12]
        .iter()
        .map(|&n| {
            let cfg = TrialConfig::new(n, 100, 17);
            corollary_experiment(&[0.0], &cfg).unwrap().aggregates.max
        })
        .collect();
    let hi = maxima.iter().copied().fold(f64::MIN, f64::max);
    let lo = maxima.iter().copied().fold(f64::MAX, f64::min);
    assert!(hi <= 64.0 && hi / lo <= 2.0, "{maxima:?}");
}

#[test]
fn replay_flags_hold_on_random_instances() {
    let cfg = TrialConfig::new(10, 60, 2024);
    for trial in 0..cfg.trials {
        let (rep, label) = replay_instance(&cfg, trial).unwrap();
        assert!(rep.flags.h_small, "{label}: w(H) > w(G)/4");
        assert!(rep.pass(), "{label}: {:?}", rep.flags);
        assert!(rep.max_constant <= 16.0);
        assert!(rep.w_h <= 0.25 * rep.w_g * (1.0 + 1e-12));
    }
}
