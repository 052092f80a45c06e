//! Seeded experiments that turn the weighted estimates into measured quotients.
//!
//! Every trial draws from its own random stream `(seed, trial)`, so reports
//! are bit-identical however rayon schedules the trials.

mod config;
mod experiments;
mod report;

pub use config::{
    max_resolution_from_env, random_cube, trial_rng, FunctionFamily, OperatorFamily, TrialConfig, WeightFamily,
    DEFAULT_MAX_N,
};
pub use experiments::{
    ainf_lemma_sweep, check_split, corollary_experiment, domination_sweep, fs_check, fs_sweep,
    main_theorem_experiment, maximal_comparison, replay_instance, replay_sweep, split_sweep, weak_type_quotient,
    FsOutcome, SplitOutcome, K_EPS_MAX_TERMS, K_EPS_TOL,
};
pub use report::{median, Aggregates, ExperimentReport, Provenance, TrialRecord};
