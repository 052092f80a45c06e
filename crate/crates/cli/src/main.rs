//! `endpoint-lab`: run the weighted endpoint experiments from the command line.
//!
//! Exit status: 0 when every pass flag holds, 1 when any flag fails, 2 on
//! usage, configuration or input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod options;
mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entropy_bump::bumps::{m_entropy_all, m_orlicz, ORLICZ_TOL};
use entropy_bump::io::{fmt_g17, format_collection, format_rho_csv, read_collection, write_text};
use entropy_bump::lab::{
    ainf_lemma_sweep, check_split, corollary_experiment, domination_sweep, fs_sweep, main_theorem_experiment,
    maximal_comparison, replay_sweep, split_sweep, ExperimentReport, TrialRecord,
};
use entropy_bump::sparse::{carleson_check, split_eight, CarlesonConvention};
use entropy_bump::weights::{dyadic_maximal, rho_all};
use entropy_bump::{EntropyVariant, OrliczSpec};

use options::{parse_config, RunConfig, UsageError};
use svg::{emit_svg, PlotKind};

#[derive(Parser)]
#[command(name = "endpoint-lab", version, about = "Entropy-bump weighted endpoint experiments on dyadic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy functional ρ_w(Q) for every dyadic cube, as CSV.
    Rho(Opts),
    /// Per-cell dyadic, entropy-bump and (with --phi) Orlicz maximal functions, as CSV.
    Maximal(Opts),
    /// Eight-way split of a sparse collection (--collection) or of random stopping collections.
    SparseSplit(Opts),
    /// Sparse domination of random martingale transforms.
    Domination(Opts),
    /// Weak-type bound for sparse operators and martingale transforms.
    VerifyMain(Opts),
    /// A₁ corollary over power weights (--s-list).
    VerifyCor(Opts),
    /// Fefferman–Stein inequality with constant 1.
    VerifyFs(Opts),
    /// The A∞ subset lemma.
    VerifyAinf(Opts),
    /// Entropy bump against an Orlicz bump (--phi), cell by cell. Descriptive.
    Compare(Opts),
    /// Replay of the level-set decomposition on random instances.
    Replay(Opts),
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// `key = value` file with defaults for any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid resolution N (2^N cells).
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Bump ε: constant:c=.., log_pow:p=.., loglog:delta=..
    #[arg(long)]
    eps: Option<String>,
    /// Orlicz Φ: power:r=.., llogl:delta=.., dlr:delta=.., iterlog:e1=..,e2=..
    #[arg(long)]
    phi: Option<String>,
    /// Weight file, or a family: power:<s>, a1gen:<s>, random:<spread>.
    #[arg(long)]
    weight: Option<String>,
    /// Comma-separated power exponents for verify-cor.
    #[arg(long = "s-list")]
    s_list: Option<String>,
    /// Stopping ratio (> 2).
    #[arg(long)]
    a: Option<String>,
    /// Pass threshold on the headline statistic.
    #[arg(long)]
    bound: Option<String>,
    /// Output file: JSON report, or CSV when the name ends in `.csv`.
    #[arg(long)]
    out: Option<String>,
    /// SVG plot of the report.
    #[arg(long)]
    plot: Option<String>,
    /// Sparse collection file for sparse-split.
    #[arg(long)]
    collection: Option<String>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Opts) {
        match self {
            Command::Rho(o) => ("rho", o),
            Command::Maximal(o) => ("maximal", o),
            Command::SparseSplit(o) => ("sparse-split", o),
            Command::Domination(o) => ("domination", o),
            Command::VerifyMain(o) => ("verify-main", o),
            Command::VerifyCor(o) => ("verify-cor", o),
            Command::VerifyFs(o) => ("verify-fs", o),
            Command::VerifyAinf(o) => ("verify-ainf", o),
            Command::Compare(o) => ("compare", o),
            Command::Replay(o) => ("replay", o),
        }
    }
}

fn run_config(name: &str, opts: &Opts) -> Result<RunConfig, UsageError> {
    let mut options = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            parse_config(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let flags = [
        ("n", &opts.n),
        ("trials", &opts.trials),
        ("seed", &opts.seed),
        ("eps", &opts.eps),
        ("phi", &opts.phi),
        ("weight", &opts.weight),
        ("s-list", &opts.s_list),
        ("a", &opts.a),
        ("bound", &opts.bound),
        ("out", &opts.out),
        ("plot", &opts.plot),
        ("collection", &opts.collection),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            options.insert(key.to_string(), v.clone());
        }
    }
    let rc = RunConfig { subcommand: name.to_string(), options };
    rc.check_outputs()?;
    Ok(rc)
}

/// What a subcommand produced.
struct Outcome {
    report: ExperimentReport,
    /// Table written to `--out` instead of the report, if any.
    table: Option<String>,
}

fn with_echo(mut report: ExperimentReport, rc: &RunConfig) -> ExperimentReport {
    let experiment = std::mem::take(&mut report.provenance.config);
    report.provenance.config = serde_json::json!({
        "subcommand": rc.subcommand,
        "options": rc.options,
        "experiment": experiment,
    });
    if let Some(seed) = rc.get("seed").and_then(|s| s.parse().ok()) {
        report.provenance.seed = seed;
    }
    report
}

fn rho_cmd(rc: &mut RunConfig) -> Result<Outcome, UsageError> {
    let w = rc.single_weight(8)?;
    let table = rho_all(&w);
    let records = table
        .iter()
        .enumerate()
        .map(|(i, (q, r))| {
            let mut rec = TrialRecord::new(i, q.to_string(), r.value(), r.value());
            rec.extras.insert("vacuous".into(), r.is_vacuous() as u8 as f64);
            rec
        })
        .collect();
    let mut report = ExperimentReport::new("rho", 0, &serde_json::json!({}), records)?;
    if let Some(max) = table.max_value() {
        report.summary.insert("max_rho".into(), max);
    }
    Ok(Outcome { report, table: Some(format_rho_csv(&table)) })
}

fn maximal_cmd(rc: &mut RunConfig) -> Result<Outcome, UsageError> {
    let w = rc.single_weight(8)?;
    rc.default_to("eps", "log_pow:p=2");
    let eps = rc.eps()?;
    eps.validate()?;
    let phi = rc.phi()?;
    let md = dyadic_maximal(&w);
    let me = m_entropy_all(&w, &eps, EntropyVariant::Log);
    let mphi = phi.as_ref().map(|p| m_orlicz(&w, p, ORLICZ_TOL)).transpose()?;
    let mut csv = String::from(if mphi.is_some() { "cell,w,dyadic,entropy,orlicz\n" } else { "cell,w,dyadic,entropy\n" });
    let mut records = Vec::with_capacity(w.len());
    for x in 0..w.len() {
        let row = [w.values()[x], md.values()[x], me.values()[x]];
        csv.push_str(&x.to_string());
        for v in row.iter().chain(mphi.as_ref().map(|m| &m.values()[x])) {
            csv.push(',');
            csv.push_str(&fmt_g17(*v));
        }
        csv.push('\n');
        let ratio = if row[1] > 0.0 { row[2] / row[1] } else { 0.0 };
        records.push(TrialRecord::new(x, format!("cell {x}"), row[2], ratio));
    }
    let report = ExperimentReport::new("maximal", 0, &serde_json::json!({ "eps": eps, "phi": phi }), records)?;
    Ok(Outcome { report, table: Some(csv) })
}

fn split_cmd(rc: &mut RunConfig) -> Result<Outcome, UsageError> {
    let Some(path) = rc.path("collection") else {
        let cfg = rc.trial_config(10, 500, 0.25)?;
        return Ok(Outcome { report: split_sweep(&cfg, &[cfg.a])?, table: None });
    };
    let s = read_collection(&path)?;
    let carleson = carleson_check(&s, 2.0, CarlesonConvention::Proper);
    let mut records = Vec::new();
    let mut table = None;
    let mut flags = BTreeMap::new();
    flags.insert("carleson_packing".to_string(), carleson.pass);
    if carleson.pass {
        let out = check_split(&s)?;
        let parts = split_eight(&s)?;
        let mut text = String::new();
        for (i, p) in parts.iter().enumerate() {
            let r = entropy_bump::sparse::stronger_sparse_check(p);
            let mut rec = TrialRecord::new(i, format!("part {i}"), r.worst_ratio, r.worst_ratio);
            rec.pass = r.pass;
            rec.extras.insert("cubes".into(), p.len() as f64);
            records.push(rec);
            text.push_str(&format!("# part {i}\n{}", format_collection(p)));
        }
        flags.insert("partition".to_string(), out.partition);
        flags.insert("parts_stronger_sparse".to_string(), out.parts_sparse);
        table = Some(text);
    }
    let mut report = ExperimentReport::new("sparse_split", 0, &serde_json::json!({ "cubes": s.len() }), records)?;
    report.summary.insert("carleson_ratio".into(), carleson.worst_ratio);
    report.pass_flags = flags;
    Ok(Outcome { report, table })
}

fn compare_cmd(rc: &mut RunConfig) -> Result<Outcome, UsageError> {
    let w = rc.single_weight(8)?;
    rc.default_to("eps", "log_pow:p=2");
    rc.default_to("phi", "dlr:delta=1");
    let phi = rc.phi()?.unwrap_or(OrliczSpec::Dlr { delta: 1.0 });
    Ok(Outcome { report: maximal_comparison(&w, &rc.eps()?, &phi)?, table: None })
}

fn dispatch(name: &str, rc: &mut RunConfig) -> Result<Outcome, UsageError> {
    let report = match name {
        "rho" => return rho_cmd(rc),
        "maximal" => return maximal_cmd(rc),
        "sparse-split" => return split_cmd(rc),
        "compare" => return compare_cmd(rc),
        "domination" => domination_sweep(&rc.trial_config(10, 500, 16.0)?)?,
        "verify-main" => main_theorem_experiment(&rc.trial_config(12, 200, 64.0)?)?,
        "verify-cor" => {
            let s = rc.s_list(&[0.0, 0.5, 0.9, 0.96875])?;
            rc.default_to("s-list", s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
            corollary_experiment(&s, &rc.trial_config(12, 200, 4.0)?)?
        }
        "verify-fs" => fs_sweep(&rc.trial_config(8, 1000, 1.0)?)?,
        "verify-ainf" => ainf_lemma_sweep(&rc.trial_config(10, 1000, 8.0)?)?,
        "replay" => replay_sweep(&rc.trial_config(10, 100, 16.0)?)?,
        other => unreachable!("unknown subcommand {other}"),
    };
    Ok(Outcome { report, table: None })
}

fn write_outputs(outcome: &Outcome, rc: &RunConfig) -> Result<(), UsageError> {
    if let Some(out) = rc.path("out") {
        let csv = out.extension().is_some_and(|e| e == "csv");
        let text = match (&outcome.table, csv) {
            (Some(t), true) => t.clone(),
            (Some(t), false) if out.extension().is_some_and(|e| e == "txt") => t.clone(),
            (_, true) => outcome.report.to_csv(),
            (_, false) => outcome.report.to_json()?,
        };
        write_text(&out, &text)?;
    } else if let Some(t) = &outcome.table {
        print!("{t}");
    }
    if let Some(plot) = rc.path("plot") {
        emit_svg(&outcome.report, PlotKind::for_report(&outcome.report), Path::new(&plot)).map_err(UsageError)?;
    }
    Ok(())
}

fn summarize(report: &ExperimentReport) {
    let a = &report.aggregates;
    eprintln!(
        "{}: {} records, max {}, median {}, min {}",
        report.name,
        a.count,
        fmt_g17(a.max),
        fmt_g17(a.median),
        fmt_g17(a.min)
    );
    for (k, v) in &report.summary {
        eprintln!("  {k} = {}", fmt_g17(*v));
    }
    for (flag, pass) in &report.pass_flags {
        eprintln!("  [{}] {flag}", if *pass { "PASS" } else { "FAIL" });
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, opts) = cli.command.parts();
    let result = run_config(name, opts).and_then(|mut rc| {
        let outcome = dispatch(name, &mut rc)?;
        let outcome = Outcome { report: with_echo(outcome.report, &rc), table: outcome.table };
        write_outputs(&outcome, &rc)?;
        Ok(outcome.report)
    });
    match result {
        Ok(report) => {
            summarize(&report);
            if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Err(e) => {
            eprintln!("endpoint-lab {name}: {e}");
            ExitCode::from(2)
        }
    }
}
