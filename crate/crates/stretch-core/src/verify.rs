//! Batch verification: generate a corpus, replay every policy on each
//! instance, evaluate the guarantee inequalities exactly, and aggregate the
//! verdicts into a serializable report.
//!
//! Every comparison is made on rationals; decimals appear only in the CSV
//! rendering. A failed check never panics: the verdict is recorded and the
//! offending instance is embedded in the report, so a batch doubles as a
//! counterexample search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::forest::{active_intervals, build_forest, pos_schedule};
use crate::gen::{random_instance, GenConfig, SplitMix64, SpreadMode};
use crate::model::{delta_ratio, is_compact, stretch_report, Instance, JobId};
use crate::oracle::{
    competitive_bound, optimal_nonpreemptive, parallel_lower_bound, spt_to_pos_delta_audit,
};
use crate::parallel::{
    busy_blocks, dsptm_schedule, jobs_delta_ratio, omms_schedule, partition_blocks,
    sptm_schedule, virtual_instance, DeltaScope,
};
use crate::rational::Rational;
use crate::single::{spt_schedule, srpt_schedule};

/// The checked inequalities and structural facts, one id per check.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    /// The preemption-free reorder is compact exactly when the preemptive
    /// schedule it came from is.
    PosCompactIffSrpt,
    /// Reordered total within the single-machine ratio bound of the
    /// preemptive total.
    PosVsSrptBound,
    /// The swap audit telescopes exactly and its total is nonnegative.
    SptPosDeltaAudit,
    /// Greedy total within the single-machine ratio bound of the preemptive
    /// total.
    SptVsSrptBound,
    /// Preemptive total at most the non-preemptive optimum.
    SrptVsOpt,
    /// Greedy total within the single-machine ratio bound of the optimum.
    SptVsOptSingle,
    /// Per-job and summed gaps between the parallel greedy schedule and its
    /// virtual-machine replay stay within the machine fraction.
    SptVsOmmsSpeedup,
    /// The release partition, the virtual schedule's busy runs and the
    /// replay's busy runs all carry the same job sets, compactly.
    BlockPartitionAgreement,
    /// Replay total at most the shifted virtual total, which is at most the
    /// ratio bound times the virtual total.
    DelayChain,
    /// The virtual total plus the machine-fraction slack lower-bounds the
    /// optimum.
    SptmOptLowerBound,
    /// Parallel greedy total within the parallel ratio bound of the optimum.
    SptVsOptParallel,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::PosCompactIffSrpt,
        CheckId::PosVsSrptBound,
        CheckId::SptPosDeltaAudit,
        CheckId::SptVsSrptBound,
        CheckId::SrptVsOpt,
        CheckId::SptVsOptSingle,
        CheckId::SptVsOmmsSpeedup,
        CheckId::BlockPartitionAgreement,
        CheckId::DelayChain,
        CheckId::SptmOptLowerBound,
        CheckId::SptVsOptParallel,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            CheckId::PosCompactIffSrpt => "pos-compact-iff-srpt",
            CheckId::PosVsSrptBound => "pos-vs-srpt-bound",
            CheckId::SptPosDeltaAudit => "spt-pos-delta-audit",
            CheckId::SptVsSrptBound => "spt-vs-srpt-bound",
            CheckId::SrptVsOpt => "srpt-vs-opt",
            CheckId::SptVsOptSingle => "spt-vs-opt-single",
            CheckId::SptVsOmmsSpeedup => "spt-vs-omms-speedup",
            CheckId::BlockPartitionAgreement => "block-partition-agreement",
            CheckId::DelayChain => "delay-chain",
            CheckId::SptmOptLowerBound => "sptm-opt-lower-bound",
            CheckId::SptVsOptParallel => "spt-vs-opt-parallel",
        }
    }

    /// Checks whose constructions exist only on one machine.
    pub fn single_machine_only(self) -> bool {
        matches!(
            self,
            CheckId::PosCompactIffSrpt
                | CheckId::PosVsSrptBound
                | CheckId::SptPosDeltaAudit
                | CheckId::SptVsSrptBound
                | CheckId::SrptVsOpt
                | CheckId::SptVsOptSingle
        )
    }

    pub fn needs_oracle(self) -> bool {
        matches!(
            self,
            CheckId::SrptVsOpt
                | CheckId::SptVsOptSingle
                | CheckId::SptmOptLowerBound
                | CheckId::SptVsOptParallel
        )
    }
}

impl std::fmt::Display for CheckId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Not evaluated: the check does not apply to the instance, or the
    /// oracle ran out of budget. The row's note says which.
    Skipped,
}

/// Everything that determines a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: u32,
    /// Per-trial sizes are drawn uniformly from 1..=n_max.
    pub n_max: u32,
    /// Machine counts cycled through the trials in order.
    pub machines: Vec<u32>,
    pub delta_max: Rational,
    pub mode: SpreadMode,
    pub tie_bias_percent: u32,
    pub grid: u32,
    /// Node budget per oracle call; 0 disables the oracle checks entirely
    /// (they report as skipped).
    pub oracle_budget: u64,
    pub delta_scope: DeltaScope,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 7,
            trials: 100,
            n_max: 6,
            machines: vec![1, 2],
            delta_max: Rational::from_int(3),
            mode: SpreadMode::Dense,
            tie_bias_percent: 25,
            grid: 6,
            oracle_budget: crate::oracle::default_budget(),
            delta_scope: DeltaScope::Global,
        }
    }
}

/// One evaluated check on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: CheckId,
    pub verdict: Verdict,
    /// The measured quantity (a policy total, or the audit sum).
    pub lhs: Option<Rational>,
    /// The reference quantity the bound multiplies (or the exact target).
    pub rhs: Option<Rational>,
    /// The proved multiplier: pass means lhs <= bound * rhs.
    pub bound: Option<Rational>,
    /// lhs / rhs, the observed ratio the bound must dominate.
    pub ratio: Option<Rational>,
    pub note: String,
}

/// The policy totals behind an instance's rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyTotals {
    pub spt: Rational,
    pub srpt: Option<Rational>,
    pub pos: Option<Rational>,
    pub omms: Rational,
    pub sptm: Rational,
    pub dsptm: Rational,
    pub opt: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub index: u32,
    pub n: u32,
    pub machines: u32,
    pub delta: Rational,
    pub totals: PolicyTotals,
    pub checks: Vec<CheckRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: CheckId,
    pub pass: u32,
    pub fail: u32,
    pub skipped: u32,
    /// Largest observed lhs/rhs over the batch, with the instance it came
    /// from. The check holds batch-wide iff this never exceeds the bound.
    pub worst_ratio: Option<Rational>,
    pub worst_instance: Option<u32>,
}

/// A failed check with the full offending instance inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub check: CheckId,
    pub instance_index: u32,
    pub lhs: Option<Rational>,
    pub rhs: Option<Rational>,
    pub bound: Option<Rational>,
    pub note: String,
    pub instance: Instance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub config: VerifyConfig,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub generated_at_unix: u64,
    pub rows: Vec<InstanceRow>,
    pub summaries: Vec<CheckSummary>,
    pub counterexamples: Vec<Counterexample>,
}

impl CheckReport {
    /// True when no evaluated check failed; skipped checks do not count.
    pub fn all_passed(&self) -> bool {
        self.summaries.iter().all(|s| s.fail == 0)
    }
}

fn skip(check: CheckId, note: &str) -> CheckRow {
    CheckRow {
        check,
        verdict: Verdict::Skipped,
        lhs: None,
        rhs: None,
        bound: None,
        ratio: None,
        note: note.to_string(),
    }
}

/// Builds a bound-style row: pass iff `lhs <= bound * rhs`.
fn bound_row(
    check: CheckId,
    lhs: Rational,
    rhs: Rational,
    bound: Rational,
    note: String,
) -> CheckRow {
    let holds = lhs <= (&bound * &rhs);
    let ratio = if rhs.is_positive() {
        Some(&lhs / &rhs)
    } else {
        None
    };
    CheckRow {
        check,
        verdict: if holds { Verdict::Pass } else { Verdict::Fail },
        lhs: Some(lhs),
        rhs: Some(rhs),
        bound: Some(bound),
        ratio,
        note,
    }
}

fn fact_row(check: CheckId, holds: bool, note: String) -> CheckRow {
    CheckRow {
        check,
        verdict: if holds { Verdict::Pass } else { Verdict::Fail },
        lhs: None,
        rhs: None,
        bound: None,
        ratio: None,
        note,
    }
}

const SKIP_PARALLEL: &str = "skipped: defined on single-machine instances only";
const SKIP_BUDGET: &str = "skipped: oracle budget exhausted";

/// Evaluates every check on one instance. Used by [`run_verify`] per batch
/// member and exposed for spot checks of hand-built instances.
pub fn check_instance(
    index: u32,
    instance: &Instance,
    oracle_budget: u64,
    delta_scope: DeltaScope,
) -> InstanceRow {
    let m = instance.machines();
    let n = instance.n();
    let delta = delta_ratio(instance);
    let single_bound = competitive_bound(&delta, 1)
        .expect("delta of a valid instance is at least 1")
        .value;
    let parallel_bound = competitive_bound(&delta, m)
        .expect("delta of a valid instance is at least 1")
        .value;

    let spt = spt_schedule(instance);
    let spt_total = stretch_report(&spt).expect("greedy schedule covers every job").total;
    let virtual_ = virtual_instance(instance);
    let sptm = sptm_schedule(&virtual_);
    let sptm_total = stretch_report(&sptm).expect("virtual schedule covers every job").total;
    let omms = omms_schedule(&spt).expect("replay of a greedy schedule");
    let omms_total = stretch_report(&omms).expect("replay covers every job").total;
    let dsptm = dsptm_schedule(&sptm, &delta).expect("delta of a valid instance is at least 1");
    let dsptm_total = stretch_report(&dsptm).expect("shifted schedule covers every job").total;

    let opt_total = if oracle_budget == 0 {
        None
    } else {
        match optimal_nonpreemptive(instance, oracle_budget) {
            Ok(result) => Some(result.total),
            Err(Error::OracleLimit { .. }) => None,
            Err(e) => unreachable!("oracle on a valid instance: {e}"),
        }
    };

    let single = if m == 1 {
        let srpt = srpt_schedule(instance).expect("single-machine instance");
        let srpt_total = stretch_report(&srpt).expect("preemptive schedule covers every job").total;
        let intervals = active_intervals(&srpt).expect("preemptive schedule");
        let forest = build_forest(&intervals).expect("preemptive intervals are laminar");
        let pos = pos_schedule(&forest, &srpt).expect("forest built from this schedule");
        let pos_total = stretch_report(&pos).expect("reorder covers every job").total;
        Some((srpt, srpt_total, pos, pos_total))
    } else {
        None
    };

    let mut checks: Vec<CheckRow> = Vec::with_capacity(CheckId::ALL.len());
    for check in CheckId::ALL {
        if check.single_machine_only() && single.is_none() {
            checks.push(skip(check, SKIP_PARALLEL));
            continue;
        }
        if check.needs_oracle() && opt_total.is_none() {
            checks.push(skip(check, SKIP_BUDGET));
            continue;
        }
        let row = match check {
            CheckId::PosCompactIffSrpt => {
                let (srpt, _, pos, _) = single.as_ref().unwrap();
                let pos_compact = is_compact(pos).expect("nonempty schedule");
                let srpt_compact = is_compact(srpt).expect("nonempty schedule");
                fact_row(
                    check,
                    pos_compact == srpt_compact,
                    format!("reorder compact: {pos_compact}, preemptive compact: {srpt_compact}"),
                )
            }
            CheckId::PosVsSrptBound => {
                let (_, srpt_total, _, pos_total) = single.as_ref().unwrap();
                bound_row(
                    check,
                    pos_total.clone(),
                    srpt_total.clone(),
                    single_bound.clone(),
                    String::new(),
                )
            }
            CheckId::SptPosDeltaAudit => {
                let (_, _, pos, _) = single.as_ref().unwrap();
                let audit = spt_to_pos_delta_audit(&spt, pos).expect("same instance");
                let steps_match = audit
                    .steps
                    .iter()
                    .all(|s| s.exact_delta == s.formula_delta);
                let holds = audit.telescoping_consistent && audit.nonnegative && steps_match;
                CheckRow {
                    check,
                    verdict: if holds { Verdict::Pass } else { Verdict::Fail },
                    lhs: Some(audit.accumulated.clone()),
                    rhs: Some(&audit.pos_total - &audit.spt_total),
                    bound: None,
                    ratio: None,
                    note: format!(
                        "{} moves; telescoping: {}, nonnegative: {}, per-step match: {}",
                        audit.steps.len(),
                        audit.telescoping_consistent,
                        audit.nonnegative,
                        steps_match
                    ),
                }
            }
            CheckId::SptVsSrptBound => {
                let (_, srpt_total, _, _) = single.as_ref().unwrap();
                bound_row(
                    check,
                    spt_total.clone(),
                    srpt_total.clone(),
                    single_bound.clone(),
                    String::new(),
                )
            }
            CheckId::SrptVsOpt => {
                let (_, srpt_total, _, _) = single.as_ref().unwrap();
                bound_row(
                    check,
                    srpt_total.clone(),
                    opt_total.clone().unwrap(),
                    Rational::one(),
                    String::new(),
                )
            }
            CheckId::SptVsOptSingle => bound_row(
                check,
                spt_total.clone(),
                opt_total.clone().unwrap(),
                single_bound.clone(),
                String::new(),
            ),
            CheckId::SptVsOmmsSpeedup => {
                let fraction =
                    Rational::one() - Rational::new(1, m as i64);
                let spt_completions = spt.completions();
                let omms_completions = omms.completions();
                let mut job_violations: Vec<String> = Vec::new();
                for job in instance.jobs() {
                    let gap = &spt_completions[&job.id] - &omms_completions[&job.id];
                    let cap = &fraction * &job.processing;
                    if gap > cap {
                        job_violations.push(format!(
                            "job {}: completion gap {} exceeds {}",
                            job.id.0, gap, cap
                        ));
                    }
                }
                let slack = &fraction * &Rational::from_int(n as i64);
                let mut row = bound_row(
                    check,
                    spt_total.clone(),
                    &omms_total + &slack,
                    Rational::one(),
                    String::new(),
                );
                if !job_violations.is_empty() {
                    row.verdict = Verdict::Fail;
                    row.note = job_violations.join("; ");
                }
                row
            }
            CheckId::BlockPartitionAgreement => {
                let partition = partition_blocks(&virtual_);
                let partition_sets: Vec<Vec<JobId>> = partition
                    .iter()
                    .map(|b| {
                        let mut jobs = b.jobs.clone();
                        jobs.sort();
                        jobs
                    })
                    .collect();
                let sptm_busy = busy_blocks(&sptm);
                let omms_busy = busy_blocks(&omms);
                let sptm_agrees = sptm_busy == partition_sets;
                let omms_agrees = omms_busy == partition_sets;
                let mut compact_runs = true;
                if omms_agrees {
                    let completions = omms.completions();
                    for pair in partition.windows(2) {
                        let block_end = pair[0]
                            .jobs
                            .iter()
                            .map(|j| completions[j].clone())
                            .max()
                            .unwrap();
                        if block_end > pair[1].release {
                            compact_runs = false;
                        }
                    }
                }
                fact_row(
                    check,
                    sptm_agrees && omms_agrees && compact_runs,
                    format!(
                        "{} blocks; virtual busy runs agree: {}, replay busy runs agree: {}, \
                         replay blocks stay clear of the next release: {}",
                        partition.len(),
                        sptm_agrees,
                        omms_agrees,
                        compact_runs
                    ),
                )
            }
            CheckId::DelayChain => delay_chain_row(
                check,
                instance,
                delta_scope,
                &delta,
                &omms_total,
                &dsptm_total,
                &sptm_total,
            ),
            CheckId::SptmOptLowerBound => {
                let cert = parallel_lower_bound(instance).expect("valid instance");
                bound_row(
                    check,
                    cert.value,
                    opt_total.clone().unwrap(),
                    Rational::one(),
                    String::new(),
                )
            }
            CheckId::SptVsOptParallel => bound_row(
                check,
                spt_total.clone(),
                opt_total.clone().unwrap(),
                parallel_bound.clone(),
                String::new(),
            ),
        };
        checks.push(row);
    }

    InstanceRow {
        index,
        n: n as u32,
        machines: m,
        delta,
        totals: PolicyTotals {
            spt: spt_total,
            srpt: single.as_ref().map(|s| s.1.clone()),
            pos: single.as_ref().map(|s| s.3.clone()),
            omms: omms_total,
            sptm: sptm_total,
            dsptm: dsptm_total,
            opt: opt_total,
        },
        checks,
    }
}

/// The two-link chain `replay <= shifted <= bound * virtual`, evaluated on
/// the whole instance or independently per release block.
fn delay_chain_row(
    check: CheckId,
    instance: &Instance,
    scope: DeltaScope,
    delta: &Rational,
    omms_total: &Rational,
    dsptm_total: &Rational,
    sptm_total: &Rational,
) -> CheckRow {
    struct Link {
        label: String,
        omms: Rational,
        dsptm: Rational,
        sptm: Rational,
        bound: Rational,
    }

    let links: Vec<Link> = match scope {
        DeltaScope::Global => vec![Link {
            label: "whole instance".to_string(),
            omms: omms_total.clone(),
            dsptm: dsptm_total.clone(),
            sptm: sptm_total.clone(),
            bound: competitive_bound(delta, 1).expect("delta at least 1").value,
        }],
        DeltaScope::Block => {
            let partition = partition_blocks(&virtual_instance(instance));
            partition
                .iter()
                .map(|block| {
                    let jobs: Vec<_> = instance
                        .jobs()
                        .iter()
                        .filter(|j| block.jobs.contains(&j.id))
                        .cloned()
                        .collect();
                    let sub = Instance::new(instance.machines(), jobs)
                        .expect("block jobs form a valid instance");
                    let block_delta = jobs_delta_ratio(instance, &block.jobs);
                    let virtual_b = virtual_instance(&sub);
                    let sptm_b = sptm_schedule(&virtual_b);
                    let omms_b =
                        omms_schedule(&spt_schedule(&sub)).expect("replay of a greedy schedule");
                    let dsptm_b = dsptm_schedule(&sptm_b, &block_delta)
                        .expect("block delta is at least 1");
                    Link {
                        label: format!("block {}", block.index),
                        omms: stretch_report(&omms_b).expect("covers every job").total,
                        dsptm: stretch_report(&dsptm_b).expect("covers every job").total,
                        sptm: stretch_report(&sptm_b).expect("covers every job").total,
                        bound: competitive_bound(&block_delta, 1)
                            .expect("delta at least 1")
                            .value,
                    }
                })
                .collect()
        }
    };

    let mut failures: Vec<String> = Vec::new();
    let mut worst: Option<(Rational, Rational, Rational, Rational)> = None;
    for link in &links {
        if link.omms > link.dsptm {
            failures.push(format!(
                "{}: first link broken, replay {} exceeds shifted {}",
                link.label, link.omms, link.dsptm
            ));
        }
        if link.dsptm > &link.bound * &link.sptm {
            failures.push(format!(
                "{}: second link broken, shifted {} exceeds {} * {}",
                link.label, link.dsptm, link.bound, link.sptm
            ));
        }
        let ratio = &link.dsptm / &link.sptm;
        let margin = &ratio / &link.bound;
        let replace = match &worst {
            Some((_, _, _, held)) => &margin > held,
            None => true,
        };
        if replace {
            worst = Some((link.dsptm.clone(), link.sptm.clone(), link.bound.clone(), margin));
        }
    }
    let (lhs, rhs, bound, _) = worst.expect("at least one link");
    let note = if failures.is_empty() {
        format!("{} evaluated: {}", scope, links.len())
    } else {
        failures.join("; ")
    };
    CheckRow {
        check,
        verdict: if failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        ratio: Some(&lhs / &rhs),
        lhs: Some(lhs),
        rhs: Some(rhs),
        bound: Some(bound),
        note,
    }
}

/// Generates the batch and evaluates every check on every instance.
/// Instances are checked concurrently; the report order is by instance
/// index regardless of completion order.
pub fn run_verify(config: &VerifyConfig) -> Result<CheckReport> {
    if config.machines.is_empty() {
        return Err(Error::InvalidConfig("machines list must not be empty".into()));
    }
    if config.n_max == 0 {
        return Err(Error::InvalidConfig("n_max must be at least 1".into()));
    }

    let mut master = SplitMix64::new(config.seed);
    let mut instances: Vec<Instance> = Vec::with_capacity(config.trials as usize);
    for trial in 0..config.trials {
        let n = 1 + master.below(config.n_max as u64) as u32;
        let gen = GenConfig {
            seed: master.next_u64(),
            n,
            machines: config.machines[trial as usize % config.machines.len()],
            delta_max: config.delta_max.clone(),
            mode: config.mode,
            tie_bias_percent: config.tie_bias_percent,
            grid: config.grid,
            tie_salt: 0,
        };
        instances.push(random_instance(&gen)?);
    }

    let rows: Vec<InstanceRow> = instances
        .par_iter()
        .enumerate()
        .map(|(i, instance)| {
            check_instance(i as u32, instance, config.oracle_budget, config.delta_scope)
        })
        .collect();

    let mut summaries: Vec<CheckSummary> = CheckId::ALL
        .iter()
        .map(|&check| CheckSummary {
            check,
            pass: 0,
            fail: 0,
            skipped: 0,
            worst_ratio: None,
            worst_instance: None,
        })
        .collect();
    let mut counterexamples: Vec<Counterexample> = Vec::new();
    for row in &rows {
        for check_row in &row.checks {
            let summary = summaries
                .iter_mut()
                .find(|s| s.check == check_row.check)
                .unwrap();
            match check_row.verdict {
                Verdict::Pass => summary.pass += 1,
                Verdict::Fail => summary.fail += 1,
                Verdict::Skipped => summary.skipped += 1,
            }
            if let Some(ratio) = &check_row.ratio {
                let beats = match &summary.worst_ratio {
                    Some(held) => ratio > held,
                    None => true,
                };
                if beats {
                    summary.worst_ratio = Some(ratio.clone());
                    summary.worst_instance = Some(row.index);
                }
            }
            if check_row.verdict == Verdict::Fail {
                counterexamples.push(Counterexample {
                    check: check_row.check,
                    instance_index: row.index,
                    lhs: check_row.lhs.clone(),
                    rhs: check_row.rhs.clone(),
                    bound: check_row.bound.clone(),
                    note: check_row.note.clone(),
                    instance: instances[row.index as usize].clone(),
                });
            }
        }
    }

    Ok(CheckReport {
        config: config.clone(),
        generated_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        rows,
        summaries,
        counterexamples,
    })
}

pub fn report_json(report: &CheckReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    text.push('\n');
    text
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_rational(v: &Option<Rational>) -> (String, String) {
    match v {
        Some(r) => (r.to_string(), r.decimal(12)),
        None => (String::new(), String::new()),
    }
}

/// One CSV row per (instance, check), exact values alongside decimals.
pub fn report_csv(report: &CheckReport) -> String {
    let mut out = String::from(
        "instance,n,machines,delta,check,verdict,lhs,rhs,bound,ratio,\
         lhs_decimal,rhs_decimal,bound_decimal,ratio_decimal,note\n",
    );
    for row in &report.rows {
        for check_row in &row.checks {
            let verdict = match check_row.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
                Verdict::Skipped => "skipped",
            };
            let (lhs, lhs_dec) = csv_rational(&check_row.lhs);
            let (rhs, rhs_dec) = csv_rational(&check_row.rhs);
            let (bound, bound_dec) = csv_rational(&check_row.bound);
            let (ratio, ratio_dec) = csv_rational(&check_row.ratio);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                row.index,
                row.n,
                row.machines,
                row.delta,
                check_row.check.slug(),
                verdict,
                lhs,
                rhs,
                bound,
                ratio,
                lhs_dec,
                rhs_dec,
                bound_dec,
                ratio_dec,
                csv_field(&check_row.note)
            ));
        }
    }
    out
}
