//! Brute-force optimal non-preemptive schedules, bound formulas, and the
//! adjacent-swap audit that reconciles SPT with POS.
//!
//! A non-preemptive schedule is fully described by a machine assignment and
//! a per-machine job order: within a fixed order, greedy timing (start at
//! the later of release and predecessor end) minimizes every completion, so
//! enumerating (assignment, order) pairs covers all candidates. The search
//! runs depth first over (job id, machine index) choices, which makes its
//! result deterministic, and counts every placement against a node budget
//! so a too-large instance fails loudly instead of stalling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    stretch_report, Instance, JobId, Policy, Schedule, Segment, StretchDenominator,
};
use crate::parallel::{sptm_schedule, virtual_instance};
use crate::rational::{ratio_string, Rational, Time};
use crate::single::{spt_schedule, srpt_schedule};

/// Node budget used when the `STRETCH_ORACLE_BUDGET` variable is absent.
pub const DEFAULT_ORACLE_BUDGET: u64 = 5_000_000;

/// Budget from the `STRETCH_ORACLE_BUDGET` environment variable, falling
/// back to [`DEFAULT_ORACLE_BUDGET`] when unset or unparseable.
pub fn default_budget() -> u64 {
    std::env::var("STRETCH_ORACLE_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BUDGET)
}

/// Outcome of an exact search: an optimal schedule, its total stretch, and
/// how many placements the search tried.
#[derive(Clone, Debug)]
pub struct OptimalResult {
    pub schedule: Schedule,
    pub total: Rational,
    pub explored: u64,
}

struct Search<'a> {
    jobs: &'a [crate::model::Job],
    machines: usize,
    budget: u64,
    prune: bool,
    explored: u64,
    best_value: Option<Rational>,
    best_sequence: Option<Vec<(usize, u32)>>,
}

impl<'a> Search<'a> {
    fn run(&mut self, state: &mut State) -> Result<()> {
        if state.sequence.len() == self.jobs.len() {
            let better = match &self.best_value {
                Some(best) => state.partial < *best,
                None => true,
            };
            if better {
                self.best_value = Some(state.partial.clone());
                self.best_sequence = Some(state.sequence.clone());
            } else if self.best_sequence.is_none()
                && self.best_value.as_ref() == Some(&state.partial)
            {
                // The seeded incumbent was already optimal; keep the first
                // sequence that attains it.
                self.best_sequence = Some(state.sequence.clone());
            }
            return Ok(());
        }
        let remaining_after = (self.jobs.len() - state.sequence.len() - 1) as i64;
        for idx in 0..self.jobs.len() {
            if state.placed[idx] {
                continue;
            }
            let job = &self.jobs[idx];
            let mut seen_ends: Vec<Time> = Vec::with_capacity(self.machines);
            for q in 0..self.machines {
                let machine_end = state.machine_end[q].clone();
                if self.prune && seen_ends.contains(&machine_end) {
                    // A machine with the same free time yields the same
                    // subtree; keeping the lowest index is enough.
                    continue;
                }
                seen_ends.push(machine_end.clone());

                self.explored += 1;
                if self.explored > self.budget {
                    return Err(Error::OracleLimit {
                        explored: self.explored,
                        budget: self.budget,
                    });
                }

                let start = machine_end.clone().max(job.release.clone());
                let end = &start + &job.processing;
                let stretch = (&end - &job.release) / &job.processing;
                let partial = &state.partial + &stretch;
                if self.prune {
                    if let Some(best) = &self.best_value {
                        // Every unsequenced job contributes stretch >= 1.
                        let floor = &partial + &Rational::from_int(remaining_after);
                        if &floor > best {
                            continue;
                        }
                    }
                }

                let saved_end =
                    std::mem::replace(&mut state.machine_end[q], end);
                let saved_partial = std::mem::replace(&mut state.partial, partial);
                state.placed[idx] = true;
                state.sequence.push((idx, q as u32));

                let outcome = self.run(state);

                state.sequence.pop();
                state.placed[idx] = false;
                state.partial = saved_partial;
                state.machine_end[q] = saved_end;
                outcome?;
            }
        }
        Ok(())
    }
}

struct State {
    placed: Vec<bool>,
    machine_end: Vec<Time>,
    partial: Rational,
    sequence: Vec<(usize, u32)>,
}

fn replay(instance: &Instance, sequence: &[(usize, u32)]) -> Schedule {
    let mut machine_end = vec![Rational::zero(); instance.machines() as usize];
    let mut segments = Vec::with_capacity(sequence.len());
    for &(idx, q) in sequence {
        let job = &instance.jobs()[idx];
        let start = machine_end[q as usize].clone().max(job.release.clone());
        let end = &start + &job.processing;
        machine_end[q as usize] = end.clone();
        segments.push(Segment {
            job: job.id,
            machine: q,
            start,
            end,
        });
    }
    Schedule {
        instance: instance.clone(),
        policy: Policy::Opt,
        machines: instance.machines(),
        speed: Rational::one(),
        preemptive: false,
        convention: StretchDenominator::OriginalProcessing,
        segments,
    }
}

fn search_optimal(instance: &Instance, budget: u64, prune: bool) -> Result<OptimalResult> {
    let seed = if prune {
        Some(stretch_report(&spt_schedule(instance))?.total)
    } else {
        None
    };
    let mut search = Search {
        jobs: instance.jobs(),
        machines: instance.machines() as usize,
        budget,
        prune,
        explored: 0,
        best_value: seed,
        best_sequence: None,
    };
    let mut state = State {
        placed: vec![false; instance.n()],
        machine_end: vec![Rational::zero(); instance.machines() as usize],
        partial: Rational::zero(),
        sequence: Vec::with_capacity(instance.n()),
    };
    search.run(&mut state)?;
    let sequence = search
        .best_sequence
        .expect("search visits at least one complete sequence");
    let schedule = replay(instance, &sequence);
    Ok(OptimalResult {
        total: search.best_value.expect("value set with sequence"),
        schedule,
        explored: search.explored,
    })
}

/// Exact minimum total stretch over all non-preemptive schedules, by
/// branch-and-bound over (job, machine) placements. The SPT total seeds the
/// incumbent, subtrees whose floor exceeds it are cut, and machines with
/// identical free times are tried once.
pub fn optimal_nonpreemptive(instance: &Instance, budget: u64) -> Result<OptimalResult> {
    search_optimal(instance, budget, true)
}

/// The same search with every pruning rule disabled: a slow, independent
/// reference for the self-test.
pub fn optimal_exhaustive(instance: &Instance, budget: u64) -> Result<OptimalResult> {
    search_optimal(instance, budget, false)
}

/// Both totals behind the preemptive-vs-optimal comparison.
#[derive(Clone, Debug, Serialize)]
pub struct DominanceCheck {
    #[serde(with = "ratio_string")]
    pub srpt_total: Rational,
    #[serde(with = "ratio_string")]
    pub optimal_total: Rational,
    pub holds: bool,
}

/// Compares the SRPT total against the non-preemptive optimum.
pub fn srpt_dominates_optimal_check(instance: &Instance, budget: u64) -> Result<DominanceCheck> {
    let srpt_total = stretch_report(&srpt_schedule(instance)?)?.total;
    let optimal_total = optimal_nonpreemptive(instance, budget)?.total;
    Ok(DominanceCheck {
        holds: srpt_total <= optimal_total,
        srpt_total,
        optimal_total,
    })
}

/// Stretch change caused by swapping two adjacent jobs so that the first
/// runs after the second: `p_first/p_second - p_second/p_first`. Negative
/// when the first job is shorter.
pub fn swap_delta(p_first: &Rational, p_second: &Rational) -> Result<Rational> {
    if !p_first.is_positive() || !p_second.is_positive() {
        return Err(Error::NonPositiveProcessingInput);
    }
    Ok(p_first / p_second - p_second / p_first)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    SingleRatio,
    ParallelRatio,
    ParallelLowerBound,
}

/// An evaluated bound formula, exported with exact rational values.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    #[serde(with = "ratio_string")]
    pub delta: Rational,
    pub machines: u32,
    #[serde(with = "ratio_string")]
    pub value: Rational,
    pub formula: &'static str,
}

/// The competitive-ratio bound for the given processing-time ratio and
/// machine count: `delta - 1/delta + 1` on one machine,
/// `delta - 1/delta + 3/2 - 1/(2m)` on several.
pub fn competitive_bound(delta: &Rational, machines: u32) -> Result<BoundCertificate> {
    if machines == 0 {
        return Err(Error::NoMachines);
    }
    if delta < &Rational::one() {
        return Err(Error::DeltaBelowOne(delta.clone()));
    }
    let spread = delta - &delta.recip();
    let (kind, value, formula) = if machines == 1 {
        (
            BoundKind::SingleRatio,
            spread + Rational::one(),
            "delta - 1/delta + 1",
        )
    } else {
        (
            BoundKind::ParallelRatio,
            spread + Rational::new(3, 2) - Rational::new(1, 2 * machines as i64),
            "delta - 1/delta + 3/2 - 1/(2m)",
        )
    };
    Ok(BoundCertificate {
        kind,
        delta: delta.clone(),
        machines,
        value,
        formula,
    })
}

/// Candidate lower bound on the optimal parallel total stretch:
/// `sptm_total + (1/2)(1 - 1/m) n`. The formula does not actually hold on
/// every instance (the verify harness tests it and reports violations), so
/// callers must treat the certificate as a claim, not a guarantee.
pub fn parallel_lower_bound(instance: &Instance) -> Result<BoundCertificate> {
    let m = instance.machines();
    let sptm_total = stretch_report(&sptm_schedule(&virtual_instance(instance)))?.total;
    let slack = Rational::new(1, 2)
        * (Rational::one() - Rational::new(1, m as i64))
        * Rational::from_int(instance.n() as i64);
    Ok(BoundCertificate {
        kind: BoundKind::ParallelLowerBound,
        delta: crate::model::delta_ratio(instance),
        machines: m,
        value: sptm_total + slack,
        formula: "sptm_total + (1/2)(1 - 1/m) n",
    })
}

/// One reorder step of the SPT-to-POS transformation.
#[derive(Clone, Debug, Serialize)]
pub struct AuditStep {
    pub moved: JobId,
    pub ahead_of: JobId,
    pub from_position: usize,
    pub to_position: usize,
    /// Total-stretch change measured by retiming the reordered sequence.
    #[serde(with = "ratio_string")]
    pub exact_delta: Rational,
    /// Sum of pairwise swap deltas over the displaced jobs; equals
    /// `exact_delta` whenever the affected jobs run back to back.
    #[serde(with = "ratio_string")]
    pub formula_delta: Rational,
}

/// Bookkeeping of the stepwise transformation from the SPT order to the
/// POS order.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub steps: Vec<AuditStep>,
    #[serde(with = "ratio_string")]
    pub spt_total: Rational,
    #[serde(with = "ratio_string")]
    pub pos_total: Rational,
    /// Sum of the exact step deltas.
    #[serde(with = "ratio_string")]
    pub accumulated: Rational,
    /// accumulated == pos_total - spt_total.
    pub telescoping_consistent: bool,
    /// accumulated >= 0.
    pub nonnegative: bool,
}

fn order_of(schedule: &Schedule) -> Vec<JobId> {
    let mut segs: Vec<(&Time, JobId)> = schedule
        .segments
        .iter()
        .map(|s| (&s.start, s.job))
        .collect();
    segs.sort();
    segs.into_iter().map(|(_, job)| job).collect()
}

fn sequence_total(instance: &Instance, order: &[JobId]) -> Rational {
    let mut cursor = Rational::zero();
    let mut total = Rational::zero();
    for id in order {
        let job = instance.job(*id).expect("job exists");
        let start = cursor.max(job.release.clone());
        let end = &start + &job.processing;
        total = total + (&end - &job.release) / &job.processing;
        cursor = end;
    }
    total
}

/// Transforms the SPT order into the POS order one move at a time: at the
/// first position where the orders disagree, the job POS wants there is
/// pulled forward past the block in between. Each step's exact retimed
/// delta is recorded alongside the closed-form pairwise sum, and the
/// endpoints are cross-checked against the schedules' own totals.
pub fn spt_to_pos_delta_audit(spt: &Schedule, pos: &Schedule) -> Result<AuditReport> {
    if spt.policy != Policy::Spt {
        return Err(Error::WrongPolicy {
            expected: Policy::Spt,
            actual: spt.policy,
        });
    }
    if pos.policy != Policy::Pos {
        return Err(Error::WrongPolicy {
            expected: Policy::Pos,
            actual: pos.policy,
        });
    }
    if spt.instance != pos.instance {
        return Err(Error::InstanceMismatch);
    }
    if spt.machines != 1 {
        return Err(Error::NeedsSingleMachine {
            what: "reorder audit",
            machines: spt.machines,
        });
    }
    let instance = &spt.instance;
    let spt_total = stretch_report(spt)?.total;
    let pos_total = stretch_report(pos)?.total;

    let mut current = order_of(spt);
    let target = order_of(pos);
    let mut current_total = sequence_total(instance, &current);
    debug_assert_eq!(current_total, spt_total);

    let mut steps = Vec::new();
    let mut accumulated = Rational::zero();
    for i in 0..target.len() {
        if current[i] == target[i] {
            continue;
        }
        let j = current[i..]
            .iter()
            .position(|id| *id == target[i])
            .expect("orders are permutations of the same jobs")
            + i;
        let moved = current[j];
        let ahead_of = current[i];
        let p_moved = &instance.job(moved).expect("job exists").processing;
        let mut formula_delta = Rational::zero();
        for displaced in &current[i..j] {
            let p_displaced = &instance.job(*displaced).expect("job exists").processing;
            formula_delta = formula_delta + swap_delta(p_moved, p_displaced)?;
        }
        current[i..=j].rotate_right(1);
        let next_total = sequence_total(instance, &current);
        let exact_delta = &next_total - &current_total;
        accumulated = accumulated + &exact_delta;
        steps.push(AuditStep {
            moved,
            ahead_of,
            from_position: j,
            to_position: i,
            exact_delta,
            formula_delta,
        });
        current_total = next_total;
    }

    let telescoping_consistent = accumulated == &pos_total - &spt_total;
    let nonnegative = !accumulated.is_negative();
    Ok(AuditReport {
        steps,
        spt_total,
        pos_total,
        accumulated,
        telescoping_consistent,
        nonnegative,
    })
}
