//! The two base policies.
//!
//! [`srpt_schedule`] runs preemptive shortest-remaining-processing-time on a
//! single machine. [`spt_schedule`] runs non-preemptive, non-waiting
//! shortest-processing-time list scheduling on any number of identical
//! machines. Both are event driven: state only changes at releases and
//! completions, and all times stay exact rationals.
//!
//! Tie discipline, shared by every policy in this crate: a running job is
//! never preempted by an equal remaining time; among queued candidates the
//! smaller processing time wins, then the smaller job id.

use crate::error::{Error, Result};
use crate::model::{Instance, Policy, Schedule, Segment, StretchDenominator};
use crate::rational::{Rational, Time};

/// Release times grouped and sorted ascending; values are indices into
/// `instance.jobs()`. Groups keep index order, which is generation order.
fn release_groups(instance: &Instance) -> Vec<(Time, Vec<usize>)> {
    let mut order: Vec<usize> = (0..instance.n()).collect();
    order.sort_by(|&a, &b| {
        let ja = &instance.jobs()[a];
        let jb = &instance.jobs()[b];
        ja.release.cmp(&jb.release).then(ja.id.cmp(&jb.id))
    });
    let mut groups: Vec<(Time, Vec<usize>)> = Vec::new();
    for idx in order {
        let release = instance.jobs()[idx].release.clone();
        match groups.last_mut() {
            Some((time, members)) if *time == release => members.push(idx),
            _ => groups.push((release, vec![idx])),
        }
    }
    groups
}

/// Preemptive shortest-remaining-processing-time on one machine.
///
/// At every instant the machine runs a released, unfinished job with the
/// smallest remaining work. Preemption happens only when a release brings a
/// job with strictly smaller remaining work than the one running; on equal
/// remaining work the running job keeps the machine. The result is compact
/// and each maximal run becomes one segment.
pub fn srpt_schedule(instance: &Instance) -> Result<Schedule> {
    if instance.machines() != 1 {
        return Err(Error::NeedsSingleMachine {
            what: "srpt",
            machines: instance.machines(),
        });
    }
    let jobs = instance.jobs();
    let releases = release_groups(instance);
    let mut remaining: Vec<Time> = jobs.iter().map(|j| j.processing.clone()).collect();
    let mut ready: Vec<usize> = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();

    let mut next_release = 0usize;
    let mut running: Option<usize> = None;
    let mut seg_start = Time::zero();
    let mut now = Time::zero();

    // Smallest (remaining, processing, id) among the queue.
    let best_of = |ready: &[usize], remaining: &[Time]| -> Option<usize> {
        ready
            .iter()
            .copied()
            .min_by(|&a, &b| {
                remaining[a]
                    .cmp(&remaining[b])
                    .then(jobs[a].processing.cmp(&jobs[b].processing))
                    .then(jobs[a].id.cmp(&jobs[b].id))
            })
    };

    loop {
        if running.is_none() && ready.is_empty() {
            match releases.get(next_release) {
                Some((time, _)) => now = time.clone(),
                None => break,
            }
        }
        while next_release < releases.len() && releases[next_release].0 == now {
            ready.extend_from_slice(&releases[next_release].1);
            next_release += 1;
        }

        match running {
            None => {
                let pick = best_of(&ready, &remaining).expect("queue cannot be empty here");
                ready.retain(|&j| j != pick);
                running = Some(pick);
                seg_start = now.clone();
            }
            Some(active) => {
                if let Some(challenger) = best_of(&ready, &remaining) {
                    if remaining[challenger] < remaining[active] {
                        segments.push(Segment {
                            job: jobs[active].id,
                            machine: 0,
                            start: seg_start.clone(),
                            end: now.clone(),
                        });
                        ready.retain(|&j| j != challenger);
                        ready.push(active);
                        running = Some(challenger);
                        seg_start = now.clone();
                    }
                }
            }
        }

        let active = running.expect("a job is running after the decision");
        let completion = &now + &remaining[active];
        match releases.get(next_release) {
            Some((time, _)) if *time < completion => {
                remaining[active] = &remaining[active] - &(time - &now);
                now = time.clone();
            }
            _ => {
                segments.push(Segment {
                    job: jobs[active].id,
                    machine: 0,
                    start: seg_start.clone(),
                    end: completion.clone(),
                });
                remaining[active] = Time::zero();
                now = completion;
                running = None;
            }
        }
    }

    Ok(Schedule {
        instance: instance.clone(),
        policy: Policy::Srpt,
        machines: 1,
        speed: Rational::one(),
        preemptive: true,
        convention: StretchDenominator::OriginalProcessing,
        segments,
    })
}

/// Non-preemptive, non-waiting shortest-processing-time list scheduling on
/// the instance's machines.
///
/// Whenever a machine is idle and the ready queue is nonempty, the queued
/// job with the smallest processing time starts immediately (ties: smaller
/// id; among idle machines the lowest index wins). A machine with an empty
/// queue idles until the next release, never reserving capacity for a short
/// job about to arrive. Each job runs as exactly one segment.
pub fn spt_schedule(instance: &Instance) -> Schedule {
    let jobs = instance.jobs();
    let m = instance.machines() as usize;
    let releases = release_groups(instance);
    let mut free: Vec<Time> = vec![Time::zero(); m];
    let mut ready: Vec<usize> = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();

    let mut next_release = 0usize;
    let mut now = Time::zero();

    loop {
        while next_release < releases.len() && releases[next_release].0 == now {
            ready.extend_from_slice(&releases[next_release].1);
            next_release += 1;
        }

        // Start jobs while an idle machine and a queued job coexist.
        while !ready.is_empty() {
            let Some(machine) = (0..m).find(|&q| free[q] <= now) else {
                break;
            };
            let pick = ready
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    jobs[a]
                        .processing
                        .cmp(&jobs[b].processing)
                        .then(jobs[a].id.cmp(&jobs[b].id))
                })
                .expect("ready queue is nonempty");
            ready.retain(|&j| j != pick);
            let end = &now + &jobs[pick].processing;
            segments.push(Segment {
                job: jobs[pick].id,
                machine: machine as u32,
                start: now.clone(),
                end: end.clone(),
            });
            free[machine] = end;
        }

        // Advance to the next release or the next machine to come free.
        let mut next: Option<Time> = releases.get(next_release).map(|(t, _)| t.clone());
        if !ready.is_empty() {
            for slot in free.iter().take(m) {
                if *slot > now && next.as_ref().is_none_or(|t| slot < t) {
                    next = Some(slot.clone());
                }
            }
        }
        match next {
            Some(t) => now = t,
            None => break,
        }
    }

    Schedule {
        instance: instance.clone(),
        policy: Policy::Spt,
        machines: instance.machines(),
        speed: Rational::one(),
        preemptive: false,
        convention: StretchDenominator::OriginalProcessing,
        segments,
    }
}

/// Number of jobs the schedule has completed by time `t` (inclusive).
pub fn finished_count(schedule: &Schedule, t: &Time) -> usize {
    schedule
        .completions()
        .values()
        .filter(|c| *c <= t)
        .count()
}
