//! The identical-machines pipeline: virtual speed-m instance, the OMMS
//! reordering of a parallel SPT run, SPTM, the delayed variant D-SPTM, and
//! the release-time block partition.
//!
//! The virtual instance replaces `m` unit-speed machines with one machine of
//! speed `m`: each processing time shrinks to `p_j / m` while releases stay
//! put. Schedules built on it record speed `m`, so validation still accounts
//! for the full original work, and stretch reports keep the original `p_j`
//! in the denominator (the `OriginalProcessing` convention), which is why
//! virtual stretches may drop below 1.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Instance, Job, JobId, Policy, Schedule, Segment, StretchDenominator};
use crate::rational::{Rational, Time};
use crate::single::spt_schedule;

/// An instance together with its single-machine speed-m reduction.
#[derive(Clone, Debug)]
pub struct VirtualInstance {
    pub original: Instance,
    /// One machine, processing times `p_j / m`, releases unchanged.
    pub scaled: Instance,
}

pub fn virtual_instance(instance: &Instance) -> VirtualInstance {
    let m = Rational::from_int(instance.machines() as i64);
    let jobs: Vec<Job> = instance
        .jobs()
        .iter()
        .map(|j| Job::new(j.id.0, j.release.clone(), &j.processing / &m))
        .collect();
    let scaled = Instance::new(1, jobs).expect("scaling by m preserves instance validity");
    VirtualInstance {
        original: instance.clone(),
        scaled,
    }
}

fn virtual_wrap(virtual_: &VirtualInstance, policy: Policy, segments: Vec<Segment>) -> Schedule {
    Schedule {
        instance: virtual_.original.clone(),
        policy,
        machines: 1,
        speed: Rational::from_int(virtual_.original.machines() as i64),
        preemptive: false,
        convention: StretchDenominator::OriginalProcessing,
        segments,
    }
}

/// Shortest processing time on the speed-m virtual machine: plain SPT run
/// over the scaled instance.
pub fn sptm_schedule(virtual_: &VirtualInstance) -> Schedule {
    let spt = spt_schedule(&virtual_.scaled);
    virtual_wrap(virtual_, Policy::Sptm, spt.segments)
}

/// Replays a parallel SPT schedule on the virtual machine: jobs run in
/// increasing order of their SPT start time (ties: smaller processing time,
/// then smaller id), each for `p_j / m`, starting at its release or its
/// predecessor's end, whichever is later.
pub fn omms_schedule(spt: &Schedule) -> Result<Schedule> {
    if spt.policy != Policy::Spt {
        return Err(Error::WrongPolicy {
            expected: Policy::Spt,
            actual: spt.policy,
        });
    }
    let virtual_ = virtual_instance(&spt.instance);
    let starts = spt.starts();
    let mut order: Vec<JobId> = spt.instance.jobs().iter().map(|j| j.id).collect();
    order.sort_by(|&a, &b| {
        let pa = &spt.instance.job(a).expect("job exists").processing;
        let pb = &spt.instance.job(b).expect("job exists").processing;
        starts[&a].cmp(&starts[&b]).then(pa.cmp(pb)).then(a.cmp(&b))
    });
    let mut segments: Vec<Segment> = Vec::with_capacity(order.len());
    let mut cursor = Rational::zero();
    for (i, job) in order.into_iter().enumerate() {
        let scaled_job = virtual_.scaled.job(job).expect("job exists");
        let start = if i == 0 {
            scaled_job.release.clone()
        } else {
            cursor.clone().max(scaled_job.release.clone())
        };
        let end = &start + &scaled_job.processing;
        segments.push(Segment {
            job,
            machine: 0,
            start,
            end: end.clone(),
        });
        cursor = end;
    }
    Ok(virtual_wrap(&virtual_, Policy::Omms, segments))
}

/// SPTM with every segment pushed later by exactly `delta - 1/delta`.
/// `delta` is normally the instance's processing-time ratio; any value >= 1
/// is accepted so block-local ratios can be studied too.
pub fn dsptm_schedule(sptm: &Schedule, delta: &Rational) -> Result<Schedule> {
    if sptm.policy != Policy::Sptm {
        return Err(Error::WrongPolicy {
            expected: Policy::Sptm,
            actual: sptm.policy,
        });
    }
    if delta < &Rational::one() {
        return Err(Error::DeltaBelowOne(delta.clone()));
    }
    let shift = delta - &delta.recip();
    let segments = sptm
        .segments
        .iter()
        .map(|s| Segment {
            job: s.job,
            machine: s.machine,
            start: &s.start + &shift,
            end: &s.end + &shift,
        })
        .collect();
    Ok(Schedule {
        policy: Policy::DSptm,
        segments,
        ..sptm.clone()
    })
}

/// Which processing-time ratio feeds the D-SPTM delay when the delay chain
/// is verified: the whole instance's ratio, or each block's own ratio with
/// blocks treated independently.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaScope {
    #[default]
    Global,
    Block,
}

impl std::fmt::Display for DeltaScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeltaScope::Global => "global",
            DeltaScope::Block => "block",
        })
    }
}

impl std::str::FromStr for DeltaScope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "global" => Ok(DeltaScope::Global),
            "block" => Ok(DeltaScope::Block),
            other => Err(format!("unknown delta scope {other:?} (use global|block)")),
        }
    }
}

/// One block of the release-time partition of the virtual instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    /// Position in the partition, starting at 0.
    pub index: usize,
    /// Jobs of the block, ordered by (release, id).
    pub jobs: Vec<JobId>,
    /// Earliest release in the block: where its compact run begins.
    pub release: Time,
    /// Index into the sorted distinct release times of the last release
    /// group the block absorbed.
    pub boundary: usize,
}

/// Greedy release-time partition of the virtual instance. Starting from the
/// earliest pending release, a block keeps absorbing the next distinct
/// release group as long as its accumulated scaled work, run back to back
/// from the block's first release, reaches that release; it closes at the
/// first gap the work cannot bridge (work ending exactly at the next
/// release still bridges it).
pub fn partition_blocks(virtual_: &VirtualInstance) -> Vec<Block> {
    let mut jobs: Vec<&Job> = virtual_.scaled.jobs().iter().collect();
    jobs.sort_by(|a, b| a.release.cmp(&b.release).then(a.id.cmp(&b.id)));

    struct Group {
        release: Time,
        jobs: Vec<JobId>,
        work: Time,
    }
    let mut groups: Vec<Group> = Vec::new();
    for job in jobs {
        match groups.last_mut() {
            Some(g) if g.release == job.release => {
                g.jobs.push(job.id);
                g.work = &g.work + &job.processing;
            }
            _ => groups.push(Group {
                release: job.release.clone(),
                jobs: vec![job.id],
                work: job.processing.clone(),
            }),
        }
    }

    let mut blocks: Vec<Block> = Vec::new();
    let mut i = 0;
    while i < groups.len() {
        let release = groups[i].release.clone();
        let mut members = groups[i].jobs.clone();
        let mut work = groups[i].work.clone();
        let mut boundary = i;
        while boundary + 1 < groups.len() {
            if &release + &work < groups[boundary + 1].release {
                break;
            }
            boundary += 1;
            members.extend(groups[boundary].jobs.iter().copied());
            work = &work + &groups[boundary].work;
        }
        blocks.push(Block {
            index: blocks.len(),
            jobs: members,
            release,
            boundary,
        });
        i = boundary + 1;
    }
    blocks
}

/// Maximal busy runs of a schedule's timeline, each reported as the sorted
/// set of jobs touching it. Segments are merged across machines, so on the
/// single-timeline schedules this is meant for (speed-m virtual machines)
/// the runs are exactly the busy periods.
pub fn busy_blocks(schedule: &Schedule) -> Vec<Vec<JobId>> {
    let mut segments: Vec<&Segment> = schedule.segments.iter().collect();
    segments.sort_by(|a, b| a.start.cmp(&b.start).then(a.end.cmp(&b.end)));
    let mut runs: Vec<Vec<JobId>> = Vec::new();
    let mut run_end: Option<Time> = None;
    for seg in segments {
        match run_end {
            Some(ref end) if seg.start <= *end => {
                if seg.end > *end {
                    run_end = Some(seg.end.clone());
                }
                runs.last_mut().expect("run in progress").push(seg.job);
            }
            _ => {
                runs.push(vec![seg.job]);
                run_end = Some(seg.end.clone());
            }
        }
    }
    for run in &mut runs {
        run.sort();
        run.dedup();
    }
    runs
}

/// Processing-time ratio of a subset of an instance's jobs.
/// Panics when the subset is empty or names an unknown job.
pub fn jobs_delta_ratio(instance: &Instance, jobs: &[JobId]) -> Rational {
    let mut longest: Option<Time> = None;
    let mut shortest: Option<Time> = None;
    for id in jobs {
        let p = &instance.job(*id).expect("job exists").processing;
        if longest.as_ref().is_none_or(|l| p > l) {
            longest = Some(p.clone());
        }
        if shortest.as_ref().is_none_or(|s| p < s) {
            shortest = Some(p.clone());
        }
    }
    longest.expect("nonempty job set") / shortest.expect("nonempty job set")
}

/// JSON shape behind `--dump-blocks`.
#[derive(Serialize)]
pub struct BlocksDump {
    pub machines: u32,
    pub blocks: Vec<BlockDump>,
}

#[derive(Serialize)]
pub struct BlockDump {
    pub index: usize,
    pub release: String,
    pub jobs: Vec<JobId>,
    /// Processing-time ratio within the block (original times).
    pub delta: String,
    /// Earliest and latest completion of a block member in the virtual
    /// schedule, then in the replay.
    pub sptm_first_completion: String,
    pub sptm_last_completion: String,
    pub omms_first_completion: String,
    pub omms_last_completion: String,
}

pub fn blocks_dump(virtual_: &VirtualInstance, sptm: &Schedule, omms: &Schedule) -> BlocksDump {
    let sptm_completions = sptm.completions();
    let omms_completions = omms.completions();
    let span = |completions: &BTreeMap<JobId, Time>, jobs: &[JobId]| {
        let mut times: Vec<&Time> = jobs.iter().map(|j| &completions[j]).collect();
        times.sort();
        (times[0].to_string(), times[times.len() - 1].to_string())
    };
    BlocksDump {
        machines: virtual_.original.machines(),
        blocks: partition_blocks(virtual_)
            .into_iter()
            .map(|b| {
                let (sptm_first, sptm_last) = span(&sptm_completions, &b.jobs);
                let (omms_first, omms_last) = span(&omms_completions, &b.jobs);
                BlockDump {
                    delta: jobs_delta_ratio(&virtual_.original, &b.jobs).to_string(),
                    index: b.index,
                    release: b.release.to_string(),
                    jobs: b.jobs,
                    sptm_first_completion: sptm_first,
                    sptm_last_completion: sptm_last,
                    omms_first_completion: omms_first,
                    omms_last_completion: omms_last,
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{delta_ratio, stretch_report, validate_schedule};
    use crate::single::srpt_schedule;
    use proptest::prelude::*;

    fn ti(v: i64) -> Time {
        Time::from_int(v)
    }

    fn inst(machines: u32, jobs: &[(u32, i64, i64)]) -> Instance {
        Instance::new(
            machines,
            jobs.iter()
                .map(|(id, r, p)| Job::new(*id, ti(*r), ti(*p)))
                .collect(),
        )
        .unwrap()
    }

    fn worked_example() -> Instance {
        inst(2, &[(1, 0, 2), (2, 0, 2), (3, 0, 1)])
    }

    #[test]
    fn virtual_instance_on_one_machine_is_identity() {
        let instance = inst(1, &[(1, 0, 3), (2, 2, 1)]);
        let v = virtual_instance(&instance);
        assert_eq!(v.scaled.jobs(), instance.jobs());
    }

    #[test]
    fn virtual_instance_halves_processing_and_keeps_releases() {
        let instance = inst(2, &[(1, 0, 2), (2, 1, 2), (3, 7, 1)]);
        let v = virtual_instance(&instance);
        let scaled: Vec<(Time, Time)> = v
            .scaled
            .jobs()
            .iter()
            .map(|j| (j.release.clone(), j.processing.clone()))
            .collect();
        assert_eq!(
            scaled,
            vec![
                (ti(0), ti(1)),
                (ti(1), ti(1)),
                (ti(7), Rational::new(1, 2)),
            ]
        );
        assert_eq!(v.scaled.machines(), 1);
    }

    #[test]
    fn sptm_on_the_worked_example() {
        let sptm = sptm_schedule(&virtual_instance(&worked_example()));
        let tuples: Vec<(u32, Time, Time)> = sptm
            .segments
            .iter()
            .map(|s| (s.job.0, s.start.clone(), s.end.clone()))
            .collect();
        assert_eq!(
            tuples,
            vec![
                (3, ti(0), Rational::new(1, 2)),
                (1, Rational::new(1, 2), Rational::new(3, 2)),
                (2, Rational::new(3, 2), Rational::new(5, 2)),
            ]
        );
        let report = stretch_report(&sptm).unwrap();
        assert_eq!(report.rows[0].stretch, Rational::new(3, 4));
        assert_eq!(report.rows[1].stretch, Rational::new(5, 4));
        assert_eq!(report.rows[2].stretch, Rational::new(1, 2));
        assert_eq!(report.total, Rational::new(5, 2));
    }

    #[test]
    fn sptm_on_one_machine_matches_spt() {
        let instance = inst(1, &[(1, 0, 3), (2, 1, 1), (3, 1, 2)]);
        let sptm = sptm_schedule(&virtual_instance(&instance));
        let spt = spt_schedule(&instance);
        assert_eq!(sptm.segments, spt.segments);
    }

    #[test]
    fn omms_on_the_worked_example_matches_sptm() {
        let instance = worked_example();
        let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
        let sptm = sptm_schedule(&virtual_instance(&instance));
        assert_eq!(omms.segments, sptm.segments);
        assert_eq!(omms.speed, ti(2));
        assert_eq!(omms.machines, 1);
    }

    #[test]
    fn omms_rejects_non_spt_input() {
        let instance = inst(1, &[(1, 0, 2), (2, 1, 1)]);
        let srpt = srpt_schedule(&instance).unwrap();
        assert!(matches!(
            omms_schedule(&srpt),
            Err(Error::WrongPolicy { .. })
        ));
    }

    #[test]
    fn omms_single_job_runs_at_release_for_scaled_time() {
        let instance = inst(3, &[(1, 2, 2)]);
        let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
        assert_eq!(omms.segments.len(), 1);
        assert_eq!(omms.segments[0].start, ti(2));
        assert_eq!(omms.segments[0].end, ti(2) + Rational::new(2, 3));
    }

    #[test]
    fn omms_breaks_full_ties_by_id() {
        let instance = inst(2, &[(2, 0, 2), (1, 0, 2)]);
        let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
        let order: Vec<u32> = omms.segments.iter().map(|s| s.job.0).collect();
        assert_eq!(order, vec![1, 2]);
    }

    #[test]
    fn omms_on_one_machine_matches_spt() {
        let instance = inst(1, &[(1, 0, 3), (2, 1, 1), (3, 1, 2)]);
        let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
        let spt = spt_schedule(&instance);
        assert_eq!(omms.segments, spt.segments);
    }

    #[test]
    fn dsptm_shift_examples() {
        let sptm = sptm_schedule(&virtual_instance(&worked_example()));

        let same = dsptm_schedule(&sptm, &Rational::one()).unwrap();
        assert_eq!(same.segments, sptm.segments);

        let by_three_halves = dsptm_schedule(&sptm, &ti(2)).unwrap();
        assert_eq!(by_three_halves.segments[0].start, Rational::new(3, 2));

        let by_eight_thirds = dsptm_schedule(&sptm, &ti(3)).unwrap();
        assert_eq!(by_eight_thirds.segments[0].start, Rational::new(8, 3));
        assert_eq!(
            by_eight_thirds.segments[0].end,
            Rational::new(8, 3) + Rational::new(1, 2)
        );
        assert_eq!(by_eight_thirds.policy, Policy::DSptm);
        assert!(validate_schedule(&by_eight_thirds).is_ok());
    }

    #[test]
    fn dsptm_rejects_bad_inputs() {
        let instance = worked_example();
        let sptm = sptm_schedule(&virtual_instance(&instance));
        assert!(matches!(
            dsptm_schedule(&sptm, &Rational::new(1, 2)),
            Err(Error::DeltaBelowOne(_))
        ));
        let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
        assert!(matches!(
            dsptm_schedule(&omms, &ti(2)),
            Err(Error::WrongPolicy { .. })
        ));
    }

    #[test]
    fn dsptm_completions_exceed_sptm_by_the_shift() {
        let instance = inst(2, &[(1, 0, 3), (2, 1, 1), (3, 4, 2)]);
        let delta = delta_ratio(&instance);
        let sptm = sptm_schedule(&virtual_instance(&instance));
        let dsptm = dsptm_schedule(&sptm, &delta).unwrap();
        let shift = &delta - &delta.recip();
        let before = sptm.completions();
        for (job, after) in dsptm.completions() {
            assert_eq!(after, &before[&job] + &shift);
        }
    }

    #[test]
    fn single_release_time_is_one_block() {
        let v = virtual_instance(&inst(2, &[(1, 0, 2), (2, 0, 2), (3, 0, 1)]));
        let blocks = partition_blocks(&v);
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].jobs, vec![JobId(1), JobId(2), JobId(3)]);
        assert_eq!(blocks[0].release, ti(0));
    }

    #[test]
    fn unbridged_gap_splits_blocks() {
        let v = virtual_instance(&inst(1, &[(1, 0, 1), (2, 5, 1)]));
        let blocks = partition_blocks(&v);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].jobs, vec![JobId(1)]);
        assert_eq!(blocks[1].jobs, vec![JobId(2)]);
        assert_eq!(blocks[1].release, ti(5));
    }

    #[test]
    fn work_bridging_a_release_extends_the_block() {
        let v = virtual_instance(&inst(1, &[(1, 0, 2), (2, 1, 1), (3, 10, 1)]));
        let blocks = partition_blocks(&v);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].jobs, vec![JobId(1), JobId(2)]);
        assert_eq!(blocks[0].boundary, 1);
        assert_eq!(blocks[1].jobs, vec![JobId(3)]);
        assert_eq!(blocks[1].boundary, 2);
    }

    #[test]
    fn work_ending_exactly_at_a_release_extends_the_block() {
        let v = virtual_instance(&inst(1, &[(1, 0, 1), (2, 1, 1)]));
        assert_eq!(partition_blocks(&v).len(), 1);
        let v = virtual_instance(&inst(1, &[(1, 0, 1), (2, 2, 1)]));
        assert_eq!(partition_blocks(&v).len(), 2);
    }

    #[test]
    fn busy_blocks_match_the_partition_on_both_virtual_schedules() {
        let instance = inst(2, &[(1, 0, 2), (2, 1, 1), (3, 9, 2), (4, 9, 1)]);
        let v = virtual_instance(&instance);
        let expected: Vec<Vec<JobId>> = partition_blocks(&v)
            .into_iter()
            .map(|b| {
                let mut jobs = b.jobs;
                jobs.sort();
                jobs
            })
            .collect();
        assert_eq!(expected.len(), 2);
        let sptm = sptm_schedule(&v);
        let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
        assert_eq!(busy_blocks(&sptm), expected);
        assert_eq!(busy_blocks(&omms), expected);
    }

    #[test]
    fn completion_gap_to_omms_is_within_the_machine_fraction() {
        let instance = worked_example();
        let spt = spt_schedule(&instance);
        let omms = omms_schedule(&spt).unwrap();
        let spt_done = spt.completions();
        let omms_done = omms.completions();
        let allowance = Rational::new(1, 2);
        for job in instance.jobs() {
            let gap = &spt_done[&job.id] - &omms_done[&job.id];
            assert!(gap <= &allowance * &job.processing);
        }
    }

    #[test]
    fn omms_can_outpace_parallel_spt_on_staggered_long_jobs() {
        // Two long jobs released one apart cover both machines until 11, so
        // the short job must wait for them on the parallel machines. The
        // virtual machine packs the same work back to back from 4 and is
        // done by 10.5, so the short job's parallel completion lands more
        // than (1 - 1/m) p ahead of its virtual one.
        let instance = inst(2, &[(1, 6, 1), (2, 4, 7), (3, 5, 6)]);
        let spt = spt_schedule(&instance);
        let omms = omms_schedule(&spt).unwrap();
        assert_eq!(spt.completions()[&JobId(1)], ti(12));
        let tuples: Vec<(u32, Time, Time)> = omms
            .segments
            .iter()
            .map(|s| (s.job.0, s.start.clone(), s.end.clone()))
            .collect();
        assert_eq!(
            tuples,
            vec![
                (2, ti(4), Rational::new(15, 2)),
                (3, Rational::new(15, 2), Rational::new(21, 2)),
                (1, Rational::new(21, 2), ti(11)),
            ]
        );
        let gap = ti(12) - ti(11);
        assert!(gap > Rational::new(1, 2) * ti(1));
        let spt_total = stretch_report(&spt).unwrap().total;
        let omms_total = stretch_report(&omms).unwrap().total;
        assert_eq!(spt_total, ti(8));
        assert_eq!(omms_total, Rational::new(77, 12));
        // The summed allowance (1 - 1/m) n does not absorb the gap either.
        assert!(&spt_total - &omms_total > Rational::new(3, 2));
    }

    #[test]
    fn omms_can_interleave_blocks() {
        // Three long jobs occupy all machines until 7, exactly when the last
        // job arrives; the tie goes to the shorter newcomer, so the replay
        // order crosses the release-time partition: J4 from the first block
        // runs after J1 from the second, and the first block's span gets an
        // idle hole.
        let instance = inst(3, &[(1, 7, 1), (2, 3, 4), (3, 0, 7), (4, 5, 3), (5, 2, 5)]);
        let v = virtual_instance(&instance);
        let partition: Vec<Vec<JobId>> = partition_blocks(&v)
            .into_iter()
            .map(|b| {
                let mut jobs = b.jobs;
                jobs.sort();
                jobs
            })
            .collect();
        assert_eq!(
            partition,
            vec![
                vec![JobId(2), JobId(3), JobId(4), JobId(5)],
                vec![JobId(1)],
            ]
        );
        let sptm = sptm_schedule(&v);
        assert_eq!(busy_blocks(&sptm), partition);
        let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
        assert_eq!(
            busy_blocks(&omms),
            vec![
                vec![JobId(2), JobId(3), JobId(5)],
                vec![JobId(1), JobId(4)],
            ]
        );
        // J4 belongs to the first block yet completes after the second
        // block's release.
        assert!(omms.completions()[&JobId(4)] > ti(7));
    }

    #[test]
    fn subset_ratio_and_dump_shapes() {
        let instance = inst(2, &[(1, 0, 6), (2, 0, 2), (3, 9, 3)]);
        assert_eq!(
            jobs_delta_ratio(&instance, &[JobId(1), JobId(2)]),
            ti(3)
        );
        assert_eq!(jobs_delta_ratio(&instance, &[JobId(3)]), ti(1));
        let virtual_ = virtual_instance(&instance);
        let sptm = sptm_schedule(&virtual_);
        let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
        let dump = blocks_dump(&virtual_, &sptm, &omms);
        let text = serde_json::to_string(&dump).unwrap();
        assert!(text.contains("\"delta\":\"3/1\""));
        assert!(text.contains("\"machines\":2"));
        // Block 0 holds jobs 1 and 2; both constructions order them the same
        // way on this instance, so the completion spans coincide at 1 and 4.
        assert!(text.contains("\"sptm_first_completion\":\"1/1\""));
        assert!(text.contains("\"sptm_last_completion\":\"4/1\""));
        assert!(text.contains("\"omms_first_completion\":\"1/1\""));
        assert!(text.contains("\"omms_last_completion\":\"4/1\""));
    }

    #[test]
    fn delta_scope_round_trips() {
        assert_eq!("global".parse::<DeltaScope>().unwrap(), DeltaScope::Global);
        assert_eq!("block".parse::<DeltaScope>().unwrap(), DeltaScope::Block);
        assert!("per-block".parse::<DeltaScope>().is_err());
        assert_eq!(DeltaScope::Block.to_string(), "block");
        assert_eq!(
            serde_json::to_string(&DeltaScope::Global).unwrap(),
            "\"global\""
        );
    }

    fn parallel_instances() -> impl Strategy<Value = (Instance, u32)> {
        (1u32..=3, proptest::collection::vec((0u8..=16, 1u8..=8), 1..=8)).prop_map(
            |(machines, pairs)| {
                let jobs = pairs
                    .iter()
                    .enumerate()
                    .map(|(i, (r, p))| {
                        Job::new(i as u32 + 1, Time::from_int(*r as i64), Time::from_int(*p as i64))
                    })
                    .collect();
                (Instance::new(machines, jobs).unwrap(), machines)
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn virtual_schedules_validate((instance, _m) in parallel_instances()) {
            let v = virtual_instance(&instance);
            let sptm = sptm_schedule(&v);
            let omms = omms_schedule(&spt_schedule(&instance)).unwrap();
            let dsptm = dsptm_schedule(&sptm, &delta_ratio(&instance)).unwrap();
            prop_assert!(validate_schedule(&sptm).is_ok());
            prop_assert!(validate_schedule(&omms).is_ok());
            prop_assert!(validate_schedule(&dsptm).is_ok());
        }

        #[test]
        fn both_schedules_run_jobs_in_one_piece((instance, m) in parallel_instances()) {
            // Each job occupies one contiguous slot in both schedules, so
            // the completion gap decomposes exactly into the start gap plus
            // the (1 - 1/m) p_j saved by the faster machine.
            let spt = spt_schedule(&instance);
            let omms = omms_schedule(&spt).unwrap();
            let fraction = Rational::one() - Rational::new(1, m as i64);
            let spt_start = spt.starts();
            let spt_done = spt.completions();
            let omms_start = omms.starts();
            let omms_done = omms.completions();
            for job in instance.jobs() {
                let completion_gap = &spt_done[&job.id] - &omms_done[&job.id];
                let start_gap = &spt_start[&job.id] - &omms_start[&job.id];
                prop_assert_eq!(
                    completion_gap,
                    start_gap + &fraction * &job.processing
                );
            }
        }

        #[test]
        fn omms_keeps_the_replay_order((instance, _m) in parallel_instances()) {
            let spt = spt_schedule(&instance);
            let omms = omms_schedule(&spt).unwrap();
            let spt_starts = spt.starts();
            for pair in omms.segments.windows(2) {
                // Consecutive virtual runs are back to back or separated by
                // a release wait, never overlapping, and follow the
                // (parallel start, processing, id) order.
                prop_assert!(pair[1].start >= pair[0].end);
                if pair[1].start > pair[0].end {
                    prop_assert_eq!(
                        &pair[1].start,
                        &omms.instance.job(pair[1].job).unwrap().release
                    );
                }
                let a = pair[0].job;
                let b = pair[1].job;
                let pa = &omms.instance.job(a).unwrap().processing;
                let pb = &omms.instance.job(b).unwrap().processing;
                let key_a = (&spt_starts[&a], pa, a);
                let key_b = (&spt_starts[&b], pb, b);
                prop_assert!(key_a < key_b);
            }
        }

        #[test]
        fn sptm_busy_periods_match_the_partition((instance, _m) in parallel_instances()) {
            let v = virtual_instance(&instance);
            let expected: Vec<Vec<JobId>> = partition_blocks(&v)
                .into_iter()
                .map(|b| {
                    let mut jobs = b.jobs;
                    jobs.sort();
                    jobs
                })
                .collect();
            let sptm = sptm_schedule(&v);
            prop_assert_eq!(busy_blocks(&sptm), expected);
        }

        #[test]
        fn sptm_blocks_complete_before_the_next_block_arrives(
            (instance, _m) in parallel_instances()
        ) {
            let v = virtual_instance(&instance);
            let blocks = partition_blocks(&v);
            let sptm = sptm_schedule(&v);
            let done = sptm.completions();
            for pair in blocks.windows(2) {
                let next_release = &pair[1].release;
                for job in &pair[0].jobs {
                    prop_assert!(&done[job] <= next_release);
                }
            }
        }

        #[test]
        fn sptm_runs_each_block_compactly_from_its_release(
            (instance, _m) in parallel_instances()
        ) {
            let v = virtual_instance(&instance);
            let sptm = sptm_schedule(&v);
            let starts = sptm.starts();
            let done = sptm.completions();
            for block in partition_blocks(&v) {
                let work: Time = block
                    .jobs
                    .iter()
                    .map(|j| v.scaled.job(*j).unwrap().processing.clone())
                    .sum();
                let span_end = &block.release + &work;
                for job in &block.jobs {
                    prop_assert!(starts[job] >= block.release);
                    prop_assert!(done[job] <= span_end);
                }
            }
        }

        #[test]
        fn dsptm_is_sptm_plus_the_shift((instance, _m) in parallel_instances()) {
            let delta = delta_ratio(&instance);
            let sptm = sptm_schedule(&virtual_instance(&instance));
            let dsptm = dsptm_schedule(&sptm, &delta).unwrap();
            let shift = &delta - &delta.recip();
            let before = sptm.completions();
            for (job, after) in dsptm.completions() {
                prop_assert_eq!(after, &before[&job] + &shift);
            }
        }
    }
}
