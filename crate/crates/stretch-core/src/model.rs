//! Jobs, instances, schedules and the stretch objective.
//!
//! A job `j` has a release time `r_j` and a processing time `p_j > 0`. A
//! schedule executes each job in one or more half-open segments `[start,
//! end)`. The flow time is `F_j = C_j - r_j` for completion `C_j`, and the
//! stretch is `s_j = F_j / p_j`: total stretch is exactly the weighted flow
//! time objective with the weights fixed at `w_j = 1/p_j`.
//!
//! Schedules built on the speed-`m` virtual machine keep the original
//! instance attached and record the speed; their per-job work accounting and
//! stretch denominators go through that speed factor.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{ratio_string, Rational, Time};

/// Identifier of a job within one instance. Small, dense integers.
#[derive(
    Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Debug,
)]
#[serde(transparent)]
pub struct JobId(pub u32);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub release: Time,
    pub processing: Time,
}

impl Job {
    pub fn new(id: u32, release: Time, processing: Time) -> Self {
        Job {
            id: JobId(id),
            release,
            processing,
        }
    }
}

/// A validated scheduling instance: at least one job, unique ids, positive
/// processing times, nonnegative releases, at least one machine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    machines: u32,
    jobs: Vec<Job>,
}

#[derive(Deserialize)]
struct RawInstance {
    machines: u32,
    jobs: Vec<Job>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;
    fn try_from(raw: RawInstance) -> Result<Self> {
        Instance::new(raw.machines, raw.jobs)
    }
}

impl Instance {
    pub fn new(machines: u32, jobs: Vec<Job>) -> Result<Self> {
        if machines == 0 {
            return Err(Error::NoMachines);
        }
        if jobs.is_empty() {
            return Err(Error::EmptyInstance);
        }
        let mut seen = std::collections::BTreeSet::new();
        for job in &jobs {
            if !seen.insert(job.id) {
                return Err(Error::DuplicateJobId(job.id));
            }
            if !job.processing.is_positive() {
                return Err(Error::NonPositiveProcessing(job.id));
            }
            if job.release.is_negative() {
                return Err(Error::NegativeRelease(job.id));
            }
        }
        Ok(Instance { machines, jobs })
    }

    pub fn machines(&self) -> u32 {
        self.machines
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn total_processing(&self) -> Time {
        self.jobs.iter().map(|j| &j.processing).sum()
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }
}

/// Ratio of the longest to the shortest processing time. Instances are
/// never empty, so this is total.
pub fn delta_ratio(instance: &Instance) -> Rational {
    let mut longest = instance.jobs()[0].processing.clone();
    let mut shortest = longest.clone();
    for job in instance.jobs() {
        if job.processing > longest {
            longest = job.processing.clone();
        }
        if job.processing < shortest {
            shortest = job.processing.clone();
        }
    }
    longest / shortest
}

/// Which policy produced a schedule. Downstream constructions check this to
/// refuse inputs they were not designed for.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Srpt,
    Spt,
    Pos,
    Omms,
    Sptm,
    DSptm,
    Opt,
}

impl Policy {
    pub const ALL: [Policy; 7] = [
        Policy::Srpt,
        Policy::Spt,
        Policy::Pos,
        Policy::Omms,
        Policy::Sptm,
        Policy::DSptm,
        Policy::Opt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Srpt => "srpt",
            Policy::Spt => "spt",
            Policy::Pos => "pos",
            Policy::Omms => "omms",
            Policy::Sptm => "sptm",
            Policy::DSptm => "dsptm",
            Policy::Opt => "opt",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown policy {s:?}")))
    }
}

/// Which processing time divides the flow time in a stretch report.
///
/// Schedules on real machines use the job's own processing time. For
/// schedules on the speed-`m` virtual machine both conventions are
/// meaningful; this crate fixes the original-processing convention there,
/// so virtual-machine stretches can drop below 1.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StretchDenominator {
    OriginalProcessing,
    ScaledProcessing,
}

/// One contiguous execution of a job: half-open interval `[start, end)` on
/// one machine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub job: JobId,
    pub machine: u32,
    #[serde(with = "ratio_string")]
    pub start: Time,
    #[serde(with = "ratio_string")]
    pub end: Time,
}

impl Segment {
    pub fn length(&self) -> Time {
        &self.end - &self.start
    }
}

/// A schedule for an instance, tagged with the policy that produced it.
///
/// `machines` is the number of machines the schedule itself runs on, which
/// is 1 for virtual-machine schedules even when the instance has more.
/// `speed` is the execution speed of those machines: a segment of length
/// `len` performs `len * speed` units of work.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub instance: Instance,
    pub policy: Policy,
    pub machines: u32,
    pub speed: Rational,
    pub preemptive: bool,
    pub convention: StretchDenominator,
    pub segments: Vec<Segment>,
}

impl Schedule {
    /// Completion time of each job: latest segment end.
    pub fn completions(&self) -> BTreeMap<JobId, Time> {
        let mut out: BTreeMap<JobId, Time> = BTreeMap::new();
        for seg in &self.segments {
            match out.get(&seg.job) {
                Some(cur) if *cur >= seg.end => {}
                _ => {
                    out.insert(seg.job, seg.end.clone());
                }
            }
        }
        out
    }

    /// First start of each job: earliest segment start.
    pub fn starts(&self) -> BTreeMap<JobId, Time> {
        let mut out: BTreeMap<JobId, Time> = BTreeMap::new();
        for seg in &self.segments {
            match out.get(&seg.job) {
                Some(cur) if *cur <= seg.start => {}
                _ => {
                    out.insert(seg.job, seg.start.clone());
                }
            }
        }
        out
    }

    pub fn makespan(&self) -> Time {
        self.segments
            .iter()
            .map(|s| s.end.clone())
            .max()
            .unwrap_or_else(Time::zero)
    }
}

/// A single defect found by [`validate_schedule`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    UnknownJob {
        job: JobId,
    },
    BadMachine {
        job: JobId,
        machine: u32,
        machines: u32,
    },
    EmptySegment {
        job: JobId,
        at: Time,
    },
    StartsBeforeRelease {
        job: JobId,
        start: Time,
        release: Time,
    },
    MachineOverlap {
        machine: u32,
        first: JobId,
        second: JobId,
    },
    JobSelfOverlap {
        job: JobId,
    },
    WorkMismatch {
        job: JobId,
        executed: Time,
        required: Time,
    },
    MissingJob {
        job: JobId,
    },
    MultipleSegments {
        job: JobId,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownJob { job } => write!(f, "segment refers to unknown job {job}"),
            Violation::BadMachine {
                job,
                machine,
                machines,
            } => write!(
                f,
                "job {job} assigned to machine {machine}, schedule has {machines}"
            ),
            Violation::EmptySegment { job, at } => {
                write!(f, "job {job} has an empty or reversed segment at {at}")
            }
            Violation::StartsBeforeRelease {
                job,
                start,
                release,
            } => write!(f, "job {job} starts at {start} before release {release}"),
            Violation::MachineOverlap {
                machine,
                first,
                second,
            } => write!(
                f,
                "machine {machine} runs jobs {first} and {second} at the same time"
            ),
            Violation::JobSelfOverlap { job } => {
                write!(f, "job {job} runs on two machines at the same time")
            }
            Violation::WorkMismatch {
                job,
                executed,
                required,
            } => write!(
                f,
                "job {job} executes {executed} units of work, needs {required}"
            ),
            Violation::MissingJob { job } => write!(f, "job {job} never runs"),
            Violation::MultipleSegments { job, count } => write!(
                f,
                "non-preemptive schedule splits job {job} into {count} segments"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let texts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&texts.join("; "))
    }
}

/// Checks a schedule against its instance: every job fully executed exactly
/// once (per the speed factor), no machine runs two jobs at once, nothing
/// starts before its release, and non-preemptive schedules keep one segment
/// per job.
pub fn validate_schedule(schedule: &Schedule) -> ValidationReport {
    let mut violations = Vec::new();
    let instance = &schedule.instance;

    for seg in &schedule.segments {
        if instance.job(seg.job).is_none() {
            violations.push(Violation::UnknownJob { job: seg.job });
        }
        if seg.machine >= schedule.machines {
            violations.push(Violation::BadMachine {
                job: seg.job,
                machine: seg.machine,
                machines: schedule.machines,
            });
        }
        if seg.start >= seg.end {
            violations.push(Violation::EmptySegment {
                job: seg.job,
                at: seg.start.clone(),
            });
        }
        if let Some(job) = instance.job(seg.job) {
            if seg.start < job.release {
                violations.push(Violation::StartsBeforeRelease {
                    job: seg.job,
                    start: seg.start.clone(),
                    release: job.release.clone(),
                });
            }
        }
    }

    // Per-machine overlaps.
    for machine in 0..schedule.machines {
        let mut segs: Vec<&Segment> = schedule
            .segments
            .iter()
            .filter(|s| s.machine == machine)
            .collect();
        segs.sort_by(|a, b| a.start.cmp(&b.start).then(a.end.cmp(&b.end)));
        for pair in segs.windows(2) {
            if pair[0].end > pair[1].start {
                violations.push(Violation::MachineOverlap {
                    machine,
                    first: pair[0].job,
                    second: pair[1].job,
                });
            }
        }
    }

    // Per-job accounting.
    for job in instance.jobs() {
        let mut segs: Vec<&Segment> = schedule
            .segments
            .iter()
            .filter(|s| s.job == job.id)
            .collect();
        if segs.is_empty() {
            violations.push(Violation::MissingJob { job: job.id });
            continue;
        }
        segs.sort_by(|a, b| a.start.cmp(&b.start));
        for pair in segs.windows(2) {
            if pair[0].end > pair[1].start {
                violations.push(Violation::JobSelfOverlap { job: job.id });
                break;
            }
        }
        if !schedule.preemptive && segs.len() > 1 {
            violations.push(Violation::MultipleSegments {
                job: job.id,
                count: segs.len(),
            });
        }
        let executed: Time = segs
            .iter()
            .map(|s| s.length())
            .sum::<Time>()
            * &schedule.speed;
        if executed != job.processing {
            violations.push(Violation::WorkMismatch {
                job: job.id,
                executed,
                required: job.processing.clone(),
            });
        }
    }

    ValidationReport { violations }
}

/// Stretch of one job inside a [`StretchReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobStretch {
    pub job: JobId,
    #[serde(with = "ratio_string")]
    pub completion: Time,
    #[serde(with = "ratio_string")]
    pub flow: Time,
    #[serde(with = "ratio_string")]
    pub stretch: Rational,
}

/// Per-job completions, flows and stretches plus their exact total, sorted
/// by job id so the report does not depend on segment order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StretchReport {
    pub rows: Vec<JobStretch>,
    #[serde(with = "ratio_string")]
    pub total: Rational,
    pub convention: StretchDenominator,
}

impl StretchReport {
    /// The objective weights flow time by the reciprocal of processing time.
    pub const WEIGHT_NOTE: &'static str = "total stretch = sum of flow / processing (w = 1/p)";
}

/// Computes the stretch report for a validated schedule; a schedule with
/// validation violations is rejected.
pub fn stretch_report(schedule: &Schedule) -> Result<StretchReport> {
    let validation = validate_schedule(schedule);
    if !validation.is_ok() {
        return Err(Error::InvalidSchedule(validation));
    }
    let completions = schedule.completions();
    let mut jobs: Vec<&Job> = schedule.instance.jobs().iter().collect();
    jobs.sort_by_key(|j| j.id);
    let mut rows = Vec::with_capacity(jobs.len());
    let mut total = Rational::zero();
    for job in jobs {
        let completion = completions[&job.id].clone();
        let flow = &completion - &job.release;
        let denominator = match schedule.convention {
            StretchDenominator::OriginalProcessing => job.processing.clone(),
            StretchDenominator::ScaledProcessing => &job.processing / &schedule.speed,
        };
        let stretch = &flow / &denominator;
        total = total + &stretch;
        rows.push(JobStretch {
            job: job.id,
            completion,
            flow,
            stretch,
        });
    }
    Ok(StretchReport {
        rows,
        total,
        convention: schedule.convention,
    })
}

/// A schedule is compact when no machine sits idle while a job is waiting:
/// at every instant with an idle machine, every released job is either
/// finished or (for non-preemptive schedules) already started. Requires a
/// valid schedule.
pub fn is_compact(schedule: &Schedule) -> Result<bool> {
    let validation = validate_schedule(schedule);
    if !validation.is_ok() {
        return Err(Error::InvalidSchedule(validation));
    }
    let mut boundaries: Vec<Time> = Vec::new();
    for seg in &schedule.segments {
        boundaries.push(seg.start.clone());
        boundaries.push(seg.end.clone());
    }
    for job in schedule.instance.jobs() {
        boundaries.push(job.release.clone());
    }
    boundaries.sort();
    boundaries.dedup();

    let starts = schedule.starts();
    let completions = schedule.completions();

    for window in boundaries.windows(2) {
        let (t1, t2) = (&window[0], &window[1]);
        let busy = schedule
            .segments
            .iter()
            .filter(|s| s.start <= *t1 && s.end >= *t2)
            .count();
        if busy >= schedule.machines as usize {
            continue;
        }
        // Some machine is idle on [t1, t2); is anything waiting?
        let waiting = schedule.instance.jobs().iter().any(|job| {
            if job.release > *t1 {
                return false;
            }
            if schedule.preemptive {
                // Released, unfinished and not currently running.
                completions[&job.id] > *t1
                    && !schedule
                        .segments
                        .iter()
                        .any(|s| s.job == job.id && s.start <= *t1 && s.end >= *t2)
            } else {
                // Released but not yet started.
                starts[&job.id] >= *t2
            }
        });
        if waiting {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Schedule export shape: metadata, exact segments and the stretch report
/// in one JSON document.
#[derive(Serialize)]
pub struct ScheduleFile<'a> {
    pub policy: Policy,
    pub machines: u32,
    pub speed: &'a Rational,
    pub stretch_denominator: StretchDenominator,
    pub preemptive: bool,
    pub total_stretch: String,
    pub total_stretch_decimal: String,
    pub segments: &'a [Segment],
    pub per_job: &'a [JobStretch],
}

/// Decimal places kept by display-side decimal rendering. Exact values ride
/// along everywhere a decimal is printed.
pub const DISPLAY_DIGITS: usize = 12;

pub fn schedule_file<'a>(schedule: &'a Schedule, report: &'a StretchReport) -> ScheduleFile<'a> {
    ScheduleFile {
        policy: schedule.policy,
        machines: schedule.machines,
        speed: &schedule.speed,
        stretch_denominator: schedule.convention,
        preemptive: schedule.preemptive,
        total_stretch: report.total.to_string(),
        total_stretch_decimal: report.total.decimal(DISPLAY_DIGITS),
        segments: &schedule.segments,
        per_job: &report.rows,
    }
}

/// Gantt rows: `job,machine,start,end` in decimals plus the exact fractions.
pub fn gantt_csv(schedule: &Schedule) -> String {
    let mut segments: Vec<&Segment> = schedule.segments.iter().collect();
    segments.sort_by(|a, b| {
        a.start
            .cmp(&b.start)
            .then(a.machine.cmp(&b.machine))
            .then(a.job.cmp(&b.job))
    });
    let mut out = String::from("job,machine,start,end,start_exact,end_exact\n");
    for seg in segments {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            seg.job,
            seg.machine,
            seg.start.decimal(DISPLAY_DIGITS),
            seg.end.decimal(DISPLAY_DIGITS),
            seg.start,
            seg.end
        ));
    }
    out
}
