//! Stretch-minimizing schedulers with exact arithmetic.
//!
//! Jobs arrive over time and are scheduled on one machine or on `m`
//! identical machines; the objective is total *stretch*, the flow time of
//! each job divided by its processing time. This crate implements the
//! policies, the transformations between them, brute-force optimal oracles,
//! seeded instance generators, and a verification harness that replays the
//! competitive guarantees connecting all of these as exact rational
//! inequalities on concrete instances.
//!
//! # Layout
//!
//! - [`rational`]: exact arithmetic; every time and ratio is a reduced
//!   big-integer fraction.
//! - [`model`]: jobs, instances, schedules, validation and the stretch
//!   objective.
//! - [`single`]: the preemptive SRPT rule and the non-preemptive,
//!   non-waiting SPT rule.
//! - [`forest`]: SRPT active intervals, the containment forest over them,
//!   and the preemption-free POS schedule read off that forest.
//! - [`parallel`]: the speed-`m` virtual machine, the OMMS / SPTM / D-SPTM
//!   constructions and release blocks.
//! - [`oracle`]: brute-force optima, swap-delta audits and ratio bound
//!   certificates.
//! - [`gen`]: seeded deterministic instance generators and adversarial
//!   families.
//! - [`verify`]: batch check runner and its JSON / CSV reports.

pub mod error;
pub mod forest;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod parallel;
pub mod rational;
pub mod single;
pub mod verify;

pub use error::{Error, Result};
pub use gen::{adversarial_family, random_instance, GenConfig, SplitMix64, SpreadMode, FAMILY_NAMES};
pub use model::{
    delta_ratio, gantt_csv, is_compact, schedule_file, stretch_report, validate_schedule,
    Instance, Job, JobId, JobStretch, Policy, Schedule, ScheduleFile, Segment,
    StretchDenominator, StretchReport, ValidationReport, Violation,
};
pub use rational::{Rational, Time};
pub use verify::{
    check_instance, report_csv, report_json, run_verify, CheckId, CheckReport, CheckRow,
    CheckSummary, Counterexample, InstanceRow, PolicyTotals, Verdict, VerifyConfig,
};
