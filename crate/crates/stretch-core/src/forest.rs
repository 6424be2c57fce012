//! Active intervals of an SRPT run and the containment forest over them.
//!
//! The active interval of job `j` is `I_j = [S_j, C_j)`: from its first
//! start to its completion under SRPT. Preemption only nests work inside
//! intervals, so any two active intervals are either disjoint or one
//! contains the other; scanning them by start time with a containment stack
//! yields an ordered forest (children and roots ordered left to right).
//!
//! [`pos_schedule`] then serializes each tree without preemption: the root
//! runs first from the tree's start, followed by the remaining tree jobs in
//! the order SRPT completed them, packed back to back. Every tree fills
//! exactly its root's interval, because SRPT is busy with tree jobs for the
//! whole of it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Instance, JobId, Policy, Schedule, Segment, StretchDenominator};
use crate::rational::Time;

/// `[start, end)` span between a job's first start and its completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveInterval {
    pub job: JobId,
    pub start: Time,
    pub end: Time,
}

/// Extracts active intervals from an SRPT schedule, sorted by start time.
/// Schedules produced by any other policy are rejected: the containment
/// structure is an SRPT artifact.
pub fn active_intervals(schedule: &Schedule) -> Result<Vec<ActiveInterval>> {
    if schedule.policy != Policy::Srpt {
        return Err(Error::WrongPolicy {
            expected: Policy::Srpt,
            actual: schedule.policy,
        });
    }
    let starts = schedule.starts();
    let completions = schedule.completions();
    let mut intervals: Vec<ActiveInterval> = starts
        .iter()
        .map(|(job, start)| ActiveInterval {
            job: *job,
            start: start.clone(),
            end: completions[job].clone(),
        })
        .collect();
    intervals.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
    Ok(intervals)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestNode {
    pub job: JobId,
    pub parent: Option<JobId>,
    /// Direct children ordered by interval start (left to right).
    pub children: Vec<JobId>,
    pub start: Time,
    pub end: Time,
}

/// Containment forest over active intervals. Roots and children are ordered
/// left to right by interval start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedForest {
    nodes: Vec<ForestNode>,
    roots: Vec<JobId>,
    index: BTreeMap<JobId, usize>,
}

impl OrderedForest {
    pub fn roots(&self) -> &[JobId] {
        &self.roots
    }

    /// Nodes in interval start order.
    pub fn nodes(&self) -> &[ForestNode] {
        &self.nodes
    }

    pub fn node(&self, job: JobId) -> Option<&ForestNode> {
        self.index.get(&job).map(|&i| &self.nodes[i])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All jobs of the tree rooted at `root`, preorder, children left to
    /// right.
    pub fn tree_jobs(&self, root: JobId) -> Vec<JobId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(job) = stack.pop() {
            out.push(job);
            if let Some(node) = self.node(job) {
                for child in node.children.iter().rev() {
                    stack.push(*child);
                }
            }
        }
        out
    }

    /// Edges from the root to `job`, counting the root as depth 0.
    pub fn depth(&self, job: JobId) -> usize {
        let mut d = 0;
        let mut cur = job;
        while let Some(parent) = self.node(cur).and_then(|n| n.parent) {
            d += 1;
            cur = parent;
        }
        d
    }
}

/// Builds the containment forest. Fails with a laminarity violation when
/// two intervals overlap without one containing the other, naming the
/// offending pair.
pub fn build_forest(intervals: &[ActiveInterval]) -> Result<OrderedForest> {
    let mut sorted: Vec<&ActiveInterval> = intervals.iter().collect();
    sorted.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));

    let mut nodes: Vec<ForestNode> = Vec::with_capacity(sorted.len());
    let mut roots: Vec<JobId> = Vec::new();
    let mut index: BTreeMap<JobId, usize> = BTreeMap::new();
    let mut stack: Vec<usize> = Vec::new();

    for interval in sorted {
        while let Some(&top) = stack.last() {
            if nodes[top].end <= interval.start {
                stack.pop();
            } else {
                break;
            }
        }
        let parent = match stack.last() {
            Some(&top) => {
                if interval.end > nodes[top].end {
                    return Err(Error::LaminarityViolation {
                        a: nodes[top].job,
                        b: interval.job,
                    });
                }
                Some(nodes[top].job)
            }
            None => None,
        };
        let this = nodes.len();
        nodes.push(ForestNode {
            job: interval.job,
            parent,
            children: Vec::new(),
            start: interval.start.clone(),
            end: interval.end.clone(),
        });
        index.insert(interval.job, this);
        match stack.last() {
            Some(&top) => nodes[top].children.push(interval.job),
            None => roots.push(interval.job),
        }
        stack.push(this);
    }

    Ok(OrderedForest {
        nodes,
        roots,
        index,
    })
}

fn forest_matches(forest: &OrderedForest, intervals: &[ActiveInterval]) -> bool {
    if forest.len() != intervals.len() {
        return false;
    }
    intervals.iter().all(|iv| {
        forest
            .node(iv.job)
            .is_some_and(|n| n.start == iv.start && n.end == iv.end)
    })
}

/// Preemption-free schedule read off the forest: per tree, root first, then
/// the other tree jobs by increasing SRPT completion time (ties: smaller
/// processing time, then smaller id), packed back to back from the root's
/// start; trees in root order. The forest must describe exactly the given
/// SRPT schedule.
pub fn pos_schedule(forest: &OrderedForest, srpt: &Schedule) -> Result<Schedule> {
    let intervals = active_intervals(srpt)?;
    if !forest_matches(forest, &intervals) {
        return Err(Error::ForestMismatch);
    }
    let instance: &Instance = &srpt.instance;
    let mut segments: Vec<Segment> = Vec::with_capacity(instance.n());
    for &root in forest.roots() {
        let root_node = forest.node(root).expect("root is in the forest");
        let mut cursor = root_node.start.clone();
        let mut rest: Vec<JobId> = forest
            .tree_jobs(root)
            .into_iter()
            .filter(|&j| j != root)
            .collect();
        rest.sort_by(|&a, &b| {
            let na = forest.node(a).expect("tree job");
            let nb = forest.node(b).expect("tree job");
            let pa = &instance.job(a).expect("job exists").processing;
            let pb = &instance.job(b).expect("job exists").processing;
            na.end.cmp(&nb.end).then(pa.cmp(pb)).then(a.cmp(&b))
        });
        for job in std::iter::once(root).chain(rest) {
            let p = &instance.job(job).expect("job exists").processing;
            let end = &cursor + p;
            segments.push(Segment {
                job,
                machine: 0,
                start: cursor,
                end: end.clone(),
            });
            cursor = end;
        }
    }
    Ok(Schedule {
        instance: instance.clone(),
        policy: Policy::Pos,
        machines: 1,
        speed: crate::rational::Rational::one(),
        preemptive: false,
        convention: StretchDenominator::OriginalProcessing,
        segments,
    })
}

/// JSON shape behind `--dump-forest`: nodes sorted by job id.
#[derive(Serialize)]
pub struct ForestDump {
    pub roots: Vec<JobId>,
    pub nodes: Vec<ForestDumpNode>,
}

#[derive(Serialize)]
pub struct ForestDumpNode {
    pub job: JobId,
    pub parent: Option<JobId>,
    pub children: Vec<JobId>,
    pub start: String,
    pub end: String,
}

pub fn forest_dump(forest: &OrderedForest) -> ForestDump {
    let mut nodes: Vec<ForestDumpNode> = forest
        .nodes()
        .iter()
        .map(|n| ForestDumpNode {
            job: n.job,
            parent: n.parent,
            children: n.children.clone(),
            start: n.start.to_string(),
            end: n.end.to_string(),
        })
        .collect();
    nodes.sort_by_key(|n| n.job);
    ForestDump {
        roots: forest.roots().to_vec(),
        nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_compact, stretch_report, validate_schedule, Job};
    use crate::rational::Rational;
    use crate::single::srpt_schedule;
    use proptest::prelude::*;

    fn ti(v: i64) -> Time {
        Time::from_int(v)
    }

    fn inst(jobs: &[(u32, i64, i64)]) -> Instance {
        Instance::new(
            1,
            jobs.iter()
                .map(|(id, r, p)| Job::new(*id, ti(*r), ti(*p)))
                .collect(),
        )
        .unwrap()
    }

    fn nested_instance() -> Instance {
        inst(&[(1, 0, 4), (2, 1, 2), (3, 2, 1)])
    }

    #[test]
    fn intervals_of_nested_preemptions() {
        let srpt = srpt_schedule(&nested_instance()).unwrap();
        let intervals = active_intervals(&srpt).unwrap();
        let tuples: Vec<(u32, Time, Time)> = intervals
            .iter()
            .map(|iv| (iv.job.0, iv.start.clone(), iv.end.clone()))
            .collect();
        assert_eq!(
            tuples,
            vec![
                (1, ti(0), ti(7)),
                (2, ti(1), ti(3)),
                (3, ti(3), ti(4)),
            ]
        );
    }

    #[test]
    fn intervals_reject_non_srpt_schedules() {
        let spt = crate::single::spt_schedule(&nested_instance());
        assert!(matches!(
            active_intervals(&spt),
            Err(Error::WrongPolicy { .. })
        ));
    }

    #[test]
    fn forest_of_nested_preemptions_has_one_tree() {
        let srpt = srpt_schedule(&nested_instance()).unwrap();
        let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
        assert_eq!(forest.roots(), &[JobId(1)]);
        let root = forest.node(JobId(1)).unwrap();
        assert_eq!(root.children, vec![JobId(2), JobId(3)]);
        assert_eq!(forest.node(JobId(2)).unwrap().parent, Some(JobId(1)));
        assert_eq!(forest.node(JobId(3)).unwrap().parent, Some(JobId(1)));
        assert_eq!(forest.tree_jobs(JobId(1)), vec![JobId(1), JobId(2), JobId(3)]);
    }

    #[test]
    fn forest_depth_follows_halving_chain() {
        // Processing times 8,4,2,1 released one apart: J2 nests under J1,
        // and J3, J4 both nest under J2 (J4 cannot preempt J3 on the tie).
        let srpt = srpt_schedule(&inst(&[(1, 0, 8), (2, 1, 4), (3, 2, 2), (4, 3, 1)])).unwrap();
        let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
        assert_eq!(forest.roots(), &[JobId(1)]);
        assert_eq!(forest.node(JobId(1)).unwrap().children, vec![JobId(2)]);
        assert_eq!(
            forest.node(JobId(2)).unwrap().children,
            vec![JobId(3), JobId(4)]
        );
        assert_eq!(forest.depth(JobId(4)), 2);
    }

    #[test]
    fn forest_without_preemption_is_all_roots() {
        let srpt = srpt_schedule(&inst(&[(1, 0, 1), (2, 1, 2)])).unwrap();
        let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
        assert_eq!(forest.roots(), &[JobId(1), JobId(2)]);
        assert!(forest.nodes().iter().all(|n| n.children.is_empty()));
    }

    #[test]
    fn partial_overlap_is_a_laminarity_violation() {
        let intervals = vec![
            ActiveInterval {
                job: JobId(1),
                start: ti(0),
                end: ti(2),
            },
            ActiveInterval {
                job: JobId(2),
                start: ti(1),
                end: ti(3),
            },
        ];
        assert!(matches!(
            build_forest(&intervals),
            Err(Error::LaminarityViolation {
                a: JobId(1),
                b: JobId(2)
            })
        ));
    }

    #[test]
    fn pos_serializes_each_tree_from_its_root() {
        let srpt = srpt_schedule(&nested_instance()).unwrap();
        let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
        let pos = pos_schedule(&forest, &srpt).unwrap();
        let tuples: Vec<(u32, Time, Time)> = pos
            .segments
            .iter()
            .map(|s| (s.job.0, s.start.clone(), s.end.clone()))
            .collect();
        assert_eq!(
            tuples,
            vec![
                (1, ti(0), ti(4)),
                (2, ti(4), ti(6)),
                (3, ti(6), ti(7)),
            ]
        );
        let report = stretch_report(&pos).unwrap();
        assert_eq!(report.rows[0].stretch, ti(1));
        assert_eq!(report.rows[1].stretch, Rational::new(5, 2));
        assert_eq!(report.rows[2].stretch, ti(5));
        assert_eq!(report.total, Rational::new(17, 2));
    }

    #[test]
    fn pos_equals_srpt_when_nothing_preempts() {
        let srpt = srpt_schedule(&inst(&[(1, 0, 1), (2, 1, 2)])).unwrap();
        let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
        let pos = pos_schedule(&forest, &srpt).unwrap();
        assert_eq!(pos.segments.len(), srpt.segments.len());
        for (a, b) in pos.segments.iter().zip(srpt.segments.iter()) {
            assert_eq!((a.job, &a.start, &a.end), (b.job, &b.start, &b.end));
        }
    }

    #[test]
    fn pos_rejects_forest_from_another_schedule() {
        let srpt_a = srpt_schedule(&nested_instance()).unwrap();
        let srpt_b = srpt_schedule(&inst(&[(1, 0, 1), (2, 1, 2)])).unwrap();
        let forest_b = build_forest(&active_intervals(&srpt_b).unwrap()).unwrap();
        assert!(matches!(
            pos_schedule(&forest_b, &srpt_a),
            Err(Error::ForestMismatch)
        ));
    }

    fn grid_instances() -> impl Strategy<Value = Instance> {
        proptest::collection::vec((0u8..=20, 1u8..=10), 1..=8).prop_map(|pairs| {
            let jobs = pairs
                .iter()
                .enumerate()
                .map(|(i, (r, p))| {
                    Job::new(i as u32 + 1, Time::new(*r as i64, 2), Time::new(*p as i64, 2))
                })
                .collect();
            Instance::new(1, jobs).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn intervals_are_always_laminar(instance in grid_instances()) {
            let srpt = srpt_schedule(&instance).unwrap();
            let intervals = active_intervals(&srpt).unwrap();
            prop_assert!(build_forest(&intervals).is_ok());
        }

        #[test]
        fn trees_fill_their_root_intervals(instance in grid_instances()) {
            let srpt = srpt_schedule(&instance).unwrap();
            let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
            for &root in forest.roots() {
                let node = forest.node(root).unwrap();
                let work: Time = forest
                    .tree_jobs(root)
                    .iter()
                    .map(|j| instance.job(*j).unwrap().processing.clone())
                    .sum();
                // SRPT never idles inside a root interval and never runs a
                // job from another tree there.
                prop_assert_eq!(&node.end - &node.start, work);
            }
        }

        #[test]
        fn pos_is_valid_compact_and_tree_contained(instance in grid_instances()) {
            let srpt = srpt_schedule(&instance).unwrap();
            let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
            let pos = pos_schedule(&forest, &srpt).unwrap();
            prop_assert!(validate_schedule(&pos).is_ok());

            // Equivalence of compactness, and containment of each tree's
            // execution within its root interval, in both directions.
            prop_assert_eq!(is_compact(&pos).unwrap(), is_compact(&srpt).unwrap());
            let pos_starts = pos.starts();
            let pos_completions = pos.completions();
            for &root in forest.roots() {
                let node = forest.node(root).unwrap();
                for job in forest.tree_jobs(root) {
                    prop_assert!(pos_starts[&job] >= node.start);
                    prop_assert!(pos_completions[&job] <= node.end);
                }
            }
        }

        #[test]
        fn pos_and_srpt_run_the_same_jobs_in_each_root_window(instance in grid_instances()) {
            let srpt = srpt_schedule(&instance).unwrap();
            let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
            let pos = pos_schedule(&forest, &srpt).unwrap();
            for &root in forest.roots() {
                let node = forest.node(root).unwrap();
                let mut srpt_jobs: Vec<JobId> = srpt
                    .segments
                    .iter()
                    .filter(|s| s.start >= node.start && s.end <= node.end)
                    .map(|s| s.job)
                    .collect();
                srpt_jobs.sort();
                srpt_jobs.dedup();
                let mut pos_jobs: Vec<JobId> = pos
                    .segments
                    .iter()
                    .filter(|s| s.start >= node.start && s.end <= node.end)
                    .map(|s| s.job)
                    .collect();
                pos_jobs.sort();
                let mut tree = forest.tree_jobs(root);
                tree.sort();
                prop_assert_eq!(&srpt_jobs, &tree);
                prop_assert_eq!(&pos_jobs, &tree);
            }
        }

        #[test]
        fn tree_serialization_shifts_are_bounded(instance in grid_instances()) {
            // The root's stretch drops by exactly the tree's non-root work
            // divided by the root's processing time; every other tree job
            // gains at most the root's processing time of extra flow.
            let srpt = srpt_schedule(&instance).unwrap();
            let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
            let pos = pos_schedule(&forest, &srpt).unwrap();
            let srpt_report = stretch_report(&srpt).unwrap();
            let pos_report = stretch_report(&pos).unwrap();
            let srpt_by_job: std::collections::BTreeMap<_, _> =
                srpt_report.rows.iter().map(|r| (r.job, &r.stretch)).collect();
            let pos_by_job: std::collections::BTreeMap<_, _> =
                pos_report.rows.iter().map(|r| (r.job, &r.stretch)).collect();
            for &root in forest.roots() {
                let p_root = &instance.job(root).unwrap().processing;
                let others_work: Time = forest
                    .tree_jobs(root)
                    .iter()
                    .filter(|&&j| j != root)
                    .map(|j| instance.job(*j).unwrap().processing.clone())
                    .sum();
                let expected_root = srpt_by_job[&root] - &(&others_work / p_root);
                prop_assert_eq!(pos_by_job[&root].clone(), expected_root);
                for job in forest.tree_jobs(root) {
                    if job == root {
                        continue;
                    }
                    let p_job = &instance.job(job).unwrap().processing;
                    let limit = srpt_by_job[&job] + &(p_root / p_job);
                    prop_assert!(pos_by_job[&job] <= &limit);
                }
            }
        }

        #[test]
        fn pos_total_is_within_the_srpt_ratio_bound(instance in grid_instances()) {
            let srpt = srpt_schedule(&instance).unwrap();
            let forest = build_forest(&active_intervals(&srpt).unwrap()).unwrap();
            let pos = pos_schedule(&forest, &srpt).unwrap();
            let srpt_total = stretch_report(&srpt).unwrap().total;
            let pos_total = stretch_report(&pos).unwrap().total;
            let delta = crate::model::delta_ratio(&instance);
            let bound = &delta - &delta.recip() + Rational::one();
            prop_assert!(pos_total <= bound * srpt_total);
        }
    }
}
