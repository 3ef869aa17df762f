//! Seeded randomized runs of the bound checks, and their CSV reports.

use std::io::Write;

use super::deviation::{average_deviation, check_theorem1, check_theorem2, multi_bound_is_tighter, random_deviation_instance};
use super::smoothness::{check_theorem3, random_smoothness_instance};
use super::spin::SpinGameTrace;
use crate::error::Result;
use crate::harness::writer;
use crate::seeds::{rng_for, SeedRole};

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationRow {
    pub instance: usize,
    pub n: usize,
    pub num_types: usize,
    pub lhs_single: f64,
    pub lhs_multi: f64,
    pub rhs_single: f64,
    pub rhs_multi: f64,
    pub holds_single: bool,
    pub holds_multi: bool,
    pub multi_tighter: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessRow {
    pub instance: usize,
    pub subsets: usize,
    pub zero_hessian: bool,
    pub error: f64,
    pub lipschitz: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub holds: bool,
    pub squared_bound: f64,
    pub holds_squared: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSummary {
    pub instances: usize,
    pub violations: usize,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.instances > 0 && self.violations == 0
    }
}

/// Instance `i` draws from its own stream, so a suite of any size shares
/// its prefix with larger ones.
pub fn deviation_suite(instances: usize, seed: u64) -> Result<Vec<DeviationRow>> {
    (0..instances)
        .map(|i| {
            let mut rng = rng_for(seed, SeedRole::Analysis, i as u64);
            let (actions, types, num_types) = random_deviation_instance::<f64, _>(&mut rng);
            let report = average_deviation(&actions, &types, num_types)?;
            let t1 = check_theorem1(&report);
            let t2 = check_theorem2(&report);
            Ok(DeviationRow {
                instance: i,
                n: report.n,
                num_types,
                lhs_single: report.lhs_single,
                lhs_multi: report.lhs_multi,
                rhs_single: report.rhs_single,
                rhs_multi: report.rhs_multi,
                holds_single: t1.holds,
                holds_multi: t2.holds,
                multi_tighter: multi_bound_is_tighter(&report),
            })
        })
        .collect()
}

/// Every tenth instance has zero Hessians.
pub fn smoothness_suite(instances: usize, seed: u64) -> Result<Vec<SmoothnessRow>> {
    (0..instances)
        .map(|i| {
            let mut rng = rng_for(seed, SeedRole::Analysis, i as u64);
            let zero_hessian = i % 10 == 9;
            let inst = random_smoothness_instance::<f64, _>(&mut rng, zero_hessian);
            let c = check_theorem3(&inst)?;
            Ok(SmoothnessRow {
                instance: i,
                subsets: inst.subsets.len(),
                zero_hessian,
                error: c.error,
                lipschitz: c.lipschitz,
                epsilon: c.epsilon,
                bound: c.bound,
                holds: c.holds,
                squared_bound: c.squared_bound,
                holds_squared: c.holds_squared,
            })
        })
        .collect()
}

pub fn summarize<T>(rows: &[T], holds: impl Fn(&T) -> bool) -> SuiteSummary {
    SuiteSummary {
        instances: rows.len(),
        violations: rows.iter().filter(|r| !holds(r)).count(),
    }
}

pub fn write_deviation_csv<W: Write>(out: W, rows: &[DeviationRow]) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "instance",
        "n",
        "types",
        "lhs_single",
        "lhs_multi",
        "rhs_single",
        "rhs_multi",
        "holds_single",
        "holds_multi",
        "multi_tighter",
    ])?;
    for r in rows {
        w.write_record([
            r.instance.to_string(),
            r.n.to_string(),
            r.num_types.to_string(),
            r.lhs_single.to_string(),
            r.lhs_multi.to_string(),
            r.rhs_single.to_string(),
            r.rhs_multi.to_string(),
            r.holds_single.to_string(),
            r.holds_multi.to_string(),
            r.multi_tighter.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_smoothness_csv<W: Write>(out: W, rows: &[SmoothnessRow]) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "instance",
        "subsets",
        "zero_hessian",
        "error",
        "lipschitz",
        "epsilon",
        "bound",
        "holds",
        "squared_bound",
        "holds_squared",
    ])?;
    for r in rows {
        w.write_record([
            r.instance.to_string(),
            r.subsets.to_string(),
            r.zero_hessian.to_string(),
            r.error.to_string(),
            r.lipschitz.to_string(),
            r.epsilon.to_string(),
            r.bound.to_string(),
            r.holds.to_string(),
            r.squared_bound.to_string(),
            r.holds_squared.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `stage,algorithm,grid,key,q_up,q_down,chosen,correct`; the key lists the
/// up-counts separated by `;`.
pub fn write_spin_csv<W: Write>(out: W, traces: &[SpinGameTrace<f64>]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["stage", "algorithm", "grid", "key", "q_up", "q_down", "chosen", "correct"])?;
    for t in traces {
        for s in &t.stages {
            let key: Vec<String> = s.key.iter().map(usize::to_string).collect();
            w.write_record([
                s.stage.to_string(),
                t.algorithm.to_string(),
                s.grid.name().to_string(),
                key.join(";"),
                s.q_up.to_string(),
                s.q_down.to_string(),
                if s.chosen == super::spin::UP { "up" } else { "down" }.to_string(),
                s.correct.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::Algorithm;

    #[test]
    fn deviation_suite_has_no_violations() {
        let rows = deviation_suite(1000, 7).unwrap();
        assert!(summarize(&rows, |r| r.holds_single).passed());
        assert!(summarize(&rows, |r| r.holds_multi).passed());
        assert!(rows.iter().all(|r| r.multi_tighter));
    }

    #[test]
    fn smoothness_suite_has_no_violations() {
        let rows = smoothness_suite(1000, 7).unwrap();
        assert!(summarize(&rows, |r| r.holds).passed());
        assert!(rows.iter().all(|r| r.holds_squared));
        assert_eq!(rows.iter().filter(|r| r.zero_hessian).count(), 100);
        assert!(rows.iter().filter(|r| r.zero_hessian).all(|r| r.error < 1e-12));
    }

    #[test]
    fn suites_extend_by_prefix() {
        let short = deviation_suite(20, 3).unwrap();
        let long = deviation_suite(40, 3).unwrap();
        assert_eq!(short[..], long[..20]);
    }

    #[test]
    fn spin_csv_layout() {
        let t = crate::analysis::spin_game_trace(Algorithm::Mtmfq, 3, 0.1).unwrap();
        let mut out = Vec::new();
        write_spin_csv(&mut out, &[t]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "stage,algorithm,grid,key,q_up,q_down,chosen,correct");
        assert_eq!(lines[1], "1,mtmfq,A,2;0,0.2,-0.2,up,true");
        assert!(lines[3].starts_with("3,mtmfq,B,0;2,"));
        assert!(lines[3].ends_with(",down,true"));
    }
}
