use std::io::Write;

use serde::{Deserialize, Serialize};

use super::record::RunRecord;
use super::stats::{mean, standard_error};
use crate::error::{Error, Result};

/// Pointwise mean and standard error across runs at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub checkpoint: u64,
    pub runs: u64,
    pub pop_size_mean: f64,
    pub pop_size_se: f64,
    pub pop_mean_evolvability_mean: f64,
    pub pop_mean_evolvability_se: f64,
    pub niche_mean_evolvability_mean: f64,
    pub niche_mean_evolvability_se: f64,
    pub occupied_niches_mean: f64,
    pub occupied_niches_se: f64,
    pub cumulative_individuals_mean: f64,
    pub cumulative_individuals_se: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateSeries {
    pub rows: Vec<AggregateRow>,
}

impl AggregateSeries {
    pub fn last(&self) -> Option<&AggregateRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub fn aggregate_runs(records: &[RunRecord]) -> Result<AggregateSeries> {
    let Some(first) = records.first() else {
        return Err(Error::invalid("no runs to aggregate"));
    };
    let schedule = first.schedule();
    if let Some((i, _)) = records
        .iter()
        .enumerate()
        .find(|(_, r)| r.schedule() != schedule)
    {
        return Err(Error::invalid(format!(
            "run {i} has a checkpoint schedule different from run 0"
        )));
    }
    let mut rows = Vec::with_capacity(schedule.len());
    let mut buf = Vec::with_capacity(records.len());
    for (k, &checkpoint) in schedule.iter().enumerate() {
        let mut stat = |f: &dyn Fn(usize) -> f64| {
            buf.clear();
            buf.extend((0..records.len()).map(f));
            (mean(&buf), standard_error(&buf))
        };
        let row = |i: usize| &records[i].rows()[k];
        let (pop_size_mean, pop_size_se) = stat(&|i| row(i).pop_size as f64);
        let (pm, pse) = stat(&|i| row(i).pop_mean_evolvability);
        let (nm, nse) = stat(&|i| row(i).niche_mean_evolvability);
        let (om, ose) = stat(&|i| row(i).occupied_niches as f64);
        let (cm, cse) = stat(&|i| row(i).cumulative_individuals as f64);
        rows.push(AggregateRow {
            checkpoint,
            runs: records.len() as u64,
            pop_size_mean,
            pop_size_se,
            pop_mean_evolvability_mean: pm,
            pop_mean_evolvability_se: pse,
            niche_mean_evolvability_mean: nm,
            niche_mean_evolvability_se: nse,
            occupied_niches_mean: om,
            occupied_niches_se: ose,
            cumulative_individuals_mean: cm,
            cumulative_individuals_se: cse,
        });
    }
    Ok(AggregateSeries { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Checkpoint;

    fn constant_run(value: f64, checkpoints: &[u64]) -> RunRecord {
        let mut r = RunRecord::new();
        for &c in checkpoints {
            r.push(Checkpoint {
                checkpoint: c,
                pop_size: 10,
                pop_mean_evolvability: value,
                niche_mean_evolvability: value,
                occupied_niches: 1,
                cumulative_individuals: 10 * (c + 1),
            });
        }
        r
    }

    #[test]
    fn single_run_has_zero_error() {
        let run = constant_run(0.3, &[0, 10, 20]);
        let agg = aggregate_runs(std::slice::from_ref(&run)).unwrap();
        for (row, src) in agg.rows.iter().zip(run.rows()) {
            assert_eq!(row.pop_mean_evolvability_mean, src.pop_mean_evolvability);
            assert_eq!(row.pop_mean_evolvability_se, 0.0);
        }
    }

    #[test]
    fn two_constant_runs_average() {
        let agg = aggregate_runs(&[constant_run(0.04, &[0, 10]), constant_run(0.06, &[0, 10])])
            .unwrap();
        for row in &agg.rows {
            assert!((row.pop_mean_evolvability_mean - 0.05).abs() < 1e-15);
            assert!((row.niche_mean_evolvability_mean - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_runs_have_zero_error() {
        let runs: Vec<_> = (0..50).map(|_| constant_run(0.11, &[0, 10, 20])).collect();
        let agg = aggregate_runs(&runs).unwrap();
        assert!(agg.rows.iter().all(|r| r.pop_mean_evolvability_se == 0.0
            && r.niche_mean_evolvability_se == 0.0
            && r.runs == 50));
    }

    #[test]
    fn mismatched_schedules_rejected() {
        let err = aggregate_runs(&[constant_run(0.1, &[0, 10]), constant_run(0.1, &[0, 20])]);
        assert!(err.is_err());
        assert!(aggregate_runs(&[]).is_err());
    }
}
