use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of a run's statistics stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Generation (abstract and robot models) or evaluation count (NEAT).
    pub checkpoint: u64,
    pub pop_size: u64,
    pub pop_mean_evolvability: f64,
    pub niche_mean_evolvability: f64,
    pub occupied_niches: u64,
    pub cumulative_individuals: u64,
}

impl Checkpoint {
    pub fn new(checkpoint: u64, cumulative_individuals: u64, stats: SnapshotStats) -> Self {
        Checkpoint {
            checkpoint,
            pop_size: stats.pop_size,
            pop_mean_evolvability: stats.pop_mean,
            niche_mean_evolvability: stats.niche_mean,
            occupied_niches: stats.occupied,
            cumulative_individuals,
        }
    }
}

/// Population summary at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotStats {
    pub pop_size: u64,
    pub pop_mean: f64,
    pub niche_mean: f64,
    pub occupied: u64,
}

impl SnapshotStats {
    /// Summarizes a population whose niches are dense indices below `niches`.
    /// Accumulation runs in index order so the result is reproducible bit for bit.
    pub fn from_cells(
        members: impl IntoIterator<Item = (usize, f64)>,
        niches: usize,
    ) -> Result<Self> {
        let mut sums = vec![0.0f64; niches];
        let mut counts = vec![0u64; niches];
        let mut total = 0.0;
        let mut n = 0u64;
        for (cell, e) in members {
            sums[cell] += e;
            counts[cell] += 1;
            total += e;
            n += 1;
        }
        Self::from_accumulators(&sums, &counts, total, n)
    }

    pub(crate) fn from_accumulators(
        sums: &[f64],
        counts: &[u64],
        total: f64,
        n: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("statistics of an empty population"));
        }
        let mut niche_total = 0.0;
        let mut occupied = 0u64;
        for (s, &c) in sums.iter().zip(counts) {
            if c > 0 {
                niche_total += s / c as f64;
                occupied += 1;
            }
        }
        Ok(SnapshotStats {
            pop_size: n,
            pop_mean: total / n as f64,
            niche_mean: niche_total / occupied as f64,
            occupied,
        })
    }
}

/// Per-checkpoint statistics of one run, with strictly increasing checkpoints.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    rows: Vec<Checkpoint>,
}

impl RunRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: Checkpoint) {
        if let Some(last) = self.rows.last() {
            assert!(
                row.checkpoint > last.checkpoint,
                "checkpoints must increase ({} after {})",
                row.checkpoint,
                last.checkpoint
            );
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Checkpoint] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&Checkpoint> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&Checkpoint> {
        self.rows.last()
    }

    pub fn at(&self, checkpoint: u64) -> Option<&Checkpoint> {
        self.rows
            .binary_search_by_key(&checkpoint, |r| r.checkpoint)
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn schedule(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.checkpoint).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "checkpoint",
                "pop_size",
                "pop_mean_evolvability",
                "niche_mean_evolvability",
                "occupied_niches",
                "cumulative_individuals",
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut record = RunRecord::new();
        for row in rdr.deserialize() {
            let row: Checkpoint = row?;
            if record.last().is_some_and(|l| l.checkpoint >= row.checkpoint) {
                return Err(Error::invalid("run record checkpoints are not increasing"));
            }
            record.rows.push(row);
        }
        Ok(record)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}
