use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::stats::{pearson, Correlation};
use crate::abstract_models::NichePoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    Manhattan,
}

impl DistanceMetric {
    pub fn distance(self, a: NichePoint, b: NichePoint) -> f64 {
        let dx = (a.x as i64 - b.x as i64) as f64;
        let dy = (a.y as i64 - b.y as i64) as f64;
        match self {
            DistanceMetric::Euclidean => (dx * dx + dy * dy).sqrt(),
            DistanceMetric::Manhattan => dx.abs() + dy.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileBin {
    pub distance: i64,
    pub count: u64,
    pub mean_evolvability: f64,
}

/// Evolvability as a function of distance from the origin niche.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    /// Occupied bins in increasing distance.
    pub bins: Vec<ProfileBin>,
    /// Per-organism correlation of distance with evolvability.
    pub organism_correlation: Correlation,
    /// Correlation of bin distance with bin mean evolvability (the plotted profile).
    pub profile_correlation: Correlation,
}

fn correlation_or_undefined(x: &[f64], y: &[f64]) -> Correlation {
    if x.len() < 3 {
        return Correlation::Undefined { n: x.len() };
    }
    pearson(x, y).unwrap_or(Correlation::Undefined { n: x.len() })
}

/// Bins pooled organisms by distance from `origin` rounded to the nearest
/// integer and correlates distance with evolvability.
pub fn distance_profile(
    pool: &[(NichePoint, f64)],
    origin: NichePoint,
    metric: DistanceMetric,
) -> Result<DistanceProfile> {
    if pool.is_empty() {
        return Err(Error::invalid("distance profile of an empty pool"));
    }
    let mut dist = Vec::with_capacity(pool.len());
    let mut evo = Vec::with_capacity(pool.len());
    let mut bins: BTreeMap<i64, (f64, u64)> = BTreeMap::new();
    for &(p, e) in pool {
        let d = metric.distance(p, origin);
        dist.push(d);
        evo.push(e);
        let b = bins.entry(d.round() as i64).or_insert((0.0, 0));
        b.0 += e;
        b.1 += 1;
    }
    let bins: Vec<ProfileBin> = bins
        .into_iter()
        .map(|(distance, (sum, count))| ProfileBin {
            distance,
            count,
            mean_evolvability: sum / count as f64,
        })
        .collect();
    let bx: Vec<f64> = bins.iter().map(|b| b.distance as f64).collect();
    let by: Vec<f64> = bins.iter().map(|b| b.mean_evolvability).collect();
    Ok(DistanceProfile {
        organism_correlation: correlation_or_undefined(&dist, &evo),
        profile_correlation: correlation_or_undefined(&bx, &by),
        bins,
    })
}

impl DistanceProfile {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for b in &self.bins {
            w.serialize(b)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Mean evolvability per niche over a rectangular window. Row `j` holds niches
/// with `y = origin_y + j`; column `i` holds `x = origin_x + i`. Unoccupied
/// cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMap {
    pub origin_x: i64,
    pub origin_y: i64,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Option<f64>>,
}

impl HeatMap {
    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        self.cells[row * self.width + col]
    }

    fn from_sums(
        origin_x: i64,
        origin_y: i64,
        width: usize,
        height: usize,
        sums: &[(f64, u64)],
    ) -> Self {
        let cells = sums
            .iter()
            .map(|&(s, c)| (c > 0).then(|| s / c as f64))
            .collect();
        HeatMap {
            origin_x,
            origin_y,
            width,
            height,
            cells,
        }
    }

    /// Matrix rows, `NA` for unoccupied cells, no header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in 0..self.height {
            let fields: Vec<String> = (0..self.width)
                .map(|col| match self.get(col, row) {
                    Some(v) => v.to_string(),
                    None => "NA".to_string(),
                })
                .collect();
            w.write_record(&fields)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// The sidecar giving the window's origin.
    pub fn write_origin_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "origin_x,origin_y\n{},{}", self.origin_x, self.origin_y)
            .map_err(|e| Error::io("<csv>", e))
    }
}

/// Heat map over the bounding box of the occupied lattice niches.
pub fn lattice_heatmap(pool: &[(NichePoint, f64)]) -> HeatMap {
    if pool.is_empty() {
        return HeatMap {
            origin_x: 0,
            origin_y: 0,
            width: 0,
            height: 0,
            cells: Vec::new(),
        };
    }
    let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for (p, _) in pool {
        x0 = x0.min(p.x as i64);
        y0 = y0.min(p.y as i64);
        x1 = x1.max(p.x as i64);
        y1 = y1.max(p.y as i64);
    }
    let width = (x1 - x0 + 1) as usize;
    let height = (y1 - y0 + 1) as usize;
    let mut sums = vec![(0.0, 0u64); width * height];
    for (p, e) in pool {
        let i = (p.y as i64 - y0) as usize * width + (p.x as i64 - x0) as usize;
        sums[i].0 += e;
        sums[i].1 += 1;
    }
    HeatMap::from_sums(x0, y0, width, height, &sums)
}

/// Heat map over a fixed `side`×`side` grid of cell ids (`row * side + col`).
pub fn grid_heatmap(pool: &[(usize, f64)], side: usize) -> Result<HeatMap> {
    let mut sums = vec![(0.0, 0u64); side * side];
    for &(cell, e) in pool {
        let slot = sums
            .get_mut(cell)
            .ok_or_else(|| Error::invalid(format!("cell {cell} outside a {side}x{side} grid")))?;
        slot.0 += e;
        slot.1 += 1;
    }
    Ok(HeatMap::from_sums(0, 0, side, side, &sums))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i32, y: i32) -> NichePoint {
        NichePoint { x, y }
    }

    #[test]
    fn all_at_origin_is_one_bin() {
        let pool = vec![(p(0, 0), 0.05), (p(0, 0), 0.07), (p(0, 0), 0.06)];
        let prof = distance_profile(&pool, p(0, 0), DistanceMetric::Euclidean).unwrap();
        assert_eq!(prof.bins.len(), 1);
        assert_eq!(prof.bins[0].distance, 0);
        assert_eq!(prof.bins[0].count, 3);
        assert!(matches!(prof.organism_correlation, Correlation::Undefined { .. }));
    }

    #[test]
    fn bins_round_distances() {
        // distances: 1, sqrt(2)=1.41 -> 1, sqrt(5)=2.24 -> 2, 3
        let pool = vec![(p(1, 0), 0.1), (p(1, 1), 0.3), (p(2, 1), 0.5), (p(0, -3), 0.7)];
        let prof = distance_profile(&pool, p(0, 0), DistanceMetric::Euclidean).unwrap();
        let d: Vec<i64> = prof.bins.iter().map(|b| b.distance).collect();
        assert_eq!(d, vec![1, 2, 3]);
        assert!((prof.bins[0].mean_evolvability - 0.2).abs() < 1e-15);
        let man = distance_profile(&pool, p(0, 0), DistanceMetric::Manhattan).unwrap();
        let d: Vec<i64> = man.bins.iter().map(|b| b.distance).collect();
        assert_eq!(d, vec![1, 2, 3]);
        assert_eq!(man.bins[1].count, 1);
        assert_eq!(man.bins[2].count, 2);
    }

    #[test]
    fn empty_pool_rejected() {
        assert!(distance_profile(&[], p(0, 0), DistanceMetric::Euclidean).is_err());
    }

    #[test]
    fn heatmap_single_organism() {
        let hm = lattice_heatmap(&[(p(3, -2), 0.12)]);
        assert_eq!((hm.width, hm.height), (1, 1));
        assert_eq!((hm.origin_x, hm.origin_y), (3, -2));
        assert_eq!(hm.cells, vec![Some(0.12)]);
    }

    #[test]
    fn heatmap_pools_runs_and_marks_missing() {
        let hm = lattice_heatmap(&[(p(0, 0), 0.2), (p(0, 0), 0.4), (p(2, 1), 0.0)]);
        assert_eq!(hm.cells.len(), 6);
        assert!((hm.get(0, 0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(hm.get(1, 0), None);
        assert_eq!(hm.get(2, 1), Some(0.0));
        let mut out = Vec::new();
        hm.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0.30000000000000004,NA,NA\nNA,NA,0\n");
        let mut side = Vec::new();
        hm.write_origin_csv(&mut side).unwrap();
        assert_eq!(String::from_utf8(side).unwrap(), "origin_x,origin_y\n0,0\n");
    }

    #[test]
    fn grid_heatmap_has_fixed_size() {
        let hm = grid_heatmap(&[(0, 3.0), (399, 5.0)], 20).unwrap();
        assert_eq!(hm.cells.len(), 400);
        assert_eq!(hm.get(19, 19), Some(5.0));
        assert!(grid_heatmap(&[(400, 1.0)], 20).is_err());
    }
}
