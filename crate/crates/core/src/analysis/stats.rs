use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Product-moment correlation with its significance and least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    /// Two-tailed p-value of the t statistic with `n - 2` degrees of freedom.
    pub p: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// Result of [`pearson`]; zero-variance samples are flagged instead of
/// producing a number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Correlation {
    Defined(CorrelationResult),
    Undefined { n: usize },
}

impl Correlation {
    pub fn defined(&self) -> Option<&CorrelationResult> {
        match self {
            Correlation::Defined(c) => Some(c),
            Correlation::Undefined { .. } => None,
        }
    }

    pub fn r(&self) -> Option<f64> {
        self.defined().map(|c| c.r)
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "pearson: length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid(format!("pearson: need at least 3 points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("pearson: non-finite input"));
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Ok(Correlation::Undefined { n });
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(Correlation::Defined(CorrelationResult {
        r,
        n,
        p: two_tailed_p(r, n),
        slope,
        intercept,
    }))
}

fn two_tailed_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if n == 2 || 1.0 - r * r <= 0.0 {
        return if n == 2 { 1.0 } else { 0.0 };
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Mean accumulated relative to the first value, exact for constant input.
pub fn mean(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else {
        return f64::NAN;
    };
    first + values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64
}

/// Standard error of the mean with the n-1 sample deviation; 0 for a single value.
pub fn standard_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let first = values[0];
    let (s, ss) = values.iter().fold((0.0, 0.0), |(s, ss), v| {
        let d = v - first;
        (s + d, ss + d * d)
    });
    let var = ((ss - s * s / n as f64) / (n - 1) as f64).max(0.0);
    (var / n as f64).sqrt()
}

/// Mean evolvability within each occupied niche, then the unweighted mean of
/// those over niches.
pub fn per_niche_mean<K: Ord>(snapshot: impl IntoIterator<Item = (K, f64)>) -> Result<f64> {
    let mut niches: BTreeMap<K, (f64, u64)> = BTreeMap::new();
    for (k, v) in snapshot {
        let e = niches.entry(k).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    if niches.is_empty() {
        return Err(Error::invalid("per-niche mean of an empty snapshot"));
    }
    let total: f64 = niches.values().map(|(s, c)| s / *c as f64).sum();
    Ok(total / niches.len() as f64)
}
