//! Set median, diameter estimation and sparse pivot selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distance::{counted_distance, Cost, CostModel, EvalCounter, Sequence};
use crate::error::{Error, Result};

fn validate_all(data: &Dataset, model: &CostModel) -> Result<()> {
    data.require_non_empty()?;
    data.sequences().iter().try_for_each(|s| model.validate(s))
}

/// Index of the member with the lowest summed distance to the rest; ties go
/// to the lowest index. Each unordered pair is evaluated once.
pub fn set_median(data: &Dataset, model: &CostModel, counter: &EvalCounter) -> Result<usize> {
    validate_all(data, model)?;
    let seqs = data.sequences();
    let n = seqs.len();

    let rows: Vec<Vec<Cost>> = (0..n)
        .into_par_iter()
        .map(|i| {
            seqs[i + 1..]
                .iter()
                .map(|t| counted_distance(seqs[i].symbols(), t.symbols(), model, counter))
                .collect()
        })
        .collect();

    let mut sums = vec![0 as Cost; n];
    for (i, row) in rows.iter().enumerate() {
        for (k, &d) in row.iter().enumerate() {
            sums[i] += d;
            sums[i + 1 + k] += d;
        }
    }
    // min_by_key keeps the first minimum
    Ok((0..n).min_by_key(|&i| sums[i]).expect("non-empty"))
}

/// Diameter estimate by iterated farthest-point scans.
///
/// Starting from element 0, every element is compared with the current
/// anchor; the anchor then moves to the element holding the largest distance
/// seen so far (only strict improvements move it). Stops when a scan leaves
/// the anchor unchanged. Each scan costs `|S|` counted evaluations, the
/// anchor's distance to itself included.
pub fn max_distance_estimation(
    data: &Dataset,
    model: &CostModel,
    counter: &EvalCounter,
) -> Result<Cost> {
    validate_all(data, model)?;
    let seqs = data.sequences();

    let mut current = 0usize;
    let mut former: Option<usize> = None;
    let mut max_position = 0usize;
    let mut max_dist: Option<Cost> = None;

    while former != Some(current) {
        let anchor = seqs[current].symbols();
        let scan: Vec<Cost> = seqs
            .par_iter()
            .map(|s| counted_distance(s.symbols(), anchor, model, counter))
            .collect();
        for (i, &dist) in scan.iter().enumerate() {
            if max_dist.is_none_or(|m| dist > m) {
                max_dist = Some(dist);
                max_position = i;
            }
        }
        former = Some(current);
        current = max_position;
    }
    Ok(max_dist.expect("at least one scan"))
}

/// Pivots with the number of set members each one absorbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotSet {
    pub pivots: Vec<Sequence>,
    pub weights: Vec<u64>,
    /// Index in the source dataset of each pivot; the first is the set median.
    pub sources: Vec<usize>,
    pub alpha: f64,
    pub max_dist: Cost,
    pub median_index: usize,
}

impl PivotSet {
    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn threshold(&self) -> f64 {
        separation_threshold(self.alpha, self.max_dist)
    }
}

pub(crate) fn separation_threshold(alpha: f64, max_dist: Cost) -> f64 {
    max_dist as f64 * alpha
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid_argument(format!(
            "alpha must be in [0, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// Sparse pivot selection seeded with the set median.
///
/// The set median starts as the only pivot, with weight 1. Each element of
/// `data`, in order, is compared with every current pivot. If no pivot is
/// closer than `alpha * max_dist` the element becomes a new pivot of weight 1;
/// otherwise the nearest such pivot (lowest index on ties) gains one unit of
/// weight. The median's own entry in `data` is processed like any other
/// unless `dedupe_median` is set, so by default the weights sum to `|S| + 1`.
pub fn pivot_selection(
    data: &Dataset,
    alpha: f64,
    max_dist: Cost,
    median_index: usize,
    model: &CostModel,
    counter: &EvalCounter,
    dedupe_median: bool,
) -> Result<PivotSet> {
    check_alpha(alpha)?;
    validate_all(data, model)?;
    let seqs = data.sequences();
    if median_index >= seqs.len() {
        return Err(Error::invalid_argument(format!(
            "median index {median_index} out of range for {} sequences",
            seqs.len()
        )));
    }
    let threshold = separation_threshold(alpha, max_dist);

    let mut pivots = vec![seqs[median_index].clone()];
    let mut sources = vec![median_index];
    let mut weights = vec![1u64];

    for (i, candidate) in seqs.iter().enumerate() {
        if dedupe_median && i == median_index {
            continue;
        }
        let mut nearest: Option<(usize, Cost)> = None;
        for (j, pivot) in pivots.iter().enumerate() {
            let space = counted_distance(pivot.symbols(), candidate.symbols(), model, counter);
            if (space as f64) < threshold && nearest.is_none_or(|(_, best)| space < best) {
                nearest = Some((j, space));
            }
        }
        match nearest {
            Some((j, _)) => weights[j] += 1,
            None => {
                pivots.push(candidate.clone());
                sources.push(i);
                weights.push(1);
            }
        }
    }

    Ok(PivotSet {
        pivots,
        weights,
        sources,
        alpha,
        max_dist,
        median_index,
    })
}
