//! Experiment driver: alpha sweeps, MAD and distance-evaluation counts.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distance::{counted_distance, CostModel, EvalCounter, Sequence};
use crate::error::{Error, Result};
use crate::perturb::{approximate_median, MedianOptions, Mode};

/// Mean distance from `median` to every string of `data`, unweighted.
pub fn mad(median: &Sequence, data: &Dataset, model: &CostModel, counter: &EvalCounter) -> Result<f64> {
    data.require_non_empty()?;
    model.validate(median)?;
    data.sequences().iter().try_for_each(|s| model.validate(s))?;
    let total: u64 = data
        .sequences()
        .par_iter()
        .map(|s| counted_distance(median.symbols(), s.symbols(), model, counter))
        .sum();
    Ok(total as f64 / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub alpha_step: f64,
    pub include_reference: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            alpha_start: 0.30,
            alpha_end: 0.02,
            alpha_step: 0.005,
            include_reference: true,
        }
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Arithmetic grid from `alpha_start` toward `alpha_end`, both ends included
/// within half a step, each value rounded to three decimals.
pub fn alpha_grid(cfg: &SweepConfig) -> Result<Vec<f64>> {
    let SweepConfig {
        alpha_start: start,
        alpha_end: end,
        alpha_step: step,
        ..
    } = *cfg;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid_argument(format!(
            "alpha step must be positive, got {step}"
        )));
    }
    for a in [start, end] {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::invalid_argument(format!(
                "sweep bounds must be in [0, 1], got {a}"
            )));
        }
    }
    let span = (end - start).abs();
    let count = (span / step + 0.5).floor() as usize + 1;
    let sign = if end < start { -1.0 } else { 1.0 };
    Ok((0..count)
        .map(|k| round3(start + sign * k as f64 * step).clamp(0.0, 1.0))
        .collect())
}

/// One row of a sweep report. Reference rows (full mode) have no alpha and
/// no pivot fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub alpha: Option<f64>,
    pub pivot_count: Option<usize>,
    pub pivot_pct: Option<f64>,
    pub distance_evals: u64,
    pub mad: f64,
    pub median_length: usize,
    pub wall_ms: f64,
    pub median: Sequence,
}

impl ExperimentRecord {
    pub fn is_reference(&self) -> bool {
        self.alpha.is_none()
    }
}

fn run_one(
    data: &Dataset,
    model: &CostModel,
    mode: Mode,
    opts: &MedianOptions,
) -> Result<ExperimentRecord> {
    let counter = EvalCounter::new();
    let started = Instant::now();
    let r = approximate_median(data, model, mode, &counter, opts)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(ExperimentRecord {
        dataset: data.name().to_string(),
        alpha: r.alpha,
        pivot_count: r.pivot_count,
        pivot_pct: r.pivot_pct(),
        distance_evals: r.distance_evals,
        mad: r.mad,
        median_length: r.median.len(),
        wall_ms,
        median: r.median,
    })
}

/// One pivots-mode record per grid alpha, each with its own counter, then a
/// full-mode reference record when `cfg.include_reference` is set.
pub fn run_sweep(
    data: &Dataset,
    model: &CostModel,
    cfg: &SweepConfig,
    opts: &MedianOptions,
) -> Result<Vec<ExperimentRecord>> {
    data.require_non_empty()?;
    let mut modes: Vec<Mode> = alpha_grid(cfg)?
        .into_iter()
        .map(|alpha| Mode::Pivots { alpha })
        .collect();
    if cfg.include_reference {
        modes.push(Mode::Full);
    }
    // collect keeps grid order whatever the scheduling
    modes
        .into_par_iter()
        .map(|mode| run_one(data, model, mode, opts))
        .collect()
}

pub const CSV_HEADER: [&str; 8] = [
    "dataset",
    "alpha",
    "pivot_count",
    "pivot_pct",
    "distance_evals",
    "mad",
    "median_length",
    "wall_ms",
];

/// CSV report with [`CSV_HEADER`]. Reference rows carry `alpha = ref` and
/// empty pivot fields; MAD has four decimals.
pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.dataset.clone(),
            r.alpha.map_or_else(|| "ref".to_string(), |a| format!("{a:.3}")),
            r.pivot_count.map_or_else(String::new, |p| p.to_string()),
            r.pivot_pct.map_or_else(String::new, |p| format!("{p:.2}")),
            r.distance_evals.to_string(),
            format!("{:.4}", r.mad),
            r.median_length.to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Best trade-off found by a sweep relative to its reference row.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub alpha: f64,
    pub distance_evals: u64,
    pub reference_evals: u64,
    pub mad: f64,
    pub reference_mad: f64,
}

impl Reduction {
    /// Fraction of the reference evaluations saved.
    pub fn fraction(&self) -> f64 {
        1.0 - self.distance_evals as f64 / self.reference_evals as f64
    }
}

/// The pivots row with the fewest evaluations among those that beat the
/// reference count while keeping `mad <= max_mad_ratio * reference mad`.
pub fn best_reduction(records: &[ExperimentRecord], max_mad_ratio: f64) -> Option<Reduction> {
    let reference = records.iter().find(|r| r.is_reference())?;
    records
        .iter()
        .filter(|r| !r.is_reference())
        .filter(|r| {
            r.distance_evals < reference.distance_evals && r.mad <= max_mad_ratio * reference.mad
        })
        .min_by_key(|r| r.distance_evals)
        .map(|r| Reduction {
            alpha: r.alpha.expect("pivots row"),
            distance_evals: r.distance_evals,
            reference_evals: reference.distance_evals,
            mad: r.mad,
            reference_mad: reference.mad,
        })
}

/// Plain-text table with operations in millions.
pub fn summary_table(records: &[ExperimentRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>8} {:>14} {:>10} {:>6}",
        "alpha", "pivots%", "ops (x10^6)", "MAD", "len"
    );
    for r in records {
        let alpha = r.alpha.map_or_else(|| "reference".into(), |a| format!("{a:.3}"));
        let pct = r.pivot_pct.map_or_else(|| "-".into(), |p| format!("{p:.2}"));
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>14.4} {:>10.2} {:>6}",
            alpha,
            pct,
            r.distance_evals as f64 / 1e6,
            r.mad,
            r.median_length
        );
    }
    if let Some(best) = best_reduction(records, 1.0) {
        let _ = writeln!(
            out,
            "best alpha with MAD no worse than reference: {:.3} ({:.2}% fewer operations)",
            best.alpha,
            100.0 * best.fraction()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mad_examples() {
        let m = CostModel::unit(36).unwrap();
        let c = EvalCounter::new();
        let single = Dataset::from_strings("x", &["ab"], 36).unwrap();
        assert_eq!(mad(&"ab".parse().unwrap(), &single, &m, &c).unwrap(), 0.0);

        let d = Dataset::from_strings("x", &["ab", "ab", "b"], 36).unwrap();
        let v = mad(&"ab".parse().unwrap(), &d, &m, &c).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);

        let doubled = Dataset::from_strings("x", &["ab", "ab", "b", "ab", "ab", "b"], 36).unwrap();
        assert_eq!(mad(&"ab".parse().unwrap(), &doubled, &m, &c).unwrap(), v);
        assert_eq!(c.get(), 1 + 3 + 6);

        let empty = Dataset::new("e", vec![], 36).unwrap();
        assert!(matches!(
            mad(&"ab".parse().unwrap(), &empty, &m, &c),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn grid_examples() {
        let grid = alpha_grid(&SweepConfig::default()).unwrap();
        assert_eq!(grid.len(), 57);
        assert_eq!(grid[0], 0.3);
        assert_eq!(grid[1], 0.295);
        assert_eq!(*grid.last().unwrap(), 0.02);

        let single = SweepConfig {
            alpha_start: 0.1,
            alpha_end: 0.1,
            ..Default::default()
        };
        assert_eq!(alpha_grid(&single).unwrap(), vec![0.1]);

        let up = SweepConfig {
            alpha_start: 0.02,
            alpha_end: 0.30,
            ..Default::default()
        };
        let mut ascending = alpha_grid(&up).unwrap();
        assert!(ascending.windows(2).all(|w| w[0] < w[1]));
        ascending.reverse();
        assert_eq!(ascending, grid);

        for step in [0.0, -0.005, f64::NAN] {
            let bad = SweepConfig {
                alpha_step: step,
                ..Default::default()
            };
            assert!(matches!(alpha_grid(&bad), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn sweep_on_singleton() {
        let d = Dataset::from_strings("one", &["0123"], 8).unwrap();
        let cfg = SweepConfig {
            alpha_start: 0.3,
            alpha_end: 0.2,
            alpha_step: 0.05,
            include_reference: true,
        };
        let recs = run_sweep(&d, &CostModel::freeman(), &cfg, &MedianOptions::default()).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| r.mad == 0.0));
        assert!(recs[3].is_reference());
        assert_eq!(recs[0].alpha, Some(0.3));
    }

    #[test]
    fn reference_evals_cover_the_set_median_pairs() {
        let d = Dataset::from_strings("t", &["0123", "0124", "7123", "0023", "5555", "0"], 8).unwrap();
        let cfg = SweepConfig {
            alpha_start: 0.2,
            alpha_end: 0.2,
            ..Default::default()
        };
        let recs = run_sweep(&d, &CostModel::freeman(), &cfg, &MedianOptions::default()).unwrap();
        let reference = recs.iter().find(|r| r.is_reference()).unwrap();
        assert!(reference.distance_evals >= 15);
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            ExperimentRecord {
                dataset: "d".into(),
                alpha: Some(0.125),
                pivot_count: Some(4),
                pivot_pct: Some(133.333),
                distance_evals: 99,
                mad: 1.0 / 3.0,
                median_length: 2,
                wall_ms: 1.5,
                median: "01".parse().unwrap(),
            },
            ExperimentRecord {
                dataset: "d".into(),
                alpha: None,
                pivot_count: None,
                pivot_pct: None,
                distance_evals: 120,
                mad: 0.0,
                median_length: 2,
                wall_ms: 2.0,
                median: "01".parse().unwrap(),
            },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "dataset,alpha,pivot_count,pivot_pct,distance_evals,mad,median_length,wall_ms\n\
             d,0.125,4,133.33,99,0.3333,2,1.500\n\
             d,ref,,,120,0.0000,2,2.000\n"
        );
        let best = best_reduction(&rows, 1.02);
        assert!(best.is_none(), "mad 0.333 exceeds the reference 0");
    }
}
