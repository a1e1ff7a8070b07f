//! Approximate median strings under weighted edit distance.
//!
//! The pipeline has three stages:
//!
//! 1. [`selection::set_median`] picks the member of the set with the lowest
//!    cumulative distance to the others. It is both the starting point of the
//!    refinement and the first pivot.
//! 2. Optionally, [`selection::max_distance_estimation`] estimates the set's
//!    diameter by iterated farthest-point scans, and
//!    [`selection::pivot_selection`] keeps only elements that are farther than
//!    `alpha * diameter` from every pivot chosen so far, counting how many set
//!    members each pivot absorbs.
//! 3. [`perturb::refine`] greedily applies the single edit (substitution,
//!    deletion or insertion) that lowers the weighted cumulative distance the
//!    most, until no edit helps.
//!
//! Every full edit-distance computation is recorded in an
//! [`distance::EvalCounter`]; that count is the speed measure reported by the
//! [`bench`] harness, next to the mean distance from the median to the full set
//! (MAD).
//!
//! ```
//! use pivot_median::{approximate_median, CostModel, Dataset, EvalCounter, Mode, MedianOptions};
//!
//! let model = CostModel::unit(2).unwrap();
//! let data = Dataset::from_strings("demo", &["0101", "0111", "0100"], 2).unwrap();
//! let counter = EvalCounter::new();
//! let result = approximate_median(&data, &model, Mode::Full, &counter, &MedianOptions::default()).unwrap();
//! assert_eq!(result.median.to_string(), "0101");
//! ```

pub mod bench;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod perturb;
pub mod selection;

pub use bench::{alpha_grid, mad, run_sweep, ExperimentRecord, SweepConfig};
pub use dataset::{generate_clustered, load_dataset, save_dataset, Dataset, GeneratorConfig};
pub use distance::{
    edit_distance, edit_script, Cost, CostModel, EditOperation, EvalCounter, Sequence, Symbol,
};
pub use error::{Error, Result};
pub use perturb::{
    approximate_median, cumulative_cost, enumerate_edits, refine, MedianOptions, MedianResult,
    Mode, Objective, Strategy,
};
pub use selection::{max_distance_estimation, pivot_selection, set_median, PivotSet};
