//! Perturbation-based median refinement and the end-to-end pipeline.
//!
//! [`refine`] is a greedy local search: each round scores every single edit
//! of the current string (all substitutions, deletions and insertions, see
//! [`enumerate_edits`]) against the objective and applies the best one if it
//! strictly lowers the weighted cumulative distance. How a round ranks edits
//! is pluggable through [`EditRanking`]; [`GreedyFullScan`] is the shipped
//! ranking.
//!
//! [`approximate_median`] wires the stages together: set median, then
//! optionally diameter estimation and pivot selection, then refinement, and
//! finally the MAD over the full dataset.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::mad;
use crate::dataset::Dataset;
use crate::distance::{counted_distance, Cost, CostModel, EditOperation, EvalCounter, Sequence, Symbol};
use crate::error::{Error, Result};
use crate::selection::{check_alpha, max_distance_estimation, pivot_selection, set_median};

/// Weighted sum of distances to a list of targets.
#[derive(Debug, Clone)]
pub struct Objective {
    targets: Vec<Sequence>,
    weights: Vec<u64>,
    model: CostModel,
}

impl Objective {
    pub fn new(targets: Vec<Sequence>, weights: Vec<u64>, model: CostModel) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid_input("objective needs at least one target"));
        }
        if targets.len() != weights.len() {
            return Err(Error::invalid_argument(format!(
                "{} targets but {} weights",
                targets.len(),
                weights.len()
            )));
        }
        if weights.contains(&0) {
            return Err(Error::invalid_argument("weights must be positive"));
        }
        targets.iter().try_for_each(|t| model.validate(t))?;
        Ok(Objective {
            targets,
            weights,
            model,
        })
    }

    pub fn unweighted(targets: Vec<Sequence>, model: CostModel) -> Result<Self> {
        let weights = vec![1; targets.len()];
        Objective::new(targets, weights, model)
    }

    pub fn targets(&self) -> &[Sequence] {
        &self.targets
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn model(&self) -> &CostModel {
        &self.model
    }
}

/// `sum_j weights[j] * d(candidate, targets[j])`, one counted evaluation per
/// target.
pub fn cumulative_cost(candidate: &Sequence, obj: &Objective, counter: &EvalCounter) -> Result<Cost> {
    obj.model.validate(candidate)?;
    Ok(weighted_sum(candidate.symbols(), obj, counter))
}

fn weighted_sum(candidate: &[Symbol], obj: &Objective, counter: &EvalCounter) -> Cost {
    obj.targets
        .iter()
        .zip(&obj.weights)
        .map(|(t, &w)| w * counted_distance(candidate, t.symbols(), &obj.model, counter))
        .sum()
}

/// Every single edit of `candidate`, in canonical order: substitutions
/// (position-major, symbol-minor, skipping the symbol already there), then
/// deletions, then insertions (slots `0..=len`, symbol-minor).
///
/// There are `len*(sigma-1) + len + (len+1)*sigma` of them.
pub fn enumerate_edits(candidate: &Sequence, alphabet_size: usize) -> Vec<EditOperation> {
    let n = candidate.len();
    let sigma = alphabet_size as u8;
    let mut edits = Vec::with_capacity(edit_count(n, alphabet_size));
    for (position, &present) in candidate.symbols().iter().enumerate() {
        edits.extend(
            (0..sigma)
                .map(Symbol::new)
                .filter(|&s| s != present)
                .map(|symbol| EditOperation::Substitute { position, symbol }),
        );
    }
    edits.extend((0..n).map(|position| EditOperation::Delete { position }));
    for position in 0..=n {
        edits.extend((0..sigma).map(|c| EditOperation::Insert {
            position,
            symbol: Symbol::new(c),
        }));
    }
    edits
}

pub fn edit_count(len: usize, alphabet_size: usize) -> usize {
    len * alphabet_size.saturating_sub(1) + len + (len + 1) * alphabet_size
}

/// Picks the edit to apply in one refinement round.
pub trait EditRanking: Sync {
    fn name(&self) -> &'static str;

    /// The chosen strictly improving edit and the objective value after
    /// applying it, or `None` at a local optimum.
    fn best_edit(
        &self,
        current: &Sequence,
        current_value: Cost,
        obj: &Objective,
        counter: &EvalCounter,
    ) -> Option<(EditOperation, Cost)>;
}

/// How [`GreedyFullScan`] obtains candidate distances. Both produce the same
/// values and the same evaluation counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateEvaluation {
    /// Each candidate distance is read off prefix and suffix DP tables of the
    /// current string, in `O(|target|)` per candidate.
    #[default]
    SplitTables,
    /// Each candidate is materialized and run through the full DP.
    Direct,
}

/// Scores every edit from [`enumerate_edits`] against every target and takes
/// the lowest objective value, first in canonical order on ties.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyFullScan {
    pub evaluation: CandidateEvaluation,
}

impl GreedyFullScan {
    pub fn direct() -> Self {
        GreedyFullScan {
            evaluation: CandidateEvaluation::Direct,
        }
    }

    /// Objective value of every edit in canonical order.
    pub fn score_edits(
        &self,
        current: &Sequence,
        edits: &[EditOperation],
        obj: &Objective,
        counter: &EvalCounter,
    ) -> Vec<Cost> {
        match self.evaluation {
            CandidateEvaluation::Direct => edits
                .par_iter()
                .map(|op| {
                    let candidate = current.edited(op).expect("enumerated edits are in range");
                    weighted_sum(candidate.symbols(), obj, counter)
                })
                .collect(),
            CandidateEvaluation::SplitTables => {
                let sigma = obj.model.alphabet_size();
                debug_assert_eq!(edits.len(), edit_count(current.len(), sigma));
                let k = edits.len();
                let totals = obj
                    .targets
                    .par_iter()
                    .zip(obj.weights.par_iter())
                    .fold(
                        || (vec![0 as Cost; k], SplitTables::default()),
                        |(mut acc, mut tables), (target, &w)| {
                            tables.score(current.symbols(), target.symbols(), &obj.model, w, &mut acc);
                            (acc, tables)
                        },
                    )
                    .map(|(acc, _)| acc)
                    .reduce(
                        || vec![0; k],
                        |mut a, b| {
                            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                            a
                        },
                    );
                counter.add((k * obj.targets.len()) as u64);
                totals
            }
        }
    }
}

impl EditRanking for GreedyFullScan {
    fn name(&self) -> &'static str {
        "greedy-full-scan"
    }

    fn best_edit(
        &self,
        current: &Sequence,
        current_value: Cost,
        obj: &Objective,
        counter: &EvalCounter,
    ) -> Option<(EditOperation, Cost)> {
        let edits = enumerate_edits(current, obj.model.alphabet_size());
        let scores = self.score_edits(current, &edits, obj, counter);
        let (best, value) = scores
            .iter()
            .copied()
            .enumerate()
            .min_by_key(|&(_, v)| v)?;
        (value < current_value).then_some((edits[best], value))
    }
}

/// Prefix and suffix DP tables of the current string against one target.
#[derive(Debug, Default)]
struct SplitTables {
    // fwd[i][k] = d(current[..i], target[..k])
    fwd: Vec<Cost>,
    // bwd[i][k] = d(current[i..], target[k..])
    bwd: Vec<Cost>,
    row: Vec<Cost>,
}

impl SplitTables {
    /// Adds `weight * d(edit(current), target)` into `totals` for every edit,
    /// indexed in canonical order.
    fn score(
        &mut self,
        current: &[Symbol],
        target: &[Symbol],
        model: &CostModel,
        weight: Cost,
        totals: &mut [Cost],
    ) {
        let (n, m) = (current.len(), target.len());
        let width = m + 1;
        let sigma = model.alphabet_size();
        let indel = model.indel();

        self.fwd.clear();
        self.fwd.resize((n + 1) * width, 0);
        self.bwd.clear();
        self.bwd.resize((n + 1) * width, 0);
        self.row.resize(width, 0);
        let (fwd, bwd) = (&mut self.fwd, &mut self.bwd);

        for k in 0..=m {
            fwd[k] = k as Cost * indel;
        }
        for i in 1..=n {
            let sub = model.substitution_row(current[i - 1]);
            let (done, rest) = fwd.split_at_mut(i * width);
            let prev = &done[(i - 1) * width..];
            let cur = &mut rest[..width];
            cur[0] = i as Cost * indel;
            for k in 1..=m {
                cur[k] = (prev[k - 1] + sub[target[k - 1].index()])
                    .min(prev[k] + indel)
                    .min(cur[k - 1] + indel);
            }
        }

        for k in 0..=m {
            bwd[n * width + k] = (m - k) as Cost * indel;
        }
        for i in (0..n).rev() {
            let sub = model.substitution_row(current[i]);
            let (head, tail) = bwd.split_at_mut((i + 1) * width);
            let next = &tail[..width];
            let cur = &mut head[i * width..];
            cur[m] = (n - i) as Cost * indel;
            for k in (0..m).rev() {
                cur[k] = (next[k + 1] + sub[target[k].index()])
                    .min(next[k] + indel)
                    .min(cur[k + 1] + indel);
            }
        }

        let join = |left: &[Cost], right: &[Cost]| -> Cost {
            left.iter().zip(right).map(|(a, b)| a + b).min().expect("width >= 1")
        };

        let delete_base = n * (sigma - 1);
        let insert_base = delete_base + n;
        for p in 0..=n {
            let f = &fwd[p * width..(p + 1) * width];
            let b_here = &bwd[p * width..(p + 1) * width];
            let b_next = (p < n).then(|| &bwd[(p + 1) * width..(p + 2) * width]);
            if let Some(b_next) = b_next {
                totals[delete_base + p] += weight * join(f, b_next);
            }
            for x in 0..sigma {
                let symbol = Symbol::new(x as u8);
                // d(current[..p] + symbol, target[..k]) for every k
                let sub = model.substitution_row(symbol);
                let row = &mut self.row;
                row[0] = f[0] + indel;
                for k in 1..=m {
                    row[k] = (f[k - 1] + sub[target[k - 1].index()])
                        .min(f[k] + indel)
                        .min(row[k - 1] + indel);
                }
                totals[insert_base + p * sigma + x] += weight * join(row, b_here);
                if let Some(b_next) = b_next {
                    let present = current[p].index();
                    if x != present {
                        let slot = if x < present { x } else { x - 1 };
                        totals[p * (sigma - 1) + slot] += weight * join(row, b_next);
                    }
                }
            }
        }
    }
}

/// Named built-in rankings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    GreedyFullScan,
}

impl Strategy {
    pub const NAMES: &'static [&'static str] = &["greedy-full-scan"];

    pub fn ranking(self) -> &'static dyn EditRanking {
        static GREEDY: GreedyFullScan = GreedyFullScan {
            evaluation: CandidateEvaluation::SplitTables,
        };
        match self {
            Strategy::GreedyFullScan => &GREEDY,
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy-full-scan" => Ok(Strategy::GreedyFullScan),
            other => Err(Error::invalid_argument(format!(
                "unknown strategy {other:?} (expected one of {:?})",
                Strategy::NAMES
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ranking().name())
    }
}

/// Outcome of [`refine`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub median: Sequence,
    pub objective_value: Cost,
    pub improvement_rounds: usize,
    pub hit_round_limit: bool,
    /// Objective value at the start and after every applied edit.
    pub trace: Vec<Cost>,
}

/// Greedy refinement with the default ranking. `max_rounds == 0` means no
/// limit.
pub fn refine(
    start: &Sequence,
    obj: &Objective,
    counter: &EvalCounter,
    max_rounds: usize,
) -> Result<Refinement> {
    refine_with(Strategy::default().ranking(), start, obj, counter, max_rounds)
}

pub fn refine_with(
    ranking: &dyn EditRanking,
    start: &Sequence,
    obj: &Objective,
    counter: &EvalCounter,
    max_rounds: usize,
) -> Result<Refinement> {
    let mut current = start.clone();
    let mut value = cumulative_cost(&current, obj, counter)?;
    let mut trace = vec![value];
    let mut rounds = 0;
    let mut hit_round_limit = false;

    loop {
        if max_rounds > 0 && rounds >= max_rounds {
            hit_round_limit = true;
            break;
        }
        let Some((op, next)) = ranking.best_edit(&current, value, obj, counter) else {
            break;
        };
        debug_assert!(next < value);
        current.apply(&op)?;
        value = next;
        trace.push(value);
        rounds += 1;
    }

    Ok(Refinement {
        median: current,
        objective_value: value,
        improvement_rounds: rounds,
        hit_round_limit,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    /// Refine against every string with unit weights.
    Full,
    /// Refine against the pivots selected at `alpha`.
    Pivots { alpha: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MedianOptions {
    /// Skip the set median's own entry during pivot selection.
    pub dedupe_median: bool,
    /// Give every pivot weight 1 in the objective.
    pub unweighted_pivots: bool,
    /// Include the final MAD evaluation in the distance count.
    pub count_mad: bool,
    /// 0 means unlimited.
    pub max_rounds: usize,
    pub strategy: Strategy,
}

/// Counted distance evaluations per pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseEvals {
    pub set_median: u64,
    pub max_distance: u64,
    pub pivot_selection: u64,
    pub refine: u64,
    pub mad: u64,
}

impl PhaseEvals {
    pub fn total(&self) -> u64 {
        self.set_median + self.max_distance + self.pivot_selection + self.refine + self.mad
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianResult {
    pub median: Sequence,
    /// Weighted cumulative distance to the refinement targets.
    pub objective_value: Cost,
    /// Mean distance from the median to every string of the full dataset.
    pub mad: f64,
    pub distance_evals: u64,
    pub improvement_rounds: usize,
    pub hit_round_limit: bool,
    pub set_median_index: usize,
    pub phases: PhaseEvals,
    pub alpha: Option<f64>,
    pub max_dist: Option<Cost>,
    pub pivot_count: Option<usize>,
    pub dataset_size: usize,
}

impl MedianResult {
    /// `100 * |P| / |S|`; above 100 when the set median is duplicated.
    pub fn pivot_pct(&self) -> Option<f64> {
        self.pivot_count
            .map(|p| 100.0 * p as f64 / self.dataset_size as f64)
    }
}

/// Runs `f` against a private counter, credits its total to `counter`, and
/// returns the result with the stage's own count.
fn phase<T>(counter: &EvalCounter, f: impl FnOnce(&EvalCounter) -> Result<T>) -> Result<(T, u64)> {
    let local = EvalCounter::new();
    let out = f(&local)?;
    let n = local.get();
    counter.add(n);
    Ok((out, n))
}

/// Approximate median of `data`, starting from the set median.
///
/// `distance_evals` covers every stage (set median, diameter estimation and
/// pivot selection in pivots mode, refinement) and the MAD only when
/// `opts.count_mad` is set. The same total is added to `counter`.
pub fn approximate_median(
    data: &Dataset,
    model: &CostModel,
    mode: Mode,
    counter: &EvalCounter,
    opts: &MedianOptions,
) -> Result<MedianResult> {
    data.require_non_empty()?;
    if let Mode::Pivots { alpha } = mode {
        check_alpha(alpha)?;
    }
    let mut phases = PhaseEvals::default();

    let (median_index, n) = phase(counter, |c| set_median(data, model, c))?;
    phases.set_median = n;

    let (objective, alpha, max_dist, pivot_count) = match mode {
        Mode::Full => (
            Objective::unweighted(data.sequences().to_vec(), model.clone())?,
            None,
            None,
            None,
        ),
        Mode::Pivots { alpha } => {
            let (max_dist, n) = phase(counter, |c| max_distance_estimation(data, model, c))?;
            phases.max_distance = n;
            let (pivots, n) = phase(counter, |c| {
                pivot_selection(data, alpha, max_dist, median_index, model, c, opts.dedupe_median)
            })?;
            phases.pivot_selection = n;
            let count = pivots.len();
            let weights = if opts.unweighted_pivots {
                vec![1; count]
            } else {
                pivots.weights
            };
            (
                Objective::new(pivots.pivots, weights, model.clone())?,
                Some(alpha),
                Some(max_dist),
                Some(count),
            )
        }
    };

    let start = &data.sequences()[median_index];
    let (refined, n) = phase(counter, |c| {
        refine_with(opts.strategy.ranking(), start, &objective, c, opts.max_rounds)
    })?;
    phases.refine = n;

    let mad = if opts.count_mad {
        let (value, n) = phase(counter, |c| mad(&refined.median, data, model, c))?;
        phases.mad = n;
        value
    } else {
        mad(&refined.median, data, model, &EvalCounter::new())?
    };

    Ok(MedianResult {
        median: refined.median,
        objective_value: refined.objective_value,
        mad,
        distance_evals: phases.total(),
        improvement_rounds: refined.improvement_rounds,
        hit_round_limit: refined.hit_round_limit,
        set_median_index: median_index,
        phases,
        alpha,
        max_dist,
        pivot_count,
        dataset_size: data.len(),
    })
}
