//! String datasets: text I/O, length summaries and a clustered generator.
//!
//! The file format is UTF-8 text with one string per line, each character a
//! symbol from [`SYMBOL_CHARS`](crate::distance::SYMBOL_CHARS).

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::{Sequence, Symbol, MAX_ALPHABET};
use crate::error::{Error, Result};

/// An ordered multiset of sequences over one alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    name: String,
    alphabet_size: usize,
    sequences: Vec<Sequence>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        sequences: Vec<Sequence>,
        alphabet_size: usize,
    ) -> Result<Self> {
        if alphabet_size == 0 || alphabet_size > MAX_ALPHABET {
            return Err(Error::invalid_argument(format!(
                "alphabet size must be in 1..={MAX_ALPHABET}, got {alphabet_size}"
            )));
        }
        if let Some(i) = sequences
            .iter()
            .position(|s| s.max_code().is_some_and(|c| c as usize >= alphabet_size))
        {
            return Err(Error::invalid_input(format!(
                "sequence {i} has symbols outside an alphabet of size {alphabet_size}"
            )));
        }
        Ok(Dataset {
            name: name.into(),
            alphabet_size,
            sequences,
        })
    }

    pub fn from_strings<S: AsRef<str>>(
        name: impl Into<String>,
        lines: &[S],
        alphabet_size: usize,
    ) -> Result<Self> {
        let sequences = lines
            .iter()
            .map(|l| Sequence::parse(l.as_ref(), alphabet_size))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(name, sequences, alphabet_size)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::invalid_input(format!(
                "dataset {:?} is empty",
                self.name
            )));
        }
        Ok(())
    }

    pub fn mean_length(&self) -> Result<f64> {
        self.require_non_empty()?;
        let total: usize = self.sequences.iter().map(Sequence::len).sum();
        Ok(total as f64 / self.len() as f64)
    }

    /// Re-declares the alphabet, e.g. after loading with the widest one.
    pub fn with_alphabet_size(self, alphabet_size: usize) -> Result<Self> {
        Dataset::new(self.name, self.sequences, alphabet_size)
    }

    /// Smallest alphabet that covers every symbol present (at least 1).
    pub fn used_alphabet_size(&self) -> usize {
        self.sequences
            .iter()
            .filter_map(Sequence::max_code)
            .max()
            .map_or(1, |c| c as usize + 1)
    }
}

/// Reads one sequence per line. Blank lines are rejected unless `allow_empty`.
pub fn load_dataset(path: impl AsRef<Path>, alphabet_size: usize, allow_empty: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_dataset(&text, name, alphabet_size, allow_empty)
}

pub fn parse_dataset(
    text: &str,
    name: impl Into<String>,
    alphabet_size: usize,
    allow_empty: bool,
) -> Result<Dataset> {
    let mut sequences = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() && !allow_empty {
            return Err(Error::Parse {
                line: i + 1,
                message: "blank line (pass --allow-empty to accept empty strings)".into(),
            });
        }
        let seq = Sequence::parse(line, alphabet_size).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        sequences.push(seq);
    }
    if sequences.is_empty() {
        return Err(Error::invalid_input("dataset file contains no strings"));
    }
    Dataset::new(name, sequences, alphabet_size)
}

pub fn save_dataset(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for seq in data.sequences() {
        writeln!(out, "{seq}")?;
    }
    out.flush()?;
    Ok(())
}

/// Parameters of [`generate_clustered`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub cluster_count: usize,
    pub per_cluster_size: usize,
    pub seed_length: usize,
    pub alphabet_size: usize,
    pub mutation_rate: f64,
    pub rng_seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            cluster_count: 3,
            per_cluster_size: 120,
            seed_length: 50,
            alphabet_size: 8,
            mutation_rate: 0.1,
            rng_seed: 7,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cluster_count == 0 || self.per_cluster_size == 0 || self.seed_length == 0 {
            return Err(Error::invalid_argument(
                "cluster count, cluster size and seed length must be positive",
            ));
        }
        if self.alphabet_size < 2 || self.alphabet_size > MAX_ALPHABET {
            return Err(Error::invalid_argument(format!(
                "generator alphabet size must be in 2..={MAX_ALPHABET}, got {}",
                self.alphabet_size
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::invalid_argument(format!(
                "mutation rate must be in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        Ok(())
    }
}

/// Clustered synthetic data: one uniform random seed per cluster, each copy
/// independently mutated. Every position is substituted with probability
/// `mutation_rate`; then one insertion and one deletion are each applied with
/// probability `mutation_rate / 2`.
pub fn generate_clustered(cfg: &GeneratorConfig) -> Result<Dataset> {
    cfg.validate()?;
    let sigma = cfg.alphabet_size as u8;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut sequences = Vec::with_capacity(cfg.cluster_count * cfg.per_cluster_size);

    for _ in 0..cfg.cluster_count {
        let seed: Vec<Symbol> = (0..cfg.seed_length)
            .map(|_| Symbol::new(rng.random_range(0..sigma)))
            .collect();
        for _ in 0..cfg.per_cluster_size {
            let mut copy = seed.clone();
            for s in copy.iter_mut() {
                if rng.random_bool(cfg.mutation_rate) {
                    // uniform over the other sigma - 1 symbols
                    let shift = rng.random_range(1..sigma);
                    *s = Symbol::new((s.code() + shift) % sigma);
                }
            }
            if rng.random_bool(cfg.mutation_rate / 2.0) {
                let pos = rng.random_range(0..=copy.len());
                copy.insert(pos, Symbol::new(rng.random_range(0..sigma)));
            }
            if rng.random_bool(cfg.mutation_rate / 2.0) && !copy.is_empty() {
                let pos = rng.random_range(0..copy.len());
                copy.remove(pos);
            }
            sequences.push(Sequence::new(copy));
        }
    }
    let name = format!(
        "synthetic-c{}-n{}-l{}-s{}",
        cfg.cluster_count, cfg.per_cluster_size, cfg.seed_length, cfg.rng_seed
    );
    Dataset::new(name, sequences, cfg.alphabet_size)
}

/// Path of the JSON sidecar written next to a generated dataset.
pub fn metadata_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes the dataset and a `<path>.meta.json` sidecar recording `cfg`.
pub fn save_generated(path: impl AsRef<Path>, data: &Dataset, cfg: &GeneratorConfig) -> Result<()> {
    let path = path.as_ref();
    save_dataset(path, data)?;
    let mut meta = serde_json::to_string_pretty(cfg)?;
    meta.push('\n');
    fs::write(metadata_path(path), meta)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthCategory {
    Short,
    Medium,
    Large,
}

impl fmt::Display for LengthCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LengthCategory::Short => "short",
            LengthCategory::Medium => "medium",
            LengthCategory::Large => "large",
        })
    }
}

/// Three equal-width bins over `[lo, hi]`: `[lo, lo+w)`, `[lo+w, lo+2w)`,
/// `[lo+2w, hi]`.
pub fn length_category(average: f64, lo: f64, hi: f64) -> Result<LengthCategory> {
    if !(lo <= hi) {
        return Err(Error::invalid_argument(format!(
            "category bounds [{lo}, {hi}] are empty"
        )));
    }
    if !(lo..=hi).contains(&average) {
        return Err(Error::invalid_argument(format!(
            "average length {average} is outside [{lo}, {hi}]"
        )));
    }
    let width = (hi - lo) / 3.0;
    Ok(if average < lo + width {
        LengthCategory::Short
    } else if average < lo + 2.0 * width {
        LengthCategory::Medium
    } else {
        LengthCategory::Large
    })
}

/// Mean sequence length and its bin within the corpus bounds `(lo, hi)`.
pub fn length_summary(data: &Dataset, bounds: (f64, f64)) -> Result<(f64, LengthCategory)> {
    let avg = data.mean_length()?;
    Ok((avg, length_category(avg, bounds.0, bounds.1)?))
}

/// Corpus bounds for [`length_summary`]: min and max of the per-dataset means.
pub fn corpus_bounds(corpus: &[Dataset]) -> Result<(f64, f64)> {
    let means = corpus
        .iter()
        .map(Dataset::mean_length)
        .collect::<Result<Vec<_>>>()?;
    if means.is_empty() {
        return Err(Error::invalid_input("empty corpus"));
    }
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let d = parse_dataset("01\n7\n", "x", 8, false).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.sequences()[0].len(), 2);
        assert_eq!(d.sequences()[1].len(), 1);

        match parse_dataset("08\n", "x", 8, false) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error at line 1, got {other:?}"),
        }
        match parse_dataset("01\n\n", "x", 8, false) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error at line 2, got {other:?}"),
        }
        let d = parse_dataset("33\n33\n", "x", 8, false).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.sequences()[0], d.sequences()[1]);
    }

    #[test]
    fn empty_lines_and_files() {
        let d = parse_dataset("01\n\n2\n", "x", 8, true).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.sequences()[1].is_empty());
        assert!(matches!(
            parse_dataset("", "x", 8, false),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn generator_without_mutation_copies_the_seed() {
        let cfg = GeneratorConfig {
            cluster_count: 1,
            per_cluster_size: 5,
            seed_length: 12,
            mutation_rate: 0.0,
            ..Default::default()
        };
        let d = generate_clustered(&cfg).unwrap();
        assert_eq!(d.len(), 5);
        assert!(d.sequences().iter().all(|s| *s == d.sequences()[0]));
        assert_eq!(d.sequences()[0].len(), 12);
    }

    #[test]
    fn generator_size_and_determinism() {
        let cfg = GeneratorConfig {
            cluster_count: 3,
            per_cluster_size: 120,
            ..Default::default()
        };
        let a = generate_clustered(&cfg).unwrap();
        let b = generate_clustered(&cfg).unwrap();
        assert_eq!(a.len(), 360);
        assert_eq!(a, b);
        let other = generate_clustered(&GeneratorConfig {
            rng_seed: 8,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn generator_rejects_bad_rates() {
        for rate in [-0.1, 1.5, f64::NAN] {
            let cfg = GeneratorConfig {
                mutation_rate: rate,
                ..Default::default()
            };
            assert!(generate_clustered(&cfg).is_err(), "rate {rate}");
        }
    }

    #[test]
    fn length_bins() {
        let d = Dataset::from_strings("x", &["01", "0123"], 8).unwrap();
        assert_eq!(d.mean_length().unwrap(), 3.0);
        assert_eq!(length_category(15.0, 10.0, 40.0).unwrap(), LengthCategory::Short);
        assert_eq!(length_category(20.0, 10.0, 40.0).unwrap(), LengthCategory::Medium);
        assert_eq!(length_category(30.0, 10.0, 40.0).unwrap(), LengthCategory::Large);
        assert_eq!(length_category(40.0, 10.0, 40.0).unwrap(), LengthCategory::Large);
        assert!(length_category(41.0, 10.0, 40.0).is_err());

        let empty = Dataset::new("e", vec![], 8).unwrap();
        assert!(matches!(
            length_summary(&empty, (0.0, 1.0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn corpus_bounds_span_the_means() {
        let a = Dataset::from_strings("a", &["01"], 8).unwrap();
        let b = Dataset::from_strings("b", &["0123456", "012"], 8).unwrap();
        assert_eq!(corpus_bounds(&[a.clone(), b]).unwrap(), (2.0, 5.0));
        assert_eq!(length_summary(&a, (2.0, 5.0)).unwrap(), (2.0, LengthCategory::Short));
    }
}
