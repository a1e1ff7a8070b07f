//! Weighted edit distance over small integer alphabets.
//!
//! A [`CostModel`] holds the substitution matrix and the insertion/deletion
//! cost. [`edit_distance`] is a two-row dynamic program and records one
//! evaluation in an [`EvalCounter`] per call, whatever the input sizes.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Edit cost in integer units.
pub type Cost = u64;

/// Characters used to print and parse symbols: digits, then lowercase, then
/// uppercase letters. A symbol's code is its index in this table.
pub const SYMBOL_CHARS: &[u8; 62] =
    b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Largest alphabet with a text representation.
pub const MAX_ALPHABET: usize = SYMBOL_CHARS.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct Symbol(u8);

impl Symbol {
    /// # Panics
    ///
    /// If `code` has no text representation (`code >= 62`).
    pub fn new(code: u8) -> Self {
        assert!(
            (code as usize) < MAX_ALPHABET,
            "symbol code {code} out of range"
        );
        Symbol(code)
    }

    pub fn from_char(c: char) -> Option<Self> {
        let code = match c {
            '0'..='9' => c as u8 - b'0',
            'a'..='z' => c as u8 - b'a' + 10,
            'A'..='Z' => c as u8 - b'A' + 36,
            _ => return None,
        };
        Some(Symbol(code))
    }

    pub fn to_char(self) -> char {
        SYMBOL_CHARS[self.0 as usize] as char
    }

    pub fn code(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A string over an integer alphabet. May be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequence(Vec<Symbol>);

impl Sequence {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Sequence(symbols)
    }

    pub fn from_codes(codes: &[u8]) -> Self {
        Sequence(codes.iter().map(|&c| Symbol::new(c)).collect())
    }

    /// Parses text where every character maps to a code below `alphabet_size`.
    pub fn parse(text: &str, alphabet_size: usize) -> Result<Self> {
        text.chars()
            .map(|c| match Symbol::from_char(c) {
                Some(s) if s.index() < alphabet_size => Ok(s),
                _ => Err(Error::invalid_input(format!(
                    "character {c:?} is not in an alphabet of size {alphabet_size}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Sequence)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest code present, if any.
    pub fn max_code(&self) -> Option<u8> {
        self.0.iter().map(|s| s.0).max()
    }

    /// Applies one edit in place.
    pub fn apply(&mut self, op: &EditOperation) -> Result<()> {
        let len = self.len();
        match *op {
            EditOperation::Substitute { position, symbol } if position < len => {
                self.0[position] = symbol
            }
            EditOperation::Delete { position } if position < len => {
                self.0.remove(position);
            }
            EditOperation::Insert { position, symbol } if position <= len => {
                self.0.insert(position, symbol)
            }
            _ => {
                return Err(Error::invalid_argument(format!(
                    "{op:?} out of range for a sequence of length {len}"
                )))
            }
        }
        Ok(())
    }

    /// Returns a copy with `op` applied.
    pub fn edited(&self, op: &EditOperation) -> Result<Self> {
        let mut out = self.clone();
        out.apply(op)?;
        Ok(out)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{}", s.to_char()))
    }
}

impl FromStr for Sequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sequence::parse(s, MAX_ALPHABET)
    }
}

impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// JSON form of a cost model.
#[derive(Debug, Serialize, Deserialize)]
struct CostModelDoc {
    alphabet_size: usize,
    indel: Cost,
    substitution: Vec<Vec<Cost>>,
}

/// Substitution and insertion/deletion costs over an alphabet of
/// `alphabet_size` symbols.
///
/// Construction enforces a zero diagonal, symmetry, and
/// `substitution(a, b) <= 2 * indel`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostModel {
    name: String,
    alphabet_size: usize,
    indel: Cost,
    // row-major alphabet_size x alphabet_size
    substitution: Vec<Cost>,
}

impl CostModel {
    /// Freeman chain codes: eight directions, one unit per 45 degrees of
    /// difference, two units per insertion or deletion.
    pub fn freeman() -> Self {
        let n = 8usize;
        let substitution = (0..n)
            .flat_map(|a| {
                (0..n).map(move |b| {
                    let diff = a.abs_diff(b);
                    diff.min(n - diff) as Cost
                })
            })
            .collect();
        CostModel {
            name: "freeman".into(),
            alphabet_size: n,
            indel: 2,
            substitution,
        }
    }

    /// Plain Levenshtein costs.
    pub fn unit(alphabet_size: usize) -> Result<Self> {
        check_alphabet_size(alphabet_size)?;
        let n = alphabet_size;
        let substitution = (0..n * n)
            .map(|k| Cost::from(k / n != k % n))
            .collect();
        Ok(CostModel {
            name: "unit".into(),
            alphabet_size: n,
            indel: 1,
            substitution,
        })
    }

    pub fn from_matrix(
        name: impl Into<String>,
        indel: Cost,
        substitution: Vec<Vec<Cost>>,
    ) -> Result<Self> {
        let n = substitution.len();
        check_alphabet_size(n)?;
        if let Some(row) = substitution.iter().position(|r| r.len() != n) {
            return Err(Error::invalid_argument(format!(
                "substitution row {row} has {} entries, expected {n}",
                substitution[row].len()
            )));
        }
        for a in 0..n {
            if substitution[a][a] != 0 {
                return Err(Error::invalid_argument(format!(
                    "substitution({a},{a}) must be 0"
                )));
            }
            for b in 0..n {
                let cost = substitution[a][b];
                if cost != substitution[b][a] {
                    return Err(Error::invalid_argument(format!(
                        "substitution matrix is not symmetric at ({a},{b})"
                    )));
                }
                if cost > 2 * indel {
                    return Err(Error::invalid_argument(format!(
                        "substitution({a},{b}) = {cost} exceeds twice the indel cost {indel}"
                    )));
                }
            }
        }
        Ok(CostModel {
            name: name.into(),
            alphabet_size: n,
            indel,
            substitution: substitution.into_iter().flatten().collect(),
        })
    }

    /// Parses `{"alphabet_size": n, "indel": k, "substitution": [[..]]}`.
    pub fn from_json(json: &str) -> Result<Self> {
        let doc: CostModelDoc = serde_json::from_str(json)?;
        if doc.substitution.len() != doc.alphabet_size {
            return Err(Error::invalid_argument(format!(
                "alphabet_size is {} but the substitution matrix has {} rows",
                doc.alphabet_size,
                doc.substitution.len()
            )));
        }
        CostModel::from_matrix("custom", doc.indel, doc.substitution)
    }

    pub fn to_json(&self) -> String {
        let n = self.alphabet_size;
        let doc = CostModelDoc {
            alphabet_size: n,
            indel: self.indel,
            substitution: self.substitution.chunks(n).map(<[Cost]>::to_vec).collect(),
        };
        serde_json::to_string(&doc).expect("cost model serializes")
    }

    /// Resolves a built-in by name (`"freeman"`, `"unit"`). `unit` needs an
    /// alphabet size.
    pub fn builtin(name: &str, alphabet_size: Option<usize>) -> Result<Self> {
        match name {
            "freeman" => match alphabet_size {
                None | Some(8) => Ok(CostModel::freeman()),
                Some(n) => Err(Error::invalid_argument(format!(
                    "the freeman model has 8 symbols, not {n}"
                ))),
            },
            "unit" => CostModel::unit(alphabet_size.ok_or_else(|| {
                Error::invalid_argument("the unit model needs an alphabet size")
            })?),
            other => Err(Error::invalid_argument(format!(
                "unknown cost model {other:?}"
            ))),
        }
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        CostModel::from_json(&text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn indel(&self) -> Cost {
        self.indel
    }

    #[inline]
    pub fn substitution(&self, a: Symbol, b: Symbol) -> Cost {
        self.substitution[a.index() * self.alphabet_size + b.index()]
    }

    #[inline]
    pub(crate) fn substitution_row(&self, a: Symbol) -> &[Cost] {
        let n = self.alphabet_size;
        &self.substitution[a.index() * n..(a.index() + 1) * n]
    }

    pub fn validate(&self, seq: &Sequence) -> Result<()> {
        match seq.symbols().iter().position(|s| s.index() >= self.alphabet_size) {
            None => Ok(()),
            Some(pos) => Err(Error::invalid_argument(format!(
                "symbol {:?} at position {pos} is outside an alphabet of size {}",
                seq.symbols()[pos].to_char(),
                self.alphabet_size
            ))),
        }
    }
}

fn check_alphabet_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ALPHABET {
        return Err(Error::invalid_argument(format!(
            "alphabet size must be in 1..={MAX_ALPHABET}, got {n}"
        )));
    }
    Ok(())
}

/// Number of full edit-distance computations. Safe to share across threads.
#[derive(Debug, Default)]
pub struct EvalCounter(AtomicU64);

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    #[inline]
    pub fn increment(&self) {
        self.add(1);
    }

    #[inline]
    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    /// Requires exclusive access, so it cannot race with a running experiment.
    pub fn reset(&mut self) {
        *self.0.get_mut() = 0;
    }
}

/// Minimum total cost of transforming `a` into `b`. Counts one evaluation.
pub fn edit_distance(
    a: &Sequence,
    b: &Sequence,
    model: &CostModel,
    counter: &EvalCounter,
) -> Result<Cost> {
    model.validate(a)?;
    model.validate(b)?;
    Ok(counted_distance(a.symbols(), b.symbols(), model, counter))
}

/// [`edit_distance`] for inputs already validated against `model`.
#[inline]
pub(crate) fn counted_distance(
    a: &[Symbol],
    b: &[Symbol],
    model: &CostModel,
    counter: &EvalCounter,
) -> Cost {
    counter.increment();
    distance_kernel(a, b, model)
}

pub(crate) fn distance_kernel(a: &[Symbol], b: &[Symbol], model: &CostModel) -> Cost {
    // symmetric costs, so the row can run over the shorter input
    let (outer, inner) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let indel = model.indel;
    let mut prev: Vec<Cost> = (0..=inner.len() as Cost).map(|j| j * indel).collect();
    let mut cur = vec![0; inner.len() + 1];
    for (i, &x) in outer.iter().enumerate() {
        let row = model.substitution_row(x);
        cur[0] = (i as Cost + 1) * indel;
        for (j, &y) in inner.iter().enumerate() {
            let diag = prev[j] + row[y.index()];
            let up = prev[j + 1] + indel;
            let left = cur[j] + indel;
            cur[j + 1] = diag.min(up).min(left);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[inner.len()]
}

/// One edit applied to a sequence. Positions index the sequence as it is at
/// the moment the edit is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EditOperation {
    Substitute {
        position: usize,
        #[serde(with = "symbol_char")]
        symbol: Symbol,
    },
    Insert {
        position: usize,
        #[serde(with = "symbol_char")]
        symbol: Symbol,
    },
    Delete {
        position: usize,
    },
}

impl EditOperation {
    pub fn position(&self) -> usize {
        match *self {
            EditOperation::Substitute { position, .. }
            | EditOperation::Insert { position, .. }
            | EditOperation::Delete { position } => position,
        }
    }

    pub fn symbol(&self) -> Option<Symbol> {
        match *self {
            EditOperation::Substitute { symbol, .. } | EditOperation::Insert { symbol, .. } => {
                Some(symbol)
            }
            EditOperation::Delete { .. } => None,
        }
    }

    /// Cost of applying this edit to `current`.
    pub fn cost(&self, current: &Sequence, model: &CostModel) -> Result<Cost> {
        match *self {
            EditOperation::Substitute { position, symbol } => {
                let old = current.symbols().get(position).ok_or_else(|| {
                    Error::invalid_argument(format!("substitution at {position} out of range"))
                })?;
                Ok(model.substitution(*old, symbol))
            }
            EditOperation::Insert { .. } | EditOperation::Delete { .. } => Ok(model.indel),
        }
    }
}

mod symbol_char {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Symbol;

    pub fn serialize<S: Serializer>(symbol: &Symbol, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_char(symbol.to_char())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Symbol, D::Error> {
        let c = char::deserialize(d)?;
        Symbol::from_char(c).ok_or_else(|| serde::de::Error::custom(format!("bad symbol {c:?}")))
    }
}

/// A minimal-cost script turning `a` into `b`. Does not touch any counter.
///
/// Ties during backtracking prefer substitution (or match), then deletion,
/// then insertion.
pub fn edit_script(a: &Sequence, b: &Sequence, model: &CostModel) -> Result<Vec<EditOperation>> {
    model.validate(a)?;
    model.validate(b)?;
    let (a, b) = (a.symbols(), b.symbols());
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let indel = model.indel;

    let mut table = vec![0 as Cost; (n + 1) * width];
    for j in 0..=m {
        table[j] = j as Cost * indel;
    }
    for i in 1..=n {
        table[i * width] = i as Cost * indel;
        for j in 1..=m {
            let diag = table[(i - 1) * width + j - 1] + model.substitution(a[i - 1], b[j - 1]);
            let up = table[(i - 1) * width + j] + indel;
            let left = table[i * width + j - 1] + indel;
            table[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = table[i * width + j];
        if i > 0
            && j > 0
            && here == table[(i - 1) * width + j - 1] + model.substitution(a[i - 1], b[j - 1])
        {
            if a[i - 1] != b[j - 1] {
                ops.push(EditOperation::Substitute {
                    position: j - 1,
                    symbol: b[j - 1],
                });
            }
            i -= 1;
            j -= 1;
        } else if i > 0 && here == table[(i - 1) * width + j] + indel {
            ops.push(EditOperation::Delete { position: j });
            i -= 1;
        } else {
            ops.push(EditOperation::Insert {
                position: j - 1,
                symbol: b[j - 1],
            });
            j -= 1;
        }
    }
    ops.reverse();
    Ok(ops)
}
