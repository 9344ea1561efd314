//! Weighted selections `(I, f)` and the constructive solvers built on them.
//!
//! A selection pairs an index set `I` into the weight list with an injection
//! `f` into sequence positions; its value is `Σ_{i∈I} w_i · x_{f(i)}`. A
//! shelling partitions `I` into blocks of bounded size whose values are each
//! zero. Every solver here returns a [`Certificate`] that the independent
//! checker in [`certificate`] re-derives from the raw instance.
//!
//! Public indices are 1-based throughout; the kernels work 0-based.

pub mod certificate;
mod claims;
pub mod fallback;
mod instance;
mod solve;
mod word1;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Element};

pub use certificate::{verify_certificate, Certificate, Diagnostic, SolvePath, Verification};
pub use claims::{claim1_extend, claim2_build};
pub use fallback::{fallback_search, FallbackQuery, DEFAULT_ORACLE_CAP};
pub use instance::{theorem_length, Instance, Statement};
pub use solve::{corollary_solve, solve, theorem1_solve, word1_solve, SolveOptions};
pub use word1::lemma_word1;

/// `(I, f)` as sorted `(i, f(i))` pairs, with the value it was built with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pairs: Vec<(usize, usize)>,
    value: Element,
}

impl Selection {
    /// Build and validate against `inst`; the value is computed here.
    pub fn new(inst: &Instance, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        let value = selection_value_of(inst, &pairs)?;
        Ok(Self { pairs, value })
    }

    /// Wrap pairs with an externally supplied value (e.g. parsed from a
    /// certificate). Nothing is checked.
    pub fn from_parts(mut pairs: Vec<(usize, usize)>, value: Element) -> Self {
        pairs.sort_unstable();
        Self { pairs, value }
    }

    pub fn empty(g: &AbelianGroup) -> Self {
        Self {
            pairs: Vec::new(),
            value: g.zero(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn domain(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn image(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn map(&self, i: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&i, |p| p.0)
            .ok()
            .map(|k| self.pairs[k].1)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn value(&self) -> &Element {
        &self.value
    }
}

/// Structural checks on `(i, f(i))` pairs: ranges, a function, injective.
fn check_pairs(inst: &Instance, pairs: &[(usize, usize)]) -> Result<()> {
    let mut dom = BTreeSet::new();
    let mut img = BTreeSet::new();
    for &(i, j) in pairs {
        if i == 0 || i > inst.w.len() {
            return Err(Error::InvalidSelection(format!(
                "domain index {i} outside [1, {}]",
                inst.w.len()
            )));
        }
        if j == 0 || j > inst.x.len() {
            return Err(Error::InvalidSelection(format!(
                "image index {j} outside [1, {}]",
                inst.x.len()
            )));
        }
        if !dom.insert(i) {
            return Err(Error::InvalidSelection(format!("index {i} mapped twice")));
        }
        if !img.insert(j) {
            return Err(Error::InvalidSelection(format!(
                "image {j} hit twice: map is not injective"
            )));
        }
    }
    Ok(())
}

fn selection_value_of(inst: &Instance, pairs: &[(usize, usize)]) -> Result<Element> {
    check_pairs(inst, pairs)?;
    let g = &inst.group;
    pairs.iter().try_fold(g.zero(), |acc, &(i, j)| {
        let term = g.scalar_mul(inst.w[i - 1], &inst.x[j - 1])?;
        g.add(&acc, &term)
    })
}

/// `⟨I⟩_f = Σ_{i∈I} w_i · x_{f(i)}`, recomputed from the instance; the
/// cached value on `sel` is ignored.
pub fn selection_value(inst: &Instance, sel: &Selection) -> Result<Element> {
    selection_value_of(inst, &sel.pairs)
}

/// A partition of a selection's domain into zero-valued blocks of size at
/// most `width`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shelling {
    selection: Selection,
    blocks: Vec<Vec<usize>>,
    width: usize,
}

impl Shelling {
    /// Assemble from blocks of `(i, f(i))` pairs, checking every shelling
    /// invariant against `inst`.
    pub fn new(inst: &Instance, blocks: Vec<Vec<(usize, usize)>>, width: usize) -> Result<Self> {
        let g = &inst.group;
        for block in &blocks {
            if block.is_empty() || block.len() > width {
                return Err(Error::InvalidSelection(format!(
                    "block of size {} outside [1, {width}]",
                    block.len()
                )));
            }
            if selection_value_of(inst, block)? != g.zero() {
                return Err(Error::InvalidSelection(format!(
                    "block {block:?} has nonzero value"
                )));
            }
        }
        let selection = Selection::new(inst, blocks.iter().flatten().copied().collect())?;
        let blocks = blocks
            .into_iter()
            .map(|b| b.into_iter().map(|p| p.0).collect())
            .collect();
        Ok(Self {
            selection,
            blocks,
            width,
        })
    }

    pub fn selection(&self) -> &Selection {
        &self.selection
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn into_selection(self) -> Selection {
        self.selection
    }
}

/// Longest prefix of blocks whose union has at most `m0` indices.
///
/// The result has size in `[m0 - width + 1, m0]`, and value zero.
pub fn shelling_trim(sh: &Shelling, m0: usize) -> Result<Shelling> {
    let total = sh.selection.len();
    if m0 > total {
        return Err(Error::InvalidArgument(format!(
            "trim target {m0} exceeds shelling size {total}"
        )));
    }
    let mut kept = Vec::new();
    let mut size = 0;
    for block in &sh.blocks {
        if size + block.len() > m0 {
            break;
        }
        size += block.len();
        kept.push(block.clone());
    }
    let keep: BTreeSet<usize> = kept.iter().flatten().copied().collect();
    let pairs = sh
        .selection
        .pairs
        .iter()
        .filter(|p| keep.contains(&p.0))
        .copied()
        .collect();
    let zero = Element::zero_like(&sh.selection.value);
    Ok(Shelling {
        selection: Selection::from_parts(pairs, zero),
        blocks: kept,
        width: sh.width,
    })
}
