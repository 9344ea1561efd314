//! Exhaustive branch-and-bound over weighted selections.
//!
//! This is the independent oracle for the constructive solvers: it knows
//! nothing about shellings or the claims, only the statement's size window,
//! value condition and image constraint. Search order is lexicographic on
//! the sorted `(i, f(i))` pair list, a set being tried before its
//! extensions, so the first hit is the lexicographically smallest solution.

use std::collections::HashSet;

use crate::error::{Error, Result};

use super::{Instance, Selection, Statement};

pub const DEFAULT_ORACLE_CAP: usize = 12;

/// What the oracle looks for: `min_size ≤ |I| ≤ max_size`, `I ⊆
/// [1, domain_len]`, optionally `required_image ∈ f(I)`, and
/// `Σ w_i (x_{f(i)} - x_anchor) = 0` (anchor absent: `Σ w_i x_{f(i)} = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FallbackQuery {
    pub domain_len: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub required_image: Option<usize>,
    pub anchor: Option<usize>,
}

impl FallbackQuery {
    /// The query matching the instance's own statement.
    pub fn for_statement(inst: &Instance, davenport: usize) -> Self {
        let n = inst.group.order();
        let m = inst.m();
        match inst.statement {
            Statement::Theorem1 => FallbackQuery {
                domain_len: inst.w.len(),
                min_size: n.saturating_sub(davenport.min(inst.ell)),
                max_size: n - 1,
                required_image: None,
                anchor: None,
            },
            Statement::Word1 => FallbackQuery {
                domain_len: inst.w.len(),
                min_size: 1,
                max_size: inst.ell,
                required_image: None,
                anchor: None,
            },
            Statement::Corollary => FallbackQuery {
                domain_len: inst.w.len(),
                min_size: n,
                max_size: n,
                required_image: Some(m),
                anchor: Some(m),
            },
        }
    }
}

struct Oracle<'a> {
    terms: Vec<usize>,
    image_len: usize,
    query: &'a FallbackQuery,
    add: &'a dyn Fn(usize, usize) -> usize,
    failed: HashSet<(usize, u64, usize)>,
    stack: Vec<(usize, usize)>,
}

impl Oracle<'_> {
    fn accepts(&self, mask: u64, value: usize) -> bool {
        let size = mask.count_ones() as usize;
        size >= self.query.min_size
            && value == 0
            && self.query.required_image.is_none_or(|r| mask >> (r - 1) & 1 == 1)
    }

    fn dfs(&mut self, next: usize, mask: u64, value: usize) -> bool {
        if self.accepts(mask, value) {
            return true;
        }
        let size = mask.count_ones() as usize;
        if size >= self.query.max_size || self.failed.contains(&(next, mask, value)) {
            return false;
        }
        let last_slot = size + 1 == self.query.max_size;
        let need_required = self.query.required_image.filter(|&r| mask >> (r - 1) & 1 == 0);
        for i in next..self.query.domain_len {
            if size + (self.query.domain_len - i) < self.query.min_size {
                break;
            }
            for j in 0..self.image_len {
                if mask >> j & 1 == 1 {
                    continue;
                }
                if last_slot && need_required.is_some_and(|r| r - 1 != j) {
                    continue;
                }
                self.stack.push((i + 1, j + 1));
                let v = (self.add)(value, self.terms[i * self.image_len + j]);
                if self.dfs(i + 1, mask | 1 << j, v) {
                    return true;
                }
                self.stack.pop();
            }
        }
        self.failed.insert((next, mask, value));
        false
    }
}

/// Lexicographically smallest selection satisfying `query`, or `None`.
/// Refuses sequences longer than `cap` (and never more than 64).
pub fn fallback_search(inst: &Instance, query: &FallbackQuery, cap: usize) -> Result<Option<Selection>> {
    let m = inst.m();
    if m > cap.min(64) {
        return Err(Error::OracleTooLarge { len: m, cap });
    }
    if query.domain_len > inst.w.len() {
        return Err(Error::InvalidArgument(format!(
            "oracle domain [1, {}] exceeds the weight list",
            query.domain_len
        )));
    }
    if query.required_image.is_some_and(|r| r == 0 || r > m) || query.anchor.is_some_and(|a| a == 0 || a > m)
    {
        return Err(Error::InvalidArgument(
            "oracle image constraint out of range".into(),
        ));
    }
    let g = &inst.group;
    let x = inst.x_ranks();
    let shift = query.anchor.map(|a| g.neg_rank(x[a - 1])).unwrap_or(0);
    let mut terms = Vec::with_capacity(query.domain_len * m);
    for &wi in &inst.w[..query.domain_len] {
        for &xj in &x {
            terms.push(g.scale_rank(wi, g.add_ranks(xj, shift)));
        }
    }
    let add = |a, b| g.add_ranks(a, b);
    let mut oracle = Oracle {
        terms,
        image_len: m,
        query,
        add: &add,
        failed: HashSet::new(),
        stack: Vec::new(),
    };
    if query.min_size > query.max_size {
        return Ok(None);
    }
    if !oracle.dfs(0, 0, 0) {
        return Ok(None);
    }
    Selection::new(inst, oracle.stack).map(Some)
}
