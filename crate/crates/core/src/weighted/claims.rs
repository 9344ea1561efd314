//! The two shellable-extension claims behind the weighted theorem.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::group::AbelianGroup;
use crate::zerosum::find_zero_sum_davenport_ranks;

use super::word1::word1_pairs;
use super::{Instance, Shelling};

pub(crate) type Block = Vec<(usize, usize)>;

/// Greedy `D`-shellable extension from domain `a` into image `b` (0-based,
/// sorted). While at least `D` indices remain unused on both sides, the `D`
/// smallest of each are paired in order and a zero-sum subset of the derived
/// sequence `w_i · x_{h(i)}` becomes the next block.
pub(crate) fn claim1_blocks(
    g: &AbelianGroup,
    x: &[usize],
    w: &[i64],
    a: &[usize],
    b: &[usize],
    davenport: usize,
) -> Result<Vec<Block>> {
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut blocks = Vec::new();
    loop {
        let free_a: Vec<usize> = (0..a.len()).filter(|&t| !used_a[t]).take(davenport).collect();
        let free_b: Vec<usize> = (0..b.len()).filter(|&t| !used_b[t]).take(davenport).collect();
        if free_a.len() < davenport || free_b.len() < davenport {
            break;
        }
        let derived: Vec<usize> = free_a
            .iter()
            .zip(&free_b)
            .map(|(&ta, &tb)| g.scale_rank(w[a[ta]], x[b[tb]]))
            .collect();
        let picked = find_zero_sum_davenport_ranks(g, &derived, davenport)?;
        let block = picked
            .into_iter()
            .map(|k| {
                used_a[free_a[k]] = true;
                used_b[free_b[k]] = true;
                (a[free_a[k]], b[free_b[k]])
            })
            .collect();
        blocks.push(block);
    }
    Ok(blocks)
}

/// `ℓ`-shellable set `T` of size at least `D - ℓ` (0-based blocks). Each
/// round restricts to the `n` smallest unused indices on both sides and
/// takes one weighted zero-sum block of size `≤ ℓ` there.
pub(crate) fn claim2_blocks(
    g: &AbelianGroup,
    x: &[usize],
    w: &[i64],
    ell: usize,
    davenport: usize,
) -> Result<Vec<Block>> {
    let n = g.order();
    let m = x.len();
    let mut used_dom = vec![false; m];
    let mut used_img = vec![false; m];
    let mut size = 0;
    let mut blocks = Vec::new();
    while size + ell < davenport {
        let dom: Vec<usize> = (0..m).filter(|&i| !used_dom[i]).take(n).collect();
        let img: Vec<usize> = (0..m).filter(|&j| !used_img[j]).take(n).collect();
        if dom.len() < n || img.len() < n {
            return Err(Error::TheoremViolation(format!(
                "claim2_build ran out of room: {} unused indices, need {n}",
                dom.len().min(img.len())
            )));
        }
        let sub_x: Vec<usize> = img.iter().map(|&j| x[j]).collect();
        let sub_w: Vec<i64> = dom.iter().map(|&i| w[i]).collect();
        let block: Block = word1_pairs(g, &sub_x, &sub_w)?
            .into_iter()
            .map(|(i, j)| (dom[i], img[j]))
            .collect();
        for &(i, j) in &block {
            used_dom[i] = true;
            used_img[j] = true;
        }
        size += block.len();
        blocks.push(block);
    }
    Ok(blocks)
}

pub(crate) fn to_one_based(blocks: Vec<Block>) -> Vec<Block> {
    blocks
        .into_iter()
        .map(|b| b.into_iter().map(|(i, j)| (i + 1, j + 1)).collect())
        .collect()
}

fn index_set(items: &[usize], bound: usize, what: &str) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = items.iter().copied().collect();
    if let Some(&bad) = set.iter().find(|&&i| i == 0 || i > bound) {
        return Err(Error::InvalidArgument(format!(
            "{what} index {bad} outside [1, {bound}]"
        )));
    }
    Ok(set.into_iter().map(|i| i - 1).collect())
}

/// `D`-shellable `(R, g)` with `R ⊆ A`, `g(R) ⊆ B` and `|R| ≥ |A| - D + 1`.
pub fn claim1_extend(inst: &Instance, a: &[usize], b: &[usize], davenport: usize) -> Result<Shelling> {
    let a = index_set(a, inst.w.len(), "domain")?;
    let b = index_set(b, inst.x.len(), "image")?;
    if b.len() < a.len() {
        return Err(Error::InvalidArgument(format!(
            "|B| = {} is smaller than |A| = {}",
            b.len(),
            a.len()
        )));
    }
    let blocks = claim1_blocks(&inst.group, &inst.x_ranks(), &inst.w, &a, &b, davenport)?;
    Shelling::new(inst, to_one_based(blocks), davenport)
        .map_err(|e| Error::TheoremViolation(format!("claim1_extend construction failed: {e}")))
}

/// `ℓ`-shellable `(T, g)` with `|T| ≥ D - ℓ`, for `ℓ < D` and
/// `m = n - ℓ + D - 1`.
pub fn claim2_build(inst: &Instance, davenport: usize) -> Result<Shelling> {
    if inst.ell >= davenport {
        return Err(Error::InvalidInstance(format!(
            "claim2_build needs ell < D (ell = {}, D = {davenport})",
            inst.ell
        )));
    }
    inst.check_theorem1(davenport)?;
    let blocks = claim2_blocks(&inst.group, &inst.x_ranks(), &inst.w, inst.ell, davenport)?;
    Shelling::new(inst, to_one_based(blocks), inst.ell)
        .map_err(|e| Error::TheoremViolation(format!("claim2_build construction failed: {e}")))
}
