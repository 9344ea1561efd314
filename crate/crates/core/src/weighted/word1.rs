use crate::error::{Error, Result};
use crate::group::{rho, AbelianGroup};
use crate::zerosum::shortest_zero_sum;

use super::{Instance, Shelling};

/// Smallest value of maximal multiplicity in `xs`.
fn most_repeated(xs: &[usize]) -> (usize, usize) {
    let mut counts = std::collections::BTreeMap::new();
    for &x in xs {
        *counts.entry(x).or_insert(0usize) += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let value = counts
        .into_iter()
        .find(|&(_, c)| c == top)
        .map(|(v, _)| v)
        .unwrap_or(0);
    (value, top)
}

/// Weighted zero-sum block for a length-`n` sequence (given as ranks) and
/// `n` weights, with `1 ≤ |I| ≤ ρ(x)`. Returns 0-based `(i, f(i))` pairs.
///
/// Two routes, by comparing `r = ρ(x)` with `s = ρ(w mod n)`:
/// * `s ≤ r`: a zero-sum set of weights in `Z_n` of size `≤ s`, sent into the
///   positions of a most repeated value of `x`;
/// * `s > r`: a zero-sum set `J` of `x` of size `≤ r`, fed by equally many
///   copies of a most repeated weight residue.
pub(crate) fn word1_pairs(g: &AbelianGroup, x: &[usize], w: &[i64]) -> Result<Vec<(usize, usize)>> {
    let n = g.order();
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(w.len(), n);
    let wmod: Vec<usize> = w.iter().map(|&c| c.rem_euclid(n as i64) as usize).collect();
    if let Some(i) = wmod.iter().position(|&c| c == 0) {
        return Ok(vec![(i, 0)]);
    }
    let (a, r) = most_repeated(x);
    let (b, s) = most_repeated(&wmod);

    if s <= r {
        let zn = AbelianGroup::cyclic(n)?;
        let set = shortest_zero_sum(&zn, &wmod, 1, s).ok_or_else(|| {
            Error::TheoremViolation(format!(
                "weights {wmod:?} mod {n} (repetition {s}) have no zero-sum subset of size <= {s}"
            ))
        })?;
        let targets = x.iter().enumerate().filter(|&(_, &v)| v == a).map(|(j, _)| j);
        Ok(set.into_iter().zip(targets).collect())
    } else {
        let set = shortest_zero_sum(g, x, 1, r).ok_or_else(|| {
            Error::TheoremViolation(format!(
                "length-{n} sequence over {g} with repetition {r} has no zero-sum subset of size <= {r}"
            ))
        })?;
        let sources = wmod.iter().enumerate().filter(|&(_, &c)| c == b).map(|(i, _)| i);
        Ok(sources.zip(set).collect())
    }
}

/// Weighted analogue of the bounded zero-sum lemma: for `|x| = |w| = n`
/// and `ρ(x) ≤ ℓ`, a single-block shelling of width `ℓ`.
pub fn lemma_word1(inst: &Instance) -> Result<Shelling> {
    inst.check_word1()?;
    let g = &inst.group;
    let pairs = word1_pairs(g, &inst.x_ranks(), &inst.w)?;
    debug_assert!(pairs.len() <= rho(&inst.x)?);
    let block = pairs.into_iter().map(|(i, j)| (i + 1, j + 1)).collect();
    Shelling::new(inst, vec![block], inst.ell)
        .map_err(|e| Error::TheoremViolation(format!("word1 construction failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighted::{Selection, Statement};
    use crate::Element;

    fn inst(orders: &[i64], x: &[usize], w: &[i64], ell: usize) -> Instance {
        let g = AbelianGroup::canonicalize(orders).unwrap();
        let x = x.iter().map(|&r| g.unrank(r)).collect();
        Instance::new(g, x, w.to_vec(), ell, Statement::Word1)
    }

    /// Every `(I, f)` with `1 ≤ |I| ≤ ℓ`, smallest first.
    fn brute(inst: &Instance) -> Vec<Selection> {
        let n = inst.x.len();
        let mut out = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        fn rec(
            inst: &Instance,
            n: usize,
            start: usize,
            stack: &mut Vec<(usize, usize)>,
            out: &mut Vec<Selection>,
        ) {
            if !stack.is_empty() {
                let sel = Selection::new(inst, stack.clone()).unwrap();
                if sel.value() == &inst.group.zero() {
                    out.push(sel);
                }
            }
            if stack.len() == inst.ell {
                return;
            }
            for i in start..=n {
                for j in 1..=n {
                    if stack.iter().any(|p| p.1 == j) {
                        continue;
                    }
                    stack.push((i, j));
                    rec(inst, n, i + 1, stack, out);
                    stack.pop();
                }
            }
        }
        rec(inst, n, 1, &mut stack, &mut out);
        out
    }

    #[test]
    fn annihilating_weight() {
        let i = inst(&[4], &[1, 2, 3, 1], &[5, 8, 1, 1], 2);
        let sh = lemma_word1(&i).unwrap();
        assert_eq!(sh.selection().pairs(), &[(2, 1)]);
    }

    #[test]
    fn example_s_greater_than_r() {
        let i = inst(&[3], &[0, 1, 2], &[5, 5, 5], 1);
        let sh = lemma_word1(&i).unwrap();
        assert_eq!(sh.selection().pairs(), &[(1, 1)]);
        assert!(brute(&i).iter().any(|s| s.pairs() == [(1, 1)]));
    }

    #[test]
    fn example_s_at_most_r() {
        let i = inst(&[2], &[1, 1], &[1, 1], 2);
        let sh = lemma_word1(&i).unwrap();
        assert_eq!(sh.selection().pairs(), &[(1, 1), (2, 2)]);
        assert_eq!(sh.blocks().len(), 1);
        assert_eq!(brute(&i)[0].pairs(), &[(1, 1), (2, 2)]);
    }

    #[test]
    fn preconditions() {
        let i = inst(&[3], &[1, 1, 2], &[1, 1, 1], 1);
        assert!(matches!(lemma_word1(&i), Err(Error::InvalidInstance(_))));
        let i = inst(&[3], &[1, 1], &[1, 1], 2);
        assert!(matches!(lemma_word1(&i), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn exhaustive_small_groups() {
        for orders in [&[2][..], &[3], &[4], &[2, 2], &[5]] {
            let g = AbelianGroup::canonicalize(orders).unwrap();
            let n = g.order();
            let wmax = if n <= 4 { n } else { 3 };
            let total_x = n.pow(n as u32);
            for xs in 0..total_x {
                let x: Vec<usize> = (0..n).map(|t| xs / n.pow(t as u32) % n).collect();
                let r = rho(&x).unwrap();
                for ws in 0..wmax.pow(n as u32) {
                    let w: Vec<i64> = (0..n)
                        .map(|t| (ws / wmax.pow(t as u32) % wmax) as i64 + 1)
                        .collect();
                    for ell in r..=n {
                        let i = inst(orders, &x, &w, ell);
                        let sh = lemma_word1(&i).unwrap();
                        let sel = sh.selection();
                        assert!(!sel.is_empty() && sel.len() <= ell);
                        assert_eq!(sel.value(), &Element::zero_like(sel.value()));
                    }
                }
            }
        }
    }
}
