//! Unweighted zero-sum subsequence solvers.
//!
//! All three solvers share one layered dynamic program: `reach[j][c]` is the
//! set of sums obtainable by picking exactly `c` of the positions `j..m`.
//! Reconstruction walks forward and takes a position whenever the remainder
//! is still completable, which yields the lexicographically smallest index
//! set of the chosen cardinality. Cardinalities are tried smallest first.

use serde::{Deserialize, Serialize};

use crate::bitset::RankSet;
use crate::error::{Error, Result};
use crate::group::{rho, AbelianGroup, Element};

/// Nonempty, sorted, 1-based positions whose elements sum to zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroSumWitness {
    pub indices: Vec<usize>,
}

impl ZeroSumWitness {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Re-check against the raw sequence using element arithmetic only.
    pub fn verify(&self, g: &AbelianGroup, x: &[Element]) -> bool {
        if self.indices.is_empty() || !self.indices.windows(2).all(|w| w[0] < w[1]) {
            return false;
        }
        if self.indices.iter().any(|&i| i == 0 || i > x.len()) {
            return false;
        }
        g.sum(self.indices.iter().map(|&i| &x[i - 1]))
            .is_ok_and(|s| s == g.zero())
    }
}

/// Smallest cardinality in `[min_size, max_size]` admitting a zero-sum
/// subset of `ranks`, and the lexicographically smallest such subset
/// (0-based positions).
pub(crate) fn shortest_zero_sum(
    g: &AbelianGroup,
    ranks: &[usize],
    min_size: usize,
    max_size: usize,
) -> Option<Vec<usize>> {
    let m = ranks.len();
    let cap = max_size.min(m);
    let min_size = min_size.max(1);
    if min_size > cap {
        return None;
    }
    let n = g.order();
    let width = cap + 1;
    let mut reach = vec![RankSet::new(n); (m + 1) * width];
    reach[m * width].insert(0);
    for j in (0..m).rev() {
        for c in 0..=cap {
            let mut here = reach[(j + 1) * width + c].clone();
            if c > 0 {
                for s in reach[(j + 1) * width + c - 1].iter() {
                    here.insert(g.add_ranks(s, ranks[j]));
                }
            }
            reach[j * width + c] = here;
        }
    }

    let size = (min_size..=cap).find(|&c| reach[c].contains(0))?;
    let mut picked = Vec::with_capacity(size);
    let (mut target, mut left) = (0usize, size);
    for (j, &r) in ranks.iter().enumerate() {
        if left == 0 {
            break;
        }
        let rest = g.add_ranks(target, g.neg_rank(r));
        if reach[(j + 1) * width + left - 1].contains(rest) {
            picked.push(j);
            target = rest;
            left -= 1;
        }
    }
    debug_assert_eq!((left, target), (0, 0));
    Some(picked)
}

fn to_witness(positions: Vec<usize>) -> ZeroSumWitness {
    ZeroSumWitness {
        indices: positions.into_iter().map(|p| p + 1).collect(),
    }
}

fn ranks_of(g: &AbelianGroup, x: &[Element]) -> Result<Vec<usize>> {
    x.iter()
        .map(|e| g.element(e.residues().to_vec()).map(|e| g.rank_of(&e)))
        .collect()
}

/// Nonempty zero-sum subsequence of length at most `k` in a length-`n`
/// sequence whose maximal repetition is at most `k`.
pub fn find_zero_sum_bounded(g: &AbelianGroup, x: &[Element], k: usize) -> Result<ZeroSumWitness> {
    let n = g.order();
    if x.len() != n {
        return Err(Error::InvalidInstance(format!(
            "sequence length {} must equal the group order {n}",
            x.len()
        )));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidInstance(format!("bound k = {k} outside [1, {n}]")));
    }
    let r = rho(x)?;
    if r > k {
        return Err(Error::InvalidInstance(format!(
            "maximal repetition {r} exceeds bound k = {k}"
        )));
    }
    let ranks = ranks_of(g, x)?;
    shortest_zero_sum(g, &ranks, 1, k).map(to_witness).ok_or_else(|| {
        Error::TheoremViolation(format!(
            "no zero-sum subsequence of length <= {k} in a length-{n} sequence over {g} with repetition {r}"
        ))
    })
}

/// Nonempty zero-sum subsequence of a sequence of length at least `D(G)`.
pub fn find_zero_sum_davenport(g: &AbelianGroup, x: &[Element], davenport: usize) -> Result<ZeroSumWitness> {
    if x.len() < davenport {
        return Err(Error::InvalidInstance(format!(
            "sequence length {} is below D = {davenport}",
            x.len()
        )));
    }
    let ranks = ranks_of(g, x)?;
    find_zero_sum_davenport_ranks(g, &ranks, davenport).map(to_witness)
}

pub(crate) fn find_zero_sum_davenport_ranks(
    g: &AbelianGroup,
    ranks: &[usize],
    davenport: usize,
) -> Result<Vec<usize>> {
    shortest_zero_sum(g, ranks, 1, ranks.len()).ok_or_else(|| {
        Error::TheoremViolation(format!(
            "length-{} sequence over {g} (D = {davenport}) is zero-sum free",
            ranks.len()
        ))
    })
}

/// Zero-sum subsequence of exactly `len` terms, if one exists.
pub fn find_zero_sum_exact_length(
    g: &AbelianGroup,
    x: &[Element],
    len: usize,
) -> Result<Option<ZeroSumWitness>> {
    if len < 1 || len > x.len() {
        return Err(Error::InvalidInstance(format!(
            "length {len} outside [1, {}]",
            x.len()
        )));
    }
    let ranks = ranks_of(g, x)?;
    Ok(shortest_zero_sum(g, &ranks, len, len).map(to_witness))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(orders: &[i64]) -> AbelianGroup {
        AbelianGroup::canonicalize(orders).unwrap()
    }

    fn seq(g: &AbelianGroup, rs: &[&[usize]]) -> Vec<Element> {
        rs.iter().map(|r| g.element(r.to_vec()).unwrap()).collect()
    }

    fn cyc(g: &AbelianGroup, rs: &[usize]) -> Vec<Element> {
        rs.iter().map(|&r| g.element(vec![r]).unwrap()).collect()
    }

    /// Shortest-then-lexicographic zero-sum subset by plain enumeration.
    fn oracle(g: &AbelianGroup, x: &[Element], lo: usize, hi: usize) -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        for mask in 1u32..1 << x.len() {
            let idx: Vec<usize> = (0..x.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| i + 1)
                .collect();
            if idx.len() < lo || idx.len() > hi {
                continue;
            }
            if g.sum(idx.iter().map(|&i| &x[i - 1])).unwrap() != g.zero() {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => (idx.len(), &idx) < (b.len(), b),
            };
            if better {
                best = Some(idx);
            }
        }
        best
    }

    #[test]
    fn bounded_examples() {
        let z4 = g(&[4]);
        let w = find_zero_sum_bounded(&z4, &cyc(&z4, &[1, 3, 2, 2]), 2).unwrap();
        assert_eq!(w.indices, vec![1, 2]);
        let w = find_zero_sum_bounded(&z4, &cyc(&z4, &[1, 2, 0, 3]), 1).unwrap();
        assert_eq!(w.indices, vec![3]);

        let v4 = g(&[2, 2]);
        let x = seq(&v4, &[&[1, 0], &[1, 0], &[0, 1], &[0, 1]]);
        assert_eq!(find_zero_sum_bounded(&v4, &x, 2).unwrap().indices, vec![1, 2]);
    }

    #[test]
    fn bounded_preconditions() {
        let z4 = g(&[4]);
        let x = cyc(&z4, &[1, 1, 1, 2]);
        assert!(matches!(
            find_zero_sum_bounded(&z4, &x, 2),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            find_zero_sum_bounded(&z4, &x[..3], 3),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            find_zero_sum_bounded(&z4, &x, 0),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            find_zero_sum_bounded(&z4, &x, 5),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn davenport_examples() {
        let z3 = g(&[3]);
        let w = find_zero_sum_davenport(&z3, &cyc(&z3, &[1, 1, 1]), 3).unwrap();
        assert_eq!(w.indices, vec![1, 2, 3]);
        let v4 = g(&[2, 2]);
        let x = seq(&v4, &[&[1, 1], &[1, 1], &[0, 1]]);
        assert_eq!(find_zero_sum_davenport(&v4, &x, 3).unwrap().indices, vec![1, 2]);
        let w = find_zero_sum_davenport(&z3, &cyc(&z3, &[2, 0, 1]), 3).unwrap();
        assert_eq!(w.indices, vec![2]);
        assert!(matches!(
            find_zero_sum_davenport(&z3, &cyc(&z3, &[1, 1]), 3),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn exact_length_examples() {
        let z2 = g(&[2]);
        let w = find_zero_sum_exact_length(&z2, &cyc(&z2, &[0, 0, 1]), 2)
            .unwrap()
            .unwrap();
        assert_eq!(w.indices, vec![1, 2]);
        let z3 = g(&[3]);
        let w = find_zero_sum_exact_length(&z3, &cyc(&z3, &[1, 1, 1, 2, 2]), 3)
            .unwrap()
            .unwrap();
        assert_eq!(w.indices, vec![1, 2, 3]);
        let z5 = g(&[5]);
        let w = find_zero_sum_exact_length(&z5, &cyc(&z5, &[3; 5]), 5)
            .unwrap()
            .unwrap();
        assert_eq!(w.indices, vec![1, 2, 3, 4, 5]);
        assert_eq!(
            find_zero_sum_exact_length(&z5, &cyc(&z5, &[1, 1, 1]), 2).unwrap(),
            None
        );
        assert!(find_zero_sum_exact_length(&z5, &cyc(&z5, &[1]), 2).is_err());
    }

    #[test]
    fn dp_matches_enumeration() {
        for orders in [&[6][..], &[2, 4], &[3, 3]] {
            let grp = g(orders);
            let all = grp.enumerate();
            let n = all.len();
            // deterministic spread of sequences of length 7
            for s in 0..400usize {
                let x: Vec<Element> = (0..7)
                    .map(|i| all[(s * 7 + i * i * 3 + s / 5) % n].clone())
                    .collect();
                let ranks: Vec<usize> = x.iter().map(|e| grp.rank_of(e)).collect();
                for (lo, hi) in [(1, 7), (1, 2), (3, 3), (4, 4), (2, 5)] {
                    let got = shortest_zero_sum(&grp, &ranks, lo, hi)
                        .map(|p| p.into_iter().map(|i| i + 1).collect::<Vec<_>>());
                    assert_eq!(got, oracle(&grp, &x, lo, hi), "{orders:?} {x:?} {lo} {hi}");
                }
            }
        }
    }

    #[test]
    fn witness_verify_rejects_bad_indices() {
        let z3 = g(&[3]);
        let x = cyc(&z3, &[1, 2]);
        assert!(ZeroSumWitness { indices: vec![1, 2] }.verify(&z3, &x));
        assert!(!ZeroSumWitness { indices: vec![1] }.verify(&z3, &x));
        assert!(!ZeroSumWitness { indices: vec![2, 1] }.verify(&z3, &x));
        assert!(!ZeroSumWitness { indices: vec![3] }.verify(&z3, &x));
        assert!(!ZeroSumWitness { indices: vec![] }.verify(&z3, &x));
    }
}
