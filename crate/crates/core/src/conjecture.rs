//! Counterexample search for the weighted bounded-repetition conjecture:
//! for `|x| = n`, `ρ(x) ≤ k ≤ n` and `k` weights, is there a nonempty
//! `I ⊆ [1, k]` and an injection `f: I → [1, n]` with `Σ w_i x_{f(i)} = 0`?

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{gcd, rho, AbelianGroup, Element};
use crate::weighted::{fallback_search, FallbackQuery, Instance, Selection, Statement};

/// Instances checked per parallel batch.
const CHUNK: usize = 4096;

type InstanceStream = Box<dyn Iterator<Item = (Vec<usize>, Vec<i64>)>>;

fn check_shape(g: &AbelianGroup, x: &[Element], w: &[i64]) -> Result<()> {
    let n = g.order();
    let k = w.len();
    if x.len() != n {
        return Err(Error::InvalidInstance(format!("|x| = {} but |G| = {n}", x.len())));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInstance(format!("k = {k} outside [1, {n}]")));
    }
    let r = rho(x)?;
    if r > k {
        return Err(Error::InvalidInstance(format!("rho(x) = {r} exceeds k = {k}")));
    }
    Ok(())
}

/// Lexicographically smallest nonempty zero-valued selection with
/// `I ⊆ [1, k]` (`k = |w|`) and `f` injective into `[1, n]`, or `None`.
pub fn conjecture_check_instance(g: &AbelianGroup, x: &[Element], w: &[i64]) -> Result<Option<Selection>> {
    check_shape(g, x, w)?;
    if g.order() > 64 {
        return Err(Error::OracleTooLarge {
            len: g.order(),
            cap: 64,
        });
    }
    let inst = Instance::new(g.clone(), x.to_vec(), w.to_vec(), w.len(), Statement::Word1);
    let query = FallbackQuery {
        domain_len: w.len(),
        min_size: 1,
        max_size: w.len(),
        required_image: None,
        anchor: None,
    };
    fallback_search(&inst, &query, 64)
}

/// Value of `(I, f)` recomputed with element arithmetic, if the pairs are
/// in range and injective.
fn recompute(g: &AbelianGroup, x: &[Element], w: &[i64], pairs: &[(usize, usize)]) -> Option<Element> {
    let mut dom = vec![false; w.len()];
    let mut img = vec![false; x.len()];
    let mut total = g.zero();
    for &(i, j) in pairs {
        if i == 0 || i > w.len() || j == 0 || j > x.len() || dom[i - 1] || img[j - 1] {
            return None;
        }
        dom[i - 1] = true;
        img[j - 1] = true;
        total = g.add(&total, &g.scalar_mul(w[i - 1], &x[j - 1]).ok()?).ok()?;
    }
    Some(total)
}

/// Plain enumeration: every nonempty `I ⊆ [1, k]` and every injection.
/// Shares nothing with the branch-and-bound search.
pub fn has_solution_by_enumeration(g: &AbelianGroup, x: &[Element], w: &[i64]) -> bool {
    fn place(g: &AbelianGroup, x: &[Element], terms: &[i64], used: &mut [bool], acc: &Element) -> bool {
        let Some((&c, rest)) = terms.split_first() else {
            return acc.residues().iter().all(|&r| r == 0);
        };
        for j in 0..x.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            let next = g
                .add(acc, &g.scalar_mul(c, &x[j]).expect("element of g"))
                .expect("element of g");
            let found = place(g, x, rest, used, &next);
            used[j] = false;
            if found {
                return true;
            }
        }
        false
    }
    let k = w.len();
    (1u64..1 << k).any(|mask| {
        let terms: Vec<i64> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| w[i]).collect();
        place(g, x, &terms, &mut vec![false; x.len()], &g.zero())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    pub k: usize,
    /// Candidate weights, deduplicated and sorted by the scan.
    pub weights: Vec<i64>,
    pub mode: ScanMode,
    /// Number of instances drawn in sampled mode.
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    /// Most instances a scan may check before it stops early.
    pub budget: u64,
    pub witness_sample: usize,
}

impl ScanConfig {
    /// Exhaustive scan over weights `[1, n-1]`.
    pub fn exhaustive(g: &AbelianGroup, k: usize) -> Self {
        ScanConfig {
            k,
            weights: default_weights(g),
            mode: ScanMode::Exhaustive,
            samples: 0,
            seed: 0,
            workers: 1,
            budget: 10_000_000,
            witness_sample: 8,
        }
    }
}

pub fn default_weights(g: &AbelianGroup) -> Vec<i64> {
    (1..g.order() as i64).collect()
}

/// One `(x, w)` pair; `x` in the group's given presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanInstance {
    pub x: Vec<Vec<i64>>,
    pub w: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanWitness {
    pub x: Vec<Vec<i64>>,
    pub w: Vec<i64>,
    #[serde(rename = "I")]
    pub domain: Vec<usize>,
    pub f: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub group: AbelianGroup,
    pub k: usize,
    pub weights: Vec<i64>,
    pub mode: ScanMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub davenport: usize,
    /// Instances in scope (exhaustive) or requested samples.
    pub instances_total: u64,
    pub instances_scanned: u64,
    pub witnesses_verified: u64,
    /// Instances without a selection, each confirmed by full enumeration.
    pub counterexamples: Vec<ScanInstance>,
    /// Counterexamples inside a class where a solution is known to exist.
    pub subclass_violations: Vec<ScanInstance>,
    /// Search and enumeration disagreed, or a witness failed to verify.
    pub integrity_failures: Vec<ScanInstance>,
    pub witnesses: Vec<ScanWitness>,
    pub authoritative: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ScanReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The early stop, if the scan ran out of budget.
    pub fn budget_error(&self) -> Option<Error> {
        (!self.authoritative).then(|| Error::BudgetExceeded {
            budget: self.instances_scanned,
            lower_bound: usize::try_from(self.instances_total).unwrap_or(usize::MAX),
        })
    }

    /// Clean: no subclass violations and no integrity failures.
    pub fn is_sound(&self) -> bool {
        self.subclass_violations.is_empty() && self.integrity_failures.is_empty()
    }
}

enum Outcome {
    Witness(Vec<(usize, usize)>),
    Counterexample,
    Broken,
}

fn examine(g: &AbelianGroup, x: &[Element], w: &[i64]) -> Result<Outcome> {
    match conjecture_check_instance(g, x, w)? {
        Some(sel) => {
            let ok = !sel.is_empty()
                && sel.pairs().iter().all(|&(i, _)| i <= w.len())
                && recompute(g, x, w, sel.pairs()).is_some_and(|v| v == g.zero());
            Ok(if ok {
                Outcome::Witness(sel.pairs().to_vec())
            } else {
                Outcome::Broken
            })
        }
        None if has_solution_by_enumeration(g, x, w) => Ok(Outcome::Broken),
        None => Ok(Outcome::Counterexample),
    }
}

/// Whether a solution is guaranteed: all weights prime to `n`, or `k ≥ D`.
pub fn in_known_subclass(n: usize, w: &[i64], davenport: usize) -> bool {
    w.len() >= davenport || w.iter().all(|&c| gcd(n, c.rem_euclid(n as i64) as usize) == 1)
}

/// All-rank sequences of length `n`, lexicographic, with `ρ ≤ k`.
fn sequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        if rho(&cur).map_or(true, |r| r <= k) {
            out.push(cur.clone());
        }
        let mut t = n;
        loop {
            if t == 0 {
                return out;
            }
            t -= 1;
            cur[t] += 1;
            if cur[t] < n {
                break;
            }
            cur[t] = 0;
        }
    }
}

fn weight_vector(weights: &[i64], k: usize, mut idx: u64) -> Vec<i64> {
    let base = weights.len() as u64;
    let mut w = vec![0; k];
    for slot in w.iter_mut().rev() {
        *slot = weights[(idx % base) as usize];
        idx /= base;
    }
    w
}

/// Scan instances in canonical order (exhaustive: `x` then `w`,
/// lexicographic; sampled: draw order). The report does not depend on the
/// worker count.
pub fn conjecture_scan(g: &AbelianGroup, davenport: usize, cfg: &ScanConfig) -> Result<ScanReport> {
    let start = Instant::now();
    let n = g.order();
    let k = cfg.k;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside [1, {n}]")));
    }
    if cfg.workers == 0 || cfg.budget == 0 {
        return Err(Error::InvalidArgument(
            "workers and budget must be positive".into(),
        ));
    }
    let mut weights = cfg.weights.clone();
    weights.sort_unstable();
    weights.dedup();
    if weights.is_empty() {
        return Err(Error::InvalidArgument("empty weight set".into()));
    }

    let (source, total): (InstanceStream, u64) = match cfg.mode {
        ScanMode::Exhaustive => {
            let xs = sequences(n, k);
            let per_x = (weights.len() as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
            let total = per_x.saturating_mul(xs.len() as u64);
            let ws = weights.clone();
            let iter = xs.into_iter().flat_map(move |x| {
                let ws = ws.clone();
                (0..per_x).map(move |idx| (x.clone(), weight_vector(&ws, k, idx)))
            });
            (Box::new(iter), total)
        }
        ScanMode::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let ws = weights.clone();
            let iter = std::iter::repeat_with(move || {
                let x = loop {
                    let x: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                    if rho(&x).map_or(true, |r| r <= k) {
                        break x;
                    }
                };
                let w = (0..k).map(|_| ws[rng.gen_range(0..ws.len())]).collect();
                (x, w)
            })
            .take(cfg.samples as usize);
            (Box::new(iter), cfg.samples)
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;

    let mut report = ScanReport {
        group: g.clone(),
        k,
        weights: weights.clone(),
        mode: cfg.mode,
        seed: (cfg.mode == ScanMode::Sampled).then_some(cfg.seed),
        davenport,
        instances_total: total,
        instances_scanned: 0,
        witnesses_verified: 0,
        counterexamples: Vec::new(),
        subclass_violations: Vec::new(),
        integrity_failures: Vec::new(),
        witnesses: Vec::new(),
        authoritative: total <= cfg.budget,
        wall_time: Duration::ZERO,
    };

    let mut source = source.take(cfg.budget.min(total) as usize);
    loop {
        let batch: Vec<(Vec<usize>, Vec<i64>)> = source.by_ref().take(CHUNK).collect();
        if batch.is_empty() {
            break;
        }
        let outcomes: Vec<Result<Outcome>> = pool.install(|| {
            batch
                .par_iter()
                .map(|(x, w)| {
                    let x: Vec<Element> = x.iter().map(|&r| g.unrank(r)).collect();
                    examine(g, &x, w)
                })
                .collect()
        });
        for ((x, w), outcome) in batch.into_iter().zip(outcomes) {
            report.instances_scanned += 1;
            let given: Vec<Vec<i64>> = x.iter().map(|&r| g.to_given(&g.unrank(r))).collect();
            match outcome? {
                Outcome::Witness(pairs) => {
                    report.witnesses_verified += 1;
                    if report.witnesses.len() < cfg.witness_sample {
                        report.witnesses.push(ScanWitness {
                            x: given,
                            domain: pairs.iter().map(|p| p.0).collect(),
                            f: pairs.iter().map(|p| p.1).collect(),
                            w,
                        });
                    }
                }
                Outcome::Counterexample => {
                    let item = ScanInstance { x: given, w };
                    if in_known_subclass(n, &item.w, davenport) {
                        report.subclass_violations.push(item.clone());
                    }
                    report.counterexamples.push(item);
                }
                Outcome::Broken => report.integrity_failures.push(ScanInstance { x: given, w }),
            }
        }
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elems(g: &AbelianGroup, ranks: &[usize]) -> Vec<Element> {
        ranks.iter().map(|&r| g.unrank(r)).collect()
    }

    #[test]
    fn annihilating_weight_is_enough() {
        let g = AbelianGroup::cyclic(4).unwrap();
        let sel = conjecture_check_instance(&g, &elems(&g, &[1, 1, 3, 2]), &[3, 4])
            .unwrap()
            .unwrap();
        assert_eq!(sel.value(), &g.zero());
        assert!(sel.pairs().iter().all(|&(i, _)| i <= 2));
    }

    #[test]
    fn davenport_example() {
        let g = AbelianGroup::cyclic(2).unwrap();
        let sel = conjecture_check_instance(&g, &elems(&g, &[0, 1]), &[1, 1])
            .unwrap()
            .unwrap();
        assert_eq!(sel.pairs(), &[(1, 1)]);
    }

    #[test]
    fn preconditions() {
        let g = AbelianGroup::cyclic(3).unwrap();
        let x = elems(&g, &[1, 1, 2]);
        assert!(matches!(
            conjecture_check_instance(&g, &x, &[1]),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            conjecture_check_instance(&g, &x, &[]),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            conjecture_check_instance(&g, &x[..2], &[1, 1]),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn search_agrees_with_enumeration() {
        for n in 2..=5 {
            let g = AbelianGroup::cyclic(n).unwrap();
            for k in 1..=n.min(3) {
                for x in sequences(n, k) {
                    let x = elems(&g, &x);
                    for idx in 0..((n - 1) as u64).pow(k as u32) {
                        let w = weight_vector(&default_weights(&g), k, idx);
                        let found = conjecture_check_instance(&g, &x, &w).unwrap();
                        assert_eq!(found.is_some(), has_solution_by_enumeration(&g, &x, &w));
                    }
                }
            }
        }
    }

    #[test]
    fn z2_scan() {
        let g = AbelianGroup::cyclic(2).unwrap();
        let report = conjecture_scan(&g, 2, &ScanConfig::exhaustive(&g, 1)).unwrap();
        assert_eq!(report.instances_scanned, 2);
        assert_eq!(report.witnesses_verified, 2);
        assert!(report.counterexamples.is_empty() && report.authoritative);
    }

    #[test]
    fn sequences_respect_repetition() {
        assert_eq!(sequences(3, 1).len(), 6);
        assert_eq!(sequences(3, 2).len(), 24);
        assert_eq!(
            sequences(2, 2),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }

    #[test]
    fn worker_count_independent() {
        let g = AbelianGroup::cyclic(4).unwrap();
        let mut cfg = ScanConfig::exhaustive(&g, 3);
        let one = conjecture_scan(&g, 4, &cfg).unwrap().to_json_pretty();
        cfg.workers = 3;
        assert_eq!(conjecture_scan(&g, 4, &cfg).unwrap().to_json_pretty(), one);
    }

    #[test]
    fn sampled_is_seeded() {
        let g = AbelianGroup::canonicalize(&[2, 2]).unwrap();
        let cfg = ScanConfig {
            mode: ScanMode::Sampled,
            samples: 50,
            seed: 11,
            workers: 2,
            ..ScanConfig::exhaustive(&g, 2)
        };
        let a = conjecture_scan(&g, 3, &cfg).unwrap();
        let b = conjecture_scan(&g, 3, &cfg).unwrap();
        assert_eq!(a.to_json_pretty(), b.to_json_pretty());
        assert_eq!(a.instances_scanned, 50);
        let c = conjecture_scan(&g, 3, &ScanConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.witnesses, c.witnesses);
    }

    #[test]
    fn budget_stops_early() {
        let g = AbelianGroup::cyclic(3).unwrap();
        let cfg = ScanConfig {
            budget: 10,
            ..ScanConfig::exhaustive(&g, 2)
        };
        let report = conjecture_scan(&g, 3, &cfg).unwrap();
        assert!(!report.authoritative);
        assert_eq!(report.instances_scanned, 10);
        assert!(matches!(
            report.budget_error(),
            Some(Error::BudgetExceeded { .. })
        ));
    }
}
