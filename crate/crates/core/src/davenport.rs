//! Davenport constants: exact search, closed forms and a persistent cache.
//!
//! `D(G)` is one more than the length of the longest zero-sum-free sequence
//! over `G`. The exact search enumerates non-decreasing rank sequences (a
//! zero-sum-free sequence is a multiset property) and carries the set of
//! reachable nonempty subsequence sums as a bit-vector. An element `e` can be
//! appended iff `-e` is not already reachable and `e != 0`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::bitset::RankSet;
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Element};

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactSearch,
    Formula,
    Cache,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DavenportRecord {
    pub group: AbelianGroup,
    pub value: usize,
    pub witness: Vec<Element>,
    pub method: Method,
}

/// `true` iff no nonempty subsequence of `seq` sums to zero.
pub fn zero_sum_free_check(g: &AbelianGroup, seq: &[Element]) -> bool {
    let mut sums = RankSet::new(g.order());
    for e in seq {
        let e = g.rank_of(e);
        if e == 0 || sums.contains(g.neg_rank(e)) {
            return false;
        }
        sums = extend_sums(g, &sums, e);
    }
    true
}

/// `sums ∪ (sums + e) ∪ {e}`.
fn extend_sums(g: &AbelianGroup, sums: &RankSet, e: usize) -> RankSet {
    let mut next = sums.clone();
    for s in sums.iter() {
        next.insert(g.add_ranks(s, e));
    }
    next.insert(e);
    next
}

struct Search<'a> {
    g: &'a AbelianGroup,
    budget: u64,
    nodes: u64,
    prefix: Vec<usize>,
    best: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, start: usize, sums: &RankSet) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
                lower_bound: self.best.len() + 1,
            });
        }
        if self.prefix.len() > self.best.len() {
            self.best = self.prefix.clone();
        }
        // every zero-sum-free extension grows the sum set by at least one,
        // and the sum set never contains zero
        let headroom = self.g.order() - 1 - sums.count();
        if self.prefix.len() + headroom <= self.best.len() {
            return Ok(());
        }
        for e in start.max(1)..self.g.order() {
            if sums.contains(self.g.neg_rank(e)) {
                continue;
            }
            let next = extend_sums(self.g, sums, e);
            self.prefix.push(e);
            self.dfs(e, &next)?;
            self.prefix.pop();
        }
        Ok(())
    }
}

/// Exhaustive computation of `D(G)`, returning the lexicographically first
/// longest zero-sum-free sequence (non-decreasing in rank) as witness.
pub fn davenport_exact(g: &AbelianGroup, node_budget: u64) -> Result<DavenportRecord> {
    let mut search = Search {
        g,
        budget: node_budget,
        nodes: 0,
        prefix: Vec::new(),
        best: Vec::new(),
    };
    search.dfs(0, &RankSet::new(g.order()))?;
    Ok(DavenportRecord {
        group: g.canonical(),
        value: search.best.len() + 1,
        witness: search.best.iter().map(|&r| g.unrank(r)).collect(),
        method: Method::ExactSearch,
    })
}

fn is_prime_power(mut n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while !n.is_multiple_of(p) {
        p += 1;
    }
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

/// Closed forms for cyclic groups, rank-two groups and p-groups.
pub fn davenport_formula(g: &AbelianGroup) -> Option<usize> {
    let f = g.invariant_factors();
    match f.len() {
        0 => Some(1),
        1 => Some(f[0]),
        2 => Some(f[0] + f[1] - 1),
        _ if is_prime_power(g.order()) => Some(1 + f.iter().map(|d| d - 1).sum::<usize>()),
        _ => None,
    }
}

/// `d_i - 1` copies of each canonical generator, sorted by rank.
pub fn generator_witness(g: &AbelianGroup) -> Vec<Element> {
    let k = g.rank();
    let mut seq = Vec::new();
    for (i, &d) in g.invariant_factors().iter().enumerate() {
        let mut r = vec![0; k];
        r[i] = 1;
        let e = g.element(r).expect("unit vector");
        seq.extend(std::iter::repeat_n(e, d - 1));
    }
    seq.sort_by_key(|e| g.rank_of(e));
    seq
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct CacheEntry {
    value: usize,
    witness: Vec<Vec<usize>>,
    method: Method,
}

/// Davenport values keyed by canonical invariant factors, optionally
/// persisted to a JSON file.
///
/// All reads and writes go through one mutex; searches run outside it.
#[derive(Debug)]
pub struct DavenportCache {
    path: Option<PathBuf>,
    node_budget: u64,
    entries: Mutex<BTreeMap<String, CacheEntry>>,
}

impl Default for DavenportCache {
    fn default() -> Self {
        Self::in_memory(DEFAULT_NODE_BUDGET)
    }
}

impl DavenportCache {
    pub fn in_memory(node_budget: u64) -> Self {
        Self {
            path: None,
            node_budget,
            entries: Mutex::new(BTreeMap::new()),
        }
    }

    /// Open (or start) a cache file. Entries whose witness does not check
    /// out are dropped on load.
    pub fn open(path: impl Into<PathBuf>, node_budget: u64) -> Result<Self> {
        let path = path.into();
        let mut entries = BTreeMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            let raw: BTreeMap<String, CacheEntry> =
                serde_json::from_str(&text).map_err(|source| Error::Parse {
                    context: path.display().to_string(),
                    source,
                })?;
            for (key, entry) in raw {
                if validate_entry(&key, &entry).is_some() {
                    entries.insert(key, entry);
                }
            }
        }
        Ok(Self {
            path: Some(path),
            node_budget,
            entries: Mutex::new(entries),
        })
    }

    pub fn node_budget(&self) -> u64 {
        self.node_budget
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cache hit, else closed form with a validated generator witness, else
    /// exact search. New results are persisted before returning.
    pub fn get(&self, g: &AbelianGroup) -> Result<DavenportRecord> {
        let key = g.key();
        let canonical = g.canonical();
        if let Some(entry) = self.entries.lock().expect("cache lock").get(&key) {
            let witness = entry
                .witness
                .iter()
                .map(|r| canonical.element(r.clone()))
                .collect::<Result<Vec<_>>>()?;
            return Ok(DavenportRecord {
                group: canonical,
                value: entry.value,
                witness,
                method: Method::Cache,
            });
        }

        let record = match davenport_formula(&canonical) {
            Some(value) => {
                let witness = generator_witness(&canonical);
                if witness.len() + 1 == value && zero_sum_free_check(&canonical, &witness) {
                    DavenportRecord {
                        group: canonical.clone(),
                        value,
                        witness,
                        method: Method::Formula,
                    }
                } else {
                    davenport_exact(&canonical, self.node_budget)?
                }
            }
            None => davenport_exact(&canonical, self.node_budget)?,
        };

        let mut entries = self.entries.lock().expect("cache lock");
        entries.insert(
            key,
            CacheEntry {
                value: record.value,
                witness: record.witness.iter().map(|e| e.residues().to_vec()).collect(),
                method: record.method,
            },
        );
        if let Some(path) = &self.path {
            persist(path, &entries)?;
        }
        Ok(record)
    }
}

fn validate_entry(key: &str, entry: &CacheEntry) -> Option<()> {
    let orders: Vec<i64> = if key == "1" {
        Vec::new()
    } else {
        key.split('x').map(|d| d.parse().ok()).collect::<Option<_>>()?
    };
    let g = AbelianGroup::canonicalize(&orders).ok()?;
    if g.key() != key || entry.witness.len() + 1 != entry.value {
        return None;
    }
    let witness = entry
        .witness
        .iter()
        .map(|r| g.element(r.clone()).ok())
        .collect::<Option<Vec<_>>>()?;
    zero_sum_free_check(&g, &witness).then_some(())
}

fn persist(path: &Path, entries: &BTreeMap<String, CacheEntry>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    let text = serde_json::to_string_pretty(entries).expect("cache entries serialize");
    tmp.write_all(text.as_bytes()).map_err(io_err)?;
    tmp.write_all(b"\n").map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::all_groups_up_to;

    fn g(orders: &[i64]) -> AbelianGroup {
        AbelianGroup::canonicalize(orders).unwrap()
    }

    fn els(g: &AbelianGroup, rs: &[&[usize]]) -> Vec<Element> {
        rs.iter().map(|r| g.element(r.to_vec()).unwrap()).collect()
    }

    /// Subset enumeration, independent of the reachable-sum kernel.
    fn brute_zero_sum_free(g: &AbelianGroup, seq: &[Element]) -> bool {
        (1u32..1 << seq.len()).all(|mask| {
            let picked = seq
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| e);
            g.sum(picked).unwrap() != g.zero()
        })
    }

    #[test]
    fn zero_sum_free_examples() {
        let z5 = g(&[5]);
        assert!(zero_sum_free_check(&z5, &els(&z5, &[&[1], &[1], &[1], &[1]])));
        assert!(!zero_sum_free_check(&z5, &els(&z5, &[&[2], &[0]])));
        let v4 = g(&[2, 2]);
        assert!(!zero_sum_free_check(&v4, &els(&v4, &[&[1, 0], &[0, 1], &[1, 1]])));
        assert!(zero_sum_free_check(&v4, &[]));
    }

    #[test]
    fn zero_sum_free_matches_enumeration() {
        let grp = g(&[2, 4]);
        let all = grp.enumerate();
        // all sequences of length <= 4 over Z_2+Z_4 (as multisets via nested ranks)
        for a in 0..8 {
            for b in a..8 {
                for c in b..8 {
                    for d in c..8 {
                        let seq = vec![all[a].clone(), all[b].clone(), all[c].clone(), all[d].clone()];
                        assert_eq!(zero_sum_free_check(&grp, &seq), brute_zero_sum_free(&grp, &seq));
                        assert_eq!(
                            zero_sum_free_check(&grp, &seq[..2]),
                            brute_zero_sum_free(&grp, &seq[..2])
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn exact_examples() {
        let t = AbelianGroup::trivial();
        let r = davenport_exact(&t, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!((r.value, r.witness.len()), (1, 0));

        let z5 = g(&[5]);
        let r = davenport_exact(&z5, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.value, 5);
        assert_eq!(r.witness, els(&z5, &[&[1], &[1], &[1], &[1]]));

        let v4 = g(&[2, 2]);
        let r = davenport_exact(&v4, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.value, 3);
        assert_eq!(r.witness, els(&v4, &[&[0, 1], &[1, 0]]));
        assert_eq!(r.method, Method::ExactSearch);
    }

    #[test]
    fn formula_examples() {
        assert_eq!(davenport_formula(&g(&[12])), Some(12));
        assert_eq!(davenport_formula(&g(&[3, 3])), Some(5));
        assert_eq!(davenport_formula(&g(&[6, 10])), Some(31));
        assert_eq!(davenport_formula(&g(&[2, 2, 2])), Some(4));
        assert_eq!(davenport_formula(&g(&[2, 2, 6])), None);
        assert_eq!(davenport_exact(&g(&[12]), DEFAULT_NODE_BUDGET).unwrap().value, 12);
        assert_eq!(
            davenport_exact(&g(&[3, 3]), DEFAULT_NODE_BUDGET).unwrap().value,
            5
        );
    }

    #[test]
    fn exact_agrees_with_formula_up_to_16() {
        for grp in all_groups_up_to(16) {
            let r = davenport_exact(&grp, DEFAULT_NODE_BUDGET).unwrap();
            assert!(zero_sum_free_check(&grp, &r.witness), "{grp}");
            assert_eq!(r.witness.len() + 1, r.value);
            let lower = 1 + grp.invariant_factors().iter().map(|d| d - 1).sum::<usize>();
            assert!(r.value >= lower);
            if let Some(f) = davenport_formula(&grp) {
                assert_eq!(r.value, f, "{grp}");
            }
        }
    }

    #[test]
    fn witnesses_are_maximal_up_to_9() {
        for grp in all_groups_up_to(9) {
            let r = davenport_exact(&grp, DEFAULT_NODE_BUDGET).unwrap();
            assert!(brute_zero_sum_free(&grp, &r.witness));
            for e in grp.enumerate() {
                let mut ext = r.witness.clone();
                ext.push(e);
                assert!(!zero_sum_free_check(&grp, &ext), "{grp}");
            }
        }
    }

    #[test]
    fn budget_exhaustion_reports_lower_bound() {
        let err = davenport_exact(&g(&[2, 6]), 3).unwrap_err();
        match err {
            Error::BudgetExceeded { budget, lower_bound } => {
                assert_eq!(budget, 3);
                assert!(lower_bound >= 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deterministic_witness() {
        let grp = g(&[2, 6]);
        let a = davenport_exact(&grp, DEFAULT_NODE_BUDGET).unwrap();
        let b = davenport_exact(&grp, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.value, 7);
    }

    #[test]
    fn cache_get_paths() {
        let cache = DavenportCache::default();
        let z4 = g(&[4]);
        let first = cache.get(&z4).unwrap();
        assert_eq!((first.value, first.method), (4, Method::Formula));
        let second = cache.get(&z4).unwrap();
        assert_eq!(second.method, Method::Cache);
        assert_eq!((second.value, &second.witness), (first.value, &first.witness));

        let e8 = g(&[2, 2, 2]);
        assert_eq!(cache.get(&e8).unwrap().value, 4);
        assert_eq!(davenport_exact(&e8, DEFAULT_NODE_BUDGET).unwrap().value, 4);

        // no closed form: falls through to exact search
        let r = cache.get(&g(&[2, 2, 6])).unwrap();
        assert_eq!(r.method, Method::ExactSearch);
        assert!(zero_sum_free_check(&r.group, &r.witness));
    }

    #[test]
    fn cache_is_presentation_independent_and_persists() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dav.json");
        {
            let cache = DavenportCache::open(&path, DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(cache.get(&g(&[4, 6])).unwrap().value, 13);
            assert_eq!(cache.get(&g(&[2, 12])).unwrap().method, Method::Cache);
        }
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"2x12\""));
        let cache = DavenportCache::open(&path, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(cache.len(), 1);
        let r = cache.get(&g(&[12, 2])).unwrap();
        assert_eq!((r.value, r.method), (13, Method::Cache));
    }

    #[test]
    fn corrupt_cache_entries_are_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dav.json");
        fs::write(
            &path,
            r#"{"5":{"value":5,"witness":[[1],[1],[1],[2]],"method":"exact_search"},
                "3":{"value":3,"witness":[[1],[1]],"method":"formula"}}"#,
        )
        .unwrap();
        let cache = DavenportCache::open(&path, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(cache.len(), 1);
    }
}
