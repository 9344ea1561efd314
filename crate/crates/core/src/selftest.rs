//! Built-in acceptance suites, runnable at two scales.
//!
//! Each criterion reports how many cases it checked; the JSON summary leaves
//! out timings so repeated runs produce identical output.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conjecture::{conjecture_scan, ScanConfig, ScanReport};
use crate::davenport::{davenport_exact, davenport_formula, zero_sum_free_check, DEFAULT_NODE_BUDGET};
use crate::error::Error;
use crate::group::{all_groups_up_to, rho, AbelianGroup, Element};
use crate::weighted::{
    corollary_solve, fallback_search, theorem1_solve, theorem_length, verify_certificate, Certificate,
    FallbackQuery, Instance, SolveOptions, SolvePath, Statement,
};
use crate::zerosum::{find_zero_sum_bounded, find_zero_sum_exact_length};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Small,
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checked: u64,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub limit: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub scale: Scale,
    pub passed: bool,
    pub criteria: Vec<CriterionOutcome>,
}

impl Summary {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

type Check = std::result::Result<(u64, String), String>;

pub const CRITERIA: [(u8, &str, u64); 9] = [
    (1, "davenport cross-check", 60),
    (2, "bounded zero-sum totality", 60),
    (3, "EGZ reproduction", 120),
    (4, "Gao reproduction", 120),
    (5, "weighted theorem exhaustive", 60),
    (6, "barycentric corollary exhaustive", 120),
    (7, "oracle agreement", 120),
    (8, "conjecture scan integrity", 300),
    (9, "determinism and round trip", 300),
];

pub fn run(scale: Scale) -> Summary {
    let criteria: Vec<_> = CRITERIA.iter().map(|c| criterion(c.0, scale)).collect();
    Summary {
        scale,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

/// Run one criterion by number (1 to 9).
pub fn criterion(id: u8, scale: Scale) -> CriterionOutcome {
    let (_, name, secs) = *CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .unwrap_or_else(|| panic!("no criterion {id}"));
    let limit = Duration::from_secs(secs);
    let start = Instant::now();
    let result = match id {
        1 => davenport_cross_check(scale),
        2 => bounded_totality(),
        3 => egz(),
        4 => gao(),
        5 => theorem_suite(),
        6 => corollary_suite(),
        7 => oracle_agreement(),
        8 => scan_integrity(),
        _ => determinism(scale),
    };
    let elapsed = start.elapsed();
    let (passed, checked, mut detail) = match result {
        Ok((checked, detail)) => (true, checked, detail),
        Err(detail) => (false, 0, detail),
    };
    let passed = passed && elapsed <= limit;
    if elapsed > limit {
        detail = format!("{detail}; exceeded {secs} s");
    }
    CriterionOutcome {
        id,
        name,
        passed,
        checked,
        detail,
        elapsed,
        limit,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn group(orders: &[i64]) -> AbelianGroup {
    AbelianGroup::canonicalize(orders).expect("valid orders")
}

fn davenport_of(g: &AbelianGroup) -> usize {
    davenport_formula(g).expect("closed form known for suite groups")
}

/// All length-`len` sequences of ranks below `n`, lexicographic.
pub fn all_sequences(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Non-decreasing length-`len` rank sequences (multisets).
pub fn all_multisets(n: usize, len: usize) -> Vec<Vec<usize>> {
    fn extend(n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in cur.last().copied().unwrap_or(0)..n {
            cur.push(v);
            extend(n, len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(n, len, &mut Vec::with_capacity(len), &mut out);
    out
}

fn elements(g: &AbelianGroup, ranks: &[usize]) -> Vec<Element> {
    ranks.iter().map(|&r| g.unrank(r)).collect()
}

fn weights(values: &[i64], len: usize) -> Vec<Vec<i64>> {
    all_sequences(values.len(), len)
        .into_iter()
        .map(|s| s.into_iter().map(|v| values[v]).collect())
        .collect()
}

fn davenport_cross_check(scale: Scale) -> Check {
    let mut cases: Vec<(Vec<i64>, usize)> = (2..=10).map(|n| (vec![n as i64], n)).collect();
    cases.extend([
        (vec![2, 2], 3),
        (vec![2, 4], 5),
        (vec![3, 3], 5),
        (vec![2, 2, 2], 4),
        (vec![2, 6], 7),
    ]);
    if scale == Scale::Full {
        for g in all_groups_up_to(16).into_iter().filter(|g| g.order() == 16) {
            let orders = g.invariant_factors().iter().map(|&d| d as i64).collect();
            cases.push((orders, davenport_of(&g)));
        }
    }
    for (orders, expected) in &cases {
        let g = group(orders);
        let rec = davenport_exact(&g, DEFAULT_NODE_BUDGET).map_err(|e| format!("{g}: {e}"))?;
        ensure(rec.value == *expected, || {
            format!("D({g}) = {}, expected {expected}", rec.value)
        })?;
        ensure(davenport_formula(&g) == Some(rec.value), || {
            format!("{g}: closed form disagrees")
        })?;
        ensure(
            rec.witness.len() + 1 == rec.value && zero_sum_free_check(&g, &rec.witness),
            || format!("{g}: witness is not a zero-sum-free sequence of length D - 1"),
        )?;
    }
    Ok((cases.len() as u64, format!("{} groups", cases.len())))
}

fn bounded_totality() -> Check {
    let mut checked = 0;
    for orders in [&[2][..], &[3], &[4], &[2, 2]] {
        let g = group(orders);
        let n = g.order();
        for ranks in all_sequences(n, n) {
            let x = elements(&g, &ranks);
            let r = rho(&x).expect("nonempty");
            for k in r..=n {
                let wit =
                    find_zero_sum_bounded(&g, &x, k).map_err(|e| format!("{g} {ranks:?} k={k}: {e}"))?;
                ensure(wit.verify(&g, &x) && !wit.is_empty() && wit.len() <= k, || {
                    format!("{g} {ranks:?} k={k}: bad witness {:?}", wit.indices)
                })?;
                checked += 1;
            }
        }
    }
    Ok((checked, format!("{checked} (sequence, k) pairs")))
}

fn exact_length_suite(g: &AbelianGroup, len: usize) -> std::result::Result<u64, String> {
    let n = g.order();
    let multisets = all_multisets(n, len);
    for ranks in &multisets {
        let x = elements(g, ranks);
        let wit = find_zero_sum_exact_length(g, &x, n)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("{g}: {ranks:?} has no zero-sum subsequence of length {n}"))?;
        ensure(wit.len() == n && wit.verify(g, &x), || {
            format!("{g} {ranks:?}: bad witness")
        })?;
    }
    Ok(multisets.len() as u64)
}

fn egz() -> Check {
    let mut checked = 0;
    for n in 2..=5 {
        checked += exact_length_suite(&AbelianGroup::cyclic(n).expect("n >= 1"), 2 * n - 1)?;
    }
    Ok((checked, format!("{checked} multisets")))
}

fn gao() -> Check {
    let g = group(&[2, 2]);
    let checked = exact_length_suite(&g, 4 + 3 - 1)?;
    Ok((checked, format!("{checked} multisets")))
}

/// Every instance of the exhaustive weighted-theorem suite: `Z_2` with
/// `ℓ = 1` and `ℓ ∈ {2, 3}`, and `Z_3` with `ℓ = 2`, over all sequences with
/// `ρ ≤ ℓ` and all weight vectors of residues.
pub fn theorem_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for (orders, ell) in [(&[2][..], 1), (&[2], 2), (&[2], 3), (&[3], 2)] {
        let g = group(orders);
        let n = g.order();
        let m = theorem_length(n, davenport_of(&g), ell);
        let residues: Vec<i64> = (0..n as i64).collect();
        for ranks in all_sequences(n, m) {
            if rho(&ranks).unwrap_or(0) > ell {
                continue;
            }
            for w in weights(&residues, m) {
                out.push(Instance::new(
                    g.clone(),
                    elements(&g, &ranks),
                    w,
                    ell,
                    Statement::Theorem1,
                ));
            }
        }
    }
    out
}

/// `Z_3`, `m = 5`: every `x` with `ρ(x) = 2` attained at position 5 and
/// every `w ∈ {0, 1, 2}^3`.
pub fn corollary_instances() -> Vec<Instance> {
    let g = group(&[3]);
    let mut out = Vec::new();
    for ranks in all_sequences(3, 5) {
        let last = ranks[4];
        if rho(&ranks).ok() != Some(2) || ranks.iter().filter(|&&r| r == last).count() != 2 {
            continue;
        }
        for w in weights(&[0, 1, 2], 3) {
            out.push(Instance::new(
                g.clone(),
                elements(&g, &ranks),
                w,
                2,
                Statement::Corollary,
            ));
        }
    }
    out
}

/// Constant sequences over `Z_2` and `Z_3`, where `ℓ ≥ D`.
pub fn degenerate_corollary_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for n in [2usize, 3] {
        let g = AbelianGroup::cyclic(n).expect("n >= 1");
        let m = 2 * n - 1;
        for a in 0..n {
            for w in weights(&(0..n as i64).collect::<Vec<_>>(), m - n) {
                out.push(Instance::new(
                    g.clone(),
                    vec![g.unrank(a); m],
                    w,
                    m,
                    Statement::Corollary,
                ));
            }
        }
    }
    out
}

fn check_window(inst: &Instance, d: usize, cert: &Certificate) -> std::result::Result<(), String> {
    let n = inst.group.order();
    let len = cert.selection.len();
    match inst.statement {
        Statement::Theorem1 => ensure(len + d.min(inst.ell) >= n && len < n, || {
            format!("|I| = {len} outside the window for {}", inst.to_json())
        }),
        _ => ensure(len == n && cert.selection.image().contains(&inst.m()), || {
            format!("|I| = {len} or missing m for {}", inst.to_json())
        }),
    }
}

/// Solve every instance with default options, checking verification and the
/// size window; returns the certificates as JSON.
fn solve_all(instances: &[Instance]) -> std::result::Result<Vec<String>, String> {
    instances
        .iter()
        .map(|inst| {
            let d = davenport_of(&inst.group);
            let opts = SolveOptions::default();
            let cert = match inst.statement {
                Statement::Corollary => corollary_solve(inst, d, &opts),
                _ => theorem1_solve(inst, d, &opts),
            }
            .map_err(|e| format!("{}: {e}", inst.to_json()))?;
            let v = verify_certificate(inst, d, &cert);
            ensure(cert.verified && v.verified, || {
                format!("{}: unverified certificate {:?}", inst.to_json(), v.diagnostics)
            })?;
            check_window(inst, d, &cert)?;
            Ok(cert.to_json_pretty())
        })
        .collect()
}

fn theorem_suite() -> Check {
    let certs = solve_all(&theorem_instances())?;
    Ok((
        certs.len() as u64,
        format!("{} verified certificates", certs.len()),
    ))
}

fn corollary_suite() -> Check {
    let certs = solve_all(&corollary_instances())?;
    let degenerate = degenerate_corollary_instances();
    for inst in &degenerate {
        let d = davenport_of(&inst.group);
        match corollary_solve(inst, d, &SolveOptions::default()) {
            Err(Error::UnsatisfiableStatement(_)) => {}
            other => {
                return Err(format!(
                    "{}: expected unsatisfiable, got {other:?}",
                    inst.to_json()
                ))
            }
        }
        let found =
            fallback_search(inst, &FallbackQuery::for_statement(inst, d), 64).map_err(|e| e.to_string())?;
        ensure(found.is_none(), || {
            format!("{}: enumeration found {found:?}", inst.to_json())
        })?;
    }
    Ok((
        (certs.len() + degenerate.len()) as u64,
        format!(
            "{} verified certificates, {} unsatisfiable",
            certs.len(),
            degenerate.len()
        ),
    ))
}

fn oracle_agreement() -> Check {
    let constructive_only = SolveOptions {
        fallback: false,
        ..SolveOptions::default()
    };
    let mut checked = 0;
    for inst in theorem_instances().iter().chain(&corollary_instances()) {
        let d = davenport_of(&inst.group);
        let built = match inst.statement {
            Statement::Corollary => corollary_solve(inst, d, &constructive_only),
            _ => theorem1_solve(inst, d, &constructive_only),
        };
        let oracle =
            fallback_search(inst, &FallbackQuery::for_statement(inst, d), 64).map_err(|e| e.to_string())?;
        match (built, oracle) {
            (Ok(cert), Some(sel)) => {
                ensure(
                    cert.verified && cert.solve_path == SolvePath::Constructive,
                    || format!("{}: constructive certificate unverified", inst.to_json()),
                )?;
                let from_oracle = Certificate {
                    selection: sel,
                    shelling: None,
                    solve_path: SolvePath::Fallback,
                    ..cert
                };
                let v = verify_certificate(inst, d, &from_oracle);
                ensure(v.verified, || {
                    format!("{}: oracle answer fails {:?}", inst.to_json(), v.diagnostics)
                })?;
            }
            (built, oracle) => {
                return Err(format!(
                    "{}: constructive {:?}, oracle {:?}",
                    inst.to_json(),
                    built.map(|c| c.selection),
                    oracle
                ))
            }
        }
        checked += 1;
    }
    Ok((checked, format!("{checked} instances agree")))
}

fn scan_reports(workers: usize) -> std::result::Result<Vec<ScanReport>, String> {
    let mut out = Vec::new();
    for n in 2..=4 {
        let g = AbelianGroup::cyclic(n).expect("n >= 1");
        for k in 1..=n {
            let cfg = ScanConfig {
                workers,
                ..ScanConfig::exhaustive(&g, k)
            };
            out.push(conjecture_scan(&g, n, &cfg).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn scan_integrity() -> Check {
    let reports = scan_reports(1)?;
    let mut scanned = 0;
    let mut counterexamples = 0;
    for r in &reports {
        ensure(r.authoritative, || {
            format!("scan over {} k={} stopped early", r.group, r.k)
        })?;
        ensure(r.is_sound(), || {
            format!(
                "scan over {} k={}: subclass violations {:?}, integrity failures {:?}",
                r.group, r.k, r.subclass_violations, r.integrity_failures
            )
        })?;
        ensure(
            r.witnesses_verified + r.counterexamples.len() as u64 == r.instances_scanned,
            || format!("scan over {} k={}: unaccounted instances", r.group, r.k),
        )?;
        scanned += r.instances_scanned;
        counterexamples += r.counterexamples.len();
    }
    let json = |rs: &[ScanReport]| rs.iter().map(ScanReport::to_json_pretty).collect::<Vec<_>>();
    let base = json(&reports);
    for workers in [1, 2, 8] {
        ensure(json(&scan_reports(workers)?) == base, || {
            format!("reports differ with {workers} workers")
        })?;
    }
    Ok((
        scanned,
        format!(
            "{scanned} instances in {} scans, {counterexamples} counterexamples",
            reports.len()
        ),
    ))
}

/// Random valid instance for a group of order at most 12: a weighted
/// theorem instance or a barycentric corollary instance with `ℓ < D`.
pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let groups: Vec<AbelianGroup> = all_groups_up_to(12)
        .into_iter()
        .filter(|g| g.order() > 1)
        .collect();
    loop {
        let g = groups.choose(rng).expect("nonempty").clone();
        let n = g.order();
        let d = davenport_of(&g);
        let ell = rng.gen_range(1..=n + 1);
        let w = |rng: &mut dyn rand::RngCore, len: usize| -> Vec<i64> {
            (0..len).map(|_| rng.gen_range(-30..=30)).collect()
        };
        if rng.gen_bool(0.5) {
            let m = theorem_length(n, d, ell);
            if n * ell < m {
                continue;
            }
            let mut pool: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, ell)).collect();
            pool.shuffle(rng);
            let x = elements(&g, &pool[..m]);
            let w = w(rng, m);
            return Instance::new(g, x, w, ell, Statement::Theorem1);
        }
        if ell >= d {
            continue;
        }
        let m = n + d - 1;
        let a = rng.gen_range(0..n);
        let mut pool: Vec<usize> = (0..n)
            .filter(|&v| v != a)
            .flat_map(|v| std::iter::repeat_n(v, ell))
            .collect();
        if pool.len() < m - ell {
            continue;
        }
        pool.shuffle(rng);
        let mut ranks: Vec<usize> = pool[..m - ell].to_vec();
        ranks.extend(std::iter::repeat_n(a, ell - 1));
        ranks.shuffle(rng);
        ranks.push(a);
        let x = elements(&g, &ranks);
        let w = w(rng, m - ell);
        return Instance::new(g, x, w, ell, Statement::Corollary);
    }
}

fn determinism(scale: Scale) -> Check {
    let suites = || -> std::result::Result<Vec<String>, String> {
        let mut all = solve_all(&theorem_instances())?;
        all.extend(solve_all(&corollary_instances())?);
        Ok(all)
    };
    ensure(suites()? == suites()?, || {
        "certificates differ between runs".into()
    })?;
    ensure(
        scan_reports(2)?
            .iter()
            .map(ScanReport::to_json_pretty)
            .collect::<Vec<_>>()
            == scan_reports(2)?
                .iter()
                .map(ScanReport::to_json_pretty)
                .collect::<Vec<_>>(),
        || "scan reports differ between runs".into(),
    )?;

    let rounds = if scale == Scale::Full { 5000 } else { 1000 };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..rounds {
        let inst = random_instance(&mut rng);
        let text = inst.to_json();
        let back = Instance::from_json(&text).map_err(|e| format!("{text}: {e}"))?;
        ensure(back == inst && back.to_json() == text, || {
            format!("instance round trip lost data: {text}")
        })?;

        let d = davenport_of(&inst.group);
        let cert = match inst.statement {
            Statement::Corollary => corollary_solve(&inst, d, &SolveOptions::default()),
            _ => theorem1_solve(&inst, d, &SolveOptions::default()),
        }
        .map_err(|e| format!("{text}: {e}"))?;
        let again = match inst.statement {
            Statement::Corollary => corollary_solve(&inst, d, &SolveOptions::default()),
            _ => theorem1_solve(&inst, d, &SolveOptions::default()),
        }
        .map_err(|e| format!("{text}: {e}"))?;
        let ctext = cert.to_json_pretty();
        ensure(again.to_json_pretty() == ctext, || {
            format!("{text}: certificate not reproducible")
        })?;
        let cback = Certificate::from_json(&ctext).map_err(|e| format!("{ctext}: {e}"))?;
        ensure(cback == cert && cback.to_json_pretty() == ctext, || {
            format!("certificate round trip lost data: {ctext}")
        })?;
    }
    for r in scan_reports(1)? {
        let text = r.to_json_pretty();
        let back: ScanReport = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        ensure(back.to_json_pretty() == text, || {
            "scan report round trip lost data".into()
        })?;
    }
    Ok((
        rounds,
        format!("{rounds} random instances and certificates round-tripped"),
    ))
}
