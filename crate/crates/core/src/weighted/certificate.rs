//! Certificates and their independent checker.
//!
//! The checker only uses element arithmetic from [`crate::group`] and the
//! raw instance: it never calls a solver.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Element};

use super::{Instance, Selection, Statement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolvePath {
    Constructive,
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CertificateFile", into = "CertificateFile")]
pub struct Certificate {
    pub statement: Statement,
    pub group: AbelianGroup,
    pub digest: String,
    pub selection: Selection,
    pub shelling: Option<Vec<Vec<usize>>>,
    pub solve_path: SolvePath,
    pub verified: bool,
}

/// `f` as a JSON object `{"i": j}` with keys in numeric order.
#[derive(Clone, Debug, PartialEq, Eq)]
struct MapField(Vec<(usize, usize)>);

impl Serialize for MapField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (i, j) in &self.0 {
            map.serialize_entry(&i.to_string(), j)?;
        }
        map.end()
    }
}

/// Map targets are written as numbers but quoted numbers are accepted too.
#[derive(Deserialize)]
#[serde(untagged)]
enum Target {
    Number(usize),
    Text(String),
}

impl<'de> Deserialize<'de> for MapField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, Target>::deserialize(d)?;
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| de::Error::custom(format!("{s:?} is not an index")))
        };
        let mut pairs = raw
            .into_iter()
            .map(|(k, v)| {
                let j = match v {
                    Target::Number(j) => j,
                    Target::Text(t) => index(&t)?,
                };
                Ok((index(&k)?, j))
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        pairs.sort_unstable();
        Ok(MapField(pairs))
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    statement: Statement,
    group: AbelianGroup,
    digest: String,
    #[serde(rename = "I")]
    domain: Vec<usize>,
    f: MapField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shelling: Option<Vec<Vec<usize>>>,
    value: Vec<i64>,
    solve_path: SolvePath,
    verified: bool,
}

impl TryFrom<CertificateFile> for Certificate {
    type Error = Error;

    fn try_from(c: CertificateFile) -> Result<Self> {
        let value = c.group.from_given(&c.value)?;
        let mapped: Vec<usize> = c.f.0.iter().map(|p| p.0).collect();
        let mut domain = c.domain.clone();
        domain.sort_unstable();
        if domain != mapped || c.domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSelection(format!(
                "\"I\" = {:?} does not match the keys of \"f\" {mapped:?}",
                c.domain
            )));
        }
        Ok(Certificate {
            statement: c.statement,
            group: c.group,
            digest: c.digest,
            selection: Selection::from_parts(c.f.0, value),
            shelling: c.shelling,
            solve_path: c.solve_path,
            verified: c.verified,
        })
    }
}

impl From<Certificate> for CertificateFile {
    fn from(c: Certificate) -> Self {
        CertificateFile {
            statement: c.statement,
            domain: c.selection.domain(),
            f: MapField(c.selection.pairs().to_vec()),
            shelling: c.shelling,
            value: c.group.to_given(c.selection.value()),
            group: c.group,
            digest: c.digest,
            solve_path: c.solve_path,
            verified: c.verified,
        }
    }
}

impl Certificate {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Parse {
            context: "certificate".into(),
            source,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// One failed check; `check` is a short stable name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub check: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub verified: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl Verification {
    pub fn failed(&self, check: &str) -> bool {
        self.diagnostics.iter().any(|d| d.check == check)
    }
}

/// Allowed `|I|` for a statement.
pub(crate) fn size_window(inst: &Instance, davenport: usize) -> (usize, usize) {
    let n = inst.group.order();
    match inst.statement {
        Statement::Theorem1 => (n.saturating_sub(davenport.min(inst.ell)), n - 1),
        Statement::Corollary => (n, n),
        Statement::Word1 => (1, inst.ell),
    }
}

/// Maximal block size a shelling may use for a statement.
pub(crate) fn shelling_width(inst: &Instance, davenport: usize) -> usize {
    match inst.statement {
        Statement::Word1 => inst.ell,
        _ => davenport.max(1),
    }
}

/// Re-derive every claim in `cert` from the raw instance.
pub fn verify_certificate(inst: &Instance, davenport: usize, cert: &Certificate) -> Verification {
    let mut diags = Vec::new();
    let mut fail = |check: &'static str, detail: String| diags.push(Diagnostic { check, detail });
    let g = &inst.group;
    let m = inst.m();

    if cert.statement != inst.statement {
        fail(
            "statement",
            format!(
                "certificate is for {}, instance states {}",
                cert.statement, inst.statement
            ),
        );
    }
    if cert.group.invariant_factors() != g.invariant_factors() {
        fail(
            "group",
            format!("certificate group {} differs from {g}", cert.group),
        );
    }
    if cert.digest != inst.digest() {
        fail("digest", "instance digest does not match".into());
    }
    if let Err(e) = inst.check(davenport) {
        fail("instance", e.to_string());
    }

    let pairs = cert.selection.pairs();
    let mut seen_dom = BTreeSet::new();
    let mut seen_img = BTreeSet::new();
    let mut in_range = true;
    for &(i, j) in pairs {
        if i == 0 || i > inst.w.len() || j == 0 || j > m {
            in_range = false;
            fail(
                "range",
                format!("pair ({i}, {j}) outside [1, {}] x [1, {m}]", inst.w.len()),
            );
        }
        if !seen_dom.insert(i) {
            fail("domain", format!("index {i} appears twice"));
        }
        if !seen_img.insert(j) {
            fail("injectivity", format!("image index {j} is hit twice"));
        }
    }

    let (lo, hi) = size_window(inst, davenport);
    if pairs.len() < lo || pairs.len() > hi {
        fail(
            "size window",
            format!("|I| = {} outside [{lo}, {hi}]", pairs.len()),
        );
    }

    let term = |i: usize, j: usize, anchor: Option<&Element>| -> Result<Element> {
        let x = match anchor {
            Some(a) => g.sub(&inst.x[j - 1], a)?,
            None => inst.x[j - 1].clone(),
        };
        g.scalar_mul(inst.w[i - 1], &x)
    };
    let anchor = (inst.statement == Statement::Corollary && m > 0).then(|| &inst.x[m - 1]);

    if in_range {
        let total = pairs
            .iter()
            .try_fold(g.zero(), |acc, &(i, j)| g.add(&acc, &term(i, j, None)?));
        match total {
            Ok(total) => {
                if &total != cert.selection.value() {
                    fail(
                        "recorded value",
                        format!("recorded {} but recomputed {total}", cert.selection.value()),
                    );
                }
                let expected = match anchor {
                    Some(xm) => {
                        let e = g.exponent() as i64;
                        let weight: i64 = pairs.iter().map(|&(i, _)| inst.w[i - 1].rem_euclid(e)).sum();
                        g.scalar_mul(weight, xm)
                    }
                    None => Ok(g.zero()),
                };
                match expected {
                    Ok(expected) if expected == total => {}
                    Ok(expected) => fail("value", format!("value {total}, required {expected}")),
                    Err(e) => fail("value", e.to_string()),
                }
            }
            Err(e) => fail("value", e.to_string()),
        }
    }

    if inst.statement == Statement::Corollary && !seen_img.contains(&m) {
        fail("reserve", format!("position m = {m} is not in f(I)"));
    }

    if let Some(blocks) = &cert.shelling {
        let width = shelling_width(inst, davenport);
        let flat: Vec<usize> = blocks.iter().flatten().copied().collect();
        let flat_set: BTreeSet<usize> = flat.iter().copied().collect();
        if flat.len() != flat_set.len() || flat_set != seen_dom {
            fail("shelling", "blocks do not partition the domain".into());
        }
        for block in blocks {
            if block.is_empty() || block.len() > width {
                fail(
                    "shelling",
                    format!("block size {} outside [1, {width}]", block.len()),
                );
                continue;
            }
            if !in_range {
                continue;
            }
            let value = block.iter().try_fold(g.zero(), |acc, &i| {
                let j = cert
                    .selection
                    .map(i)
                    .ok_or_else(|| Error::InvalidSelection(format!("block index {i} not in I")))?;
                g.add(&acc, &term(i, j, anchor)?)
            });
            match value {
                Ok(v) if v == g.zero() => {}
                Ok(v) => fail("shelling", format!("block {block:?} has value {v}")),
                Err(e) => fail("shelling", e.to_string()),
            }
        }
    }

    Verification {
        verified: diags.is_empty(),
        diagnostics: diags,
    }
}
