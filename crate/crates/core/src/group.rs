//! Finite abelian groups in invariant-factor form, and their elements.
//!
//! A group is entered as a list of cyclic orders (any decomposition,
//! e.g. `[4, 6]`) and stored canonically as `Z_{d_1} ⊕ … ⊕ Z_{d_k}` with
//! `d_i | d_{i+1}` and every `d_i ≥ 2`. Elements are residue vectors in the
//! canonical coordinates. The prime-power bookkeeping used to build the
//! canonical form is kept so elements can be converted back and forth between
//! the given and canonical presentations.
//!
//! Hot loops elsewhere in the crate work on *ranks*: the position of an
//! element in the lexicographic enumeration of residue vectors.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One prime-power cyclic factor `Z_{p^e}` of the given presentation, and
/// the invariant factor it was folded into.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PrimeSlot {
    power: usize,
    given: usize,
    factor: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupLiteral", into = "GroupLiteral")]
pub struct AbelianGroup {
    given_orders: Vec<usize>,
    invariant_factors: Vec<usize>,
    order: usize,
    exponent: usize,
    strides: Vec<usize>,
    slots: Vec<PrimeSlot>,
}

/// Wire form of a group: `{"orders": [...]}`, with the canonical factors
/// echoed on output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupLiteral {
    pub orders: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant_factors: Option<Vec<usize>>,
}

impl TryFrom<GroupLiteral> for AbelianGroup {
    type Error = Error;

    fn try_from(lit: GroupLiteral) -> Result<Self> {
        let g = AbelianGroup::canonicalize(&lit.orders)?;
        if let Some(f) = &lit.invariant_factors {
            if f != &g.invariant_factors {
                return Err(Error::InvalidGroup(format!(
                    "declared invariant factors {f:?} do not match canonical form {:?}",
                    g.invariant_factors
                )));
            }
        }
        Ok(g)
    }
}

impl From<AbelianGroup> for GroupLiteral {
    fn from(g: AbelianGroup) -> Self {
        GroupLiteral {
            orders: g.given_orders.iter().map(|&o| o as i64).collect(),
            invariant_factors: Some(g.invariant_factors),
        }
    }
}

/// A group element as a residue vector over the invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element {
    residues: Vec<usize>,
}

impl Element {
    pub fn residues(&self) -> &[usize] {
        &self.residues
    }

    /// Zero with the same number of components.
    pub fn zero_like(other: &Element) -> Element {
        Element {
            residues: vec![0; other.residues.len()],
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.residues.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

fn factorize(mut n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut pe = 1;
            while n.is_multiple_of(p) {
                n /= p;
                pe *= p;
            }
            out.push((p, pe));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, n));
    }
    out
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Inverse of `a` modulo `m` for coprime `a`, `m`.
fn mod_inverse(a: usize, m: usize) -> usize {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as usize
}

/// Solve `x ≡ v_j (mod q_j)` for pairwise coprime moduli.
fn crt(parts: &[(usize, usize)]) -> usize {
    let modulus: usize = parts.iter().map(|&(_, q)| q).product();
    let mut x: u128 = 0;
    for &(v, q) in parts {
        let rest = modulus / q;
        let term = (v % q) as u128 * rest as u128 % modulus as u128 * mod_inverse(rest % q, q) as u128
            % modulus as u128;
        x = (x + term) % modulus as u128;
    }
    x as usize
}

impl AbelianGroup {
    /// Bring an arbitrary cyclic decomposition into invariant-factor form.
    ///
    /// Each given order is split into prime powers; per prime the powers are
    /// sorted largest first and the `t`-th largest powers of every prime are
    /// multiplied together into the `t`-th largest invariant factor.
    pub fn canonicalize(given_orders: &[i64]) -> Result<Self> {
        let mut orders = Vec::with_capacity(given_orders.len());
        let mut total: usize = 1;
        for &o in given_orders {
            if o < 1 {
                return Err(Error::InvalidGroup(format!(
                    "cyclic order must be at least 1, got {o}"
                )));
            }
            let o = usize::try_from(o).map_err(|_| Error::InvalidGroup(format!("order {o} does not fit")))?;
            total = total
                .checked_mul(o)
                .filter(|&t| t <= u32::MAX as usize)
                .ok_or_else(|| Error::InvalidGroup("group order too large".into()))?;
            orders.push(o);
        }

        // prime -> [(p^e, given index)]
        let mut buckets: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (j, &o) in orders.iter().enumerate() {
            for (p, pe) in factorize(o) {
                buckets.entry(p).or_default().push((pe, j));
            }
        }
        let rank = buckets.values().map(Vec::len).max().unwrap_or(0);
        let mut invariant_factors = vec![1usize; rank];
        let mut slots = Vec::new();
        for bucket in buckets.values_mut() {
            bucket.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            for (t, &(power, given)) in bucket.iter().enumerate() {
                let factor = rank - 1 - t;
                invariant_factors[factor] *= power;
                slots.push(PrimeSlot { power, given, factor });
            }
        }

        let mut strides = vec![1usize; rank];
        for i in (0..rank.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * invariant_factors[i + 1];
        }
        let exponent = invariant_factors.last().copied().unwrap_or(1);
        Ok(Self {
            given_orders: orders,
            invariant_factors,
            order: total,
            exponent,
            strides,
            slots,
        })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::canonicalize(&[n as i64])
    }

    pub fn trivial() -> Self {
        Self::canonicalize(&[]).expect("trivial group")
    }

    pub fn given_orders(&self) -> &[usize] {
        &self.given_orders
    }

    pub fn invariant_factors(&self) -> &[usize] {
        &self.invariant_factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn exponent(&self) -> usize {
        self.exponent
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    pub fn is_cyclic(&self) -> bool {
        self.rank() <= 1
    }

    /// Canonical key `"d1xd2x…xdk"`; `"1"` for the trivial group.
    pub fn key(&self) -> String {
        if self.invariant_factors.is_empty() {
            return "1".to_string();
        }
        self.invariant_factors
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("x")
    }

    /// Same group presented by its own invariant factors.
    pub fn canonical(&self) -> Self {
        let f: Vec<i64> = self.invariant_factors.iter().map(|&d| d as i64).collect();
        Self::canonicalize(&f).expect("invariant factors are valid orders")
    }

    pub fn zero(&self) -> Element {
        Element {
            residues: vec![0; self.rank()],
        }
    }

    /// Validate a canonical residue vector.
    pub fn element(&self, residues: Vec<usize>) -> Result<Element> {
        if residues.len() != self.rank() {
            return Err(Error::InvalidElement(format!(
                "expected {} residues, got {}",
                self.rank(),
                residues.len()
            )));
        }
        for (r, d) in residues.iter().zip(&self.invariant_factors) {
            if r >= d {
                return Err(Error::InvalidElement(format!(
                    "residue {r} out of range for Z_{d}"
                )));
            }
        }
        Ok(Element { residues })
    }

    fn check(&self, a: &Element) -> Result<()> {
        if a.residues.len() != self.rank() {
            return Err(Error::InvalidElement(format!(
                "element {a} has {} components, group has {}",
                a.residues.len(),
                self.rank()
            )));
        }
        if a.residues
            .iter()
            .zip(&self.invariant_factors)
            .any(|(r, d)| r >= d)
        {
            return Err(Error::InvalidElement(format!(
                "element {a} is not reduced in {}",
                self.key()
            )));
        }
        Ok(())
    }

    pub fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(Element {
            residues: a
                .residues
                .iter()
                .zip(&b.residues)
                .zip(&self.invariant_factors)
                .map(|((x, y), d)| (x + y) % d)
                .collect(),
        })
    }

    pub fn neg(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        Ok(Element {
            residues: a
                .residues
                .iter()
                .zip(&self.invariant_factors)
                .map(|(x, d)| (d - x) % d)
                .collect(),
        })
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Result<Element> {
        self.add(a, &self.neg(b)?)
    }

    /// `c · a`, with `c` reduced modulo each invariant factor.
    pub fn scalar_mul(&self, c: i64, a: &Element) -> Result<Element> {
        self.check(a)?;
        Ok(Element {
            residues: a
                .residues
                .iter()
                .zip(&self.invariant_factors)
                .map(|(x, &d)| {
                    let c = c.rem_euclid(d as i64) as u128;
                    (c * *x as u128 % d as u128) as usize
                })
                .collect(),
        })
    }

    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a Element>) -> Result<Element> {
        items
            .into_iter()
            .try_fold(self.zero(), |acc, e| self.add(&acc, e))
    }

    pub fn element_order(&self, a: &Element) -> Result<usize> {
        self.check(a)?;
        Ok(a.residues
            .iter()
            .zip(&self.invariant_factors)
            .fold(1, |acc, (&r, &d)| lcm(acc, d / gcd(r, d))))
    }

    /// All elements in lexicographic order of residue vectors.
    pub fn enumerate(&self) -> Vec<Element> {
        (0..self.order).map(|r| self.unrank(r)).collect()
    }

    pub fn rank_of(&self, a: &Element) -> usize {
        a.residues.iter().zip(&self.strides).map(|(r, s)| r * s).sum()
    }

    pub fn unrank(&self, mut rank: usize) -> Element {
        let residues = self
            .strides
            .iter()
            .map(|&s| {
                let r = rank / s;
                rank %= s;
                r
            })
            .collect();
        Element { residues }
    }

    #[inline]
    pub fn add_ranks(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        for (&s, &d) in self.strides.iter().zip(&self.invariant_factors) {
            let x = a / s % d;
            let y = b / s % d;
            out += (x + y) % d * s;
        }
        out
    }

    #[inline]
    pub fn neg_rank(&self, a: usize) -> usize {
        let mut out = 0;
        for (&s, &d) in self.strides.iter().zip(&self.invariant_factors) {
            out += (d - a / s % d) % d * s;
        }
        out
    }

    #[inline]
    pub fn scale_rank(&self, c: i64, a: usize) -> usize {
        let mut out = 0;
        for (&s, &d) in self.strides.iter().zip(&self.invariant_factors) {
            let c = c.rem_euclid(d as i64) as usize;
            out += c * (a / s % d) % d * s;
        }
        out
    }

    /// Convert a residue vector in the *given* presentation into canonical
    /// coordinates.
    pub fn from_given(&self, given: &[i64]) -> Result<Element> {
        if given.len() != self.given_orders.len() {
            return Err(Error::InvalidElement(format!(
                "expected {} residues (orders {:?}), got {}",
                self.given_orders.len(),
                self.given_orders,
                given.len()
            )));
        }
        for (&v, &o) in given.iter().zip(&self.given_orders) {
            if v < 0 || v as usize >= o {
                return Err(Error::InvalidElement(format!(
                    "residue {v} out of range for Z_{o}"
                )));
            }
        }
        let mut parts: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.rank()];
        for slot in &self.slots {
            parts[slot.factor].push((given[slot.given] as usize % slot.power, slot.power));
        }
        Ok(Element {
            residues: parts.iter().map(|p| crt(p)).collect(),
        })
    }

    /// Inverse of [`AbelianGroup::from_given`].
    pub fn to_given(&self, a: &Element) -> Vec<i64> {
        let mut parts: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.given_orders.len()];
        for slot in &self.slots {
            parts[slot.given].push((a.residues[slot.factor] % slot.power, slot.power));
        }
        parts.iter().map(|p| crt(p) as i64).collect()
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariant_factors.is_empty() {
            return write!(f, "Z_1");
        }
        let parts: Vec<String> = self.invariant_factors.iter().map(|d| format!("Z_{d}")).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Maximal multiplicity of a value in `xs`.
pub fn rho<T: Ord>(xs: &[T]) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::InvalidInstance("rho of an empty sequence".into()));
    }
    let mut counts: BTreeMap<&T, usize> = BTreeMap::new();
    for x in xs {
        *counts.entry(x).or_default() += 1;
    }
    Ok(counts.into_values().max().unwrap_or(0))
}

/// Invariant-factor chains `d_1 | d_2 | … | d_k` with product at most
/// `max_order`, in increasing order of group order; one entry per isomorphism
/// class.
pub fn all_groups_up_to(max_order: usize) -> Vec<AbelianGroup> {
    fn extend(prefix: &mut Vec<usize>, product: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        out.push(prefix.clone());
        let last = prefix.last().copied().unwrap_or(1);
        let mut d = if prefix.is_empty() { 2 } else { last };
        while product * d <= max {
            if d % last == 0 {
                prefix.push(d);
                extend(prefix, product * d, max, out);
                prefix.pop();
            }
            d += 1;
        }
    }
    let mut chains = Vec::new();
    extend(&mut Vec::new(), 1, max_order.max(1), &mut chains);
    let mut groups: Vec<AbelianGroup> = chains
        .into_iter()
        .map(|c| {
            let c: Vec<i64> = c.into_iter().map(|d| d as i64).collect();
            AbelianGroup::canonicalize(&c).expect("chain is valid")
        })
        .collect();
    groups.sort_by(|a, b| {
        a.order()
            .cmp(&b.order())
            .then_with(|| a.rank().cmp(&b.rank()))
            .then_with(|| a.invariant_factors().cmp(b.invariant_factors()))
    });
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(orders: &[i64]) -> AbelianGroup {
        AbelianGroup::canonicalize(orders).unwrap()
    }

    /// Element-order census computed directly on the given presentation.
    fn given_census(orders: &[usize]) -> BTreeMap<usize, usize> {
        let mut census = BTreeMap::new();
        let total: usize = orders.iter().product();
        for mut idx in 0..total {
            let mut ord = 1;
            for &o in orders.iter().rev() {
                let r = idx % o;
                idx /= o;
                ord = lcm(ord, o / gcd(r, o));
            }
            *census.entry(ord).or_insert(0) += 1;
        }
        census
    }

    fn canonical_census(g: &AbelianGroup) -> BTreeMap<usize, usize> {
        let mut census = BTreeMap::new();
        for e in g.enumerate() {
            *census.entry(g.element_order(&e).unwrap()).or_insert(0) += 1;
        }
        census
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(g(&[12]).invariant_factors(), &[12]);
        assert_eq!(g(&[2, 2]).invariant_factors(), &[2, 2]);
        assert_eq!(g(&[4, 6]).invariant_factors(), &[2, 12]);
        assert_eq!(g(&[6, 10]).invariant_factors(), &[2, 30]);
        assert_eq!(g(&[1, 1]).invariant_factors(), &[] as &[usize]);
        assert_eq!(g(&[]).order(), 1);
        assert_eq!(g(&[]).exponent(), 1);
        assert_eq!(g(&[4, 6]).exponent(), 12);
        assert_eq!(g(&[4, 6]).order(), 24);
    }

    #[test]
    fn invalid_orders() {
        assert!(matches!(
            AbelianGroup::canonicalize(&[0]),
            Err(Error::InvalidGroup(_))
        ));
        assert!(matches!(
            AbelianGroup::canonicalize(&[3, -2]),
            Err(Error::InvalidGroup(_))
        ));
    }

    #[test]
    fn census_of_4x6_matches_2x12() {
        let grp = g(&[4, 6]);
        assert_eq!(given_census(&[4, 6]), canonical_census(&grp));
        assert_eq!(given_census(&[4, 6]), given_census(&[2, 12]));
    }

    #[test]
    fn census_equivalence_exhaustive() {
        // every ordered list of orders >= 1 with product <= 48, up to 3 factors
        let mut lists: Vec<Vec<usize>> = Vec::new();
        for a in 1..=48usize {
            lists.push(vec![a]);
            for b in 1..=48 / a {
                lists.push(vec![a, b]);
                for c in 1..=48 / (a * b) {
                    lists.push(vec![a, b, c]);
                }
            }
        }
        for orders in lists {
            let lit: Vec<i64> = orders.iter().map(|&o| o as i64).collect();
            let grp = g(&lit);
            assert_eq!(given_census(&orders), canonical_census(&grp), "{orders:?}");
            let f = grp.invariant_factors();
            assert!(f.windows(2).all(|w| w[1] % w[0] == 0));
            assert!(f.iter().all(|&d| d >= 2));
            assert_eq!(f.iter().product::<usize>(), grp.order());
        }
    }

    #[test]
    fn canonicalization_idempotent() {
        for grp in all_groups_up_to(100) {
            assert_eq!(grp.canonical().invariant_factors(), grp.invariant_factors());
            assert_eq!(grp.order() % grp.exponent(), 0);
            assert_eq!(grp.exponent() == grp.order(), grp.is_cyclic());
        }
    }

    #[test]
    fn given_presentation_is_an_isomorphism() {
        let grp = g(&[4, 6, 3]);
        let mut seen = std::collections::BTreeSet::new();
        let mut images = Vec::new();
        for a in 0..4i64 {
            for b in 0..6i64 {
                for c in 0..3i64 {
                    let e = grp.from_given(&[a, b, c]).unwrap();
                    assert_eq!(grp.to_given(&e), vec![a, b, c]);
                    seen.insert(e.clone());
                    images.push(((a, b, c), e));
                }
            }
        }
        assert_eq!(seen.len(), grp.order());
        // homomorphism on a sample of pairs
        for (x, ex) in images.iter().step_by(7) {
            for (y, ey) in images.iter().step_by(5) {
                let s = grp
                    .from_given(&[(x.0 + y.0) % 4, (x.1 + y.1) % 6, (x.2 + y.2) % 3])
                    .unwrap();
                assert_eq!(grp.add(ex, ey).unwrap(), s);
            }
        }
    }

    #[test]
    fn arithmetic_examples() {
        let z5 = g(&[5]);
        let two = z5.element(vec![2]).unwrap();
        let four = z5.element(vec![4]).unwrap();
        assert_eq!(z5.add(&two, &four).unwrap().residues(), &[1]);

        let z2z4 = g(&[2, 4]);
        let a = z2z4.element(vec![1, 2]).unwrap();
        assert_eq!(z2z4.scalar_mul(3, &a).unwrap().residues(), &[1, 2]);
        assert_eq!(z2z4.scalar_mul(-1, &a).unwrap(), z2z4.neg(&a).unwrap());

        let bad = Element { residues: vec![1] };
        assert!(matches!(z2z4.add(&a, &bad), Err(Error::InvalidElement(_))));
        assert!(z2z4.element(vec![2, 0]).is_err());
    }

    #[test]
    fn group_laws_exhaustive() {
        for grp in all_groups_up_to(16) {
            let els = grp.enumerate();
            let zero = grp.zero();
            for a in &els {
                assert_eq!(grp.add(a, &zero).unwrap(), *a);
                assert_eq!(grp.add(a, &grp.neg(a).unwrap()).unwrap(), zero);
                assert_eq!(grp.scalar_mul(grp.order() as i64, a).unwrap(), zero);
                let ra = grp.rank_of(a);
                assert_eq!(grp.unrank(ra), *a);
                assert_eq!(grp.neg_rank(ra), grp.rank_of(&grp.neg(a).unwrap()));
                for b in &els {
                    let ab = grp.add(a, b).unwrap();
                    assert_eq!(ab, grp.add(b, a).unwrap());
                    assert_eq!(grp.add_ranks(ra, grp.rank_of(b)), grp.rank_of(&ab));
                    if grp.order() <= 12 {
                        for c in &els {
                            assert_eq!(
                                grp.add(&ab, c).unwrap(),
                                grp.add(a, &grp.add(b, c).unwrap()).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn enumerate_examples() {
        let z2 = g(&[2]);
        assert_eq!(
            z2.enumerate()
                .iter()
                .map(|e| e.residues().to_vec())
                .collect::<Vec<_>>(),
            vec![vec![0], vec![1]]
        );
        let v4 = g(&[2, 2]);
        assert_eq!(
            v4.enumerate()
                .iter()
                .map(|e| e.residues().to_vec())
                .collect::<Vec<_>>(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        let t = AbelianGroup::trivial();
        assert_eq!(t.enumerate(), vec![t.zero()]);
        assert!(t.zero().residues().is_empty());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&['a', 'a', 'b']).unwrap(), 2);
        assert_eq!(rho(&[1, 2, 3, 4]).unwrap(), 1);
        assert_eq!(rho(&[7; 5]).unwrap(), 5);
        assert!(matches!(rho::<u8>(&[]), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn groups_up_to_16() {
        let keys: Vec<String> = all_groups_up_to(8).iter().map(|g| g.key()).collect();
        assert_eq!(
            keys,
            vec!["1", "2", "3", "4", "2x2", "5", "6", "7", "8", "2x4", "2x2x2"]
        );
        assert_eq!(all_groups_up_to(16).iter().filter(|g| g.order() == 16).count(), 5);
    }

    #[test]
    fn serde_literal() {
        let grp: AbelianGroup = serde_json::from_str(r#"{"orders":[4,6]}"#).unwrap();
        assert_eq!(grp.invariant_factors(), &[2, 12]);
        let s = serde_json::to_string(&grp).unwrap();
        assert_eq!(s, r#"{"orders":[4,6],"invariant_factors":[2,12]}"#);
        let back: AbelianGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(back, grp);
        assert!(serde_json::from_str::<AbelianGroup>(r#"{"orders":[0]}"#).is_err());
    }
}
