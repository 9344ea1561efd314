use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{rho, AbelianGroup, Element, GroupLiteral};

/// Which conclusion a certificate claims.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statement {
    /// `n - min(D, ℓ) ≤ |I| ≤ n - 1` and `⟨I⟩_f = 0`.
    #[default]
    Theorem1,
    /// `|I| = n`, `m ∈ f(I)` and `⟨I⟩_f = (Σ_I w_i) · x_m`.
    Corollary,
    /// `1 ≤ |I| ≤ ℓ` and `⟨I⟩_f = 0` for length-`n` inputs.
    Word1,
}

impl std::fmt::Display for Statement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Statement::Theorem1 => "theorem1",
            Statement::Corollary => "corollary",
            Statement::Word1 => "word1",
        })
    }
}

/// A sequence `x` over `G`, integer weights `w` and a repetition bound `ℓ`.
///
/// `x` is held in canonical coordinates; on the wire it is written in the
/// presentation given by `group.orders`. Weights are kept exactly as given.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub group: AbelianGroup,
    pub x: Vec<Element>,
    pub w: Vec<i64>,
    pub ell: usize,
    pub statement: Statement,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    group: GroupLiteral,
    x: Vec<Vec<i64>>,
    w: Vec<i64>,
    ell: usize,
    #[serde(default)]
    statement: Statement,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        let group = AbelianGroup::try_from(f.group)?;
        let x =
            f.x.iter()
                .map(|r| group.from_given(r))
                .collect::<Result<Vec<_>>>()?;
        Ok(Instance {
            group,
            x,
            w: f.w,
            ell: f.ell,
            statement: f.statement,
        })
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        InstanceFile {
            x: inst.x.iter().map(|e| inst.group.to_given(e)).collect(),
            group: GroupLiteral {
                orders: inst.group.given_orders().iter().map(|&o| o as i64).collect(),
                invariant_factors: None,
            },
            w: inst.w,
            ell: inst.ell,
            statement: inst.statement,
        }
    }
}

/// Required sequence length for the weighted theorem: `n + D - min(D, ℓ) - 1`.
pub fn theorem_length(n: usize, davenport: usize, ell: usize) -> usize {
    n + davenport - davenport.min(ell) - 1
}

impl Instance {
    pub fn new(group: AbelianGroup, x: Vec<Element>, w: Vec<i64>, ell: usize, statement: Statement) -> Self {
        Self {
            group,
            x,
            w,
            ell,
            statement,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Parse {
            context: "instance".into(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// SHA-256 of the compact JSON form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    /// Maximal repetition of `x`; 0 for the empty sequence.
    pub fn rho_x(&self) -> usize {
        rho(&self.x).unwrap_or(0)
    }

    fn check_common(&self) -> Result<()> {
        if self.ell < 1 {
            return Err(Error::InvalidInstance("ell must be at least 1".into()));
        }
        for e in &self.x {
            self.group.element(e.residues().to_vec())?;
        }
        Ok(())
    }

    pub fn check_word1(&self) -> Result<()> {
        self.check_common()?;
        let n = self.group.order();
        if self.x.len() != n || self.w.len() != n {
            return Err(Error::InvalidInstance(format!(
                "word1 needs |x| = |w| = n = {n}, got |x| = {}, |w| = {}",
                self.x.len(),
                self.w.len()
            )));
        }
        let r = self.rho_x();
        if r > self.ell {
            return Err(Error::InvalidInstance(format!(
                "maximal repetition {r} exceeds ell = {}",
                self.ell
            )));
        }
        Ok(())
    }

    pub fn check_theorem1(&self, davenport: usize) -> Result<()> {
        self.check_common()?;
        let n = self.group.order();
        let m = theorem_length(n, davenport, self.ell);
        if self.x.len() != m || self.w.len() != m {
            return Err(Error::InvalidInstance(format!(
                "theorem1 needs |x| = |w| = n + D - min(D, ell) - 1 = {m}, got |x| = {}, |w| = {}",
                self.x.len(),
                self.w.len()
            )));
        }
        let r = self.rho_x();
        if r > self.ell {
            return Err(Error::InvalidInstance(format!(
                "maximal repetition {r} exceeds ell = {}",
                self.ell
            )));
        }
        Ok(())
    }

    /// Structural checks first (`InvalidInstance`), then feasibility:
    /// `ℓ ≥ D` leaves only `n - 1` weight slots for an `n`-subset.
    pub fn check_corollary(&self, davenport: usize) -> Result<()> {
        self.check_common()?;
        let n = self.group.order();
        let m = n + davenport - 1;
        if self.x.len() != m {
            return Err(Error::InvalidInstance(format!(
                "corollary needs |x| = n + D - 1 = {m}, got {}",
                self.x.len()
            )));
        }
        let r = self.rho_x();
        let last = &self.x[m - 1];
        let at_last = self.x.iter().filter(|e| *e == last).count();
        if r != self.ell || at_last != self.ell {
            return Err(Error::InvalidInstance(format!(
                "corollary needs the maximal repetition ell = {} attained by x_m (rho = {r}, multiplicity of x_m = {at_last})",
                self.ell
            )));
        }
        let reserve = davenport.min(self.ell);
        if self.w.len() != m - reserve {
            return Err(Error::InvalidInstance(format!(
                "corollary needs |w| = m - min(D, ell) = {}, got {}",
                m - reserve,
                self.w.len()
            )));
        }
        if self.ell >= davenport {
            return Err(Error::UnsatisfiableStatement(format!(
                "ell = {} >= D = {davenport}: no {n}-subset of [1, {}] exists",
                self.ell,
                m - reserve
            )));
        }
        Ok(())
    }

    pub fn check(&self, davenport: usize) -> Result<()> {
        match self.statement {
            Statement::Theorem1 => self.check_theorem1(davenport),
            Statement::Corollary => self.check_corollary(davenport),
            Statement::Word1 => self.check_word1(),
        }
    }

    pub(crate) fn x_ranks(&self) -> Vec<usize> {
        self.x.iter().map(|e| self.group.rank_of(e)).collect()
    }
}
