use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::group::AbelianGroup;

use super::certificate::{verify_certificate, Certificate, SolvePath};
use super::claims::{claim1_blocks, claim2_blocks, to_one_based, Block};
use super::fallback::{fallback_search, FallbackQuery, DEFAULT_ORACLE_CAP};
use super::word1::word1_pairs;
use super::{Instance, Selection, Shelling, Statement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Largest `m` the exhaustive oracle accepts.
    pub oracle_cap: usize,
    /// Try the oracle when the construction fails to certify.
    pub fallback: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            oracle_cap: DEFAULT_ORACLE_CAP,
            fallback: true,
        }
    }
}

fn certificate(
    inst: &Instance,
    davenport: usize,
    selection: Selection,
    shelling: Option<Vec<Vec<usize>>>,
    solve_path: SolvePath,
) -> Certificate {
    let mut cert = Certificate {
        statement: inst.statement,
        group: inst.group.clone(),
        digest: inst.digest(),
        selection,
        shelling,
        solve_path,
        verified: false,
    };
    cert.verified = verify_certificate(inst, davenport, &cert).verified;
    cert
}

/// Accept a verified constructive certificate; otherwise run the oracle.
fn settle(
    inst: &Instance,
    davenport: usize,
    opts: &SolveOptions,
    constructive: Result<Certificate>,
) -> Result<Certificate> {
    let reason = match constructive {
        Ok(cert) if cert.verified => return Ok(cert),
        Ok(cert) => {
            let v = verify_certificate(inst, davenport, &cert);
            format!(
                "constructive certificate failed verification: {:?}",
                v.diagnostics
            )
        }
        Err(Error::TheoremViolation(msg)) => msg,
        Err(other) => return Err(other),
    };
    if !opts.fallback {
        return Err(Error::TheoremViolation(reason));
    }
    if inst.m() > opts.oracle_cap {
        return Err(Error::TheoremViolation(format!(
            "{reason}; instance too large for the oracle (m = {}, cap {})",
            inst.m(),
            opts.oracle_cap
        )));
    }
    let query = FallbackQuery::for_statement(inst, davenport);
    match fallback_search(inst, &query, opts.oracle_cap)? {
        Some(sel) => {
            let cert = certificate(inst, davenport, sel, None, SolvePath::Fallback);
            if cert.verified {
                Ok(cert)
            } else {
                Err(Error::TheoremViolation(format!(
                    "{reason}; oracle answer failed verification"
                )))
            }
        }
        None => Err(Error::TheoremViolation(format!(
            "{reason}; exhaustive search found no selection"
        ))),
    }
}

/// Zero-valued blocks with `n - min(D, ℓ) ≤ |∪ blocks| ≤ n - 1` (0-based).
///
/// For `D ≤ ℓ` this is the `D`-shellable extension from the first `n - 1`
/// indices. Otherwise an `ℓ`-shellable `T` is built first, the rest of the
/// indices are extended `D`-shellably, and blocks are taken greedily (those
/// of the extension first, then those of `T`) while the union stays at most
/// `n - 1`. The extension alone fits, and `T`'s blocks have size at most
/// `ℓ`, so the greedy stop lands at or above `n - ℓ`.
pub(crate) fn theorem1_blocks(
    g: &AbelianGroup,
    x: &[usize],
    w: &[i64],
    ell: usize,
    davenport: usize,
) -> Result<Vec<Block>> {
    let n = g.order();
    let m = x.len();
    if davenport <= ell {
        let a: Vec<usize> = (0..m.min(n - 1)).collect();
        let b: Vec<usize> = (0..m).collect();
        return claim1_blocks(g, x, w, &a, &b, davenport);
    }
    let shell = claim2_blocks(g, x, w, ell, davenport)?;
    let used_dom: BTreeSet<usize> = shell.iter().flatten().map(|p| p.0).collect();
    let used_img: BTreeSet<usize> = shell.iter().flatten().map(|p| p.1).collect();
    let rest_dom: Vec<usize> = (0..m).filter(|i| !used_dom.contains(i)).collect();
    let rest_img: Vec<usize> = (0..m).filter(|j| !used_img.contains(j)).collect();
    let extension = claim1_blocks(g, x, w, &rest_dom, &rest_img, davenport)?;

    let mut chosen = Vec::new();
    let mut total = 0;
    for block in extension.into_iter().chain(shell) {
        if total + block.len() > n - 1 {
            break;
        }
        total += block.len();
        chosen.push(block);
    }
    Ok(chosen)
}

/// Weighted `n + D - 1` theorem: for `m = n + D - min(D, ℓ) - 1` and
/// `ρ(x) ≤ ℓ`, a selection with `n - min(D, ℓ) ≤ |I| ≤ n - 1` and value 0.
pub fn theorem1_solve(inst: &Instance, davenport: usize, opts: &SolveOptions) -> Result<Certificate> {
    if inst.statement != Statement::Theorem1 {
        return Err(Error::InvalidInstance(format!(
            "instance states {}, not theorem1",
            inst.statement
        )));
    }
    inst.check_theorem1(davenport)?;
    let constructive = theorem1_blocks(&inst.group, &inst.x_ranks(), &inst.w, inst.ell, davenport)
        .and_then(|blocks| {
            Shelling::new(inst, to_one_based(blocks), davenport.max(1))
                .map_err(|e| Error::TheoremViolation(format!("theorem construction failed: {e}")))
        })
        .map(|sh| {
            let blocks = sh.blocks().to_vec();
            certificate(
                inst,
                davenport,
                sh.into_selection(),
                Some(blocks),
                SolvePath::Constructive,
            )
        });
    settle(inst, davenport, opts, constructive)
}

/// Barycentric form: for `m = n + D - 1`, `ρ(x) = ℓ` attained by `x_m`,
/// `r = min(D, ℓ)` and `|w| = m - r`, an `n`-subset `I ⊆ [1, m - r]` with an
/// injection hitting `m` and `⟨I⟩_f = (Σ_I w_i) x_m`.
///
/// The `r` positions holding `x_m` are kept in reserve; the theorem is run on
/// the other positions translated by `-x_m`, and the selection is padded to
/// size `n` with indices sent into the reserve (the last one onto `m`).
pub fn corollary_solve(inst: &Instance, davenport: usize, opts: &SolveOptions) -> Result<Certificate> {
    if inst.statement != Statement::Corollary {
        return Err(Error::InvalidInstance(format!(
            "instance states {}, not corollary",
            inst.statement
        )));
    }
    inst.check_corollary(davenport)?;
    let constructive = corollary_construct(inst, davenport);
    settle(inst, davenport, opts, constructive)
}

fn corollary_construct(inst: &Instance, davenport: usize) -> Result<Certificate> {
    let g = &inst.group;
    let n = g.order();
    let m = inst.m();
    let x = inst.x_ranks();
    let last = x[m - 1];
    let reserve_len = davenport.min(inst.ell);

    let holders: Vec<usize> = (0..m).filter(|&p| x[p] == last).collect();
    let reserve: Vec<usize> = holders[holders.len() - reserve_len..].to_vec();
    let others: Vec<usize> = (0..m).filter(|p| !reserve.contains(p)).collect();
    let shift = g.neg_rank(last);
    let translated: Vec<usize> = others.iter().map(|&p| g.add_ranks(x[p], shift)).collect();

    let blocks: Vec<Block> = theorem1_blocks(g, &translated, &inst.w, inst.ell, davenport)?
        .into_iter()
        .map(|b| b.into_iter().map(|(i, j)| (i, others[j])).collect())
        .collect();
    let taken: BTreeSet<usize> = blocks.iter().flatten().map(|p| p.0).collect();
    let pad_len = n - taken.len();
    if pad_len == 0 || pad_len > reserve.len() {
        return Err(Error::TheoremViolation(format!(
            "theorem selection of size {} cannot be padded from a reserve of {}",
            taken.len(),
            reserve.len()
        )));
    }
    let pad: Vec<usize> = (0..inst.w.len())
        .filter(|i| !taken.contains(i))
        .take(pad_len)
        .collect();
    if pad.len() < pad_len {
        return Err(Error::TheoremViolation(
            "not enough free weight indices to pad".into(),
        ));
    }
    let mut padding: Vec<Block> = pad.iter().zip(&reserve).map(|(&i, &j)| vec![(i, j)]).collect();
    padding.last_mut().expect("pad is nonempty")[0].1 = m - 1;

    let all: Vec<Block> = to_one_based(blocks.into_iter().chain(padding).collect());
    let shelling: Vec<Vec<usize>> = all.iter().map(|b| b.iter().map(|p| p.0).collect()).collect();
    let selection = Selection::new(inst, all.into_iter().flatten().collect())
        .map_err(|e| Error::TheoremViolation(format!("corollary construction failed: {e}")))?;
    Ok(certificate(
        inst,
        davenport,
        selection,
        Some(shelling),
        SolvePath::Constructive,
    ))
}

/// Single-block weighted zero-sum for `|x| = |w| = n`, `1 ≤ |I| ≤ ℓ`.
pub fn word1_solve(inst: &Instance, davenport: usize, opts: &SolveOptions) -> Result<Certificate> {
    if inst.statement != Statement::Word1 {
        return Err(Error::InvalidInstance(format!(
            "instance states {}, not word1",
            inst.statement
        )));
    }
    inst.check_word1()?;
    let constructive = word1_pairs(&inst.group, &inst.x_ranks(), &inst.w).and_then(|pairs| {
        let block: Block = pairs.into_iter().map(|(i, j)| (i + 1, j + 1)).collect();
        let sh = Shelling::new(inst, vec![block], inst.ell)
            .map_err(|e| Error::TheoremViolation(format!("word1 construction failed: {e}")))?;
        let blocks = sh.blocks().to_vec();
        Ok(certificate(
            inst,
            davenport,
            sh.into_selection(),
            Some(blocks),
            SolvePath::Constructive,
        ))
    });
    settle(inst, davenport, opts, constructive)
}

/// Dispatch on the instance's statement.
pub fn solve(inst: &Instance, davenport: usize, opts: &SolveOptions) -> Result<Certificate> {
    match inst.statement {
        Statement::Theorem1 => theorem1_solve(inst, davenport, opts),
        Statement::Corollary => corollary_solve(inst, davenport, opts),
        Statement::Word1 => word1_solve(inst, davenport, opts),
    }
}
