//! Cubic necessary conditions for tactical matrices of designs over `GF(2)`.
//!
//! For a point `P` in orbit `l`, counting triples `(R, S, B)` with
//! `R in Psi_r`, `S in Psi_s` and `<P, R, S> <= B` gives
//!
//! ```text
//! T_lrs = sum_j rho_lj kappa_rj kappa_sj
//!       = sum_j |Psi_r| |Psi_s| / |B_j|^2 * rho_lj rho_rj rho_sj.
//! ```
//!
//! Pairs `(R, S)` spanning at most a plane with `P` contribute an exactly
//! known amount (`lambda1` or `lambda2` blocks), which gives the lower bound
//! below. The remaining pairs span a 3-space, lying in at most `phi` blocks
//! each, which gives the upper bound.

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::SigmaTable;
use crate::params::DesignParams;
use crate::tactical::TacticalMatrix;

/// Bounds on `T_lrs`, with the value for a particular matrix when known.
/// Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleBound {
    pub l: usize,
    pub r: usize,
    pub s: usize,
    pub lower: u64,
    pub upper: u64,
    pub value: Option<u64>,
}

impl TripleBound {
    pub fn contains(&self, value: u64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// `T_lrs` as an exact rational.
pub fn triple_sum(matrix: &TacticalMatrix, l: usize, r: usize, s: usize) -> Result<Ratio<u128>> {
    let m = matrix.rows();
    if let Some(&bad) = [l, r, s].iter().find(|&&i| i >= m) {
        return Err(Error::IndexOutOfRange { index: bad, size: m });
    }
    let rho = matrix.rho();
    let sizes = matrix.sizes();
    let num_factor = sizes[r] as u128 * sizes[s] as u128;
    let mut acc = Ratio::from_integer(0u128);
    for (j, &len) in matrix.lengths().iter().enumerate() {
        let prod = rho[l][j] as u128 * rho[r][j] as u128 * rho[s][j] as u128;
        if prod == 0 {
            continue;
        }
        let num = num_factor
            .checked_mul(prod)
            .ok_or(Error::Overflow("triple sum"))?;
        acc += Ratio::new(num, len as u128 * len as u128);
    }
    Ok(acc)
}

/// Integer value of `T_lrs`; fails if the sum is not integral, which cannot
/// happen when `kappa` is integral.
pub fn triple_sum_integer(matrix: &TacticalMatrix, l: usize, r: usize, s: usize) -> Result<u64> {
    let t = triple_sum(matrix, l, r, s)?;
    if !t.is_integer() {
        return Err(Error::NonIntegralTripleSum { l, r, s });
    }
    u64::try_from(t.to_integer()).map_err(|_| Error::Overflow("triple sum"))
}

fn nonneg(x: i128, l: usize, r: usize, s: usize) -> Result<u64> {
    u64::try_from(x).map_err(|_| Error::InconsistentSigma {
        l,
        r,
        s,
        coefficient: x,
    })
}

/// Lower and upper bound on `T_lrs` for any design over `GF(2)` with this
/// group-induced point partition.
pub fn bounds(
    params: &DesignParams,
    sizes: &[u64],
    sigma: &SigmaTable,
    l: usize,
    r: usize,
    s: usize,
) -> Result<TripleBound> {
    if params.q != 2 {
        return Err(Error::RequiresBinaryField(params.q));
    }
    let m = sizes.len();
    if sigma.len() != m {
        return Err(Error::InvalidParams(format!(
            "sigma table has {} orbits, partition has {m}",
            sigma.len()
        )));
    }
    if let Some(&bad) = [l, r, s].iter().find(|&&i| i >= m) {
        return Err(Error::IndexOutOfRange { index: bad, size: m });
    }
    let lambda1 = params.lambda1 as i128;
    let lambda2 = params.lambda2 as i128;
    let phi = params.phi as i128;
    let size = |i: usize| sizes[i] as i128;
    let sig = sigma.get(l, r, s) as i128;

    // (equality part, phi^3 cap coefficient)
    let (base, cap) = if l == r && r == s {
        (
            lambda1 + (3 * size(l) + sig - 3) * lambda2,
            size(l) * size(l) - 3 * size(l) - sig + 2,
        )
    } else if l != r && r != s && s != l {
        (sig * lambda2, size(r) * size(s) - sig)
    } else if r == s {
        // l != r = s
        (
            (size(s) + sig) * lambda2,
            size(r) * size(s) - size(r) - sig,
        )
    } else {
        // l = r != s, or l = s != r which is the same sum with r and s swapped.
        let other = if l == r { s } else { r };
        (
            (size(other) + sig) * lambda2,
            size(l) * size(other) - size(other) - sig,
        )
    };
    let lower = nonneg(base, l, r, s)?;
    let cap = nonneg(cap, l, r, s)?;
    let upper = lower
        .checked_add(cap.checked_mul(phi as u64).ok_or(Error::Overflow("bound"))?)
        .ok_or(Error::Overflow("bound"))?;
    Ok(TripleBound {
        l,
        r,
        s,
        lower,
        upper,
        value: None,
    })
}

/// All bounds with `r <= s`, in lexicographic `(l, r, s)` order.
pub fn all_bounds(
    params: &DesignParams,
    sizes: &[u64],
    sigma: &SigmaTable,
) -> Result<Vec<TripleBound>> {
    let m = sizes.len();
    let mut out = Vec::new();
    for l in 0..m {
        for r in 0..m {
            for s in r..m {
                out.push(bounds(params, sizes, sigma, l, r, s)?);
            }
        }
    }
    Ok(out)
}

/// The first `(l, r, s)` with `r <= s`, in lexicographic order, whose triple
/// sum lies outside its bounds.
pub fn first_violation(
    matrix: &TacticalMatrix,
    table: &[TripleBound],
) -> Result<Option<TripleBound>> {
    for b in table {
        let value = triple_sum_integer(matrix, b.l, b.r, b.s)?;
        if !b.contains(value) {
            return Ok(Some(TripleBound {
                value: Some(value),
                ..*b
            }));
        }
    }
    Ok(None)
}

/// Matrices split by the cubic conditions; input order is preserved in both lists.
#[derive(Debug, Clone, Default)]
pub struct FilterReport {
    pub accepted: Vec<TacticalMatrix>,
    pub rejected: Vec<(TacticalMatrix, TripleBound)>,
}

/// Splits matrices into those satisfying all cubic bounds and those violating
/// at least one, recording the first violation.
pub fn filter(
    matrices: Vec<TacticalMatrix>,
    params: &DesignParams,
    sizes: &[u64],
    sigma: &SigmaTable,
) -> Result<FilterReport> {
    let table = all_bounds(params, sizes, sigma)?;
    let verdicts: Vec<Option<TripleBound>> = matrices
        .par_iter()
        .map(|mat| first_violation(mat, &table))
        .collect::<Result<_>>()?;
    let mut report = FilterReport::default();
    for (mat, verdict) in matrices.into_iter().zip(verdicts) {
        match verdict {
            None => report.accepted.push(mat),
            Some(b) => report.rejected.push((mat, b)),
        }
    }
    Ok(report)
}
