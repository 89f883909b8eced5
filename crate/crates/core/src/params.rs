//! Parameter arithmetic for `2-(v,k,lambda2;q)` designs.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::field::{gauss_binom, gauss_binom_ext, is_prime};

/// Admissible parameters of a 2-design over `GF(q)` with the derived
/// quantities `lambda1`, `b` and `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DesignParams {
    pub v: u32,
    pub k: u32,
    pub lambda2: u64,
    pub q: u32,
    /// Blocks through a point.
    pub lambda1: u64,
    /// Number of blocks.
    pub b: u64,
    /// Cap on the number of blocks through a 3-space, `min(lambda2, [v-3 k-3]_q)`.
    pub phi: u64,
}

fn to_u64(x: u128, what: &'static str) -> Result<u64> {
    u64::try_from(x).map_err(|_| Error::Overflow(what))
}

impl DesignParams {
    /// Derives `lambda1`, `b` and `phi`, rejecting non-integral values.
    pub fn derive(v: u32, k: u32, lambda2: u64, q: u32) -> Result<Self> {
        if q > 255 || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if k < 2 || k >= v {
            return Err(Error::InvalidParams(format!(
                "need 2 <= k < v, got v = {v}, k = {k}"
            )));
        }
        if lambda2 == 0 {
            return Err(Error::InvalidParams("lambda2 must be positive".into()));
        }
        let l2 = lambda2 as u128;
        let mul = |a: u128, b: u128| a.checked_mul(b).ok_or(Error::Overflow("design parameters"));
        let l1_num = mul(l2, gauss_binom(v - 1, 1, q)?)?;
        let l1_den = gauss_binom(k - 1, 1, q)?;
        let b_num = mul(l2, gauss_binom(v, 2, q)?)?;
        let b_den = gauss_binom(k, 2, q)?;
        if l1_num % l1_den != 0 || b_num % b_den != 0 {
            return Err(Error::Inadmissible {
                lambda1_num: l1_num,
                lambda1_den: l1_den,
                lambda1_remainder: l1_num % l1_den,
                b_num,
                b_den,
                b_remainder: b_num % b_den,
            });
        }
        let cap = gauss_binom_ext(v as i64 - 3, k as i64 - 3, q)?;
        Ok(Self {
            v,
            k,
            lambda2,
            q,
            lambda1: to_u64(l1_num / l1_den, "lambda1")?,
            b: to_u64(b_num / b_den, "block count")?,
            phi: to_u64(cap.min(l2), "phi")?,
        })
    }

    /// `lambda_s` for `s` in `0..=2` as an exact rational.
    pub fn lambda_s(&self, s: u32) -> Result<Ratio<u128>> {
        if s > 2 {
            return Err(Error::IndexOutOfRange {
                index: s as usize,
                size: 3,
            });
        }
        let num = (self.lambda2 as u128)
            .checked_mul(gauss_binom(self.v - s, 2 - s, self.q)?)
            .ok_or(Error::Overflow("lambda_s"))?;
        let den = gauss_binom(self.k - s, 2 - s, self.q)?;
        Ok(Ratio::new(num, den))
    }

    /// Number of points of the ambient space, `[v 1]_q`.
    pub fn point_count(&self) -> u64 {
        gauss_binom(self.v, 1, self.q).expect("checked in derive") as u64
    }

    /// Number of points on a block, `[k 1]_q`.
    pub fn points_per_block(&self) -> u64 {
        gauss_binom(self.k, 1, self.q).expect("checked in derive") as u64
    }
}
