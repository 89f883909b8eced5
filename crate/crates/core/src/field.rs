//! Prime-field arithmetic, points and subspaces of `GF(q)^v` in canonical
//! form, subspace enumeration and Gaussian binomial coefficients.
//!
//! Vectors are row vectors with entries stored as `u8`, so `q` is restricted
//! to primes below 256. Subspaces are kept in reduced row-echelon form, which
//! makes equal subspaces structurally identical. Over `GF(2)` the elimination
//! routines pack rows into machine words.
//!
//! All subspaces (and points) share one total order: first by dimension, then
//! by the list of pivot columns, then row-major by the basis entries. For
//! points this means "position of the leading 1, then the remaining
//! coordinates", and it is also the order in which [`enumerate_subspaces`]
//! produces its output.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The ambient space `GF(q)^v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    q: u32,
    v: usize,
}

impl FieldSpec {
    pub fn new(q: u32, v: usize) -> Result<Self> {
        if q > 255 || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if v == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { q, v })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn v(&self) -> usize {
        self.v
    }

    #[inline]
    pub fn is_binary(&self) -> bool {
        self.q == 2
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        ((a as u32 + b as u32) % self.q) as u8
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        ((a as u32 + self.q - b as u32) % self.q) as u8
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        ((a as u32 * b as u32) % self.q) as u8
    }

    /// Multiplicative inverse by Fermat's little theorem. `a` must be nonzero.
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(!(a as u32).is_multiple_of(self.q));
        let mut base = a as u32 % self.q;
        let mut exp = self.q - 2;
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.q;
            }
            base = base * base % self.q;
            exp >>= 1;
        }
        acc as u8
    }

    /// Checks length and entry range of a raw vector.
    pub fn check_vector(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.v {
            return Err(Error::LengthMismatch {
                expected: self.v,
                got: x.len(),
            });
        }
        if let Some(&bad) = x.iter().find(|&&e| e as u32 >= self.q) {
            return Err(Error::EntryOutOfRange {
                value: bad as u32,
                q: self.q,
            });
        }
        Ok(())
    }

    /// Number of points of the projective space, `[v 1]_q`.
    pub fn point_count(&self) -> u128 {
        // Never overflows for q < 256 and v small enough to enumerate.
        gauss_binom(self.v as u32, 1, self.q).unwrap_or(u128::MAX)
    }
}

/// Gaussian binomial coefficient `[n r]_q` by the product formula.
///
/// Returns 0 when `r > n`. Fails with [`Error::Overflow`] if an intermediate
/// product does not fit into 128 bits.
pub fn gauss_binom(n: u32, r: u32, q: u32) -> Result<u128> {
    if r > n {
        return Ok(0);
    }
    let r = r.min(n - r);
    let q = q as u128;
    let pow = |e: u32| -> Result<u128> {
        q.checked_pow(e).ok_or(Error::Overflow("gaussian binomial"))
    };
    let mut acc: u128 = 1;
    for j in 1..=r {
        // acc = [n j-1]_q, and [n j]_q = acc * (q^(n-j+1) - 1) / (q^j - 1) exactly.
        let num = pow(n - j + 1)? - 1;
        let den = pow(j)? - 1;
        acc = acc
            .checked_mul(num)
            .ok_or(Error::Overflow("gaussian binomial"))?
            / den;
    }
    Ok(acc)
}

/// `[n r]_q` with the conventions `[n 0]_q = 1` and `[n r]_q = 0` for
/// `r < 0` or `r > n`. Negative `n` with `r = 0` yields 1.
pub fn gauss_binom_ext(n: i64, r: i64, q: u32) -> Result<u128> {
    if r == 0 {
        return Ok(1);
    }
    if r < 0 || n < 0 || r > n {
        return Ok(0);
    }
    gauss_binom(n as u32, r as u32, q)
}

/// A 1-space of `GF(q)^v`, stored as the spanning vector whose first nonzero
/// coordinate is 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ProjectivePoint {
    coords: Vec<u8>,
}

impl ProjectivePoint {
    #[inline]
    pub fn coords(&self) -> &[u8] {
        &self.coords
    }

    #[inline]
    pub fn pivot(&self) -> usize {
        self.coords.iter().position(|&c| c != 0).unwrap_or(0)
    }

    pub fn as_subspace(&self, spec: FieldSpec) -> Subspace {
        Subspace {
            q: spec.q,
            v: spec.v,
            pivots: vec![self.pivot()],
            rows: vec![self.coords.clone()],
        }
    }

    pub(crate) fn from_canonical(coords: Vec<u8>) -> Self {
        debug_assert!(coords.iter().find(|&&c| c != 0) == Some(&1));
        Self { coords }
    }
}

impl Ord for ProjectivePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pivot()
            .cmp(&other.pivot())
            .then_with(|| self.coords.cmp(&other.coords))
    }
}

impl PartialOrd for ProjectivePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{:?}>", self.coords)
    }
}

/// Scales a nonzero vector so that its first nonzero coordinate becomes 1.
pub fn canonicalize_point(spec: FieldSpec, raw: &[u8]) -> Result<ProjectivePoint> {
    spec.check_vector(raw)?;
    let lead = raw.iter().copied().find(|&c| c != 0).ok_or(Error::ZeroVector)?;
    let coords = if lead == 1 {
        raw.to_vec()
    } else {
        let s = spec.inv(lead);
        raw.iter().map(|&c| spec.mul(c, s)).collect()
    };
    Ok(ProjectivePoint { coords })
}

/// A subspace of `GF(q)^v` given by its reduced row-echelon basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    q: u32,
    v: usize,
    pivots: Vec<usize>,
    rows: Vec<Vec<u8>>,
}

impl Subspace {
    pub fn zero(spec: FieldSpec) -> Self {
        Self {
            q: spec.q,
            v: spec.v,
            pivots: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn full(spec: FieldSpec) -> Self {
        let rows = (0..spec.v)
            .map(|i| {
                let mut r = vec![0u8; spec.v];
                r[i] = 1;
                r
            })
            .collect();
        Self {
            q: spec.q,
            v: spec.v,
            pivots: (0..spec.v).collect(),
            rows,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn basis(&self) -> &[Vec<u8>] {
        &self.rows
    }

    #[inline]
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            q: self.q,
            v: self.v,
        }
    }

    fn check_same_space(&self, q: u32, v: usize) -> Result<()> {
        if self.q != q || self.v != v {
            return Err(Error::SpaceMismatch {
                q1: self.q,
                v1: self.v,
                q2: q,
                v2: v,
            });
        }
        Ok(())
    }

    /// Reduces `x` against the basis in place; the result is zero iff `x`
    /// lies in the subspace.
    fn reduce(&self, x: &mut [u8]) {
        let spec = self.spec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = x[p];
            if c != 0 {
                for (xi, &ri) in x.iter_mut().zip(row) {
                    *xi = spec.sub(*xi, spec.mul(c, ri));
                }
            }
        }
    }

    fn contains_vector(&self, x: &[u8]) -> bool {
        if self.q == 2 {
            let mut w = pack(x);
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                if w >> p & 1 == 1 {
                    w ^= pack(row);
                }
            }
            return w == 0;
        }
        let mut y = x.to_vec();
        self.reduce(&mut y);
        y.iter().all(|&c| c == 0)
    }

    /// Whether the point lies in this subspace.
    pub fn contains(&self, point: &ProjectivePoint) -> Result<bool> {
        self.check_same_space(self.q, point.coords.len())?;
        Ok(self.contains_vector(&point.coords))
    }

    /// Whether `other` is a subspace of `self`.
    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        self.check_same_space(other.q, other.v)?;
        if other.dim() > self.dim() {
            return Ok(false);
        }
        Ok(other.rows.iter().all(|r| self.contains_vector(r)))
    }

    /// All points of this subspace, sorted.
    pub fn points(&self) -> Vec<ProjectivePoint> {
        let spec = self.spec();
        let d = self.dim();
        let mut out = Vec::new();
        let mut coeffs = vec![0u8; d];
        // Canonical points are exactly the combinations whose first nonzero
        // coefficient is 1, because the basis is in echelon form.
        loop {
            if let Some(lead) = coeffs.iter().position(|&c| c != 0) {
                if coeffs[lead] == 1 {
                    let mut x = vec![0u8; self.v];
                    for (c, row) in coeffs.iter().zip(&self.rows) {
                        if *c != 0 {
                            for (xi, &ri) in x.iter_mut().zip(row) {
                                *xi = spec.add(*xi, spec.mul(*c, ri));
                            }
                        }
                    }
                    out.push(ProjectivePoint { coords: x });
                }
            }
            let mut i = d;
            loop {
                if i == 0 {
                    out.sort();
                    return out;
                }
                i -= 1;
                coeffs[i] += 1;
                if coeffs[i] as u32 == self.q {
                    coeffs[i] = 0;
                } else {
                    break;
                }
            }
        }
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rows
            .len()
            .cmp(&other.rows.len())
            .then_with(|| self.pivots.cmp(&other.pivots))
            .then_with(|| self.rows.cmp(&other.rows))
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace{:?}", self.rows)
    }
}

/// A `GF(2)` subspace packed into machine words, for repeated containment
/// tests.
#[derive(Debug, Clone)]
pub(crate) struct BinarySubspace {
    rows: Vec<u64>,
    pivot_bits: Vec<u64>,
}

impl BinarySubspace {
    pub(crate) fn new(s: &Subspace) -> Self {
        debug_assert_eq!(s.q, 2);
        Self {
            rows: s.rows.iter().map(|r| pack(r)).collect(),
            pivot_bits: s.pivots.iter().map(|&p| 1u64 << p).collect(),
        }
    }

    #[inline]
    pub(crate) fn contains_word(&self, mut w: u64) -> bool {
        for (&row, &bit) in self.rows.iter().zip(&self.pivot_bits) {
            if w & bit != 0 {
                w ^= row;
            }
        }
        w == 0
    }

    #[inline]
    pub(crate) fn contains(&self, other: &BinarySubspace) -> bool {
        other.rows.iter().all(|&w| self.contains_word(w))
    }

    pub(crate) fn from_point(p: &ProjectivePoint) -> Self {
        Self {
            rows: vec![pack(&p.coords)],
            pivot_bits: vec![1u64 << p.pivot()],
        }
    }
}

#[inline]
fn pack(x: &[u8]) -> u64 {
    x.iter()
        .enumerate()
        .fold(0u64, |w, (i, &c)| w | ((c as u64 & 1) << i))
}

#[inline]
fn unpack(w: u64, v: usize) -> Vec<u8> {
    (0..v).map(|i| (w >> i & 1) as u8).collect()
}

fn rref_binary(v: usize, rows: &[Vec<u8>]) -> (Vec<usize>, Vec<Vec<u8>>) {
    let mut words: Vec<u64> = rows.iter().map(|r| pack(r)).filter(|&w| w != 0).collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..v {
        let bit = 1u64 << col;
        let Some(found) = (rank..words.len()).find(|&i| words[i] & bit != 0) else {
            continue;
        };
        words.swap(rank, found);
        let pivot_row = words[rank];
        for (i, w) in words.iter_mut().enumerate() {
            if i != rank && *w & bit != 0 {
                *w ^= pivot_row;
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == words.len() {
            break;
        }
    }
    words.truncate(rank);
    (pivots, words.into_iter().map(|w| unpack(w, v)).collect())
}

fn rref_prime(spec: FieldSpec, rows: &[Vec<u8>]) -> (Vec<usize>, Vec<Vec<u8>>) {
    let mut m: Vec<Vec<u8>> = rows
        .iter()
        .filter(|r| r.iter().any(|&c| c != 0))
        .cloned()
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..spec.v {
        let Some(found) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, found);
        let s = spec.inv(m[rank][col]);
        for c in m[rank].iter_mut() {
            *c = spec.mul(*c, s);
        }
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            let f = row[col];
            if i != rank && f != 0 {
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x = spec.sub(*x, spec.mul(f, p));
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    (pivots, m)
}

/// The span of `rows` as a canonical subspace.
pub fn rref(spec: FieldSpec, rows: &[Vec<u8>]) -> Result<Subspace> {
    for r in rows {
        spec.check_vector(r)?;
    }
    Ok(rref_unchecked(spec, rows))
}

pub(crate) fn rref_unchecked(spec: FieldSpec, rows: &[Vec<u8>]) -> Subspace {
    let (pivots, rows) = if spec.q == 2 && spec.v <= 64 {
        rref_binary(spec.v, rows)
    } else {
        rref_prime(spec, rows)
    };
    Subspace {
        q: spec.q,
        v: spec.v,
        pivots,
        rows,
    }
}

/// Dimension of the span of `u` and `w`.
pub fn join_dim(u: &Subspace, w: &Subspace) -> Result<usize> {
    u.check_same_space(w.q, w.v)?;
    Ok(join(u, w).dim())
}

/// Span of `u` and `w`; both must live in the same space.
pub(crate) fn join(u: &Subspace, w: &Subspace) -> Subspace {
    let rows: Vec<Vec<u8>> = u.rows.iter().chain(&w.rows).cloned().collect();
    rref_unchecked(u.spec(), &rows)
}

/// Dimension of the span of a set of points.
pub fn points_span_dim(spec: FieldSpec, points: &[&ProjectivePoint]) -> usize {
    let rows: Vec<Vec<u8>> = points.iter().map(|p| p.coords.clone()).collect();
    rref_unchecked(spec, &rows).dim()
}

/// All `r`-spaces of `GF(q)^v` in canonical order.
///
/// The RREF matrices are generated directly from pivot patterns and free
/// entries, so every subspace is produced exactly once.
pub fn enumerate_subspaces(spec: FieldSpec, r: usize) -> Result<Vec<Subspace>> {
    let v = spec.v;
    if r > v {
        return Err(Error::DimensionOutOfRange { r, v });
    }
    let total = gauss_binom(v as u32, r as u32, spec.q)?;
    let mut out = Vec::with_capacity(usize::try_from(total).unwrap_or(0).min(1 << 24));
    let mut pivots: Vec<usize> = (0..r).collect();
    loop {
        emit_pattern(spec, &pivots, &mut out);
        if !next_combination(&mut pivots, v) {
            break;
        }
    }
    debug_assert_eq!(out.len() as u128, total);
    Ok(out)
}

/// Advances `c` to the next `c.len()`-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn emit_pattern(spec: FieldSpec, pivots: &[usize], out: &mut Vec<Subspace>) {
    let v = spec.v;
    // Free positions, row-major: entries right of the row's pivot that are not
    // pivot columns themselves.
    let mut free = Vec::new();
    for (i, &p) in pivots.iter().enumerate() {
        for col in p + 1..v {
            if !pivots.contains(&col) {
                free.push((i, col));
            }
        }
    }
    let mut rows: Vec<Vec<u8>> = pivots
        .iter()
        .map(|&p| {
            let mut row = vec![0u8; v];
            row[p] = 1;
            row
        })
        .collect();
    let mut digits = vec![0u8; free.len()];
    loop {
        for (&(i, col), &d) in free.iter().zip(&digits) {
            rows[i][col] = d;
        }
        out.push(Subspace {
            q: spec.q,
            v,
            pivots: pivots.to_vec(),
            rows: rows.clone(),
        });
        let mut i = digits.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] as u32 == spec.q {
                digits[i] = 0;
            } else {
                break;
            }
        }
    }
}

/// All points of `GF(q)^v` in canonical order.
pub fn enumerate_points(spec: FieldSpec) -> Vec<ProjectivePoint> {
    enumerate_subspaces(spec, 1)
        .expect("r = 1 is always in range")
        .into_iter()
        .map(|s| ProjectivePoint {
            coords: s.rows.into_iter().next().expect("1-space has one row"),
        })
        .collect()
}
