//! Fixtures and independent brute-force oracles shared by the integration
//! tests. Nothing here calls the library's search or counting routines; the
//! oracles work on plain integer vectors.

#![allow(dead_code)]

pub mod suites;

use std::collections::{BTreeSet, HashSet};

use qtd_core::{
    close_group, DesignParams, FieldSpec, GfMatrix, MatrixGroup, ProjectivePoint, Subspace,
    TacticalMatrix,
};

pub fn example1() -> (DesignParams, MatrixGroup) {
    let spec = FieldSpec::new(2, 4).unwrap();
    let phi = GfMatrix::from_rows(
        spec,
        &[vec![0, 0, 0, 1], vec![0, 0, 1, 0], vec![0, 1, 1, 0], vec![1, 0, 0, 1]],
    )
    .unwrap();
    (
        DesignParams::derive(4, 3, 3, 2).unwrap(),
        close_group(spec, vec![phi], 1000).unwrap(),
    )
}

pub fn example2() -> (DesignParams, MatrixGroup) {
    let spec = FieldSpec::new(2, 6).unwrap();
    let phi = GfMatrix::from_rows(
        spec,
        &[
            vec![0, 1, 0, 0, 0, 0],
            vec![0, 0, 1, 0, 0, 0],
            vec![0, 0, 0, 1, 0, 0],
            vec![0, 0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 0, 1],
            vec![1, 0, 0, 0, 1, 1],
        ],
    )
    .unwrap();
    (
        DesignParams::derive(6, 3, 6, 2).unwrap(),
        close_group(spec, vec![phi], 1000).unwrap(),
    )
}

pub const EXAMPLE1_REPS: [[u8; 4]; 5] = [
    [1, 0, 0, 0],
    [1, 0, 1, 0],
    [1, 0, 1, 1],
    [1, 1, 0, 0],
    [0, 1, 0, 0],
];

pub const EXAMPLE2_REPS: [[u8; 6]; 3] = [
    [1, 1, 1, 1, 0, 1],
    [1, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 1],
];

pub fn example1_matrices() -> [Vec<Vec<u64>>; 2] {
    [
        (0..5)
            .map(|i| (0..5).map(|j| if i == j { 3 } else { 1 }).collect())
            .collect(),
        vec![
            vec![3, 1, 1, 1, 1],
            vec![1, 2, 2, 2, 0],
            vec![1, 2, 2, 0, 2],
            vec![1, 2, 0, 2, 2],
            vec![1, 0, 2, 2, 2],
        ],
    ]
}

fn ex2_row1() -> Vec<u64> {
    let mut r = vec![0; 18];
    r[0] = 31;
    r[1] = 31;
    r
}

pub fn example2_rejected() -> [Vec<Vec<u64>>; 3] {
    [
        vec![
            ex2_row1(),
            vec![0, 6, 1, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4],
            vec![6, 0, 6, 4, 4, 4, 4, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3],
        ],
        vec![
            ex2_row1(),
            vec![0, 6, 2, 2, 2, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4],
            vec![6, 0, 5, 5, 5, 4, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3],
        ],
        vec![
            ex2_row1(),
            vec![6, 0, 5, 5, 4, 4, 4, 4, 4, 3, 3, 3, 3, 3, 3, 3, 3, 2],
            vec![0, 6, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 5],
        ],
    ]
}

pub fn example2_m() -> Vec<Vec<u64>> {
    vec![
        ex2_row1(),
        vec![3, 3, 0, 0, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4],
        vec![3, 3, 7, 7, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3],
    ]
}

pub fn tm(rho: Vec<Vec<u64>>, sizes: &[u64], len: u64) -> TacticalMatrix {
    let n = rho[0].len();
    TacticalMatrix::new(rho, sizes.to_vec(), vec![len; n]).unwrap()
}

/// Columns as a sorted multiset, ignoring column order entirely.
pub fn column_multiset(rho: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut cols: Vec<Vec<u64>> = (0..rho[0].len())
        .map(|j| rho.iter().map(|r| r[j]).collect())
        .collect();
    cols.sort();
    cols
}

/// Whether two matrices agree up to a permutation of rows (among `perms`)
/// and of columns.
pub fn same_up_to(a: &[Vec<u64>], b: &[Vec<u64>], perms: &[Vec<usize>]) -> bool {
    let target = column_multiset(b);
    perms.iter().any(|p| {
        let permuted: Vec<Vec<u64>> = p.iter().map(|&i| a[i].clone()).collect();
        column_multiset(&permuted) == target
    })
}

pub fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in 0..m {
            if !cur.contains(&i) {
                cur.push(i);
                rec(m, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(m, &mut Vec::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// Vectors over GF(p) as plain integers (base-p digits) and subspaces as sets.

pub fn encode(v: &[u8], q: u32) -> u32 {
    v.iter().fold(0u32, |acc, &x| acc * q + x as u32)
}

pub fn decode(mut x: u32, q: u32, v: usize) -> Vec<u8> {
    let mut out = vec![0u8; v];
    for i in (0..v).rev() {
        out[i] = (x % q) as u8;
        x /= q;
    }
    out
}

fn add_scaled(a: &[u8], b: &[u8], c: u8, q: u32) -> Vec<u8> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| ((x as u32 + c as u32 * y as u32) % q) as u8)
        .collect()
}

/// All vectors of the span of `rows`, as encoded integers.
pub fn span_set(rows: &[Vec<u8>], q: u32, v: usize) -> BTreeSet<u32> {
    let mut set = BTreeSet::new();
    set.insert(0);
    for row in rows {
        let current: Vec<u32> = set.iter().copied().collect();
        for x in current {
            let xv = decode(x, q, v);
            for c in 1..q as u8 {
                set.insert(encode(&add_scaled(&xv, row, c, q), q));
            }
        }
    }
    set
}

pub fn subspace_set(s: &Subspace) -> BTreeSet<u32> {
    span_set(s.basis(), s.spec().q(), s.spec().v())
}

pub fn point_code(p: &ProjectivePoint, q: u32) -> u32 {
    encode(p.coords(), q)
}

/// Number of distinct `d`-dimensional subspaces of `GF(q)^v`, found by
/// extending every `(d-1)`-space by every vector outside it.
pub fn brute_force_subspace_counts(q: u32, v: usize) -> Vec<usize> {
    let total = q.pow(v as u32);
    let mut level: HashSet<BTreeSet<u32>> = HashSet::new();
    level.insert(BTreeSet::from([0]));
    let mut counts = vec![1];
    for _ in 0..v {
        let mut next = HashSet::new();
        for s in &level {
            for x in 0..total {
                if s.contains(&x) {
                    continue;
                }
                let xv = decode(x, q, v);
                let mut t = s.clone();
                for &y in s {
                    let yv = decode(y, q, v);
                    for c in 1..q as u8 {
                        t.insert(encode(&add_scaled(&yv, &xv, c, q), q));
                    }
                }
                next.insert(t);
            }
        }
        counts.push(next.len());
        level = next;
    }
    counts
}

/// Gaussian binomial by the q-Pascal rule `[n r] = [n-1 r-1] + q^r [n-1 r]`.
pub fn gauss_pascal(n: u32, r: u32, q: u32) -> u128 {
    if r > n {
        return 0;
    }
    let q = q as u128;
    let mut row = vec![1u128];
    for m in 1..=n as usize {
        let mut next = vec![1u128; m + 1];
        for j in 1..m {
            next[j] = row[j - 1] + q.pow(j as u32) * row[j];
        }
        row = next;
    }
    row[r as usize]
}

// ---------------------------------------------------------------------------
// Tactical equations, written out directly.

/// Whether `rho` satisfies the integrality, row/column sum and quadratic
/// equations of a tactical decomposition matrix.
pub fn oracle_is_tactical(p: &DesignParams, rho: &[Vec<u64>], sizes: &[u64], lengths: &[u64]) -> bool {
    let m = sizes.len();
    let n = lengths.len();
    let mut kappa = vec![vec![0u64; n]; m];
    for i in 0..m {
        if rho[i].iter().sum::<u64>() != p.lambda1 {
            return false;
        }
        for j in 0..n {
            if !(sizes[i] * rho[i][j]).is_multiple_of(lengths[j]) {
                return false;
            }
            kappa[i][j] = sizes[i] * rho[i][j] / lengths[j];
        }
    }
    let kq = p.points_per_block();
    for j in 0..n {
        if (0..m).map(|i| kappa[i][j]).sum::<u64>() != kq {
            return false;
        }
    }
    for l in 0..m {
        for r in 0..m {
            let lhs: u64 = (0..n).map(|j| rho[l][j] * kappa[r][j]).sum();
            let rhs = if l == r {
                p.lambda1 + p.lambda2 * (sizes[r] - 1)
            } else {
                p.lambda2 * sizes[r]
            };
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// All vectors of length `n` with entries summing to `total`.
pub fn compositions(total: u64, n: usize) -> Vec<Vec<u64>> {
    if n == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, n - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every tactical matrix for the given sizes and lengths, by exhaustive
/// search over rows with the right sum, with columns sorted into the
/// canonical order (within equal lengths, descending). Deduplicated.
pub fn brute_force_tactical(p: &DesignParams, sizes: &[u64], lengths: &[u64]) -> BTreeSet<Vec<Vec<u64>>> {
    let rows = compositions(p.lambda1, lengths.len());
    let m = sizes.len();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; m];
    if rows.is_empty() {
        return out;
    }
    loop {
        let rho: Vec<Vec<u64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        if oracle_is_tactical(p, &rho, sizes, lengths) {
            out.insert(canonical_columns(&rho, lengths));
        }
        let mut k = 0;
        while k < m {
            idx[k] += 1;
            if idx[k] < rows.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == m {
            break;
        }
    }
    out
}

/// Columns ordered by (length descending, column descending).
pub fn canonical_columns(rho: &[Vec<u64>], lengths: &[u64]) -> Vec<Vec<u64>> {
    let m = rho.len();
    let mut cols: Vec<(u64, Vec<u64>)> = (0..lengths.len())
        .map(|j| (lengths[j], (0..m).map(|i| rho[i][j]).collect()))
        .collect();
    cols.sort_by(|a, b| b.cmp(a));
    (0..m)
        .map(|i| cols.iter().map(|(_, c)| c[i]).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Closed forms for the sizes of {Q in Psi_s : dim <P, R, Q> = i}.

/// `(n1, n2, n3)` from the case analysis; `in_sigma` says whether `R != P`
/// and `P + R` lies in orbit `s`.
pub fn lemma_closed_form(
    l: usize,
    r: usize,
    s: usize,
    r_is_p: bool,
    in_sigma: bool,
    size_s: u64,
) -> (u64, u64, u64) {
    let n1 = u64::from(l == r && r == s && r_is_p);
    let n2 = if l != r && r != s && s != l {
        u64::from(in_sigma)
    } else if l == r && r == s {
        if r_is_p {
            size_s - 1
        } else if in_sigma {
            3
        } else {
            2
        }
    } else if l == r {
        if r_is_p {
            size_s
        } else {
            u64::from(in_sigma)
        }
    } else if r == s {
        1 + u64::from(in_sigma)
    } else {
        // l = s != r: P is in orbit s, R is not.
        1 + u64::from(in_sigma)
    };
    (n1, n2, size_s - n1 - n2)
}

// ---------------------------------------------------------------------------
// Designs as bitmasks over the encoded vectors (needs q^v <= 128).

pub struct BlockSets {
    pub q: u32,
    pub v: usize,
    pub blocks: Vec<u128>,
}

pub fn mask(set: &BTreeSet<u32>) -> u128 {
    set.iter().fold(0u128, |m, &x| m | 1u128 << x)
}

impl BlockSets {
    pub fn new(blocks: &[Subspace]) -> Self {
        let spec = blocks[0].spec();
        assert!(spec.q().pow(spec.v() as u32) <= 128, "oracle needs q^v <= 128");
        Self {
            q: spec.q(),
            v: spec.v(),
            blocks: blocks.iter().map(|b| mask(&subspace_set(b))).collect(),
        }
    }

    /// Blocks containing all the given vectors.
    pub fn through(&self, xs: &[u32]) -> u64 {
        let want = xs.iter().fold(0u128, |m, &x| m | 1u128 << x);
        self.blocks.iter().filter(|&&b| b & want == want).count() as u64
    }
}

/// `sum over R in orbit r, S in orbit s` of the number of blocks containing
/// `P`, `R` and `S`, with `P` the first point of orbit `l`.
pub fn brute_force_triple(
    design: &BlockSets,
    orbits: &[Vec<ProjectivePoint>],
    l: usize,
    r: usize,
    s: usize,
) -> u64 {
    let p = point_code(&orbits[l][0], design.q);
    let mut total = 0;
    for rp in &orbits[r] {
        let rc = point_code(rp, design.q);
        for sp in &orbits[s] {
            total += design.through(&[p, rc, point_code(sp, design.q)]);
        }
    }
    total
}

fn is_canonical_point(x: u32, q: u32, v: usize) -> bool {
    decode(x, q, v).iter().find(|&&c| c != 0) == Some(&1)
}

/// Whether a block set is a 2-design with the given parameters: `b` distinct
/// blocks, every point on `lambda1` blocks, every pair of points on `lambda2`.
pub fn oracle_is_design(p: &DesignParams, blocks: &[Subspace]) -> bool {
    if blocks.len() as u64 != p.b || blocks.iter().any(|b| b.dim() != p.k as usize) {
        return false;
    }
    let sets = BlockSets::new(blocks);
    let distinct: HashSet<u128> = sets.blocks.iter().copied().collect();
    if distinct.len() != blocks.len() {
        return false;
    }
    let (q, v) = (p.q, p.v as usize);
    let points: Vec<u32> = (1..q.pow(p.v)).filter(|&x| is_canonical_point(x, q, v)).collect();
    for (i, &x) in points.iter().enumerate() {
        if sets.through(&[x]) != p.lambda1 {
            return false;
        }
        for &y in &points[i + 1..] {
            if sets.through(&[x, y]) != p.lambda2 {
                return false;
            }
        }
    }
    true
}
