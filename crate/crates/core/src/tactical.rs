//! Tactical decomposition matrices and their exhaustive enumeration.
//!
//! A candidate matrix `rho` (points orbits x block orbits) must satisfy
//!
//! * `sum_j rho[i][j] = lambda1` for every row,
//! * `kappa[i][j] = |Psi_i| rho[i][j] / |B_j|` is an integer and every
//!   column of `kappa` sums to `[k 1]_q`,
//! * `sum_j rho[l][j] kappa[r][j] = lambda2 |Psi_r|` for `l != r` and
//!   `lambda1 + lambda2 (|Psi_r| - 1)` for `l = r`.
//!
//! The enumerator builds matrices column by column from the finite alphabet of
//! feasible columns and emits one representative per class under permutation
//! of equal-length columns: inside a run of equal lengths, columns are
//! non-increasing lexicographically.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::SigmaTable;
use crate::params::DesignParams;

/// Lengths `|B_1|, ..., |B_n|` of the block orbits, kept non-increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockOrbitProfile {
    lengths: Vec<u64>,
}

impl BlockOrbitProfile {
    pub fn new(mut lengths: Vec<u64>) -> Self {
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        Self { lengths }
    }

    #[inline]
    pub fn lengths(&self) -> &[u64] {
        &self.lengths
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.lengths.iter().sum()
    }

    /// Maximal runs of equal lengths as `(length, start, end)`.
    fn runs(&self) -> Vec<(u64, usize, usize)> {
        let mut out: Vec<(u64, usize, usize)> = Vec::new();
        for (j, &len) in self.lengths.iter().enumerate() {
            match out.last_mut() {
                Some(run) if run.0 == len => run.2 = j + 1,
                _ => out.push((len, j, j + 1)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProfileOptions {
    /// Only profiles with exactly this many orbits.
    pub orbit_count: Option<usize>,
    /// Only the profile in which every orbit has length `|G|`.
    pub full_length_only: bool,
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    out.reverse();
    out
}

/// All multisets of divisors of the group order summing to `b`.
pub fn candidate_profiles(
    params: &DesignParams,
    group_order: u64,
    opts: ProfileOptions,
) -> Vec<BlockOrbitProfile> {
    let b = params.b;
    if opts.full_length_only {
        if group_order == 0 || !b.is_multiple_of(group_order) {
            return Vec::new();
        }
        let n = (b / group_order) as usize;
        if opts.orbit_count.is_some_and(|c| c != n) {
            return Vec::new();
        }
        return vec![BlockOrbitProfile::new(vec![group_order; n])];
    }

    fn rec(
        divs: &[u64],
        remaining: u64,
        acc: &mut Vec<u64>,
        want: Option<usize>,
        out: &mut Vec<BlockOrbitProfile>,
    ) {
        if remaining == 0 {
            if want.is_none_or(|n| n == acc.len()) {
                out.push(BlockOrbitProfile::new(acc.clone()));
            }
            return;
        }
        if want.is_some_and(|n| acc.len() >= n) {
            return;
        }
        for (i, &d) in divs.iter().enumerate() {
            if d <= remaining {
                acc.push(d);
                rec(&divs[i..], remaining - d, acc, want, out);
                acc.pop();
            }
        }
    }

    let mut out = Vec::new();
    rec(&divisors(group_order), b, &mut Vec::new(), opts.orbit_count, &mut out);
    out
}

/// Profiles that can be assembled from the given `k`-space orbit lengths,
/// each orbit used at most once. Block orbits of a design are `k`-space
/// orbits, so every realizable profile is among these.
pub fn profiles_within(
    params: &DesignParams,
    orbit_lengths: &[u64],
    group_order: u64,
    opts: ProfileOptions,
) -> Vec<BlockOrbitProfile> {
    let mut avail: Vec<(u64, usize)> = Vec::new();
    let mut sorted = orbit_lengths.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    for len in sorted {
        if opts.full_length_only && len != group_order {
            continue;
        }
        match avail.last_mut() {
            Some(last) if last.0 == len => last.1 += 1,
            _ => avail.push((len, 1)),
        }
    }

    fn rec(
        avail: &[(u64, usize)],
        remaining: u64,
        acc: &mut Vec<u64>,
        want: Option<usize>,
        out: &mut Vec<BlockOrbitProfile>,
    ) {
        if remaining == 0 {
            if want.is_none_or(|n| n == acc.len()) {
                out.push(BlockOrbitProfile::new(acc.clone()));
            }
            return;
        }
        let Some((&(len, count), rest)) = avail.split_first() else {
            return;
        };
        let most = count.min((remaining / len) as usize);
        for c in (0..=most).rev() {
            if want.is_some_and(|n| acc.len() + c > n) {
                continue;
            }
            acc.extend(std::iter::repeat_n(len, c));
            rec(rest, remaining - c as u64 * len, acc, want, out);
            acc.truncate(acc.len() - c);
        }
    }

    let mut out = Vec::new();
    rec(&avail, params.b, &mut Vec::new(), opts.orbit_count, &mut out);
    out
}

/// A tactical decomposition matrix pair `[rho]`, `[kappa]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TacticalMatrix {
    rho: Vec<Vec<u64>>,
    kappa: Vec<Vec<u64>>,
    sizes: Vec<u64>,
    lengths: Vec<u64>,
}

impl TacticalMatrix {
    /// Builds the pair from `rho`, deriving `kappa`. Fails on shape errors or
    /// when some `kappa` entry is not an integer.
    pub fn new(rho: Vec<Vec<u64>>, sizes: Vec<u64>, lengths: Vec<u64>) -> Result<Self> {
        check_shape(&rho, &sizes, &lengths)?;
        let mut kappa = vec![vec![0u64; lengths.len()]; sizes.len()];
        for (i, row) in rho.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let num = sizes[i]
                    .checked_mul(x)
                    .ok_or(Error::Overflow("kappa"))?;
                if num % lengths[j] != 0 {
                    return Err(Error::MalformedMatrix(format!(
                        "kappa[{i}][{j}] = {num}/{} is not an integer",
                        lengths[j]
                    )));
                }
                kappa[i][j] = num / lengths[j];
            }
        }
        Ok(Self {
            rho,
            kappa,
            sizes,
            lengths,
        })
    }

    #[inline]
    pub fn rho(&self) -> &[Vec<u64>] {
        &self.rho
    }

    #[inline]
    pub fn kappa(&self) -> &[Vec<u64>] {
        &self.kappa
    }

    /// Point orbit sizes `|Psi_i|`.
    #[inline]
    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Block orbit length of each column.
    #[inline]
    pub fn lengths(&self) -> &[u64] {
        &self.lengths
    }

    pub fn profile(&self) -> BlockOrbitProfile {
        BlockOrbitProfile::new(self.lengths.clone())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rho.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.lengths.len()
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        self.rho.iter().map(|row| row[j]).collect()
    }

    /// Columns sorted by length (descending), then lexicographically
    /// descending. Two matrices related by a permutation of equal-length
    /// columns have the same canonical form.
    pub fn canonical(&self) -> TacticalMatrix {
        let mut order: Vec<usize> = (0..self.cols()).collect();
        order.sort_by(|&a, &b| {
            self.lengths[b]
                .cmp(&self.lengths[a])
                .then_with(|| self.column(b).cmp(&self.column(a)))
        });
        let permute = |m: &[Vec<u64>]| -> Vec<Vec<u64>> {
            m.iter()
                .map(|row| order.iter().map(|&j| row[j]).collect())
                .collect()
        };
        TacticalMatrix {
            rho: permute(&self.rho),
            kappa: permute(&self.kappa),
            sizes: self.sizes.clone(),
            lengths: order.iter().map(|&j| self.lengths[j]).collect(),
        }
    }

    /// Reorders rows so that new row `i` is old row `perm[i]`; point orbit
    /// sizes follow the rows.
    pub fn permute_rows(&self, perm: &[usize]) -> TacticalMatrix {
        TacticalMatrix {
            rho: perm.iter().map(|&i| self.rho[i].clone()).collect(),
            kappa: perm.iter().map(|&i| self.kappa[i].clone()).collect(),
            sizes: perm.iter().map(|&i| self.sizes[i]).collect(),
            lengths: self.lengths.clone(),
        }
    }

    /// Column-major comparison key, used to pick class representatives.
    fn column_key(&self) -> Vec<u64> {
        (0..self.cols())
            .flat_map(|j| self.rho.iter().map(move |row| row[j]))
            .collect()
    }

    /// Whether the two matrices agree up to a permutation of rows and of
    /// equal-length columns. Exponential in the number of rows; meant for
    /// comparisons against small reference matrices.
    pub fn equivalent_up_to_rows_and_columns(&self, other: &TacticalMatrix) -> bool {
        if self.rows() != other.rows() || self.profile() != other.profile() {
            return false;
        }
        let target = other.canonical();
        let mut perm = Vec::with_capacity(self.rows());
        let mut used = vec![false; self.rows()];
        fn rec(
            a: &TacticalMatrix,
            target: &TacticalMatrix,
            perm: &mut Vec<usize>,
            used: &mut [bool],
        ) -> bool {
            let i = perm.len();
            if i == a.rows() {
                return a.permute_rows(perm).canonical().rho == target.rho;
            }
            for k in 0..a.rows() {
                if used[k] || a.sizes[k] != target.sizes[i] {
                    continue;
                }
                // Row multisets must agree for the assignment to be possible.
                let mut x = a.rho[k].clone();
                let mut y = target.rho[i].clone();
                x.sort_unstable();
                y.sort_unstable();
                if x != y {
                    continue;
                }
                used[k] = true;
                perm.push(k);
                if rec(a, target, perm, used) {
                    return true;
                }
                perm.pop();
                used[k] = false;
            }
            false
        }
        rec(self, &target, &mut perm, &mut used)
    }
}

impl fmt::Display for TacticalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rho {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

fn check_shape(rho: &[Vec<u64>], sizes: &[u64], lengths: &[u64]) -> Result<()> {
    if rho.len() != sizes.len() {
        return Err(Error::MalformedMatrix(format!(
            "{} rows but {} point orbits",
            rho.len(),
            sizes.len()
        )));
    }
    if let Some((i, row)) = rho.iter().enumerate().find(|(_, r)| r.len() != lengths.len()) {
        return Err(Error::MalformedMatrix(format!(
            "row {i} has {} entries, expected {}",
            row.len(),
            lengths.len()
        )));
    }
    if sizes.contains(&0) || lengths.contains(&0) {
        return Err(Error::MalformedMatrix("orbit sizes must be positive".into()));
    }
    Ok(())
}

/// One violated constraint; indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RowSum { row: usize, expected: u64, actual: u64 },
    ColumnSum { col: usize, expected: u64, actual: u64 },
    /// `|Psi_i| rho_ij` is not divisible by `|B_j|`.
    Duality { row: usize, col: usize, lhs: u64, length: u64 },
    Quadratic { l: usize, r: usize, expected: u64, actual: u64 },
    PointCount { expected: u64, actual: u64 },
    BlockCount { expected: u64, actual: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::RowSum { row, expected, actual } => {
                write!(f, "row {}: sum of rho is {actual}, expected {expected}", row + 1)
            }
            Violation::ColumnSum { col, expected, actual } => {
                write!(f, "column {}: sum of kappa is {actual}, expected {expected}", col + 1)
            }
            Violation::Duality { row, col, lhs, length } => write!(
                f,
                "entry ({}, {}): |Psi| rho = {lhs} is not divisible by |B| = {length}",
                row + 1,
                col + 1
            ),
            Violation::Quadratic { l, r, expected, actual } => write!(
                f,
                "rows ({}, {}): sum rho_l kappa_r is {actual}, expected {expected}",
                l + 1,
                r + 1
            ),
            Violation::PointCount { expected, actual } => {
                write!(f, "point orbit sizes sum to {actual}, expected {expected}")
            }
            Violation::BlockCount { expected, actual } => {
                write!(f, "block orbit lengths sum to {actual}, expected {expected}")
            }
        }
    }
}

fn quadratic_target(params: &DesignParams, sizes: &[u64], l: usize, r: usize) -> Result<u64> {
    let base = params
        .lambda2
        .checked_mul(sizes[r])
        .ok_or(Error::Overflow("quadratic target"))?;
    Ok(if l == r {
        base - params.lambda2 + params.lambda1
    } else {
        base
    })
}

/// Checks an arbitrary `rho` against all equations, reporting every
/// violation. Shape errors are reported as [`Error::MalformedMatrix`].
pub fn check_raw(
    params: &DesignParams,
    rho: &[Vec<u64>],
    sizes: &[u64],
    lengths: &[u64],
) -> Result<Vec<Violation>> {
    check_shape(rho, sizes, lengths)?;
    let (m, n) = (sizes.len(), lengths.len());
    let mut out = Vec::new();

    let points: u64 = sizes.iter().sum();
    if points != params.point_count() {
        out.push(Violation::PointCount {
            expected: params.point_count(),
            actual: points,
        });
    }
    let blocks: u64 = lengths.iter().sum();
    if blocks != params.b {
        out.push(Violation::BlockCount {
            expected: params.b,
            actual: blocks,
        });
    }

    for (i, row) in rho.iter().enumerate() {
        let sum: u64 = row.iter().sum();
        if sum != params.lambda1 {
            out.push(Violation::RowSum {
                row: i,
                expected: params.lambda1,
                actual: sum,
            });
        }
    }

    // kappa as exact values; a non-integral entry poisons its column.
    let mut kappa = vec![vec![0u64; n]; m];
    let mut integral = vec![true; n];
    for i in 0..m {
        for j in 0..n {
            let lhs = sizes[i].checked_mul(rho[i][j]).ok_or(Error::Overflow("kappa"))?;
            if lhs % lengths[j] != 0 {
                out.push(Violation::Duality {
                    row: i,
                    col: j,
                    lhs,
                    length: lengths[j],
                });
                integral[j] = false;
            } else {
                kappa[i][j] = lhs / lengths[j];
            }
        }
    }
    let per_block = params.points_per_block();
    for j in (0..n).filter(|&j| integral[j]) {
        let sum: u64 = (0..m).map(|i| kappa[i][j]).sum();
        if sum != per_block {
            out.push(Violation::ColumnSum {
                col: j,
                expected: per_block,
                actual: sum,
            });
        }
    }
    if integral.iter().all(|&x| x) {
        for l in 0..m {
            for r in 0..m {
                let mut actual = 0u64;
                for j in 0..n {
                    actual = rho[l][j]
                        .checked_mul(kappa[r][j])
                        .and_then(|x| x.checked_add(actual))
                        .ok_or(Error::Overflow("quadratic sum"))?;
                }
                let expected = quadratic_target(params, sizes, l, r)?;
                if actual != expected {
                    out.push(Violation::Quadratic {
                        l,
                        r,
                        expected,
                        actual,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// All violated equations of a tactical matrix; empty iff it satisfies them.
pub fn check_equations(params: &DesignParams, matrix: &TacticalMatrix) -> Result<Vec<Violation>> {
    check_raw(params, &matrix.rho, &matrix.sizes, &matrix.lengths)
}

/// Knobs for [`enumerate_rho_with`].
#[derive(Debug, Clone, Default)]
pub struct EnumOptions {
    /// Worker threads; 0 or 1 runs on the calling thread.
    pub jobs: usize,
    /// Row permutations (a group) under which matrices are also identified.
    /// `None` keeps rows fixed.
    pub row_perms: Option<Vec<Vec<usize>>>,
}

/// Search counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub pruned_row_sum: u64,
    pub pruned_quadratic: u64,
    pub pruned_capacity: u64,
    pub solutions: u64,
    pub row_duplicates: u64,
}

impl SearchStats {
    fn merge(&mut self, o: &SearchStats) {
        self.nodes += o.nodes;
        self.pruned_row_sum += o.pruned_row_sum;
        self.pruned_quadratic += o.pruned_quadratic;
        self.pruned_capacity += o.pruned_capacity;
        self.solutions += o.solutions;
        self.row_duplicates += o.row_duplicates;
    }
}

/// Feasible columns for one run of equal block-orbit lengths, with suffix
/// extrema used for capacity pruning.
struct Alphabet {
    rho: Vec<Vec<u64>>,
    /// `prod[a][l * m + r] = rho_l kappa_r` of entry `a`.
    prod: Vec<Vec<u64>>,
    /// Suffix max / min over entries `a..` of rho (per row) and of prod.
    max_rho: Vec<Vec<u64>>,
    min_rho: Vec<Vec<u64>>,
    max_prod: Vec<Vec<u64>>,
    min_prod: Vec<Vec<u64>>,
}

impl Alphabet {
    fn build(params: &DesignParams, sizes: &[u64], length: u64) -> Self {
        let m = sizes.len();
        let target = params.points_per_block();
        let mut cols = Vec::new();
        let mut cur = vec![0u64; m];
        fn rec(
            i: usize,
            remaining: u64,
            sizes: &[u64],
            length: u64,
            lambda1: u64,
            cur: &mut Vec<u64>,
            out: &mut Vec<Vec<u64>>,
        ) {
            if i == sizes.len() {
                if remaining == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            // rho is at most the orbit length and at most lambda1.
            for x in 0..=length.min(lambda1) {
                let num = sizes[i] * x;
                if !num.is_multiple_of(length) {
                    continue;
                }
                let kappa = num / length;
                if kappa > remaining {
                    break;
                }
                cur[i] = x;
                rec(i + 1, remaining - kappa, sizes, length, lambda1, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, target, sizes, length, params.lambda1, &mut cur, &mut cols);
        cols.sort_unstable_by(|a, b| b.cmp(a));

        let prod: Vec<Vec<u64>> = cols
            .iter()
            .map(|c| {
                let kappa: Vec<u64> = (0..m).map(|i| sizes[i] * c[i] / length).collect();
                (0..m * m).map(|k| c[k / m] * kappa[k % m]).collect()
            })
            .collect();

        let suffix = |vals: &Vec<Vec<u64>>, width: usize, pick: fn(u64, u64) -> u64, init: u64| {
            let mut out = vec![vec![init; width]; vals.len() + 1];
            for a in (0..vals.len()).rev() {
                for t in 0..width {
                    out[a][t] = pick(out[a + 1][t], vals[a][t]);
                }
            }
            out
        };
        let max_rho = suffix(&cols, m, u64::max, 0);
        let min_rho = suffix(&cols, m, u64::min, u64::MAX);
        let max_prod = suffix(&prod, m * m, u64::max, 0);
        let min_prod = suffix(&prod, m * m, u64::min, u64::MAX);
        Self {
            rho: cols,
            prod,
            max_rho,
            min_rho,
            max_prod,
            min_prod,
        }
    }

    fn len(&self) -> usize {
        self.rho.len()
    }
}

struct Search<'a> {
    m: usize,
    n: usize,
    lambda1: u64,
    targets: Vec<u64>,
    /// Run index of each column, and whether the column starts its run.
    run_of: Vec<usize>,
    run_start: Vec<bool>,
    /// Columns remaining in the run after column `j`.
    rem_in_run: Vec<u64>,
    alphabets: &'a [Alphabet],
    /// Capacity contributed by all runs after run `g`: per row max/min rho,
    /// per pair max/min prod.
    tail_max_rho: Vec<Vec<u64>>,
    tail_min_rho: Vec<Vec<u64>>,
    tail_max_prod: Vec<Vec<u64>>,
    tail_min_prod: Vec<Vec<u64>>,
}

struct State {
    row: Vec<u64>,
    quad: Vec<u64>,
    chosen: Vec<usize>,
    stats: SearchStats,
    found: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(
        params: &DesignParams,
        sizes: &[u64],
        profile: &BlockOrbitProfile,
        alphabets: &'a [Alphabet],
    ) -> Result<Self> {
        let m = sizes.len();
        let n = profile.len();
        let runs = profile.runs();
        let mut targets = vec![0u64; m * m];
        for l in 0..m {
            for r in 0..m {
                targets[l * m + r] = quadratic_target(params, sizes, l, r)?;
            }
        }
        let mut run_of = vec![0; n];
        let mut run_start = vec![false; n];
        let mut rem_in_run = vec![0; n];
        for (g, &(_, start, end)) in runs.iter().enumerate() {
            for j in start..end {
                run_of[j] = g;
                run_start[j] = j == start;
                rem_in_run[j] = (end - j - 1) as u64;
            }
        }
        let sat = |x: u64, c: u64| x.saturating_mul(c);
        let g_count = runs.len();
        let mut tail_max_rho = vec![vec![0u64; m]; g_count];
        let mut tail_min_rho = vec![vec![0u64; m]; g_count];
        let mut tail_max_prod = vec![vec![0u64; m * m]; g_count];
        let mut tail_min_prod = vec![vec![0u64; m * m]; g_count];
        for g in (0..g_count).rev() {
            if g + 1 < g_count {
                let h = g + 1;
                let c = (runs[h].2 - runs[h].1) as u64;
                let a = &alphabets[h];
                for i in 0..m {
                    tail_max_rho[g][i] = tail_max_rho[h][i].saturating_add(sat(a.max_rho[0][i], c));
                    tail_min_rho[g][i] = tail_min_rho[h][i].saturating_add(sat(a.min_rho[0][i], c));
                }
                for t in 0..m * m {
                    tail_max_prod[g][t] =
                        tail_max_prod[h][t].saturating_add(sat(a.max_prod[0][t], c));
                    tail_min_prod[g][t] =
                        tail_min_prod[h][t].saturating_add(sat(a.min_prod[0][t], c));
                }
            }
        }
        Ok(Self {
            m,
            n,
            lambda1: params.lambda1,
            targets,
            run_of,
            run_start,
            rem_in_run,
            alphabets,
            tail_max_rho,
            tail_min_rho,
            tail_max_prod,
            tail_min_prod,
        })
    }

    fn first_choices(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.alphabets[0].len()
        }
    }

    fn new_state(&self) -> State {
        State {
            row: vec![0; self.m],
            quad: vec![0; self.m * self.m],
            chosen: Vec::with_capacity(self.n),
            stats: SearchStats::default(),
            found: Vec::new(),
        }
    }

    /// Places alphabet entry `a` in column `j`; returns false (and leaves the
    /// state untouched) if a constraint prunes it.
    fn place(&self, st: &mut State, j: usize, a: usize) -> bool {
        let m = self.m;
        let g = self.run_of[j];
        let alpha = &self.alphabets[g];
        let col = &alpha.rho[a];
        let prod = &alpha.prod[a];
        st.stats.nodes += 1;

        if (0..m).any(|i| st.row[i] + col[i] > self.lambda1) {
            st.stats.pruned_row_sum += 1;
            return false;
        }
        if (0..m * m).any(|t| st.quad[t] + prod[t] > self.targets[t]) {
            st.stats.pruned_quadratic += 1;
            return false;
        }
        // Remaining columns: the rest of this run draws from entries a.. of
        // this alphabet; later runs from their whole alphabets.
        let rem = self.rem_in_run[j];
        let row_ok = (0..m).all(|i| {
            let have = st.row[i] + col[i];
            let need = self.lambda1 - have;
            let hi = alpha.max_rho[a][i]
                .saturating_mul(rem)
                .saturating_add(self.tail_max_rho[g][i]);
            let lo = if rem == 0 { 0 } else { alpha.min_rho[a][i].saturating_mul(rem) }
                .saturating_add(self.tail_min_rho[g][i]);
            lo <= need && need <= hi
        });
        let quad_ok = row_ok
            && (0..m * m).all(|t| {
                let need = self.targets[t] - st.quad[t] - prod[t];
                let hi = alpha.max_prod[a][t]
                    .saturating_mul(rem)
                    .saturating_add(self.tail_max_prod[g][t]);
                let lo = if rem == 0 { 0 } else { alpha.min_prod[a][t].saturating_mul(rem) }
                    .saturating_add(self.tail_min_prod[g][t]);
                lo <= need && need <= hi
            });
        if !quad_ok {
            st.stats.pruned_capacity += 1;
            return false;
        }
        for i in 0..m {
            st.row[i] += col[i];
        }
        for t in 0..m * m {
            st.quad[t] += prod[t];
        }
        st.chosen.push(a);
        true
    }

    fn unplace(&self, st: &mut State, j: usize) {
        let a = st.chosen.pop().expect("placed column");
        let alpha = &self.alphabets[self.run_of[j]];
        for i in 0..self.m {
            st.row[i] -= alpha.rho[a][i];
        }
        for t in 0..self.m * self.m {
            st.quad[t] -= alpha.prod[a][t];
        }
    }

    fn dfs(&self, st: &mut State, j: usize) {
        if j == self.n {
            debug_assert!(st.row.iter().all(|&x| x == self.lambda1));
            debug_assert_eq!(st.quad, self.targets);
            st.stats.solutions += 1;
            st.found.push(st.chosen.clone());
            return;
        }
        let start = if self.run_start[j] { 0 } else { st.chosen[j - 1] };
        for a in start..self.alphabets[self.run_of[j]].len() {
            if self.place(st, j, a) {
                self.dfs(st, j + 1);
                self.unplace(st, j);
            }
        }
    }

    fn run_from(&self, first: usize) -> State {
        let mut st = self.new_state();
        if self.place(&mut st, 0, first) {
            self.dfs(&mut st, 1);
        }
        st
    }
}

/// Enumerates all tactical matrices for the given point orbit sizes and
/// block orbit profile, one per class of equal-length column permutations.
pub fn enumerate_rho(
    params: &DesignParams,
    sizes: &[u64],
    profile: &BlockOrbitProfile,
) -> Result<Vec<TacticalMatrix>> {
    Ok(enumerate_rho_with(params, sizes, profile, &EnumOptions::default())?.0)
}

pub fn enumerate_rho_with(
    params: &DesignParams,
    sizes: &[u64],
    profile: &BlockOrbitProfile,
    opts: &EnumOptions,
) -> Result<(Vec<TacticalMatrix>, SearchStats)> {
    let points: u64 = sizes.iter().sum();
    if points != params.point_count() || sizes.contains(&0) {
        return Err(Error::InvalidParams(format!(
            "point orbit sizes sum to {points}, expected {}",
            params.point_count()
        )));
    }
    if profile.total() != params.b || profile.lengths().contains(&0) {
        return Err(Error::InvalidParams(format!(
            "block orbit lengths sum to {}, expected {}",
            profile.total(),
            params.b
        )));
    }
    let runs = profile.runs();
    let alphabets: Vec<Alphabet> = runs
        .iter()
        .map(|&(len, _, _)| Alphabet::build(params, sizes, len))
        .collect();
    let search = Search::new(params, sizes, profile, &alphabets)?;

    let mut stats = SearchStats::default();
    let mut found: Vec<Vec<usize>> = Vec::new();
    if search.n == 0 {
        // Unreachable for admissible parameters (b >= 1).
        return Ok((Vec::new(), stats));
    }
    let firsts = search.first_choices();
    let states: Vec<State> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..firsts)
                .into_par_iter()
                .map(|a| search.run_from(a))
                .collect()
        })
    } else {
        (0..firsts).map(|a| search.run_from(a)).collect()
    };
    for st in states {
        stats.merge(&st.stats);
        found.extend(st.found);
    }

    let lengths = profile.lengths().to_vec();
    let mut out = Vec::with_capacity(found.len());
    for choice in found {
        let mut rho = vec![vec![0u64; search.n]; search.m];
        for (j, &a) in choice.iter().enumerate() {
            let col = &alphabets[search.run_of[j]].rho[a];
            for i in 0..search.m {
                rho[i][j] = col[i];
            }
        }
        out.push(TacticalMatrix::new(rho, sizes.to_vec(), lengths.clone())?);
    }

    if let Some(perms) = &opts.row_perms {
        let before = out.len();
        out.retain(|mat| is_row_class_representative(mat, perms));
        stats.row_duplicates = (before - out.len()) as u64;
    }
    Ok((out, stats))
}

/// Whether `mat` (in canonical column form) is the lexicographically largest
/// member of its class under the given row permutations.
pub fn is_row_class_representative(mat: &TacticalMatrix, perms: &[Vec<usize>]) -> bool {
    let key = mat.column_key();
    perms.iter().all(|p| {
        mat.permute_rows(p).canonical().column_key().cmp(&key) != Ordering::Greater
    })
}

/// Distinct canonical matrices obtained from `mat` by the given row
/// permutations, in sorted order.
pub fn row_variants(mat: &TacticalMatrix, perms: &[Vec<usize>]) -> Vec<TacticalMatrix> {
    let mut out: Vec<TacticalMatrix> = perms
        .iter()
        .map(|p| mat.permute_rows(p).canonical())
        .collect();
    out.push(mat.canonical());
    out.sort_by(|a, b| b.column_key().cmp(&a.column_key()));
    out.dedup();
    out
}

/// Permutations of the point orbits preserving their sizes and, if given, the
/// sigma table. Fails if there are more than `cap` of them.
pub fn row_symmetries(
    sizes: &[u64],
    sigma: Option<&SigmaTable>,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let m = sizes.len();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = Vec::with_capacity(m);
    let mut used = vec![false; m];

    fn consistent(perm: &[usize], sigma: Option<&SigmaTable>) -> bool {
        let Some(sigma) = sigma else { return true };
        let i = perm.len() - 1;
        // Check every triple involving the newly assigned index.
        for a in 0..=i {
            for b in 0..=i {
                if a != i && b != i {
                    continue;
                }
                for c in 0..=i {
                    let triples = [(a, b, c), (a, c, b), (c, a, b)];
                    for (x, y, z) in triples {
                        if sigma.get(x, y, z) != sigma.get(perm[x], perm[y], perm[z]) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn rec(
        sizes: &[u64],
        sigma: Option<&SigmaTable>,
        cap: usize,
        perm: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) -> bool {
        let i = perm.len();
        if i == sizes.len() {
            out.push(perm.clone());
            return out.len() <= cap;
        }
        for k in 0..sizes.len() {
            if used[k] || sizes[k] != sizes[i] {
                continue;
            }
            perm.push(k);
            used[k] = true;
            if consistent(perm, sigma) && !rec(sizes, sigma, cap, perm, used, out) {
                return false;
            }
            used[k] = false;
            perm.pop();
        }
        true
    }

    if !rec(sizes, sigma, cap, &mut perm, &mut used, &mut out) {
        return Err(Error::EnumerationLimit {
            count: out.len() as u128,
            limit: cap as u128,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> DesignParams {
        DesignParams::derive(4, 3, 3, 2).unwrap()
    }

    fn hyperplane_matrix() -> Vec<Vec<u64>> {
        (0..5)
            .map(|i| (0..5).map(|j| if i == j { 3 } else { 1 }).collect())
            .collect()
    }

    #[test]
    fn profiles() {
        let p = ex1();
        let full = candidate_profiles(
            &p,
            3,
            ProfileOptions {
                full_length_only: true,
                ..Default::default()
            },
        );
        assert_eq!(full, vec![BlockOrbitProfile::new(vec![3; 5])]);
        let all = candidate_profiles(&p, 3, ProfileOptions::default());
        // 15 = 3a + c for a = 0..=5.
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].lengths(), &[3, 3, 3, 3, 3]);
        assert!(all.iter().all(|pr| pr.total() == 15));
        let fixed = candidate_profiles(
            &p,
            3,
            ProfileOptions {
                orbit_count: Some(7),
                full_length_only: false,
            },
        );
        assert_eq!(fixed, vec![BlockOrbitProfile::new(vec![3, 3, 3, 3, 1, 1, 1])]);

        let p2 = DesignParams::derive(6, 3, 6, 2).unwrap();
        let full = candidate_profiles(
            &p2,
            31,
            ProfileOptions {
                full_length_only: true,
                ..Default::default()
            },
        );
        assert_eq!(full, vec![BlockOrbitProfile::new(vec![31; 18])]);
    }

    #[test]
    fn trivial_decomposition() {
        let p = ex1();
        let mats = enumerate_rho(&p, &[15], &BlockOrbitProfile::new(vec![15])).unwrap();
        assert_eq!(mats.len(), 1);
        assert_eq!(mats[0].rho(), &[vec![7]]);
        assert_eq!(mats[0].kappa(), &[vec![7]]);
    }

    #[test]
    fn check_equations_accepts_and_flags() {
        let p = ex1();
        let m = TacticalMatrix::new(hyperplane_matrix(), vec![3; 5], vec![3; 5]).unwrap();
        assert!(check_equations(&p, &m).unwrap().is_empty());

        let mut bad = hyperplane_matrix();
        bad[0][0] = 2;
        let m = TacticalMatrix::new(bad, vec![3; 5], vec![3; 5]).unwrap();
        let v = check_equations(&p, &m).unwrap();
        assert!(v.contains(&Violation::RowSum {
            row: 0,
            expected: 7,
            actual: 6
        }));
        assert!(v.iter().any(|x| matches!(x, Violation::ColumnSum { col: 0, .. })));
    }

    #[test]
    fn check_raw_reports_non_integral_kappa() {
        let p = ex1();
        let v = check_raw(&p, &[vec![7]], &[15], &[14]).unwrap();
        assert!(v.contains(&Violation::Duality {
            row: 0,
            col: 0,
            lhs: 105,
            length: 14
        }));
        assert!(v.contains(&Violation::BlockCount {
            expected: 15,
            actual: 14
        }));
        assert!(check_raw(&p, &[vec![7, 1]], &[15], &[15]).is_err());
    }

    #[test]
    fn profiles_within_available_orbits() {
        let p = ex1();
        // Five orbits of length 3 only admit one profile.
        let got = profiles_within(&p, &[3; 5], 3, ProfileOptions::default());
        assert_eq!(got, vec![BlockOrbitProfile::new(vec![3; 5])]);
        // Two fixed blocks and six orbits of length 3 (one left over).
        let got = profiles_within(&p, &[1, 3, 3, 3, 3, 3, 3, 1], 3, ProfileOptions::default());
        assert_eq!(got, vec![BlockOrbitProfile::new(vec![3; 5])]);
        let got = profiles_within(&p, &[1, 1, 1, 3, 3, 3, 3, 3, 3], 3, ProfileOptions::default());
        assert_eq!(
            got,
            vec![
                BlockOrbitProfile::new(vec![3; 5]),
                BlockOrbitProfile::new(vec![3, 3, 3, 3, 1, 1, 1]),
            ]
        );
        let only = ProfileOptions { orbit_count: Some(7), full_length_only: false };
        assert_eq!(profiles_within(&p, &[1, 1, 1, 3, 3, 3, 3, 3, 3], 3, only).len(), 1);
        let full = ProfileOptions { orbit_count: None, full_length_only: true };
        assert!(profiles_within(&p, &[1, 1, 1, 3, 3, 3, 3], 3, full).is_empty());
    }

    #[test]
    fn canonical_sorts_equal_length_columns_only() {
        let m = TacticalMatrix::new(
            vec![vec![1, 2, 0], vec![0, 1, 3]],
            vec![2, 2],
            vec![1, 2, 2],
        )
        .unwrap();
        let c = m.canonical();
        assert_eq!(c.lengths(), &[2, 2, 1]);
        assert_eq!(c.rho(), &[vec![2, 0, 1], vec![1, 3, 0]]);
    }

    #[test]
    fn rejects_bad_preconditions() {
        let p = ex1();
        assert!(enumerate_rho(&p, &[14], &BlockOrbitProfile::new(vec![15])).is_err());
        assert!(enumerate_rho(&p, &[15], &BlockOrbitProfile::new(vec![14])).is_err());
    }

    #[test]
    fn row_symmetries_respect_sizes() {
        let perms = row_symmetries(&[1, 2, 2, 1], None, 100).unwrap();
        assert_eq!(perms.len(), 4);
        assert!(row_symmetries(&[1; 6], None, 100).is_err());
    }

    #[test]
    fn equivalence_up_to_rows_and_columns() {
        let a = TacticalMatrix::new(hyperplane_matrix(), vec![3; 5], vec![3; 5]).unwrap();
        let b = a.permute_rows(&[4, 2, 0, 1, 3]);
        assert!(a.equivalent_up_to_rows_and_columns(&b));
        let m2 = vec![
            vec![3, 1, 1, 1, 1],
            vec![1, 2, 2, 2, 0],
            vec![1, 2, 2, 0, 2],
            vec![1, 2, 0, 2, 2],
            vec![1, 0, 2, 2, 2],
        ];
        let c = TacticalMatrix::new(m2, vec![3; 5], vec![3; 5]).unwrap();
        assert!(!a.equivalent_up_to_rows_and_columns(&c));
    }
}
