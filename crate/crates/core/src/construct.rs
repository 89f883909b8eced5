//! Construction of designs with a prescribed group by orbit selection
//! (Kramer-Mesner), optionally guided by a tactical matrix, and brute-force
//! verification of designs.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{enumerate_points, enumerate_subspaces, BinarySubspace, ProjectivePoint, Subspace};
use crate::group::{subspace_orbits, MatrixGroup, PointOrbitPartition, SubspaceOrbit, SubspaceOrbitPartition};
use crate::params::DesignParams;
use crate::tactical::TacticalMatrix;

/// Orbit incidence matrix between 2-space orbits (rows) and k-space orbits
/// (columns): `a[t][c]` counts the k-spaces of orbit `c` containing the
/// representative of 2-space orbit `t`.
#[derive(Debug, Clone)]
pub struct KramerMesnerSystem {
    pub two_orbits: SubspaceOrbitPartition,
    pub block_orbits: SubspaceOrbitPartition,
    pub a: Vec<Vec<u32>>,
    pub target: u64,
}

/// Containment test that uses packed words over `GF(2)`.
enum Container {
    Binary(BinarySubspace),
    General(Subspace),
}

impl Container {
    fn new(s: &Subspace) -> Self {
        if s.spec().is_binary() && s.spec().v() <= 64 {
            Container::Binary(BinarySubspace::new(s))
        } else {
            Container::General(s.clone())
        }
    }

    fn contains(&self, other: &Contained) -> bool {
        match (self, other) {
            (Container::Binary(a), Contained::Binary(b)) => a.contains(b),
            (Container::General(a), Contained::General(b)) => {
                a.contains_subspace(b).expect("same ambient space")
            }
            _ => unreachable!("mixed representations"),
        }
    }
}

enum Contained {
    Binary(BinarySubspace),
    General(Subspace),
}

impl Contained {
    fn subspace(s: &Subspace) -> Self {
        if s.spec().is_binary() && s.spec().v() <= 64 {
            Contained::Binary(BinarySubspace::new(s))
        } else {
            Contained::General(s.clone())
        }
    }

    fn point(p: &ProjectivePoint, s: &Subspace) -> Self {
        if s.spec().is_binary() && s.spec().v() <= 64 {
            Contained::Binary(BinarySubspace::from_point(p))
        } else {
            Contained::General(p.as_subspace(s.spec()))
        }
    }
}

pub fn build_km_system(
    group: &MatrixGroup,
    params: &DesignParams,
    limit: u128,
) -> Result<KramerMesnerSystem> {
    check_group_params(group, params)?;
    let two_orbits = subspace_orbits(group, 2, limit)?;
    let block_orbits = subspace_orbits(group, params.k as usize, limit)?;
    let reps: Vec<Contained> = two_orbits
        .orbits()
        .iter()
        .map(|o| Contained::subspace(o.representative()))
        .collect();
    let columns: Vec<Vec<u32>> = block_orbits
        .orbits()
        .par_iter()
        .map(|orbit| {
            let mut col = vec![0u32; reps.len()];
            for member in orbit.members() {
                let c = Container::new(member);
                for (t, rep) in reps.iter().enumerate() {
                    if c.contains(rep) {
                        col[t] += 1;
                    }
                }
            }
            col
        })
        .collect();
    let a = (0..reps.len())
        .map(|t| columns.iter().map(|col| col[t]).collect())
        .collect();
    Ok(KramerMesnerSystem {
        two_orbits,
        block_orbits,
        a,
        target: params.lambda2,
    })
}

fn check_group_params(group: &MatrixGroup, params: &DesignParams) -> Result<()> {
    let spec = group.spec();
    if spec.q() != params.q || spec.v() != params.v as usize {
        return Err(Error::SpaceMismatch {
            q1: spec.q(),
            v1: spec.v(),
            q2: params.q,
            v2: params.v as usize,
        });
    }
    Ok(())
}

/// Entry `i` is the number of blocks of the orbit containing the
/// representative of point orbit `i`.
pub fn orbit_rho_column(points: &PointOrbitPartition, orbit: &SubspaceOrbit) -> Vec<u64> {
    let containers: Vec<Container> = orbit.members().iter().map(Container::new).collect();
    points
        .representatives()
        .iter()
        .map(|p| {
            let x = Contained::point(p, orbit.representative());
            containers.iter().filter(|c| c.contains(&x)).count() as u64
        })
        .collect()
}

/// A design: a set of k-spaces, with the k-orbits it was assembled from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignInstance {
    pub params: DesignParams,
    pub blocks: Vec<Subspace>,
    pub selected_orbits: Vec<usize>,
}

impl DesignInstance {
    /// Sorts the blocks; `selected_orbits` may be empty for designs read from files.
    pub fn new(params: DesignParams, mut blocks: Vec<Subspace>, selected_orbits: Vec<usize>) -> Self {
        blocks.sort();
        Self {
            params,
            blocks,
            selected_orbits,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConstructOptions {
    /// Stop after this many designs (per first-level branch when parallel;
    /// the merged list is truncated to the same bound).
    pub limit: Option<usize>,
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConstructStats {
    /// k-orbits left after discarding those whose rho column is not wanted.
    pub eligible_orbits: usize,
    pub nodes: u64,
    pub dead_ends: u64,
    pub solutions: u64,
}

struct Selector<'a> {
    a: &'a [Vec<u32>],
    target: u64,
    eligible: Vec<usize>,
    /// Column type of each k-orbit (index into `type_counts`), if guided.
    kind: Vec<Option<usize>>,
    type_counts: Vec<u32>,
    /// Nonzero rows of each k-orbit column.
    support: Vec<Vec<(usize, u32)>>,
}

#[derive(Clone)]
struct SelState {
    sums: Vec<u64>,
    remaining: Vec<u32>,
    /// 0 = open, 1 = taken, 2 = excluded
    status: Vec<u8>,
    taken: Vec<usize>,
    found: Vec<Vec<usize>>,
    stats: ConstructStats,
}

enum Pick {
    Done,
    Dead,
    Branch(Vec<usize>),
}

impl<'a> Selector<'a> {
    fn open(&self, st: &SelState, c: usize) -> bool {
        st.status[c] == 0 && self.kind[c].is_none_or(|k| st.remaining[k] > 0)
    }

    fn fits(&self, st: &SelState, c: usize) -> bool {
        self.support[c]
            .iter()
            .all(|&(t, x)| st.sums[t] + x as u64 <= self.target)
    }

    /// Row with a deficit and the fewest compatible orbits.
    fn pick(&self, st: &SelState) -> Pick {
        let rows = self.a.len();
        let mut best: Option<Vec<usize>> = None;
        for t in 0..rows {
            let deficit = self.target - st.sums[t];
            if deficit == 0 {
                continue;
            }
            let mut cands = Vec::new();
            let mut capacity = 0u64;
            for &c in &self.eligible {
                let x = self.a[t][c];
                if x == 0 || !self.open(st, c) || !self.fits(st, c) {
                    continue;
                }
                cands.push(c);
                capacity += x as u64;
            }
            if capacity < deficit {
                return Pick::Dead;
            }
            if best.as_ref().is_none_or(|b| cands.len() < b.len()) {
                best = Some(cands);
            }
        }
        match best {
            None if st.remaining.iter().all(|&r| r == 0) => Pick::Done,
            None => Pick::Dead,
            Some(c) => Pick::Branch(c),
        }
    }

    fn take(&self, st: &mut SelState, c: usize) {
        st.status[c] = 1;
        for &(t, x) in &self.support[c] {
            st.sums[t] += x as u64;
        }
        if let Some(k) = self.kind[c] {
            st.remaining[k] -= 1;
        }
        st.taken.push(c);
    }

    fn untake(&self, st: &mut SelState, c: usize) {
        st.status[c] = 0;
        for &(t, x) in &self.support[c] {
            st.sums[t] -= x as u64;
        }
        if let Some(k) = self.kind[c] {
            st.remaining[k] += 1;
        }
        st.taken.pop();
    }

    fn full(&self, st: &SelState, limit: Option<usize>) -> bool {
        limit.is_some_and(|l| st.found.len() >= l)
    }

    fn dfs(&self, st: &mut SelState, limit: Option<usize>) {
        if self.full(st, limit) {
            return;
        }
        st.stats.nodes += 1;
        match self.pick(st) {
            Pick::Done => {
                let mut sel = st.taken.clone();
                sel.sort_unstable();
                st.found.push(sel);
                st.stats.solutions += 1;
            }
            Pick::Dead => st.stats.dead_ends += 1,
            Pick::Branch(cands) => self.branch(st, &cands, limit),
        }
    }

    /// Takes each candidate in turn, excluding the earlier ones, so every
    /// orbit set is visited once.
    fn branch(&self, st: &mut SelState, cands: &[usize], limit: Option<usize>) {
        for (i, &c) in cands.iter().enumerate() {
            self.take(st, c);
            self.dfs(st, limit);
            self.untake(st, c);
            st.status[c] = 2;
            if self.full(st, limit) {
                for &d in &cands[..=i] {
                    st.status[d] = 0;
                }
                return;
            }
        }
        for &d in cands {
            st.status[d] = 0;
        }
    }
}

/// Selects k-orbits whose union is a design. With a candidate matrix, only
/// orbits whose rho column (and length) occurs in the candidate are used, and
/// the selection must realise the candidate's column multiset exactly.
///
/// Results are sorted by their selected orbit sets.
pub fn search_designs(
    params: &DesignParams,
    km: &KramerMesnerSystem,
    points: &PointOrbitPartition,
    candidate: Option<&TacticalMatrix>,
    opts: &ConstructOptions,
) -> Result<(Vec<DesignInstance>, ConstructStats)> {
    let orbits = km.block_orbits.orbits();
    let cols = orbits.len();
    let mut kind = vec![None; cols];
    let mut type_counts = Vec::new();
    let mut eligible = Vec::new();
    if let Some(cand) = candidate {
        if cand.sizes() != points.sizes().as_slice() {
            return Err(Error::MalformedMatrix(format!(
                "candidate point orbit sizes {:?} differ from the partition's {:?}",
                cand.sizes(),
                points.sizes()
            )));
        }
        let mut types: HashMap<(u64, Vec<u64>), usize> = HashMap::new();
        for j in 0..cand.cols() {
            let key = (cand.lengths()[j], cand.column(j));
            let next = types.len();
            let id = *types.entry(key).or_insert(next);
            if id == type_counts.len() {
                type_counts.push(0);
            }
            type_counts[id] += 1;
        }
        let rho_cols: Vec<Vec<u64>> = orbits
            .par_iter()
            .map(|o| orbit_rho_column(points, o))
            .collect();
        for (c, col) in rho_cols.into_iter().enumerate() {
            if let Some(&id) = types.get(&(orbits[c].len() as u64, col)) {
                kind[c] = Some(id);
                eligible.push(c);
            }
        }
    } else {
        eligible = (0..cols).collect();
    }
    let support: Vec<Vec<(usize, u32)>> = (0..cols)
        .map(|c| {
            km.a.iter()
                .enumerate()
                .filter_map(|(t, row)| (row[c] > 0).then_some((t, row[c])))
                .collect()
        })
        .collect();
    let sel = Selector {
        a: &km.a,
        target: km.target,
        eligible,
        kind,
        type_counts,
        support,
    };
    let root = SelState {
        sums: vec![0; km.a.len()],
        remaining: sel.type_counts.clone(),
        status: vec![0; cols],
        taken: Vec::new(),
        found: Vec::new(),
        stats: ConstructStats {
            eligible_orbits: sel.eligible.len(),
            ..Default::default()
        },
    };

    let mut stats = root.stats;
    let mut found: Vec<Vec<usize>> = Vec::new();
    if opts.jobs > 1 {
        let mut st = root.clone();
        st.stats.nodes += 1;
        match sel.pick(&st) {
            Pick::Done => found.push(Vec::new()),
            Pick::Dead => stats.dead_ends += 1,
            Pick::Branch(cands) => {
                stats.nodes += 1;
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(opts.jobs)
                    .build()
                    .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
                let results: Vec<SelState> = pool.install(|| {
                    (0..cands.len())
                        .into_par_iter()
                        .map(|i| {
                            let mut s = root.clone();
                            s.stats = ConstructStats::default();
                            for &d in &cands[..i] {
                                s.status[d] = 2;
                            }
                            sel.take(&mut s, cands[i]);
                            sel.dfs(&mut s, opts.limit);
                            s
                        })
                        .collect()
                });
                for r in results {
                    stats.nodes += r.stats.nodes;
                    stats.dead_ends += r.stats.dead_ends;
                    found.extend(r.found);
                }
            }
        }
    } else {
        let mut st = root;
        sel.dfs(&mut st, opts.limit);
        stats = st.stats;
        found = st.found;
    }
    if let Some(l) = opts.limit {
        found.truncate(l);
    }
    found.sort();
    stats.solutions = found.len() as u64;

    let designs = found
        .into_iter()
        .map(|selection| {
            let blocks = selection
                .iter()
                .flat_map(|&c| orbits[c].members().iter().cloned())
                .collect();
            DesignInstance::new(*params, blocks, selection)
        })
        .collect();
    Ok((designs, stats))
}

/// One failed design property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DesignViolation {
    WrongSpace { block: usize },
    WrongDimension { block: usize, dim: usize },
    RepeatedBlock { block: usize },
    BlockCount { expected: u64, actual: u64 },
    PointDegree { point: ProjectivePoint, expected: u64, actual: u64 },
    LineDegree { line: Subspace, expected: u64, actual: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DesignReport {
    pub violations: Vec<DesignViolation>,
}

impl DesignReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a block set by brute force over all points and all 2-spaces.
pub fn verify_design(design: &DesignInstance) -> Result<DesignReport> {
    let p = &design.params;
    let spec = crate::field::FieldSpec::new(p.q, p.v as usize)?;
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for (i, b) in design.blocks.iter().enumerate() {
        if b.spec() != spec {
            violations.push(DesignViolation::WrongSpace { block: i });
            continue;
        }
        if b.dim() != p.k as usize {
            violations.push(DesignViolation::WrongDimension { block: i, dim: b.dim() });
        }
        if !seen.insert(b) {
            violations.push(DesignViolation::RepeatedBlock { block: i });
        }
    }
    if design.blocks.len() as u64 != p.b {
        violations.push(DesignViolation::BlockCount {
            expected: p.b,
            actual: design.blocks.len() as u64,
        });
    }
    if !violations.is_empty() {
        return Ok(DesignReport { violations });
    }

    let containers: Vec<Container> = design.blocks.iter().map(Container::new).collect();
    let probe = &design.blocks[0];
    for point in enumerate_points(spec) {
        let x = Contained::point(&point, probe);
        let actual = containers.iter().filter(|c| c.contains(&x)).count() as u64;
        if actual != p.lambda1 {
            violations.push(DesignViolation::PointDegree {
                point,
                expected: p.lambda1,
                actual,
            });
        }
    }
    let lines = enumerate_subspaces(spec, 2)?;
    let degrees: Vec<u64> = lines
        .par_iter()
        .map(|line| {
            let x = Contained::subspace(line);
            containers.iter().filter(|c| c.contains(&x)).count() as u64
        })
        .collect();
    for (line, actual) in lines.into_iter().zip(degrees) {
        if actual != p.lambda2 {
            violations.push(DesignViolation::LineDegree {
                line,
                expected: p.lambda2,
                actual,
            });
        }
    }
    Ok(DesignReport { violations })
}

/// A design's group-induced decomposition: the tactical matrix in canonical
/// column order and the block orbits in the same order.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub matrix: TacticalMatrix,
    pub block_orbits: Vec<Vec<Subspace>>,
}

/// The tactical matrix induced on a design by the group. Fails if the group
/// does not map the block set onto itself.
pub fn induced_matrix(
    design: &DesignInstance,
    group: &MatrixGroup,
    points: &PointOrbitPartition,
) -> Result<Decomposition> {
    let spec = group.spec();
    let index: HashMap<&Subspace, usize> =
        design.blocks.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let mut parent: Vec<usize> = (0..design.blocks.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (gi, g) in group.generators().iter().enumerate() {
        for (i, b) in design.blocks.iter().enumerate() {
            let img = g.act_on_subspace(spec, b);
            let Some(&j) = index.get(&img) else {
                return Err(Error::NotAnAutomorphism { generator: gi });
            };
            let (x, y) = (find(&mut parent, i), find(&mut parent, j));
            if x != y {
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    let mut by_root: HashMap<usize, Vec<Subspace>> = HashMap::new();
    for i in 0..design.blocks.len() {
        let root = find(&mut parent, i);
        by_root.entry(root).or_default().push(design.blocks[i].clone());
    }
    let mut orbits: Vec<(Vec<u64>, Vec<Subspace>)> = by_root
        .into_values()
        .map(|mut members| {
            members.sort();
            let orbit = SubspaceOrbitView(&members);
            (orbit.rho_column(points), members)
        })
        .collect();
    orbits.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| b.0.cmp(&a.0)));

    let m = points.len();
    let rho: Vec<Vec<u64>> = (0..m)
        .map(|i| orbits.iter().map(|(col, _)| col[i]).collect())
        .collect();
    let lengths = orbits.iter().map(|(_, o)| o.len() as u64).collect();
    let matrix = TacticalMatrix::new(rho, points.sizes(), lengths)?;
    Ok(Decomposition {
        matrix,
        block_orbits: orbits.into_iter().map(|(_, o)| o).collect(),
    })
}

struct SubspaceOrbitView<'a>(&'a [Subspace]);

impl SubspaceOrbitView<'_> {
    fn rho_column(&self, points: &PointOrbitPartition) -> Vec<u64> {
        let containers: Vec<Container> = self.0.iter().map(Container::new).collect();
        points
            .representatives()
            .iter()
            .map(|p| {
                let x = Contained::point(p, &self.0[0]);
                containers.iter().filter(|c| c.contains(&x)).count() as u64
            })
            .collect()
    }
}

/// `kappa[i][j]` counted directly: points of orbit `i` on the first block of
/// orbit `j`.
pub fn direct_kappa(points: &PointOrbitPartition, block_orbits: &[Vec<Subspace>]) -> Vec<Vec<u64>> {
    (0..points.len())
        .map(|i| {
            block_orbits
                .iter()
                .map(|orbit| {
                    let block = &orbit[0];
                    points.orbits()[i]
                        .iter()
                        .filter(|p| block.contains(p).expect("same space"))
                        .count() as u64
                })
                .collect()
        })
        .collect()
}

/// `rho[i][j]` counted directly at an arbitrary point `p` of orbit `i`.
pub fn rho_at_point(p: &ProjectivePoint, orbit: &[Subspace]) -> u64 {
    orbit
        .iter()
        .filter(|b| b.contains(p).expect("same space"))
        .count() as u64
}
