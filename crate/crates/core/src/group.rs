//! Matrix groups over `GF(q)`, their orbits on points and subspaces, and the
//! sigma table of a point partition over `GF(2)`.
//!
//! Vectors are row vectors and a matrix `g` acts by `x -> x g`.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::field::{
    enumerate_points, enumerate_subspaces, gauss_binom, points_span_dim, rref_unchecked,
    FieldSpec, ProjectivePoint, Subspace,
};

/// Default cap on the number of group elements produced by [`close_group`].
pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

/// Default cap on the number of subspaces an orbit computation may enumerate.
pub const DEFAULT_SUBSPACE_LIMIT: u128 = 2_000_000;

/// A square matrix over `GF(q)`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GfMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl GfMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0u8; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Self { n, entries }
    }

    /// Builds a matrix from rows, checking shape and entry range.
    pub fn from_rows(spec: FieldSpec, rows: &[Vec<u8>]) -> Result<Self> {
        let n = spec.v();
        if rows.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        for r in rows {
            spec.check_vector(r)?;
        }
        Ok(Self {
            n,
            entries: rows.concat(),
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.n).map(<[u8]>::to_vec).collect()
    }

    pub fn mul(&self, spec: FieldSpec, other: &GfMatrix) -> GfMatrix {
        let n = self.n;
        let q = spec.q();
        let mut entries = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u32;
                for k in 0..n {
                    acc += self.get(i, k) as u32 * other.get(k, j) as u32;
                }
                entries[i * n + j] = (acc % q) as u8;
            }
        }
        GfMatrix { n, entries }
    }

    /// The row vector `x g`.
    pub fn apply(&self, spec: FieldSpec, x: &[u8]) -> Vec<u8> {
        let n = self.n;
        let q = spec.q();
        (0..n)
            .map(|j| {
                let acc: u32 = x
                    .iter()
                    .enumerate()
                    .map(|(i, &xi)| xi as u32 * self.get(i, j) as u32)
                    .sum();
                (acc % q) as u8
            })
            .collect()
    }

    pub fn is_invertible(&self, spec: FieldSpec) -> bool {
        rref_unchecked(spec, &self.rows()).dim() == self.n
    }

    pub fn act_on_point(&self, spec: FieldSpec, p: &ProjectivePoint) -> ProjectivePoint {
        let img = self.apply(spec, p.coords());
        crate::field::canonicalize_point(spec, &img).expect("invertible image of a point")
    }

    pub fn act_on_subspace(&self, spec: FieldSpec, s: &Subspace) -> Subspace {
        let rows: Vec<Vec<u8>> = s.basis().iter().map(|r| self.apply(spec, r)).collect();
        rref_unchecked(spec, &rows)
    }
}

/// A finite subgroup of `GL_v(q)` given by generators, with all its elements.
#[derive(Debug, Clone)]
pub struct MatrixGroup {
    spec: FieldSpec,
    generators: Vec<GfMatrix>,
    elements: Vec<GfMatrix>,
}

impl MatrixGroup {
    #[inline]
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    #[inline]
    pub fn generators(&self) -> &[GfMatrix] {
        &self.generators
    }

    /// Elements in breadth-first order from the identity.
    #[inline]
    pub fn elements(&self) -> &[GfMatrix] {
        &self.elements
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Closes the generators under multiplication, breadth-first from the
/// identity with generators applied in input order.
pub fn close_group(spec: FieldSpec, generators: Vec<GfMatrix>, cap: usize) -> Result<MatrixGroup> {
    for (index, g) in generators.iter().enumerate() {
        if g.size() != spec.v() {
            return Err(Error::GeneratorShape { index, v: spec.v() });
        }
        if !g.is_invertible(spec) {
            return Err(Error::SingularGenerator { index, q: spec.q() });
        }
    }
    let id = GfMatrix::identity(spec.v());
    let mut seen: HashMap<GfMatrix, ()> = HashMap::new();
    let mut elements = vec![id.clone()];
    seen.insert(id, ());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in &generators {
            let h = elements[i].mul(spec, g);
            if seen.contains_key(&h) {
                continue;
            }
            if elements.len() >= cap {
                return Err(Error::GroupTooLarge { cap });
            }
            seen.insert(h.clone(), ());
            elements.push(h);
            queue.push_back(elements.len() - 1);
        }
    }
    Ok(MatrixGroup {
        spec,
        generators,
        elements,
    })
}

/// Union-find orbit computation over canonically sorted items.
///
/// Returns orbits as lists of item indices (ascending), ordered by length and
/// then by their least member.
fn orbit_classes<T, F>(items: &[T], images: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> Vec<usize>,
{
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in images(i) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
    }
    let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        by_root.entry(root).or_default().push(i);
    }
    let mut orbits: Vec<Vec<usize>> = by_root.into_values().collect();
    orbits.sort_by_key(|o| (o.len(), o[0]));
    orbits
}

/// The point orbits `Psi_1, ..., Psi_m` of a group.
#[derive(Debug, Clone)]
pub struct PointOrbitPartition {
    spec: FieldSpec,
    group_order: usize,
    orbits: Vec<Vec<ProjectivePoint>>,
    index: HashMap<ProjectivePoint, usize>,
}

impl PointOrbitPartition {
    /// Wraps an explicit partition of all points; it need not come from a group.
    pub fn from_orbits(
        spec: FieldSpec,
        group_order: usize,
        mut orbits: Vec<Vec<ProjectivePoint>>,
    ) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, orbit) in orbits.iter_mut().enumerate() {
            orbit.sort();
            for p in orbit.iter() {
                if p.coords().len() != spec.v() {
                    return Err(Error::LengthMismatch {
                        expected: spec.v(),
                        got: p.coords().len(),
                    });
                }
                if index.insert(p.clone(), i).is_some() {
                    return Err(Error::InvalidParams(format!("point {p:?} in two orbits")));
                }
            }
        }
        if index.len() as u128 != spec.point_count() {
            return Err(Error::InvalidParams(format!(
                "partition covers {} of {} points",
                index.len(),
                spec.point_count()
            )));
        }
        Ok(Self {
            spec,
            group_order,
            orbits,
            index,
        })
    }

    #[inline]
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    #[inline]
    pub fn group_order(&self) -> usize {
        self.group_order
    }

    /// Number of orbits `m`.
    #[inline]
    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    #[inline]
    pub fn orbits(&self) -> &[Vec<ProjectivePoint>] {
        &self.orbits
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.orbits.iter().map(|o| o.len() as u64).collect()
    }

    pub fn representatives(&self) -> Vec<&ProjectivePoint> {
        self.orbits.iter().map(|o| &o[0]).collect()
    }

    #[inline]
    pub fn representative(&self, i: usize) -> &ProjectivePoint {
        &self.orbits[i][0]
    }

    pub fn orbit_of(&self, p: &ProjectivePoint) -> Option<usize> {
        self.index.get(p).copied()
    }
}

/// Orbits of the group on all points of `GF(q)^v`.
pub fn point_orbits(group: &MatrixGroup) -> PointOrbitPartition {
    let spec = group.spec();
    let points = enumerate_points(spec);
    let pos: HashMap<&ProjectivePoint, usize> =
        points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let classes = orbit_classes(&points, |i| {
        group
            .generators()
            .iter()
            .map(|g| pos[&g.act_on_point(spec, &points[i])])
            .collect()
    });
    let orbits: Vec<Vec<ProjectivePoint>> = classes
        .into_iter()
        .map(|c| c.into_iter().map(|i| points[i].clone()).collect())
        .collect();
    for o in &orbits {
        debug_assert_eq!(group.order() % o.len(), 0);
    }
    PointOrbitPartition::from_orbits(spec, group.order(), orbits)
        .expect("group orbits partition the points")
}

/// One orbit of `r`-spaces; members are sorted and the first is the representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceOrbit {
    members: Vec<Subspace>,
}

impl SubspaceOrbit {
    #[inline]
    pub fn representative(&self) -> &Subspace {
        &self.members[0]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn members(&self) -> &[Subspace] {
        &self.members
    }
}

/// The orbits of a group on the `r`-spaces.
#[derive(Debug, Clone)]
pub struct SubspaceOrbitPartition {
    r: usize,
    orbits: Vec<SubspaceOrbit>,
}

impl SubspaceOrbitPartition {
    #[inline]
    pub fn dim(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn orbits(&self) -> &[SubspaceOrbit] {
        &self.orbits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.orbits.iter().map(SubspaceOrbit::len).collect()
    }

    /// Total number of `r`-spaces covered.
    pub fn total(&self) -> usize {
        self.orbits.iter().map(SubspaceOrbit::len).sum()
    }
}

/// Orbits of the group on `r`-spaces, refusing to enumerate more than
/// `limit` subspaces.
pub fn subspace_orbits(group: &MatrixGroup, r: usize, limit: u128) -> Result<SubspaceOrbitPartition> {
    let spec = group.spec();
    if r > spec.v() {
        return Err(Error::DimensionOutOfRange { r, v: spec.v() });
    }
    let count = gauss_binom(spec.v() as u32, r as u32, spec.q())?;
    if count > limit {
        return Err(Error::EnumerationLimit { count, limit });
    }
    let all = enumerate_subspaces(spec, r)?;
    let pos: HashMap<&Subspace, usize> = all.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let classes = orbit_classes(&all, |i| {
        group
            .generators()
            .iter()
            .map(|g| pos[&g.act_on_subspace(spec, &all[i])])
            .collect()
    });
    let orbits = classes
        .into_iter()
        .map(|c| SubspaceOrbit {
            members: c.into_iter().map(|i| all[i].clone()).collect(),
        })
        .collect::<Vec<_>>();
    for o in &orbits {
        debug_assert_eq!(group.order() % o.len(), 0);
    }
    Ok(SubspaceOrbitPartition { r, orbits })
}

/// Orbit of an arbitrary subspace under the group, sorted.
pub fn orbit_of_subspace(group: &MatrixGroup, s: &Subspace) -> Vec<Subspace> {
    let spec = group.spec();
    let mut out: Vec<Subspace> = group
        .elements()
        .iter()
        .map(|g| g.act_on_subspace(spec, s))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// `sigma[l][r][s]`: the number of points `R` in orbit `r`, `R != P`, whose
/// third line point `P + R` lies in orbit `s`, for a fixed `P` in orbit `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaTable {
    m: usize,
    data: Vec<u64>,
}

impl SigmaTable {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![0; m * m * m],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn get(&self, l: usize, r: usize, s: usize) -> u64 {
        self.data[(l * self.m + r) * self.m + s]
    }

    #[inline]
    pub fn set(&mut self, l: usize, r: usize, s: usize, value: u64) {
        let m = self.m;
        self.data[(l * m + r) * m + s] = value;
    }

    /// Nonzero entries as `(l, r, s, sigma)`, 0-based, in lexicographic order.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, usize, u64)> {
        let m = self.m;
        let mut out = Vec::new();
        for l in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let x = self.get(l, r, s);
                    if x != 0 {
                        out.push((l, r, s, x));
                    }
                }
            }
        }
        out
    }
}

fn sigma_slice(part: &PointOrbitPartition, p: &ProjectivePoint) -> Vec<u64> {
    let m = part.len();
    let mut counts = vec![0u64; m * m];
    for (r, orbit) in part.orbits().iter().enumerate() {
        for rp in orbit {
            if rp == p {
                continue;
            }
            // Over GF(2) the sum of two distinct canonical points is canonical.
            let third: Vec<u8> = p
                .coords()
                .iter()
                .zip(rp.coords())
                .map(|(a, b)| a ^ b)
                .collect();
            let s = part
                .orbit_of(&ProjectivePoint::from_canonical(third))
                .expect("partition covers every point");
            counts[r * m + s] += 1;
        }
    }
    counts
}

/// Computes the sigma table from each orbit's representative and, when the
/// orbit has a second point, checks that it yields the same slice.
pub fn sigma_table(part: &PointOrbitPartition) -> Result<SigmaTable> {
    sigma_table_with(part, true)
}

pub fn sigma_table_with(part: &PointOrbitPartition, verify: bool) -> Result<SigmaTable> {
    let q = part.spec().q();
    if q != 2 {
        return Err(Error::RequiresBinaryField(q));
    }
    let m = part.len();
    let mut table = SigmaTable::zeros(m);
    for (l, orbit) in part.orbits().iter().enumerate() {
        let first = sigma_slice(part, &orbit[0]);
        if verify && orbit.len() > 1 {
            let second = sigma_slice(part, &orbit[1]);
            if let Some(k) = (0..m * m).find(|&k| first[k] != second[k]) {
                return Err(Error::SigmaMismatch {
                    l,
                    r: k / m,
                    s: k % m,
                    first: first[k],
                    second: second[k],
                });
            }
        }
        for r in 0..m {
            for s in 0..m {
                table.set(l, r, s, first[r * m + s]);
            }
        }
    }
    Ok(table)
}

/// Sizes of `{Q in Psi_s : dim <P, R, Q> = i}` for `i = 1, 2, 3`, counted
/// directly.
pub fn lemma_partition_sizes(
    part: &PointOrbitPartition,
    p: &ProjectivePoint,
    r: &ProjectivePoint,
    s: usize,
) -> Result<(u64, u64, u64)> {
    let spec = part.spec();
    if spec.q() != 2 {
        return Err(Error::RequiresBinaryField(spec.q()));
    }
    if s >= part.len() {
        return Err(Error::IndexOutOfRange {
            index: s,
            size: part.len(),
        });
    }
    let mut counts = (0u64, 0u64, 0u64);
    for qp in &part.orbits()[s] {
        match points_span_dim(spec, &[p, r, qp]) {
            1 => counts.0 += 1,
            2 => counts.1 += 1,
            _ => counts.2 += 1,
        }
    }
    Ok(counts)
}
