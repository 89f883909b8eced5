//! Exhaustive property checks. Each function panics on the first failure.

use std::collections::{BTreeSet, HashMap};

use qtd_core::construct::direct_kappa;
use qtd_core::group::{lemma_partition_sizes, DEFAULT_SUBSPACE_LIMIT};
use qtd_core::refine::triple_sum_integer;
use qtd_core::tactical::row_symmetries;
use qtd_core::*;

use super::*;

/// Gaussian binomials against the product formula, symmetry, subspace
/// counts against a set-based closure, and counts of `k`-spaces through a
/// fixed `s`-space.
pub fn gaussian_and_subspace_counts() {
    for q in [2u32, 3] {
        for n in 0..=8u32 {
            for r in 0..=n {
                let g = gauss_binom(n, r, q).unwrap();
                assert_eq!(g, gauss_pascal(n, r, q), "[{n} {r}]_{q}");
                assert_eq!(g, gauss_binom(n, n - r, q).unwrap(), "symmetry [{n} {r}]_{q}");
            }
            // Enumeration agrees wherever the count is small enough to list.
            let spec = FieldSpec::new(q, n.max(1) as usize).unwrap();
            if n >= 1 {
                for r in 0..=n {
                    let expected = gauss_pascal(n, r, q);
                    if expected <= 250_000 {
                        let listed = enumerate_subspaces(spec, r as usize).unwrap();
                        assert_eq!(listed.len() as u128, expected, "listing [{n} {r}]_{q}");
                    }
                }
            }
        }
    }
    for (q, v) in [(2u32, 3usize), (2, 4), (2, 5), (2, 6), (3, 3), (3, 4)] {
        let counts = brute_force_subspace_counts(q, v);
        for (d, &c) in counts.iter().enumerate() {
            assert_eq!(c as u128, gauss_binom(v as u32, d as u32, q).unwrap(), "closure count q={q} v={v} d={d}");
        }
        let spec = FieldSpec::new(q, v).unwrap();
        for s in 1..v {
            let small = enumerate_subspaces(spec, s).unwrap();
            let fixed = [small.first().unwrap(), small.last().unwrap()];
            for k in s..=v {
                let big = enumerate_subspaces(spec, k).unwrap();
                for f in fixed {
                    let fs = subspace_set(f);
                    let through = big
                        .iter()
                        .filter(|b| fs.is_subset(&subspace_set(b)))
                        .count() as u128;
                    assert_eq!(
                        through,
                        gauss_pascal((v - s) as u32, (k - s) as u32, q),
                        "{k}-spaces through a {s}-space, q={q} v={v}"
                    );
                }
            }
        }
    }
}

fn orbit_index(part: &PointOrbitPartition) -> HashMap<u32, usize> {
    let mut map = HashMap::new();
    for (i, orbit) in part.orbits().iter().enumerate() {
        for p in orbit {
            map.insert(point_code(p, 2), i);
        }
    }
    map
}

/// Compares the dimension counts for one `P` and a set of `R`s against the
/// closed forms, and the summed equality part against the bound table.
fn lemma_for(
    part: &PointOrbitPartition,
    params: &DesignParams,
    sigma: &SigmaTable,
    triples: &[(usize, usize, usize)],
    r_stride: usize,
) {
    let index = orbit_index(part);
    let sizes = part.sizes();
    for &(l, r, s) in triples {
        for p in part.orbits()[l].iter().take(2) {
            let pc = point_code(p, 2);
            let mut exact = 0u64;
            let mut sampled_all = true;
            for (ri, rp) in part.orbits()[r].iter().enumerate() {
                let rc = point_code(rp, 2);
                let r_is_p = rc == pc;
                let in_sigma = !r_is_p && index[&(pc ^ rc)] == s;
                let expected = lemma_closed_form(l, r, s, r_is_p, in_sigma, sizes[s]);
                if ri % r_stride != 0 && !r_is_p && !in_sigma {
                    sampled_all = false;
                    continue;
                }
                let got = lemma_partition_sizes(part, p, rp, s).unwrap();
                assert_eq!(got, expected, "l={l} r={r} s={s} R={rp:?}");
                exact += got.0 * params.lambda1 + got.1 * params.lambda2;
            }
            if sampled_all {
                let b = bounds(params, &sizes, sigma, l, r, s).unwrap();
                assert_eq!(exact, b.lower, "equality part l={l} r={r} s={s}");
            }
        }
    }
}

pub fn lemma_conformance() {
    let (p, g) = example1();
    let part = point_orbits(&g);
    let sigma = sigma_table(&part).unwrap();
    let all: Vec<(usize, usize, usize)> = (0..5)
        .flat_map(|l| (0..5).flat_map(move |r| (0..5).map(move |s| (l, r, s))))
        .collect();
    lemma_for(&part, &p, &sigma, &all, 1);

    let (p, g) = example2();
    let part = point_orbits(&g);
    let sigma = sigma_table(&part).unwrap();
    let all: Vec<(usize, usize, usize)> = (0..3)
        .flat_map(|l| (0..3).flat_map(move |r| (0..3).map(move |s| (l, r, s))))
        .collect();
    // Every fifth R plus all special ones; the summed check needs every R,
    // so run the full orbit for a few triples.
    lemma_for(&part, &p, &sigma, &all, 5);
    lemma_for(&part, &p, &sigma, &[(1, 1, 1), (1, 2, 2), (0, 1, 2), (2, 1, 2), (1, 1, 2)], 1);
}

/// Triple sums of the hyperplane design (example 1 group, all 125 index
/// triples) and of one example-2 design (all 27) against direct counting.
pub fn triple_sum_oracle() {
    let (p, g) = example1();
    let part = point_orbits(&g);
    let spec = g.spec();
    let design = DesignInstance::new(p, enumerate_subspaces(spec, 3).unwrap(), vec![]);
    let dec = induced_matrix(&design, &g, &part).unwrap();
    let sets = BlockSets::new(&design.blocks);
    let mut checked = 0;
    for l in 0..5 {
        for r in 0..5 {
            for s in 0..5 {
                assert_eq!(
                    triple_sum_integer(&dec.matrix, l, r, s).unwrap(),
                    brute_force_triple(&sets, part.orbits(), l, r, s),
                    "({l},{r},{s})"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 125);

    let (p, g) = example2();
    let part = point_orbits(&g);
    let m = tm(example2_m(), &part.sizes(), 31);
    let km = build_km_system(&g, &p, DEFAULT_SUBSPACE_LIMIT).unwrap();
    let opts = ConstructOptions { limit: Some(1), jobs: 1 };
    let (designs, _) = search_designs(&p, &km, &part, Some(&m), &opts).unwrap();
    let dec = induced_matrix(&designs[0], &g, &part).unwrap();
    let sets = BlockSets::new(&designs[0].blocks);
    for l in 0..3 {
        for r in 0..3 {
            for s in 0..3 {
                assert_eq!(
                    triple_sum_integer(&dec.matrix, l, r, s).unwrap(),
                    brute_force_triple(&sets, part.orbits(), l, r, s),
                    "example 2 ({l},{r},{s})"
                );
            }
        }
    }
}

/// Small designs with a known group: hyperplanes and complete designs.
pub fn known_designs() -> Vec<(DesignParams, MatrixGroup, Vec<Subspace>)> {
    let mut out = Vec::new();
    let (p, g) = example1();
    let spec = g.spec();
    out.push((p, g.clone(), enumerate_subspaces(spec, 3).unwrap()));
    // All 2-spaces of GF(2)^4 form a 2-(4,2,1;2) design.
    out.push((
        DesignParams::derive(4, 2, 1, 2).unwrap(),
        g.clone(),
        enumerate_subspaces(spec, 2).unwrap(),
    ));
    // Companion matrix of x^5 + x^2 + 1 generates a group of order 31.
    let spec5 = FieldSpec::new(2, 5).unwrap();
    let c5 = GfMatrix::from_rows(
        spec5,
        &[
            vec![0, 1, 0, 0, 0],
            vec![0, 0, 1, 0, 0],
            vec![0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 1],
            vec![1, 0, 1, 0, 0],
        ],
    )
    .unwrap();
    let g5 = close_group(spec5, vec![c5], 1000).unwrap();
    out.push((
        DesignParams::derive(5, 4, 7, 2).unwrap(),
        g5.clone(),
        enumerate_subspaces(spec5, 4).unwrap(),
    ));
    out.push((
        DesignParams::derive(5, 3, 7, 2).unwrap(),
        g5,
        enumerate_subspaces(spec5, 3).unwrap(),
    ));
    // Example 2 designs through the displayed matrix.
    let (p, g) = example2();
    let part = point_orbits(&g);
    let m = tm(example2_m(), &part.sizes(), 31);
    let km = build_km_system(&g, &p, DEFAULT_SUBSPACE_LIMIT).unwrap();
    let opts = ConstructOptions { limit: Some(3), jobs: 1 };
    let (designs, _) = search_designs(&p, &km, &part, Some(&m), &opts).unwrap();
    assert_eq!(designs.len(), 3);
    for d in designs {
        out.push((p, g.clone(), d.blocks));
    }
    out
}

/// The cubic filter accepts the induced matrix of every verified design, and
/// the induced matrices satisfy the counting identities.
pub fn filter_soundness() {
    for (p, g, blocks) in known_designs() {
        let label = format!("2-({},{},{};{}) |G|={}", p.v, p.k, p.lambda2, p.q, g.order());
        assert!(oracle_is_design(&p, &blocks), "{label}: oracle");
        let design = DesignInstance::new(p, blocks, vec![]);
        assert!(verify_design(&design).unwrap().is_valid(), "{label}: verify");
        let part = point_orbits(&g);
        let dec = induced_matrix(&design, &g, &part).unwrap();
        assert!(check_equations(&p, &dec.matrix).unwrap().is_empty(), "{label}: equations");
        assert_eq!(direct_kappa(&part, &dec.block_orbits), dec.matrix.kappa(), "{label}: kappa");
        let sigma = sigma_table(&part).unwrap();
        let report = filter(vec![dec.matrix.clone()], &p, &part.sizes(), &sigma).unwrap();
        assert!(
            report.rejected.is_empty(),
            "{label}: filter rejected {:?}",
            report.rejected.first().map(|r| r.1)
        );
        // The block set is closed under the whole group.
        let set: BTreeSet<&Subspace> = design.blocks.iter().collect();
        for e in g.elements() {
            for b in &design.blocks {
                assert!(set.contains(&e.act_on_subspace(g.spec(), b)), "{label}: closure");
            }
        }
    }
}

fn positive_compositions(total: u64, max_parts: usize) -> Vec<Vec<u64>> {
    (1..=max_parts)
        .flat_map(|n| compositions(total - n as u64, n))
        .map(|c| c.into_iter().map(|x| x + 1).collect())
        .collect()
}

fn partitions(total: u64, max_parts: usize) -> Vec<Vec<u64>> {
    positive_compositions(total, max_parts)
        .into_iter()
        .filter(|c| c.windows(2).all(|w| w[0] >= w[1]))
        .collect()
}

/// Number of classes of `set` under the size-preserving row permutations.
fn row_classes(set: &BTreeSet<Vec<Vec<u64>>>, sizes: &[u64], lengths: &[u64]) -> usize {
    let perms: Vec<Vec<usize>> = all_permutations(sizes.len())
        .into_iter()
        .filter(|p| p.iter().enumerate().all(|(i, &j)| sizes[i] == sizes[j]))
        .collect();
    let reps: BTreeSet<Vec<Vec<u64>>> = set
        .iter()
        .map(|rho| {
            perms
                .iter()
                .map(|p| {
                    let permuted: Vec<Vec<u64>> = p.iter().map(|&i| rho[i].clone()).collect();
                    canonical_columns(&permuted, lengths)
                })
                .max()
                .unwrap()
        })
        .collect();
    reps.len()
}

/// Enumeration against brute force for every split of the points and blocks
/// into at most three orbits, for small parameters with `lambda1 <= 6`.
/// Returns the number of (sizes, profile) configurations compared and the
/// number of matrices found.
pub fn toy_enumeration_completeness() -> (usize, usize) {
    let mut configs = 0;
    let mut found = 0;
    for (v, k, l2, q) in [(3u32, 2u32, 1u64, 2u32), (3, 2, 2, 2), (3, 2, 1, 3)] {
        let p = DesignParams::derive(v, k, l2, q).unwrap();
        assert!(p.lambda1 <= 6);
        for sizes in positive_compositions(p.point_count(), 3) {
            for lengths in partitions(p.b, 3) {
                let profile = BlockOrbitProfile::new(lengths.clone());
                let expected = brute_force_tactical(&p, &sizes, &lengths);
                let got = enumerate_rho(&p, &sizes, &profile).unwrap();
                let got_set: BTreeSet<Vec<Vec<u64>>> = got.iter().map(|m| m.rho().to_vec()).collect();
                assert_eq!(got.len(), got_set.len(), "duplicates for {sizes:?} {lengths:?}");
                assert_eq!(got_set, expected, "p={p:?} sizes={sizes:?} lengths={lengths:?}");

                let perms = row_symmetries(&sizes, None, 100).unwrap();
                let opts = EnumOptions { jobs: 1, row_perms: Some(perms) };
                let (reduced, _) = enumerate_rho_with(&p, &sizes, &profile, &opts).unwrap();
                assert_eq!(reduced.len(), row_classes(&expected, &sizes, &lengths), "classes {sizes:?} {lengths:?}");
                configs += 1;
                found += expected.len();
            }
        }
    }
    (configs, found)
}
