//! Inputs shared by the benchmarks.

use qtd_core::{close_group, DesignParams, FieldSpec, GfMatrix, MatrixGroup};

/// 2-(4,3,3;2) with a cyclic group of order 3.
pub fn small() -> (DesignParams, MatrixGroup) {
    build(
        (4, 3, 3),
        &[vec![0, 0, 0, 1], vec![0, 0, 1, 0], vec![0, 1, 1, 0], vec![1, 0, 0, 1]],
    )
}

/// 2-(6,3,6;2) with a cyclic group of order 31.
pub fn medium() -> (DesignParams, MatrixGroup) {
    build(
        (6, 3, 6),
        &[
            vec![0, 1, 0, 0, 0, 0],
            vec![0, 0, 1, 0, 0, 0],
            vec![0, 0, 0, 1, 0, 0],
            vec![0, 0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 0, 1],
            vec![1, 0, 0, 0, 1, 1],
        ],
    )
}

fn build((v, k, lambda2): (u32, u32, u64), generator: &[Vec<u8>]) -> (DesignParams, MatrixGroup) {
    let spec = FieldSpec::new(2, v as usize).expect("valid space");
    let g = GfMatrix::from_rows(spec, generator).expect("valid generator");
    (
        DesignParams::derive(v, k, lambda2, 2).expect("admissible"),
        close_group(spec, vec![g], 1000).expect("small group"),
    )
}
