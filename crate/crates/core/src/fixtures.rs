//! Reference channel instances used by the examples, tests and CLI fixtures.

use nalgebra::{DMatrix, DVector};

use crate::encoding::{ChannelInstance, SpinAssignment};

fn build(rows: usize, cols: usize, channel: &[f64], symbols: &[i8], noise: &[f64]) -> ChannelInstance {
    ChannelInstance::from_transmission(
        DMatrix::from_row_slice(rows, cols, channel),
        SpinAssignment::new(symbols.to_vec()).expect("fixture symbols are +-1"),
        DVector::from_row_slice(noise),
        1.0,
    )
    .expect("fixture is well formed")
}

/// `h = 1.2416`, `n = 0.3323`, `s = +1`.
pub fn single_qubit() -> ChannelInstance {
    build(1, 1, &[1.2416], &[1], &[0.3323])
}

/// 2x2 channel with `s = [-1, +1]`.
pub fn two_qubit() -> ChannelInstance {
    build(
        2,
        2,
        &[1.2416, -0.1741, 0.3323, -0.0804],
        &[-1, 1],
        &[-1.5130, 0.3212],
    )
}

/// 3x3 channel with `s = [-1, +1, +1]`.
pub fn three_qubit() -> ChannelInstance {
    build(
        3,
        3,
        &[
            1.24155, -0.174105, 0.332349, -0.080418, -1.51301, 0.321184, -1.7771, 1.55398, 0.23342,
        ],
        &[-1, 1, 1],
        &[-1.703, -1.77439, 1.34985],
    )
}

/// Identity channel with `y = [1, -1]` and no noise; ML answer `[+1, -1]`.
pub fn identity_two() -> ChannelInstance {
    build(2, 2, &[1.0, 0.0, 0.0, 1.0], &[1, -1], &[0.0, 0.0])
}
