//! Kullback–Leibler divergence between two 2×2 tables, in bits.

use serde::Serialize;

use crate::model::ContingencyTable;

/// D_KL in bits. `+∞` when the implied table puts zero mass on a cell the
/// true table uses.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct DivergenceBits(pub f64);

impl DivergenceBits {
    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }
}

/// `Σ a·log₂(a/b)` over the four cells, with `0·log(0/b) = 0`.
///
/// Exact divergence is never negative; sums that come out below zero through
/// cancellation between near-identical tables are floored at 0.
pub fn kl_divergence(true_table: &ContingencyTable, implied_table: &ContingencyTable) -> DivergenceBits {
    let mut sum = 0.0;
    for (a, b) in true_table.cells().into_iter().zip(implied_table.cells()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return DivergenceBits(f64::INFINITY);
        }
        sum += a * (a / b).log2();
    }
    DivergenceBits(sum.max(0.0))
}
