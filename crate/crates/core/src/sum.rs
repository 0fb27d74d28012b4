//! Deterministic pairwise (tree) summation.

const LEAF: usize = 8;

/// Sums `values` by recursive halving down to blocks of 8, which are summed
/// left to right. The split points depend only on the length, so the result
/// is independent of how the values were produced.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().fold(0.0, |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
