//! Small numeric utilities shared across modules.

/// Neumaier-compensated summation. Grid mass identities are asserted to
/// relative 1e-13 over ~10^4-cell grids, which plain left-to-right summation
/// does not reliably deliver.
pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            compensation += (sum - t) + x;
        } else {
            compensation += (x - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_magnitude_spread() {
        // 1 + 1e-16 * 10^4 accumulated naively loses every small addend.
        let mut values = vec![1.0f64];
        values.extend(std::iter::repeat(1e-16).take(10_000));
        let sum = neumaier_sum(values);
        assert_eq!(sum, 1.0 + 1e-12);
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(neumaier_sum(std::iter::empty()), 0.0);
    }
}
