//! Small shared numeric helpers.

/// Pairwise (tree) summation with a fixed reduction order.
///
/// The tree shape depends only on the slice length, so the result is
/// bit-identical no matter how the values were produced or how many
/// threads computed them.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Least-squares slope of y against x.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
