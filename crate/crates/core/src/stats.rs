//! Deterministic reductions and small fitting helpers.

/// Pairwise (cascade) summation; the split points depend only on the
/// length, so the result is independent of how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error `s / √n` (zero for fewer than two samples).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &ly)
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn small_cases() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        let (m, s) = mean_stderr(&[2.0]);
        assert_eq!((m, s), (2.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(loglog_slope(&[1.0, 10.0, 100.0], &[1.0, 0.1, 0.01]), -1.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn pairwise_matches_naive(xs in prop::collection::vec(-1e3f64..1e3, 0..200)) {
            let naive: f64 = xs.iter().sum();
            prop_assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
        }

        #[test]
        fn constant_samples_have_zero_error(c in -10.0f64..10.0, n in 2usize..100) {
            let (m, s) = mean_stderr(&vec![c; n]);
            prop_assert!((m - c).abs() < 1e-12);
            prop_assert!(s < 1e-12);
        }
    }
}
