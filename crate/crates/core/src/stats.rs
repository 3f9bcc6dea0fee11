//! Kolmogorov-Smirnov statistics and histogram distances used by the Monte
//! Carlo verification paths.

/// One-sample KS statistic against a CDF. Sorts `xs` in place.
pub fn ks_statistic(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        sup = sup
            .max((i as f64 / n - c).abs())
            .max(((i + 1) as f64 / n - c).abs());
    }
    sup
}

/// Two-sample KS statistic. Sorts both slices in place. Tied values advance
/// both empirical CDFs together before the difference is measured.
pub fn ks_two_sample(xs: &mut [f64], ys: &mut [f64]) -> f64 {
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut sup = 0.0f64;
    while i < n || j < m {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        sup = sup.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    sup
}

/// Critical coefficient `c(alpha) = sqrt(-ln(alpha/2)/2)`; the one-sample
/// threshold is `c(alpha)/sqrt(n)` and the two-sample threshold
/// `c(alpha)*sqrt((n+m)/(n*m))`.
pub fn ks_critical(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Fraction-normalized histogram counts over `nbins` equal bins on [lo, hi).
/// Samples outside the range are dropped.
pub fn histogram_fractions(samples: &[f64], lo: f64, hi: f64, nbins: usize) -> Vec<f64> {
    let mut counts = vec![0u64; nbins];
    let w = (hi - lo) / nbins as f64;
    for &x in samples {
        if x >= lo && x < hi {
            let b = (((x - lo) / w) as usize).min(nbins - 1);
            counts[b] += 1;
        }
    }
    let n = samples.len() as f64;
    counts.iter().map(|&c| c as f64 / n).collect()
}

/// L1 distance between empirical bin fractions and analytic bin masses,
/// skipping bins flagged in `exclude`.
pub fn l1_distance(empirical: &[f64], masses: &[f64], exclude: &[bool]) -> f64 {
    empirical
        .iter()
        .zip(masses)
        .zip(exclude)
        .filter(|(_, &ex)| !ex)
        .map(|((e, m), _)| (e - m).abs())
        .sum()
}
