use crate::error::{Error, Result};
use crate::linkpred::midranks;

/// Two-sided Wilcoxon rank-sum test. Returns the rank sum of `a` and the
/// normal-approximation p-value with tie-corrected variance and continuity
/// correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "rank-sum test needs at least 3 observations per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("rank-sum test on non-finite values".into()));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let w: f64 = ranks[..a.len()].iter().sum();
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok((w, 1.0));
    }
    let mean = n1 * (n + 1.0) / 2.0;
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let p = libm::erfc(z / std::f64::consts::SQRT_2).min(1.0);
    Ok((w, p))
}

/// One-sided two-sample Kolmogorov–Smirnov test for "`high` is
/// stochastically larger than `low`". Returns `D⁺ = sup_x (F_low − F_high)`
/// and the asymptotic p-value `exp(−2 m D⁺²)` with `m = n₁n₂/(n₁+n₂)`.
pub fn ks_test_one_sided(high: &[f64], low: &[f64]) -> Result<(f64, f64)> {
    if high.is_empty() || low.is_empty() {
        return Err(Error::Empty("KS test needs two non-empty samples".into()));
    }
    if high.iter().chain(low).any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("KS test on NaN values".into()));
    }
    let mut h = high.to_vec();
    let mut l = low.to_vec();
    h.sort_by(f64::total_cmp);
    l.sort_by(f64::total_cmp);
    let (nh, nl) = (h.len() as f64, l.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < h.len() || j < l.len() {
        let x = match (h.get(i), l.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < h.len() && h[i] <= x {
            i += 1;
        }
        while j < l.len() && l[j] <= x {
            j += 1;
        }
        d = d.max(j as f64 / nl - i as f64 / nh);
    }
    let m = nh * nl / (nh + nl);
    let p = (-2.0 * m * d * d).exp().min(1.0);
    Ok((d, p))
}

/// Plug-in mutual information (nats) of an equal-width `bins x bins`
/// histogram over the observed ranges. A constant sequence gives 0.
pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("MI on sequences of length {} and {}", x.len(), y.len())));
    }
    if bins == 0 || x.len() < bins {
        return Err(Error::InvalidArgument(format!("MI needs at least {bins} samples and >= 1 bin")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("MI on non-finite values".into()));
    }
    let bin_of = |v: &[f64]| -> Option<Vec<usize>> {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return None;
        }
        let width = (hi - lo) / bins as f64;
        Some(v.iter().map(|&a| (((a - lo) / width) as usize).min(bins - 1)).collect())
    };
    let (Some(bx), Some(by)) = (bin_of(x), bin_of(y)) else {
        return Ok(0.0);
    };
    let n = x.len() as f64;
    let mut joint = vec![0.0; bins * bins];
    let mut px = vec![0.0; bins];
    let mut py = vec![0.0; bins];
    for (&a, &b) in bx.iter().zip(&by) {
        joint[a * bins + b] += 1.0;
        px[a] += 1.0;
        py[b] += 1.0;
    }
    // summing sorted terms makes the result exactly symmetric in (x, y)
    let mut terms = Vec::new();
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0.0 {
                terms.push(c / n * (c * n / (px[a] * py[b])).ln());
            }
        }
    }
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum::<f64>().max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilcoxon_identical_groups() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let (_, p) = wilcoxon_rank_sum(&a, &a).unwrap();
        assert!(p > 0.99);
        let (_, p) = wilcoxon_rank_sum(&[5.0; 4], &[5.0; 3]).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn wilcoxon_separated_groups() {
        let (w, p) = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert_eq!(w, 6.0);
        assert!(p < 0.1);
        let (w10, p10) = wilcoxon_rank_sum(&[10.0, 20.0, 30.0], &[100.0, 110.0, 120.0]).unwrap();
        assert_eq!((w, p), (w10, p10));
        assert!(wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0, 5.0]).is_err());
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_test_one_sided(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), (0.0, 1.0));
        let (d, p) = ks_test_one_sided(&[10.0, 11.0, 12.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(d, 1.0);
        assert!((p - (-3.0f64).exp()).abs() < 1e-15);
        // wrong direction gives no evidence
        assert_eq!(ks_test_one_sided(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap().0, 0.0);
    }

    #[test]
    fn mi_basics() {
        let x: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let same = mutual_information(&x, &x, 8).unwrap();
        assert!((same - 8f64.ln()).abs() < 0.05 * 8f64.ln());
        assert_eq!(mutual_information(&x, &y, 8).unwrap(), same);
        assert_eq!(mutual_information(&x, &[1.0; 1000], 8).unwrap(), 0.0);
        assert!(mutual_information(&x[..4], &x[..4], 8).is_err());
    }
}
