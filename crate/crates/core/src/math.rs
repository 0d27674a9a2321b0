//! Small exact-arithmetic helpers.

/// Binomial coefficient as `f64`; exact for every argument used here
/// (`n <= 64`).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// Multinomial coefficient `n! / (k_1! ... k_r!)` with `n = sum k_i`.
pub fn multinomial(ks: &[usize]) -> f64 {
    let mut n = 0;
    let mut acc = 1.0;
    for &k in ks {
        n += k;
        acc *= binomial(n, k);
    }
    acc
}

/// Raw moments of a sum of two independent variables from their raw
/// moment sequences (binomial convolution). Output length is the shorter
/// input length.
pub fn convolve_moments(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).map(|i| binomial(k, i) * a[i] * b[k - i]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_rows() {
        assert_eq!(binomial(0, 0), 1.0);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(12, 5), 792.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(40, 20), 137_846_528_820.0);
    }

    #[test]
    fn multinomial_matches_factorials() {
        assert_eq!(multinomial(&[2, 1, 1]), 12.0);
        assert_eq!(multinomial(&[3]), 1.0);
        assert_eq!(multinomial(&[1, 1, 1]), 6.0);
    }

    #[test]
    fn convolution_of_point_masses() {
        // (2 + 3)^k
        let a: Vec<f64> = (0..5).map(|k| 2f64.powi(k)).collect();
        let b: Vec<f64> = (0..5).map(|k| 3f64.powi(k)).collect();
        let c = convolve_moments(&a, &b);
        for (k, v) in c.iter().enumerate() {
            assert_eq!(*v, 5f64.powi(k as i32));
        }
    }
}
