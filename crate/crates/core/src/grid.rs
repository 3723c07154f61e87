//! Sample grids on `(-1, 1)`.

use std::f64::consts::PI;

/// `n` Chebyshev-Gauss nodes in ascending order, clustered toward the poles.
///
/// Written through `sin` so the grid is exactly odd-symmetric and the middle
/// node of an odd-sized grid is exactly `0`.
pub fn chebyshev(n: usize) -> Vec<f64> {
    let m = n as f64;
    (0..n)
        .map(|i| (PI * (2.0 * i as f64 - m + 1.0) / (2.0 * m)).sin())
        .collect()
}

/// `n` equispaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Chebyshev nodes plus `x = ±(1 - 10^-k)` for `k = 2..=max_decade`, sorted.
pub fn pole_refined(n: usize, max_decade: i32) -> Vec<f64> {
    let mut xs = chebyshev(n);
    for k in 2..=max_decade {
        let s = 10f64.powi(-k);
        xs.push(-1.0 + s);
        xs.push(1.0 - s);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_is_symmetric_with_exact_center() {
        let xs = chebyshev(5);
        assert_eq!(xs[2], 0.0);
        for i in 0..5 {
            assert_eq!(xs[i], -xs[4 - i]);
        }
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        let big = chebyshev(1000);
        assert!(big[0] > -1.0 && big[999] < 1.0);
        assert!(1.0 - big[999] > 1e-6);
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(-0.99, 0.99, 3), vec![-0.99, 0.0, 0.99]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn refined_reaches_decade() {
        let xs = pole_refined(10, 7);
        assert_eq!(xs[0], -1.0 + 1e-7);
        assert_eq!(*xs.last().unwrap(), 1.0 - 1e-7);
    }
}
