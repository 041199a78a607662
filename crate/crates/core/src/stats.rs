//! Small statistical helpers: replication jackknife and the two-sample
//! Kolmogorov–Smirnov test.

use std::ops::{AddAssign, Sub};

/// A point estimate with its standard error (`NaN` when unavailable).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(value: f64, se: f64) -> Self {
        Estimate { value, se }
    }

    /// Whether `target` is within `k` standard errors.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }
}

/// Delete-one jackknife over replications.
///
/// `parts` are per-replication sufficient statistics; the estimate is
/// `stat(sum of parts)` and each pseudo-value drops one replication.
pub fn jackknife<T, F>(parts: &[T], stat: F) -> Estimate
where
    T: Copy + Default + AddAssign + Sub<Output = T>,
    F: Fn(&T) -> f64,
{
    let mut total = T::default();
    for p in parts {
        total += *p;
    }
    let value = stat(&total);
    let r = parts.len();
    if r < 2 {
        return Estimate::new(value, f64::NAN);
    }
    let loo: Vec<f64> = parts.iter().map(|p| stat(&(total - *p))).collect();
    let mean = loo.iter().sum::<f64>() / r as f64;
    let ss: f64 = loo.iter().map(|v| (v - mean).powi(2)).sum();
    Estimate::new(value, ((r - 1) as f64 / r as f64 * ss).sqrt())
}

/// Two-sample Kolmogorov–Smirnov distance `sup |F_a − F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample KS distance at level `alpha`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}
