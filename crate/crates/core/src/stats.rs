//! Small statistical helpers: moments, percentile intervals, and the
//! two-sample Kolmogorov-Smirnov distance used by the validation harness.

/// Point estimate with a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn degenerate(point: f64) -> Self {
        Estimate {
            point,
            lo: point,
            hi: point,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    if xs.len() < 2 {
        return 0.0;
    }
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (with the n-1 variance).
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::INFINITY;
    }
    let m = mean(xs);
    let var = xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Normal-approximation interval `mean +- z * se`.
pub fn normal_ci(xs: &[f64], z: f64) -> Estimate {
    let m = mean(xs);
    let se = standard_error(xs);
    Estimate {
        point: m,
        lo: m - z * se,
        hi: m + z * se,
    }
}

/// Percentile bracket of a sample (sorts a copy). The bracket is widened to
/// the point estimate if an extreme resampling distribution would otherwise
/// exclude it, so `lo <= point <= hi` always holds.
pub fn percentile_interval(mut samples: Vec<f64>, point: f64, level: f64) -> Estimate {
    if samples.is_empty() {
        return Estimate::degenerate(point);
    }
    samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in bootstrap samples"));
    let alpha = (1.0 - level) / 2.0;
    let lo = quantile_sorted(&samples, alpha).min(point);
    let hi = quantile_sorted(&samples, 1.0 - alpha).max(point);
    Estimate { point, lo, hi }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let idx = pos.floor() as usize;
    let frac = pos - idx as f64;
    if idx + 1 < n {
        sorted[idx] * (1.0 - frac) + sorted[idx + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F1 - F2|`.
pub fn ks2_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a: Vec<f64> = xs.to_vec();
    let mut b: Vec<f64> = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (a.len() as f64, b.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic critical value for the two-sample test at level `alpha`;
/// conservative for tied (integer-valued) samples.
pub fn ks2_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Lag-1 autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    if xs.len() < 3 {
        return 0.0;
    }
    let m = mean(xs);
    let denom: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / denom
}
