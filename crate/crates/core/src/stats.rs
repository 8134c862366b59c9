//! Small statistics toolkit: order-insensitive reductions, standard errors,
//! autocorrelation-based effective sample sizes and the two-sample
//! Kolmogorov–Smirnov test.

/// Pairwise (cascade) summation; rounding error grows like `log n`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (n - 1) as f64
}

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let se = if n >= 2 { (variance(values) / n as f64).sqrt() } else { f64::NAN };
        Self { mean: mean(values), se, n }
    }
}

/// Sample autocorrelation at lags `0..=max_lag`.
pub fn autocorrelation(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    let m = mean(values);
    let centered: Vec<f64> = values.iter().map(|x| x - m).collect();
    let c0: f64 = pairwise_sum(&centered.iter().map(|x| x * x).collect::<Vec<_>>()) / n as f64;
    if c0 == 0.0 {
        return vec![1.0; 1];
    }
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|lag| {
            let s: f64 = centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum();
            s / n as f64 / c0
        })
        .collect()
}

/// Integrated autocorrelation time `1 + 2 Σ ρ(k)` with Sokal's automatic
/// window (smallest `W` with `W >= c·τ(W)`, `c = 5`).
pub fn integrated_autocorrelation_time(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 4 {
        return 1.0;
    }
    let rho = autocorrelation(values, n / 2);
    let mut tau = 1.0;
    for (w, r) in rho.iter().enumerate().skip(1) {
        tau += 2.0 * r;
        if (w as f64) >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Effective number of independent samples, at most `n`.
pub fn effective_sample_size(values: &[f64]) -> f64 {
    values.len() as f64 / integrated_autocorrelation_time(values)
}

/// Two-sample KS statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut xa: Vec<f64> = a.to_vec();
    let mut xb: Vec<f64> = b.to_vec();
    xa.sort_by(|x, y| x.total_cmp(y));
    xb.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} e^{-2 j² λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic two-sample KS p-value for statistic `d` with effective sizes
/// `na`, `nb`, using the small-sample correction
/// `λ = (√n + 0.12 + 0.11/√n) d` with `n = na·nb/(na+nb)`.
pub fn ks_p_value(d: f64, na: f64, nb: f64) -> f64 {
    let ne = na * nb / (na + nb);
    let s = ne.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// Trapezoidal integral of samples `y` at increasing times `t`.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    let parts: Vec<f64> = t
        .windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .collect();
    pairwise_sum(&parts)
}
