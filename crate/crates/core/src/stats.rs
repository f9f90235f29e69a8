//! Small statistics helpers for the Monte Carlo checks.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

/// Neumaier-compensated running sum. Deterministic for a fixed input order.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    correction: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction += (self.sum - t) + x;
        } else {
            self.correction += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.correction
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
    pub trials: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n.max(1) as f64;
        let variance = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).collect::<CompensatedSum>().value() / (n - 1) as f64
        } else {
            0.0
        };
        Estimate { mean, variance, se: (variance / n.max(1) as f64).sqrt(), trials: n }
    }

    /// Standard error of the sample variance, using the fourth central moment.
    pub fn variance_se(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let e = Estimate::from_samples(xs);
        let m4 = xs.iter().map(|x| (x - e.mean).powi(4)).sum::<f64>() / n;
        ((m4 - e.variance * e.variance * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }

    /// How many standard errors the mean lies from `target`.
    pub fn z_against(&self, target: f64) -> f64 {
        z_score(self.mean - target, self.se)
    }
}

/// `diff / se`, with a zero-variance difference treated as exact.
pub fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Sample covariance of paired observations and its standard error.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Estimate {
    let mx = Estimate::from_samples(xs).mean;
    let my = Estimate::from_samples(ys).mean;
    let n = xs.len() as f64;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my) * n / (n - 1.0)).collect();
    Estimate::from_samples(&prods)
}

/// Pearson correlation; zero when either side is constant.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let c = covariance(xs, ys).mean;
    let vx = Estimate::from_samples(xs).variance;
    let vy = Estimate::from_samples(ys).variance;
    if vx > 0.0 && vy > 0.0 {
        c / (vx * vy).sqrt()
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

/// Goodness of fit of observed counts against `Poisson(lambda)`.
///
/// Bins are `0, 1, …` merged from the right so every expected count is at
/// least 5; the last bin collects the upper tail.
pub fn chi_square_poisson(counts: &[u64], lambda: f64) -> ChiSquareReport {
    let n = counts.len() as f64;
    let dist = Poisson::new(lambda).expect("positive Poisson mean");
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0f64; max as usize + 1];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut cum = 0.0;
    let mut k = 0u64;
    loop {
        let p = dist.pmf(k);
        let expected = n * p;
        let remaining = n * (1.0 - cum - p);
        if remaining < 5.0 {
            // final bin: k and above
            let obs: f64 = observed.iter().skip(k as usize).sum();
            bins.push((obs, n * (1.0 - cum)));
            break;
        }
        bins.push((observed.get(k as usize).copied().unwrap_or(0.0), expected));
        cum += p;
        k += 1;
    }
    // fold leading bins with small expectation into their neighbour
    while bins.len() > 1 && bins[0].1 < 5.0 {
        let (o, e) = bins.remove(0);
        bins[0].0 += o;
        bins[0].1 += e;
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len().saturating_sub(1).max(1);
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(statistic);
    ChiSquareReport { statistic, dof, p_value, bins: bins.len() }
}

pub fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    Poisson::new(lambda).expect("positive Poisson mean").pmf(k)
}

/// Runs `trials` independent trials in parallel. Trial `t` receives the
/// seed `derive(seed, t)`; results come back in trial order regardless of
/// scheduling.
pub fn run_trials<T, F>(trials: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(|t| f(crate::rng::derive(seed, t))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }

    #[test]
    fn estimate_basics() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.variance - 5.0 / 3.0).abs() < 1e-12);
        assert!((e.se - (5.0 / 12.0f64).sqrt()).abs() < 1e-12);
        assert_eq!(z_score(0.0, 0.0), 0.0);
        assert!(z_score(1.0, 0.0).is_infinite());
    }

    #[test]
    fn covariance_of_linear_pair() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 4.0, 6.0, 8.0];
        assert!((covariance(&xs, &ys).mean - 10.0 / 3.0).abs() < 1e-12);
        assert!((correlation(&xs, &ys) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_accepts_exact_frequencies() {
        // counts laid out in exact Poisson(1) proportions fit perfectly
        let n = 100_000usize;
        let mut counts = Vec::new();
        for k in 0..12u64 {
            let c = (n as f64 * poisson_pmf(k, 1.0)).round() as usize;
            counts.extend(std::iter::repeat_n(k, c));
        }
        let r = chi_square_poisson(&counts, 1.0);
        assert!(r.p_value > 0.99, "{r:?}");
        let shifted: Vec<u64> = counts.iter().map(|c| c + 1).collect();
        assert!(chi_square_poisson(&shifted, 1.0).p_value < 1e-6);
    }
}
