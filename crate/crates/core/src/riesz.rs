//! The Riesz product `σ = Π_j (1 + cos 2π n_j t)` attached to the growth
//! sequence, its convolution powers, numerical evidence for mutual
//! singularity of the powers, and exact autocorrelations on the tower.
//!
//! Since `m_j ≥ 3`, every integer has at most one signed representation
//! `Σ ε_j n_j` with `ε_j ∈ {-1, 0, 1}`, so the Fourier coefficient of the
//! `p`-th convolution power at `m` is `2^{-p|ε|}` when that representation
//! exists and `0` otherwise.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;
use crate::odometer::RegionSet;
use crate::point_process::{pushforward, sample_poisson};
use crate::stats::{covariance, run_trials, CompensatedSum};

/// Largest level for coefficient maps.
pub const MAX_LEVEL: usize = 18;
/// Largest level for the materialized polynomial expansion.
pub const MAX_EXPANSION_LEVEL: usize = 14;
/// Largest level for grid densities.
pub const MAX_GRID_LEVEL: usize = 24;
/// Largest grid accepted by the density evaluation.
pub const MAX_GRID: u64 = 1 << 28;

/// Signed digits of `m` in the basis `n_0, n_1, …`, or `None` when `m` has
/// no representation with digits in `{-1, 0, 1}`. `ratio(j)` supplies `m_j`.
fn signed_digits(m: &BigInt, mut ratio: impl FnMut(usize) -> Result<u64>) -> Result<Option<Vec<i8>>> {
    let mut rest = m.clone();
    let mut digits = Vec::new();
    while !rest.is_zero() {
        if rest.magnitude() == &BigUint::from(1u32) {
            digits.push(if rest.sign() == num_bigint::Sign::Minus { -1 } else { 1 });
            break;
        }
        let mj = ratio(digits.len())?;
        let r = (&rest % mj + mj) % mj;
        let digit: i8 = if r.is_zero() {
            0
        } else if r == BigInt::from(1) {
            1
        } else if r == BigInt::from(mj - 1) {
            -1
        } else {
            return Ok(None);
        };
        rest = (rest - digit) / mj;
        digits.push(digit);
    }
    Ok(Some(digits))
}

fn out_of_range(e: Error) -> Error {
    match e {
        Error::GrowthExhausted(j) => Error::OutOfRange(format!("growth sequence has no entry {j}")),
        e => e,
    }
}

/// Fourier coefficients of the degree-`J` partial product of the `p`-th
/// convolution power. Stored lazily: coefficients are computed on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct RieszCoefficients {
    level: usize,
    power: u32,
    frequencies: Vec<BigInt>,
    ratios: Vec<u64>,
}

impl RieszCoefficients {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    /// `n_0, …, n_{J-1}`.
    pub fn frequencies(&self) -> &[BigInt] {
        &self.frequencies
    }

    /// Number of nonzero coefficients, `3^J`.
    pub fn len(&self) -> u64 {
        3u64.pow(self.level as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The coefficient at frequency `m`.
    pub fn get(&self, m: &BigInt) -> Dyadic {
        let digits = signed_digits(m, |j| {
            self.ratios.get(j).copied().ok_or(Error::OutOfRange(String::new()))
        });
        match digits {
            Ok(Some(d)) if d.len() <= self.level => {
                Dyadic::pow2_neg(self.power * d.iter().filter(|&&x| x != 0).count() as u32)
            }
            _ => Dyadic::zero(),
        }
    }

    /// Every `(Σ ε_j n_j, 2^{-p|ε|})` over `ε ∈ {-1,0,1}^J`, in lexicographic
    /// order of `ε` with `ε_0` varying fastest.
    pub fn iter(&self) -> impl Iterator<Item = (BigInt, Dyadic)> + '_ {
        (0..self.len()).map(move |code| {
            let eps = decode(code, self.level);
            (self.frequency(&eps), Dyadic::pow2_neg(self.power * weight(&eps)))
        })
    }

    /// `Σ ε_j n_j`.
    pub fn frequency(&self, eps: &[i8]) -> BigInt {
        eps.iter().zip(&self.frequencies).map(|(&e, n)| n * BigInt::from(e)).sum()
    }

    /// All coefficients as a map.
    pub fn to_map(&self) -> BTreeMap<BigInt, Dyadic> {
        self.iter().collect()
    }
}

/// `ε` from its base-3 code, digit `0 ↦ 0`, `1 ↦ 1`, `2 ↦ -1`.
pub fn decode(mut code: u64, level: usize) -> Vec<i8> {
    (0..level)
        .map(|_| {
            let d = (code % 3) as i8;
            code /= 3;
            if d == 2 {
                -1
            } else {
                d
            }
        })
        .collect()
}

fn weight(eps: &[i8]) -> u32 {
    eps.iter().filter(|&&e| e != 0).count() as u32
}

fn check_level(level: usize, cap: usize) -> Result<()> {
    if level > cap {
        return Err(Error::LevelTooLarge { level, cap });
    }
    Ok(())
}

fn frequencies(spec: &GrowthSpec, level: usize) -> Result<(Vec<BigInt>, Vec<u64>)> {
    let n = (0..level).map(|j| spec.n(j).map(|x| BigInt::from(x.clone()))).collect::<Result<Vec<_>>>();
    let m = (0..level).map(|j| spec.m(j)).collect::<Result<Vec<_>>>();
    Ok((n.map_err(out_of_range)?, m.map_err(out_of_range)?))
}

/// Coefficients of `Π_{j<J} (1 + cos 2π n_j t)`.
pub fn partial_coeffs(spec: &GrowthSpec, level: usize) -> Result<RieszCoefficients> {
    convolution_power_coeffs(spec, 1, level)
}

/// Coefficients of `Π_{j<J} (1 + 2^{1-p} cos 2π n_j t)`, the partial product
/// of `σ^{*p}`.
pub fn convolution_power_coeffs(spec: &GrowthSpec, power: u32, level: usize) -> Result<RieszCoefficients> {
    if power == 0 {
        return Err(Error::InvalidParameter("convolution power must be at least 1".into()));
    }
    check_level(level, MAX_LEVEL)?;
    let (frequencies, ratios) = frequencies(spec, level)?;
    Ok(RieszCoefficients { level, power, frequencies, ratios })
}

/// `σ̂^{*p}(m)` for the infinite product.
pub fn coeff_at_power(spec: &GrowthSpec, m: &BigInt, power: u32) -> Result<Dyadic> {
    let digits = signed_digits(m, |j| spec.m(j)).map_err(out_of_range)?;
    Ok(match digits {
        Some(d) => Dyadic::pow2_neg(power * weight(&d)),
        None => Dyadic::zero(),
    })
}

/// `σ̂(m)` for the infinite product.
pub fn coeff_at(spec: &GrowthSpec, m: &BigInt) -> Result<Dyadic> {
    coeff_at_power(spec, m, 1)
}

/// The partial product expanded by repeated polynomial multiplication with
/// `1 + 2^{-p}(z^{n_j} + z^{-n_j})`, independently of the digit algorithm.
pub fn expand_partial_product(spec: &GrowthSpec, power: u32, level: usize) -> Result<BTreeMap<BigInt, Dyadic>> {
    if power == 0 {
        return Err(Error::InvalidParameter("convolution power must be at least 1".into()));
    }
    check_level(level, MAX_EXPANSION_LEVEL)?;
    let (freqs, _) = frequencies(spec, level)?;
    let half = Dyadic::pow2_neg(power);
    let mut poly: HashMap<BigInt, Dyadic> = HashMap::from([(BigInt::zero(), Dyadic::one())]);
    for n in &freqs {
        let mut next: HashMap<BigInt, Dyadic> = HashMap::with_capacity(poly.len() * 3);
        for (k, c) in &poly {
            let side = c * &half;
            *next.entry(k.clone()).or_insert_with(Dyadic::zero) += c;
            *next.entry(k + n).or_insert_with(Dyadic::zero) += &side;
            *next.entry(k - n).or_insert_with(Dyadic::zero) += &side;
        }
        next.retain(|_, c| !c.is_zero());
        poly = next;
    }
    Ok(poly.into_iter().collect())
}

/// Two distinct `ε ∈ {-1,0,1}^J` with the same `Σ ε_j n_j`, if any.
pub fn find_collision(spec: &GrowthSpec, level: usize) -> Result<Option<(Vec<i8>, Vec<i8>)>> {
    let coeffs = partial_coeffs(spec, level)?;
    let mut seen: HashMap<BigInt, u64> = HashMap::with_capacity(coeffs.len() as usize);
    for code in 0..coeffs.len() {
        let f = coeffs.frequency(&decode(code, level));
        if let Some(&other) = seen.get(&f) {
            return Ok(Some((decode(other, level), decode(code, level))));
        }
        seen.insert(f, code);
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityReport {
    pub p: u32,
    pub q: u32,
    pub level: usize,
    pub grid: u64,
    /// `S_J = Σ_{j<J} (2^{1-p} - 2^{1-q})²`, exact.
    pub divergence_witness: Dyadic,
    /// The constant summand `(2^{1-p} - 2^{1-q})²`.
    pub witness_step: Dyadic,
    /// `∫ min(f_p, f_q) dt` on the grid.
    pub overlap: f64,
    pub mass_p: f64,
    pub mass_q: f64,
    pub min_density: f64,
}

/// `2^{⌈log₂(2 n_J)⌉ + 2}`.
pub fn default_grid(spec: &GrowthSpec, level: usize) -> Result<u64> {
    let needed = spec.n(level).map_err(out_of_range)? * 2u32;
    let bits = (&needed - 1u32).bits() + 2;
    if bits > 62 {
        return Err(Error::InvalidParameter(format!("grid for level {level} exceeds 2^62 points")));
    }
    Ok(1u64 << bits)
}

fn check_grid(spec: &GrowthSpec, level: usize, grid: u64) -> Result<()> {
    let needed = spec.n(level).map_err(out_of_range)? * 2u32;
    if !grid.is_power_of_two() || BigUint::from(grid) < needed {
        return Err(Error::GridTooCoarse { grid, needed: needed.to_string() });
    }
    if grid > MAX_GRID {
        return Err(Error::InvalidParameter(format!("grid {grid} exceeds {MAX_GRID} points")));
    }
    Ok(())
}

/// The densities `f_p(i/N)` and `f_q(i/N)` for one grid index. Angles are
/// reduced exactly as `n_j i mod N` before conversion to floating point.
fn densities_at(i: u64, grid: u64, residues: &[u64], ap: f64, aq: f64) -> (f64, f64) {
    let mut fp = 1.0;
    let mut fq = 1.0;
    for &r in residues {
        let k = (r as u128 * i as u128 % grid as u128) as f64;
        let c = (std::f64::consts::TAU * k / grid as f64).cos();
        fp *= 1.0 + ap * c;
        fq *= 1.0 + aq * c;
    }
    (fp, fq)
}

fn grid_setup(spec: &GrowthSpec, level: usize, grid: u64) -> Result<Vec<u64>> {
    check_level(level, MAX_GRID_LEVEL)?;
    check_grid(spec, level, grid)?;
    (0..level)
        .map(|j| Ok((spec.n(j).map_err(out_of_range)? % grid).to_u64().expect("residue below grid")))
        .collect()
}

/// Divergence witness and grid overlap of the degree-`J` partial products
/// of `σ^{*p}` and `σ^{*q}`.
pub fn singularity_evidence(spec: &GrowthSpec, p: u32, q: u32, level: usize, grid: u64) -> Result<SingularityReport> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidParameter("convolution powers must be at least 1".into()));
    }
    let residues = grid_setup(spec, level, grid)?;
    let ap = Dyadic::pow2_neg(p - 1);
    let aq = Dyadic::pow2_neg(q - 1);
    let step = (&ap - &aq) * (&ap - &aq);
    let witness: Dyadic = std::iter::repeat_n(&step, level).sum();
    let (ap, aq) = (ap.to_f64(), aq.to_f64());

    const BLOCK: u64 = 1 << 14;
    let blocks: Vec<[f64; 4]> = (0..grid.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut sums = [CompensatedSum::default(); 3];
            let mut low = f64::INFINITY;
            for i in b * BLOCK..((b + 1) * BLOCK).min(grid) {
                let (fp, fq) = densities_at(i, grid, &residues, ap, aq);
                sums[0].add(fp.min(fq));
                sums[1].add(fp);
                sums[2].add(fq);
                low = low.min(fp).min(fq);
            }
            [sums[0].value(), sums[1].value(), sums[2].value(), low]
        })
        .collect();
    let total = |k: usize| blocks.iter().map(|b| b[k]).collect::<CompensatedSum>().value() / grid as f64;
    Ok(SingularityReport {
        p,
        q,
        level,
        grid,
        divergence_witness: witness,
        witness_step: step,
        // periodic trapezoid rule: the endpoint repeats the first sample
        overlap: total(0),
        mass_p: total(1),
        mass_q: total(2),
        min_density: blocks.iter().map(|b| b[3]).fold(f64::INFINITY, f64::min),
    })
}

/// Writes `t,f_p,f_q` rows for every grid point.
pub fn write_density_csv<W: Write>(
    out: &mut W,
    spec: &GrowthSpec,
    p: u32,
    q: u32,
    level: usize,
    grid: u64,
) -> Result<()> {
    let residues = grid_setup(spec, level, grid)?;
    let ap = Dyadic::pow2_neg(p.max(1) - 1).to_f64();
    let aq = Dyadic::pow2_neg(q.max(1) - 1).to_f64();
    let io = |e: std::io::Error| Error::InvalidParameter(format!("writing density dump: {e}"));
    writeln!(out, "t,f_p,f_q").map_err(io)?;
    for i in 0..grid {
        let (fp, fq) = densities_at(i, grid, &residues, ap, aq);
        writeln!(out, "{},{fp},{fq}", i as f64 / grid as f64).map_err(io)?;
    }
    Ok(())
}

/// `μ(A ∩ T^{-lag} A)` with its normalization by `μ(A)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Autocorrelation {
    pub lag: u64,
    pub value: Dyadic,
    pub normalized: f64,
}

fn require_exact(a: &RegionSet) -> Result<()> {
    if !a.tail_bound().is_zero() {
        return Err(Error::InvalidParameter("set must be a finite union of rectangles".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(())
}

/// `μ(A ∩ T^{-lag} A) = μ(T^{lag} A ∩ A)`, computed from forward images,
/// which are exact for rectangles.
pub fn autocorr_exact(a: &RegionSet, lag: u64, spec: &GrowthSpec) -> Result<Autocorrelation> {
    require_exact(a)?;
    let mut image = a.clone();
    for _ in 0..lag {
        image = image.image(spec)?.coalesce();
    }
    let value = image.intersection(a).mass();
    let normalized = value.to_f64() / a.mass().to_f64();
    Ok(Autocorrelation { lag, value, normalized })
}

/// The same quantity through iterated preimages, which truncate at the
/// growth spec's class bound: returns the tracked mass and the bound on
/// what was dropped.
pub fn autocorr_by_preimage(a: &RegionSet, lag: u64, spec: &GrowthSpec) -> Result<(Dyadic, Dyadic)> {
    require_exact(a)?;
    let mut pre = a.clone();
    for _ in 0..lag {
        pre = pre.preimage(spec)?.coalesce();
    }
    let both = a.intersection(&pre);
    Ok((both.mass(), both.tail_bound().clone()))
}

/// Monte Carlo estimate of `Cov(N(A), N(A) ∘ T_*^{lag})` from Poisson samples
/// on `A`. Atoms outside `A` never affect this covariance, so sampling on `A`
/// alone is exact in law for it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AutocorrEstimate {
    pub lag: u64,
    pub covariance: f64,
    pub se: f64,
    pub trials: usize,
}

pub fn autocorr_monte_carlo(a: &RegionSet, lag: u64, trials: usize, seed: u64, spec: &GrowthSpec) -> Result<AutocorrEstimate> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 trials, got {trials}")));
    }
    let steps = i64::try_from(lag).map_err(|_| Error::InvalidParameter(format!("lag {lag} too large")))?;
    let pairs = run_trials(trials, seed, |s| {
        let nu = sample_poisson(a, s, spec)?;
        let moved = pushforward(&nu, steps, spec)?;
        Ok((nu.count(a) as f64, moved.count(a) as f64))
    })
    .into_iter()
    .collect::<Result<Vec<(f64, f64)>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let c = covariance(&xs, &ys);
    Ok(AutocorrEstimate { lag, covariance: c.mean, se: c.se, trials })
}

/// `n_0, …, n_{max_j}` as lags.
pub fn lags_along_heights(spec: &GrowthSpec, max_j: usize) -> Result<Vec<u64>> {
    (0..=max_j)
        .map(|j| {
            let n = spec.n(j).map_err(out_of_range)?;
            n.to_u64().ok_or_else(|| Error::OutOfRange(format!("n_{j} does not fit a lag")))
        })
        .collect()
}

/// The constant term is 1 and coefficients are symmetric under `m ↦ -m`.
pub fn check_invariants(c: &RieszCoefficients) -> bool {
    c.get(&BigInt::zero()) == Dyadic::one() && c.iter().all(|(m, v)| c.get(&-m) == v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn digits_for_m_three() {
        let r = |_: usize| Ok(3u64);
        assert_eq!(signed_digits(&big(0), r).unwrap(), Some(vec![]));
        assert_eq!(signed_digits(&big(2), r).unwrap(), Some(vec![-1, 1]));
        assert_eq!(signed_digits(&big(-4), r).unwrap(), Some(vec![-1, -1]));
        // balanced ternary reaches every integer: 5 = 9 - 3 - 1
        assert_eq!(signed_digits(&big(5), r).unwrap(), Some(vec![-1, -1, 1]));
        // with ratio 5 the residue 2 has no signed digit
        assert_eq!(signed_digits(&big(2), |_| Ok(5)).unwrap(), None);
    }

    #[test]
    fn decode_covers_all_vectors() {
        let all: std::collections::HashSet<Vec<i8>> = (0..27).map(|c| decode(c, 3)).collect();
        assert_eq!(all.len(), 27);
        assert_eq!(decode(0, 3), vec![0, 0, 0]);
        assert_eq!(decode(5, 2), vec![-1, 1]);
    }

    #[test]
    fn default_grid_oversamples() {
        let spec = GrowthSpec::default();
        // n_10 = 59049, 2 n_10 = 118098 < 2^17
        assert_eq!(default_grid(&spec, 10).unwrap(), 1 << 19);
        assert_eq!(default_grid(&spec, 0).unwrap(), 1 << 3);
    }
}
