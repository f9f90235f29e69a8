//! Poisson configurations on finite-measure regions of the tower.
//!
//! Sampling is count-then-locations: `N ~ Poisson(Λ)` with `Λ` the tracked
//! mass of the region, then each atom independently picks a rectangle in
//! proportion to its mass, a uniform level in it, and a word in its cylinder.
//! Atom `i` of seed `s` draws from its own substream, and its word tail is the
//! bit stream keyed by `derive(s, i)`, so later dynamics stay reproducible.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde_json::{json, Value};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;
use crate::odometer::{bits_to_string, parse_bits, LazyWord, Rectangle, RegionSet, TowerPoint};
use crate::rng::{chacha, derive, BitStream};

/// A finite configuration `ν = Σ δ_{x_i}` sampled on `support`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingMeasure {
    atoms: Vec<TowerPoint>,
    support: RegionSet,
    seeds: Vec<u64>,
}

/// A configuration whose atoms carry independent uniform marks in `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedCountingMeasure {
    atoms: Vec<(TowerPoint, f64)>,
    support: RegionSet,
    seeds: Vec<u64>,
}

impl CountingMeasure {
    pub fn empty(support: RegionSet) -> Self {
        CountingMeasure { atoms: Vec::new(), support, seeds: Vec::new() }
    }

    /// A configuration with given atoms, none of which may lie outside `support`.
    pub fn from_atoms(atoms: Vec<TowerPoint>, support: RegionSet, seeds: Vec<u64>) -> Result<Self> {
        if let Some(p) = atoms.iter().find(|p| !support.contains(p)) {
            return Err(Error::InvalidParameter(format!("atom {p:?} outside the support region")));
        }
        Ok(CountingMeasure { atoms, support, seeds })
    }

    pub fn atoms(&self) -> &[TowerPoint] {
        &self.atoms
    }

    pub fn support(&self) -> &RegionSet {
        &self.support
    }

    pub fn seed_trace(&self) -> &[u64] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Untracked mass of the support that was not sampled.
    pub fn tail_mass(&self) -> &Dyadic {
        self.support.tail_bound()
    }

    /// `N(A)(ν) = ν(A)`.
    pub fn count(&self, region: &RegionSet) -> usize {
        self.atoms.iter().filter(|p| region.contains(p)).count()
    }

    pub fn count_rect(&self, rect: &Rectangle) -> usize {
        self.atoms.iter().filter(|p| rect.contains(p)).count()
    }

    /// Number of atoms equal to an earlier atom. Coincident atoms are kept.
    pub fn duplicate_atoms(&self) -> usize {
        let mut seen = HashSet::new();
        self.atoms.iter().filter(|p| !seen.insert((*p).clone())).count()
    }

    /// JSON lines: a header object followed by one object per atom.
    pub fn to_jsonl(&self, extra_header: Value) -> Result<String> {
        let header = header_json(&self.support, &self.seeds, self.atoms.len(), self.duplicate_atoms(), extra_header);
        let mut out = serde_json::to_string(&header).expect("json");
        out.push('\n');
        for p in &self.atoms {
            out.push_str(&serde_json::to_string(&atom_json(p, None)?).expect("json"));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str, spec: &GrowthSpec) -> Result<Self> {
        let (support, seeds, atoms) = parse_jsonl(text, spec)?;
        CountingMeasure::from_atoms(atoms.into_iter().map(|(p, _)| p).collect(), support, seeds)
    }
}

impl MarkedCountingMeasure {
    pub fn atoms(&self) -> &[(TowerPoint, f64)] {
        &self.atoms
    }

    pub fn support(&self) -> &RegionSet {
        &self.support
    }

    pub fn seed_trace(&self) -> &[u64] {
        &self.seeds
    }

    pub fn unmarked(&self) -> CountingMeasure {
        CountingMeasure {
            atoms: self.atoms.iter().map(|(p, _)| p.clone()).collect(),
            support: self.support.clone(),
            seeds: self.seeds.clone(),
        }
    }

    pub fn to_jsonl(&self, extra_header: Value) -> Result<String> {
        let unmarked = self.unmarked();
        let header = header_json(&self.support, &self.seeds, self.atoms.len(), unmarked.duplicate_atoms(), extra_header);
        let mut out = serde_json::to_string(&header).expect("json");
        out.push('\n');
        for (p, mark) in &self.atoms {
            out.push_str(&serde_json::to_string(&atom_json(p, Some(*mark))?).expect("json"));
            out.push('\n');
        }
        Ok(out)
    }
}

fn header_json(support: &RegionSet, seeds: &[u64], atoms: usize, duplicates: usize, extra: Value) -> Value {
    let mut header = json!({
        "type": "header",
        "region": support.to_json(),
        "seeds": seeds,
        "tail_mass": support.tail_bound().to_string(),
        "atoms": atoms,
        "duplicates": duplicates,
    });
    if let (Value::Object(h), Value::Object(e)) = (&mut header, extra) {
        h.extend(e);
    }
    header
}

fn atom_json(p: &TowerPoint, mark: Option<f64>) -> Result<Value> {
    let mut v = json!({
        "prefix": bits_to_string(&p.word().column_prefix()?),
        "level": p.level().to_string(),
        "stream": format!("{:016x}", p.word().stream().key()),
    });
    if let Some(m) = mark {
        v["mark"] = json!(m);
    }
    Ok(v)
}

type ParsedAtoms = (RegionSet, Vec<u64>, Vec<(TowerPoint, Option<f64>)>);

fn parse_jsonl(text: &str, spec: &GrowthSpec) -> Result<ParsedAtoms> {
    let bad = |m: String| Error::InvalidParameter(format!("bad configuration JSON: {m}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Value = serde_json::from_str(lines.next().ok_or_else(|| bad("empty input".into()))?)
        .map_err(|e| bad(e.to_string()))?;
    let support = RegionSet::from_json(&header["region"], spec)?;
    let seeds = header["seeds"]
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_u64).collect())
        .unwrap_or_default();
    let mut atoms = Vec::new();
    for line in lines {
        let v: Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let prefix = v["prefix"].as_str().and_then(parse_bits).ok_or_else(|| bad(format!("prefix in {v}")))?;
        let key = v["stream"]
            .as_str()
            .and_then(|s| u64::from_str_radix(s, 16).ok())
            .ok_or_else(|| bad(format!("stream in {v}")))?;
        let level: BigUint = v["level"].as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad(format!("level in {v}")))?;
        let word = LazyWord::new(prefix, BitStream::new(key), spec.cap_depth())?;
        atoms.push((TowerPoint::new(word, level, spec)?, v["mark"].as_f64()));
    }
    Ok((support, seeds, atoms))
}

fn uniform_below(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    if let Some(b) = bound.to_u64() {
        return BigUint::from(rng.random_range(0..b));
    }
    // rejection sampling on bit strings of the bound's length
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = bytes as u64 * 8 - bits;
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill(&mut buf[..]);
        let candidate = BigUint::from_bytes_le(&buf) >> excess;
        if &candidate < bound {
            return candidate;
        }
    }
}

/// One atom with law `μ|region / Λ` and a uniform mark, drawn from
/// substream `index` of `seed`.
fn sample_atom(
    region: &RegionSet,
    cumulative: &[f64],
    seed: u64,
    index: u64,
    spec: &GrowthSpec,
) -> Result<(TowerPoint, f64)> {
    let mut rng = chacha(seed, index + 1);
    let total = *cumulative.last().expect("non-empty region");
    let u = rng.random::<f64>() * total;
    let which = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
    let rect = &region.parts()[which];
    let level = rect.lo() + uniform_below(&mut rng, &rect.width());
    let word = LazyWord::new(rect.bits().to_vec(), BitStream::new(derive(seed, index)), spec.cap_depth())?;
    let mark = rng.random::<f64>();
    Ok((TowerPoint::new(word, level, spec)?, mark))
}

/// Marked Poisson sample with intensity `μ ⊗ λ_[0,1]` on the tracked part of `region`.
pub fn sample_marked(region: &RegionSet, seed: u64, spec: &GrowthSpec) -> Result<MarkedCountingMeasure> {
    let lambda = region.mass().to_f64();
    if lambda <= 0.0 {
        return Err(Error::EmptyRegion);
    }
    let mut acc = 0.0;
    let cumulative: Vec<f64> = region
        .parts()
        .iter()
        .map(|r| {
            acc += r.measure().to_f64();
            acc
        })
        .collect();
    let count = Poisson::new(lambda)
        .map_err(|e| Error::InvalidParameter(format!("Poisson mean {lambda}: {e}")))?
        .sample(&mut chacha(seed, 0)) as u64;
    let atoms = (0..count)
        .map(|i| sample_atom(region, &cumulative, seed, i, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarkedCountingMeasure { atoms, support: region.clone(), seeds: vec![seed] })
}

/// A single point with law `μ|rect / μ(rect)`, drawn from `seed`.
pub fn uniform_point(rect: &Rectangle, seed: u64, spec: &GrowthSpec) -> Result<TowerPoint> {
    let mut rng = chacha(seed, 0);
    let level = rect.lo() + uniform_below(&mut rng, &rect.width());
    let word = LazyWord::new(rect.bits().to_vec(), BitStream::new(derive(seed, u64::MAX)), spec.cap_depth())?;
    TowerPoint::new(word, level, spec)
}

/// Poisson sample with intensity `μ` restricted to the tracked part of `region`.
pub fn sample_poisson(region: &RegionSet, seed: u64, spec: &GrowthSpec) -> Result<CountingMeasure> {
    Ok(sample_marked(region, seed, spec)?.unmarked())
}

/// `Ψ(ν₁, ν₂) = ν₁ + ν₂`.
pub fn superpose(a: &CountingMeasure, b: &CountingMeasure) -> Result<CountingMeasure> {
    if let Some(&s) = a.seeds.iter().find(|s| b.seeds.contains(s)) {
        return Err(Error::SeedCollision(s));
    }
    let mut atoms = a.atoms.clone();
    atoms.extend(b.atoms.iter().cloned());
    let mut seeds = a.seeds.clone();
    seeds.extend(&b.seeds);
    Ok(CountingMeasure { atoms, support: a.support.union(&b.support), seeds })
}

/// Atoms with mark `≤ c` and the rest, in sampling order.
pub fn split(nu: &MarkedCountingMeasure, c: f64) -> Result<(CountingMeasure, CountingMeasure)> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParameter(format!("thinning level {c} not in (0, 1]")));
    }
    let (kept, dropped): (Vec<_>, Vec<_>) = nu.atoms.iter().partition(|(_, m)| *m <= c);
    let build = |v: Vec<&(TowerPoint, f64)>| CountingMeasure {
        atoms: v.into_iter().map(|(p, _)| p.clone()).collect(),
        support: nu.support.clone(),
        seeds: nu.seeds.clone(),
    };
    Ok((build(kept), build(dropped)))
}

/// `ν ↦ ν(· × [0, c])`.
pub fn thin(nu: &MarkedCountingMeasure, c: f64) -> Result<CountingMeasure> {
    Ok(split(nu, c)?.0)
}

/// `T_*^steps ν = ν ∘ T^{-steps}`: each atom moves by `T^steps` and the
/// support is carried along symbolically.
pub fn pushforward(nu: &CountingMeasure, steps: i64, spec: &GrowthSpec) -> Result<CountingMeasure> {
    let atoms = nu.atoms.iter().map(|p| p.iterate(steps, spec)).collect::<Result<Vec<_>>>()?;
    let support = nu.support.transport(steps, spec)?.coalesce();
    Ok(CountingMeasure { atoms, support, seeds: nu.seeds.clone() })
}

pub fn count(nu: &CountingMeasure, region: &RegionSet) -> usize {
    nu.count(region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odometer::window;
    use crate::stats::{chi_square_poisson, covariance, run_trials, Estimate};

    fn spec() -> GrowthSpec {
        GrowthSpec::default()
    }

    #[test]
    fn empty_region_is_an_error() {
        assert_eq!(sample_poisson(&RegionSet::empty(), 1, &spec()), Err(Error::EmptyRegion));
    }

    #[test]
    fn deterministic_from_seed() {
        let s = spec();
        let w = window(5, 30, &s).unwrap();
        let a = sample_marked(&w, 17, &s).unwrap();
        let b = sample_marked(&w, 17, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_jsonl(json!({})).unwrap(), b.to_jsonl(json!({})).unwrap());
        assert_ne!(sample_marked(&w, 18, &s).unwrap(), a);
    }

    #[test]
    fn atoms_lie_in_support() {
        let s = spec();
        let w = window(20, 30, &s).unwrap();
        for seed in 0..50 {
            let nu = sample_poisson(&w, seed, &s).unwrap();
            assert!(nu.atoms().iter().all(|p| w.contains(p)));
            assert_eq!(nu.count(&w), nu.len());
        }
    }

    #[test]
    fn count_mean_matches_mass() {
        let s = spec();
        let w = window(3, 30, &s).unwrap();
        let mass = w.mass().to_f64();
        let counts: Vec<f64> = run_trials(20_000, 5, |t| sample_poisson(&w, t, &s).unwrap().len() as f64);
        let e = Estimate::from_samples(&counts);
        assert!(e.z_against(mass).abs() < 3.0, "{e:?} vs {mass}");
    }

    #[test]
    fn disjoint_counts_uncorrelated() {
        let s = spec();
        let a = RegionSet::from(Rectangle::class(0, 1, 1, &s).unwrap());
        let b = RegionSet::from(Rectangle::class(2, 1, 4, &s).unwrap());
        let region = a.union(&b);
        let pairs: Vec<(f64, f64)> = run_trials(20_000, 9, |t| {
            let nu = sample_poisson(&region, t, &s).unwrap();
            (nu.count(&a) as f64, nu.count(&b) as f64)
        });
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let c = covariance(&xs, &ys);
        assert!(c.z_against(0.0).abs() < 3.0, "{c:?}");
        // marginal law of N(b) is Poisson(μ(b)) = Poisson(1/2)
        let counts: Vec<u64> = ys.iter().map(|&y| y as u64).collect();
        assert!(chi_square_poisson(&counts, 0.5).p_value > 0.001);
    }

    #[test]
    fn superpose_identity_and_collision() {
        let s = spec();
        let w = window(2, 30, &s).unwrap();
        let nu = sample_poisson(&w, 3, &s).unwrap();
        let sum = superpose(&nu, &CountingMeasure::empty(w.clone())).unwrap();
        assert_eq!(sum.atoms(), nu.atoms());
        assert_eq!(superpose(&nu, &nu), Err(Error::SeedCollision(3)));
        let other = sample_poisson(&w, 4, &s).unwrap();
        let both = superpose(&nu, &other).unwrap();
        let rect = RegionSet::from(Rectangle::class(1, 1, 2, &s).unwrap());
        assert_eq!(both.count(&rect), nu.count(&rect) + other.count(&rect));
    }

    #[test]
    fn thinning_nests() {
        let s = spec();
        let w = window(10, 30, &s).unwrap();
        for seed in 0..30 {
            let nu = sample_marked(&w, seed, &s).unwrap();
            assert_eq!(thin(&nu, 1.0).unwrap().atoms(), nu.unmarked().atoms());
            let small = thin(&nu, 0.25).unwrap();
            let big = thin(&nu, 0.6).unwrap();
            let mut it = big.atoms().iter();
            assert!(small.atoms().iter().all(|p| it.any(|q| q == p)));
        }
        let nu = sample_marked(&w, 0, &s).unwrap();
        assert!(thin(&nu, 0.0).is_err());
        assert!(thin(&nu, 1.5).is_err());
    }

    #[test]
    fn pushforward_round_trip_and_support() {
        let s = spec();
        let w = window(4, 30, &s).unwrap();
        for seed in 0..20 {
            let nu = sample_poisson(&w, seed, &s).unwrap();
            assert_eq!(pushforward(&nu, 0, &s).unwrap(), nu);
            let fwd = pushforward(&nu, 13, &s).unwrap();
            assert!(fwd.atoms().iter().all(|p| fwd.support().contains(p)));
            assert_eq!(fwd.support().mass(), w.mass());
            let back = pushforward(&fwd, -13, &s).unwrap();
            assert_eq!(back.atoms(), nu.atoms());
        }
    }

    #[test]
    fn equivariance_of_counts() {
        // count(T_*^i ν, A) = count(ν, T^{-i} A), atom by atom
        let s = spec();
        let w = window(6, 30, &s).unwrap();
        let a = RegionSet::from(Rectangle::class(2, 2, 5, &s).unwrap());
        let pre = a.transport(-7, &s).unwrap();
        for seed in 0..100 {
            let nu = sample_poisson(&w, seed, &s).unwrap();
            assert_eq!(pushforward(&nu, 7, &s).unwrap().count(&a), nu.count(&pre));
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let s = spec();
        let w = window(3, 30, &s).unwrap();
        let nu = sample_poisson(&w, 21, &s).unwrap();
        let text = nu.to_jsonl(json!({"seed": 21})).unwrap();
        let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["type"], "header");
        assert_eq!(first["seed"], 21);
        assert_eq!(CountingMeasure::from_jsonl(&text, &s).unwrap(), nu);
    }

    #[test]
    fn huge_level_ranges_sample_uniformly_in_range() {
        let s = spec();
        let hi = s.h(50).unwrap().clone();
        let r = Rectangle::new(crate::odometer::Column::Class(50), BigUint::from(1u32), hi.clone(), &s).unwrap();
        let mut rng = chacha(1, 1);
        for _ in 0..100 {
            let x = uniform_below(&mut rng, &r.width());
            assert!(x < r.width());
        }
    }
}
