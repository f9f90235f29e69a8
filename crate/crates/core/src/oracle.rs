//! Exact expectations on a finite ground set by enumeration.
//!
//! The ground set has atoms `0..m` with Poisson intensities `λ_i`; a
//! configuration is a count vector `N`. Expectations of polynomial
//! observables are computed by summing over all `N ≤ K_c` coordinatewise,
//! and every result carries a rigorous bound on the truncated remainder plus
//! floating-point rounding.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{parse_with, Cursor, LeafSyntax, Observable, Space};
use crate::stats::{poisson_pmf, CompensatedSum};

/// Largest enumeration accepted: six atoms at the default cap.
pub const MAX_STATES: u128 = 85_766_121; // 21^6
pub const DEFAULT_COUNT_CAP: usize = 20;

/// A set of ground atoms, sorted and without repeats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomSet(Vec<usize>);

impl AtomSet {
    pub fn new(mut atoms: Vec<usize>) -> Self {
        atoms.sort_unstable();
        atoms.dedup();
        AtomSet(atoms)
    }

    pub fn atoms(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

/// A function on the ground atoms, one value per atom.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundFunction(Vec<f64>);

impl GroundFunction {
    pub fn new(values: Vec<f64>) -> Self {
        GroundFunction(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn value(&self, i: usize) -> f64 {
        self.0.get(i).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> AtomSet {
        AtomSet::new(self.0.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect())
    }
}

pub type GroundObservable = Observable<AtomSet, GroundFunction>;

/// Independent `Poisson(λ_i)` counts on atoms `0..m`, truncated at `count_cap`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteGround {
    masses: Vec<f64>,
    count_cap: usize,
    #[serde(skip)]
    pmf: Vec<Vec<f64>>,
}

/// An enumerated expectation and the bound on its error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Expectation {
    pub value: f64,
    /// Truncated remainder plus accumulated rounding.
    pub bound: f64,
    pub tail_bound: f64,
    pub states: u128,
}

impl FiniteGround {
    pub fn new(masses: Vec<f64>, count_cap: usize) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidParameter("ground set has no atoms".into()));
        }
        if let Some(bad) = masses.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidParameter(format!("mass {bad} is not positive")));
        }
        let pmf = masses.iter().map(|&l| (0..=count_cap as u64).map(|k| poisson_pmf(k, l)).collect()).collect();
        Ok(FiniteGround { masses, count_cap, pmf })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn atoms(&self) -> usize {
        self.masses.len()
    }

    pub fn count_cap(&self) -> usize {
        self.count_cap
    }

    pub fn states(&self) -> u128 {
        (self.count_cap as u128 + 1).saturating_pow(self.masses.len() as u32)
    }

    /// `Σ_i P(N_i > K_c)`.
    pub fn tail_bound(&self) -> f64 {
        self.masses.iter().map(|&l| tail_moment(l, self.count_cap, 0)).sum()
    }

    pub fn space(&self) -> GroundSpace<'_> {
        GroundSpace { ground: self }
    }

    /// Parses an observable whose leaves are `A(i, j, …)` atom sets.
    pub fn parse(&self, src: &str) -> Result<GroundObservable> {
        parse_with(src, &GroundSyntax { atoms: self.atoms() })
    }

    fn check_size(&self) -> Result<()> {
        let states = self.states();
        if states > MAX_STATES {
            return Err(Error::EnumerationTooLarge { states, limit: MAX_STATES });
        }
        Ok(())
    }

    /// Weighted sum of `value(N)` over all truncated count vectors, with the
    /// sum of absolute weighted terms for the rounding bound.
    fn enumerate<F>(&self, value: F) -> (f64, f64)
    where
        F: Fn(&[u32]) -> f64 + Sync,
    {
        let m = self.atoms();
        let k = self.count_cap as u32;
        let chunks: Vec<(f64, f64)> = (0..=k)
            .into_par_iter()
            .map(|first| {
                let mut counts = vec![0u32; m];
                counts[0] = first;
                let mut total = CompensatedSum::default();
                let mut abs = CompensatedSum::default();
                loop {
                    let weight: f64 = counts.iter().enumerate().map(|(i, &c)| self.pmf[i][c as usize]).product();
                    let term = weight * value(&counts);
                    total.add(term);
                    abs.add(term.abs());
                    // advance the remaining coordinates as a mixed-radix counter
                    let mut i = 1;
                    while i < m && counts[i] == k {
                        counts[i] = 0;
                        i += 1;
                    }
                    if i >= m {
                        break;
                    }
                    counts[i] += 1;
                }
                (total.value(), abs.value())
            })
            .collect();
        let total: CompensatedSum = chunks.iter().map(|c| c.0).collect();
        let abs: CompensatedSum = chunks.iter().map(|c| c.1).collect();
        (total.value(), abs.value())
    }

    /// `E[F]`.
    pub fn exact_expect(&self, f: &GroundObservable) -> Result<Expectation> {
        self.exact_expect_shifted(f, &[])
    }

    /// `E[F(N + Σ_{a ∈ extra} e_a)]`.
    pub fn exact_expect_shifted(&self, f: &GroundObservable, extra: &[usize]) -> Result<Expectation> {
        self.check_size()?;
        self.check_observable(f)?;
        if let Some(&a) = extra.iter().find(|&&a| a >= self.atoms()) {
            return Err(Error::InvalidParameter(format!("atom {a} outside the ground set")));
        }
        let space = self.space();
        let (value, abs) = self.enumerate(|counts| f.eval(&space, counts, extra));
        let mut bound = 64.0 * f64::EPSILON * abs;
        for (exps, c) in self.majorant(f) {
            let shift: i32 = extra.iter().map(|&a| exps[a] as i32).sum();
            bound += c * 2f64.powi(shift) * self.remainder_bound(&exps);
        }
        Ok(Expectation { value, bound, tail_bound: self.tail_bound(), states: self.states() })
    }

    /// A polynomial majorant `|F(N)| ≤ Σ_t c_t Π_i (1 + N_i)^{d_ti}`, as a
    /// map from exponent vectors to coefficients.
    ///
    /// An extra atom at `a` raises `1 + N_a` to at most `2 (1 + N_a)`, so
    /// shifted evaluations multiply each monomial by `2^{d_a}` per extra atom.
    pub fn majorant(&self, f: &GroundObservable) -> BTreeMap<Vec<u32>, f64> {
        let m = self.atoms();
        let unit = |i: Option<usize>, c: f64| {
            let mut d = vec![0; m];
            if let Some(i) = i {
                d[i] = 1;
            }
            (d, c)
        };
        match f {
            Observable::Const(a) => BTreeMap::from([unit(None, a.abs())]),
            // N(A) ≤ Σ_{i∈A} (1 + N_i)
            Observable::Count(set) => set.atoms().iter().map(|&i| unit(Some(i), 1.0)).collect(),
            // |I¹(g)| ≤ Σ |g_i| (1 + N_i) + ∫|g|
            Observable::I1(g) => {
                let integral: f64 = g.values().iter().zip(&self.masses).map(|(v, l)| v.abs() * l).sum();
                let mut poly: BTreeMap<Vec<u32>, f64> =
                    g.support().atoms().iter().map(|&i| unit(Some(i), g.value(i).abs())).collect();
                *poly.entry(vec![0; m]).or_default() += integral;
                poly
            }
            Observable::Sum(xs) => {
                let mut poly = BTreeMap::new();
                for x in xs {
                    for (d, c) in self.majorant(x) {
                        *poly.entry(d).or_default() += c;
                    }
                }
                poly
            }
            Observable::Product(xs) => {
                let mut poly = BTreeMap::from([unit(None, 1.0)]);
                for x in xs {
                    let factor = self.majorant(x);
                    let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
                    for (d1, c1) in &poly {
                        for (d2, c2) in &factor {
                            let d: Vec<u32> = d1.iter().zip(d2).map(|(a, b)| a + b).collect();
                            *next.entry(d).or_default() += c1 * c2;
                        }
                    }
                    poly = collapse(next);
                }
                poly
            }
            Observable::Scale(k, x) => self.majorant(x).into_iter().map(|(d, c)| (d, c * k.abs())).collect(),
        }
    }

    /// Bound on `E[Π_j (1+N_j)^{d_j} 1{some N_i > K}]`: a union bound over the
    /// offending coordinate, factorized by independence.
    fn remainder_bound(&self, exps: &[u32]) -> f64 {
        let k = self.count_cap;
        let full: Vec<f64> = self.masses.iter().zip(exps).map(|(&l, &d)| shifted_moment(l, d as usize)).collect();
        (0..self.atoms())
            .map(|i| {
                let others: f64 = full.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product();
                tail_moment(self.masses[i], k, exps[i] as usize) * others
            })
            .sum()
    }

    fn check_observable(&self, f: &GroundObservable) -> Result<()> {
        let m = self.atoms();
        let ok = match f {
            Observable::Const(_) => true,
            Observable::Count(a) => a.atoms().iter().all(|&i| i < m),
            Observable::I1(g) => g.values().len() <= m,
            Observable::Sum(xs) | Observable::Product(xs) => {
                return xs.iter().try_for_each(|x| self.check_observable(x));
            }
            Observable::Scale(_, x) => return self.check_observable(x),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("observable refers to atoms beyond {m}")))
        }
    }

    /// Both sides of `E[Σ_i N_i h_i(N)] = Σ_i λ_i E[h_i(N + e_i)]`.
    pub fn oracle_mecke(&self, h: &[GroundObservable]) -> Result<MeckeIdentity> {
        if h.len() != self.atoms() {
            return Err(Error::InvalidParameter(format!("need one observable per atom, got {}", h.len())));
        }
        let lhs_obs = Observable::Sum(
            h.iter()
                .enumerate()
                .map(|(i, hi)| Observable::Product(vec![Observable::Count(AtomSet::new(vec![i])), hi.clone()]))
                .collect(),
        );
        let lhs = self.exact_expect(&lhs_obs)?;
        let mut value = CompensatedSum::default();
        let mut bound = 0.0;
        for (i, hi) in h.iter().enumerate() {
            let e = self.exact_expect_shifted(hi, &[i])?;
            value.add(self.masses[i] * e.value);
            bound += self.masses[i] * e.bound;
        }
        let rhs = Expectation { value: value.value(), bound, tail_bound: lhs.tail_bound, states: lhs.states };
        let difference = (lhs.value - rhs.value).abs();
        Ok(MeckeIdentity { lhs, rhs, difference, bound: lhs.bound + rhs.bound, holds: difference <= lhs.bound + rhs.bound })
    }

    /// Mecke for the product form `h(ν, x) = g(ν) f(x)`.
    pub fn oracle_mecke_product(&self, g: &GroundObservable, f: &GroundFunction) -> Result<MeckeIdentity> {
        let h: Vec<GroundObservable> =
            (0..self.atoms()).map(|i| Observable::Scale(f.value(i), Box::new(g.clone()))).collect();
        self.oracle_mecke(&h)
    }

    /// `E[Dⁿ_{y₁…yₙ} F]` for every tuple of atoms, by inclusion-exclusion over
    /// shifted expectations: `Σ_{S ⊆ [n]} (-1)^{n-|S|} E[F(N + Σ_{j∈S} e_{y_j})]`.
    pub fn oracle_projection(&self, f: &GroundObservable, order: usize) -> Result<ProjectionTable> {
        let m = self.atoms();
        let tuples = (m as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
        if tuples << order > 4096 {
            return Err(Error::EnumerationTooLarge { states: tuples << order, limit: 4096 });
        }
        // E[F(N + e_S)] depends only on the multiset of shifted atoms
        let mut cache: std::collections::HashMap<Vec<usize>, Expectation> = Default::default();
        let mut entries = Vec::new();
        for t in 0..tuples as usize {
            let ys: Vec<usize> = (0..order).map(|j| t / m.pow(j as u32) % m).collect();
            let mut value = CompensatedSum::default();
            let mut bound = 0.0;
            for subset in 0..1usize << order {
                let mut extra: Vec<usize> = (0..order).filter(|j| subset >> j & 1 == 1).map(|j| ys[j]).collect();
                extra.sort_unstable();
                let e = match cache.get(&extra) {
                    Some(e) => *e,
                    None => {
                        let e = self.exact_expect_shifted(f, &extra)?;
                        cache.insert(extra.clone(), e);
                        e
                    }
                };
                let sign = if (order - extra.len()) % 2 == 0 { 1.0 } else { -1.0 };
                value.add(sign * e.value);
                bound += e.bound;
            }
            entries.push(ProjectionEntry { points: ys, value: value.value(), bound });
        }
        Ok(ProjectionTable { order, entries, tail_bound: self.tail_bound() })
    }

    /// `E[F·G]` for `F` in the first chaos and `G` in the second, together
    /// with `E[(D¹_a G)·G]` for every atom `a`.
    pub fn oracle_chaos_orthogonality(&self, f: &GroundObservable, g: &GroundObservable) -> Result<OrthogonalityReport> {
        if chaos_order(f) != Some(1) {
            return Err(Error::InvalidParameter("first argument is not a combination of first integrals".into()));
        }
        if chaos_order(g) != Some(2) {
            return Err(Error::InvalidParameter("second argument is not a disjoint product combination".into()));
        }
        let inner = self.exact_expect(&Observable::Product(vec![f.clone(), g.clone()]))?;
        let space = self.space();
        let differences = (0..self.atoms())
            .map(|a| {
                let d = g.diff1(&space, &a);
                Ok(DifferenceInner { atom: a, expectation: self.exact_expect(&Observable::Product(vec![d, g.clone()]))? })
            })
            .collect::<Result<Vec<_>>>()?;
        let bound = differences.iter().map(|d| d.expectation.bound).fold(inner.bound, f64::max);
        let holds = inner.value.abs() <= inner.bound
            && differences.iter().all(|d| d.expectation.value.abs() <= d.expectation.bound);
        Ok(OrthogonalityReport { inner, differences, bound, holds })
    }
}

/// Keeps majorants small: past a few thousand monomials everything is merged
/// into one monomial with the largest exponents, still a valid majorant.
fn collapse(poly: BTreeMap<Vec<u32>, f64>) -> BTreeMap<Vec<u32>, f64> {
    if poly.len() <= 4096 {
        return poly;
    }
    let mut exps = vec![0; poly.keys().next().map_or(0, Vec::len)];
    let mut total = 0.0;
    for (d, c) in poly {
        for (e, x) in exps.iter_mut().zip(d) {
            *e = (*e).max(x);
        }
        total += c;
    }
    BTreeMap::from([(exps, total)])
}

/// The chaos an observable lies in when it is built from first integrals and
/// products of first integrals with pairwise disjoint supports.
pub fn chaos_order(f: &GroundObservable) -> Option<usize> {
    order_of(&f.clone().normalize())
}

fn order_of(f: &GroundObservable) -> Option<usize> {
    match f {
        Observable::Const(c) if *c == 0.0 => None,
        Observable::Const(_) => Some(0),
        Observable::I1(_) => Some(1),
        Observable::Count(_) => None,
        Observable::Scale(c, x) if *c != 0.0 => order_of(x),
        Observable::Scale(..) => None,
        Observable::Sum(xs) => {
            let orders: Vec<Option<usize>> = xs.iter().map(order_of).collect();
            match orders.first() {
                Some(Some(n)) if orders.iter().all(|o| *o == Some(*n)) => Some(*n),
                _ => None,
            }
        }
        Observable::Product(xs) => {
            let mut seen: Vec<usize> = Vec::new();
            for x in xs {
                let Observable::I1(g) = x else { return None };
                let support = g.support();
                if support.atoms().iter().any(|a| seen.contains(a)) {
                    return None;
                }
                seen.extend(support.atoms());
            }
            Some(xs.len())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeckeIdentity {
    pub lhs: Expectation,
    pub rhs: Expectation,
    pub difference: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionEntry {
    pub points: Vec<usize>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionTable {
    pub order: usize,
    pub entries: Vec<ProjectionEntry>,
    pub tail_bound: f64,
}

impl ProjectionTable {
    pub fn get(&self, points: &[usize]) -> Option<&ProjectionEntry> {
        self.entries.iter().find(|e| e.points == points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DifferenceInner {
    pub atom: usize,
    pub expectation: Expectation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub inner: Expectation,
    pub differences: Vec<DifferenceInner>,
    pub bound: f64,
    pub holds: bool,
}

/// `E[(1+N)^d 1{N > k}]` for `N ~ Poisson(λ)`, summed term by term until
/// the ratio of successive terms drops below 1/2, then closed with a
/// geometric bound. The ratio `λ/(n+1) · ((n+2)/(n+1))^d` decreases in `n`,
/// so the geometric closure is an upper bound.
fn tail_moment(lambda: f64, k: usize, d: usize) -> f64 {
    let mut n = k as f64 + 1.0;
    let mut term = (n + 1.0).powi(d as i32) * poisson_pmf(k as u64 + 1, lambda);
    let mut sum = CompensatedSum::default();
    for _ in 0..10_000 {
        if term == 0.0 {
            break;
        }
        sum.add(term);
        let ratio = lambda / (n + 1.0) * ((n + 2.0) / (n + 1.0)).powi(d as i32);
        if ratio <= 0.5 {
            sum.add(term * ratio / (1.0 - ratio));
            break;
        }
        term *= ratio;
        n += 1.0;
    }
    sum.value()
}

/// `E[(1 + X)^d]` for `X ~ Poisson(λ)`, via Touchard polynomials.
fn shifted_moment(lambda: f64, d: usize) -> f64 {
    // stirling[k][j] = S(k, j), second kind
    let mut stirling = vec![vec![0.0f64; d + 1]; d + 1];
    stirling[0][0] = 1.0;
    for k in 1..=d {
        for j in 1..=k {
            stirling[k][j] = j as f64 * stirling[k - 1][j] + stirling[k - 1][j - 1];
        }
    }
    let moment = |k: usize| (0..=k).map(|j| stirling[k][j] * lambda.powi(j as i32)).sum::<f64>();
    let mut binom = 1.0;
    let mut total = 0.0;
    for k in 0..=d {
        total += binom * moment(k);
        binom = binom * (d - k) as f64 / (k + 1) as f64;
    }
    total
}

/// The finite ground set as a [`Space`]: points are atom indices and
/// configurations are count vectors.
#[derive(Clone, Copy, Debug)]
pub struct GroundSpace<'a> {
    ground: &'a FiniteGround,
}

impl Space for GroundSpace<'_> {
    type Point = usize;
    type Region = AtomSet;
    type Function = GroundFunction;
    type Config = [u32];

    fn region_contains(&self, region: &AtomSet, p: &usize) -> bool {
        region.contains(*p)
    }

    fn function_value(&self, f: &GroundFunction, p: &usize) -> f64 {
        f.value(*p)
    }

    fn integral(&self, f: &GroundFunction) -> f64 {
        f.values().iter().zip(&self.ground.masses).map(|(v, l)| v * l).sum()
    }

    fn count(&self, region: &AtomSet, config: &[u32]) -> f64 {
        region.atoms().iter().map(|&i| config[i] as f64).sum()
    }

    fn linear(&self, f: &GroundFunction, config: &[u32]) -> f64 {
        f.values().iter().zip(config).map(|(v, &c)| v * c as f64).sum()
    }
}

/// Leaves `A(i, j, …)`; functions `c*A(i) + …`.
struct GroundSyntax {
    atoms: usize,
}

impl GroundSyntax {
    fn atom_list(&self, c: &mut Cursor<'_>) -> Result<Vec<usize>> {
        c.expect("A")?;
        c.expect("(")?;
        let mut atoms = vec![c.index()?];
        while c.eat(",") {
            atoms.push(c.index()?);
        }
        if let Some(bad) = atoms.iter().find(|&&i| i >= self.atoms) {
            return Err(c.error(format!("atom {bad} outside the ground set of {}", self.atoms)));
        }
        c.expect(")")?;
        Ok(atoms)
    }
}

impl LeafSyntax for GroundSyntax {
    type Region = AtomSet;
    type Function = GroundFunction;

    fn region(&self, c: &mut Cursor<'_>) -> Result<AtomSet> {
        let mut atoms = self.atom_list(c)?;
        while c.eat("|") {
            atoms.extend(self.atom_list(c)?);
        }
        Ok(AtomSet::new(atoms))
    }

    fn function(&self, c: &mut Cursor<'_>) -> Result<GroundFunction> {
        let mut values = vec![0.0; self.atoms];
        let mut sign = 1.0;
        loop {
            let coeff = if c.peek() == Some('A') {
                1.0
            } else {
                let v = c.number()?;
                c.expect("*")?;
                v
            };
            for i in self.atom_list(c)? {
                values[i] += sign * coeff;
            }
            if c.eat("+") {
                sign = 1.0;
            } else if c.eat("-") {
                sign = -1.0;
            } else {
                break;
            }
        }
        Ok(GroundFunction::new(values))
    }
}
