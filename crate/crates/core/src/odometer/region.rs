//! Exactly measurable subsets of the tower.
//!
//! A [`Rectangle`] is a cylinder of words (a finite prefix) times an interval of
//! levels lying below the lowest column top over that cylinder. Its measure is
//! `2^-|w| · (b - a + 1)`. A [`RegionSet`] is a finite disjoint union of
//! rectangles plus an upper bound on the mass of whatever was dropped by column
//! truncation.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::tower::TowerPoint;
use super::word::{bits_to_string, decrement_bits, increment_bits, parse_bits};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;

/// A cylinder constraint on words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Column {
    /// `{ω: ω_0 = … = ω_{k-1} = 1, ω_k = 0}`.
    Class(usize),
    Prefix(Vec<bool>),
}

impl Column {
    pub fn bits(&self) -> Vec<bool> {
        match self {
            Column::Class(k) => {
                let mut b = vec![true; *k];
                b.push(false);
                b
            }
            Column::Prefix(w) => w.clone(),
        }
    }

    /// The canonical view of a prefix: `Class(k)` when it reads `1^k 0`.
    pub fn from_bits(bits: &[bool]) -> Column {
        match bits.split_last() {
            Some((false, ones)) if ones.iter().all(|&b| b) => Column::Class(ones.len()),
            _ => Column::Prefix(bits.to_vec()),
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Class(k) => write!(f, "C({k})"),
            Column::Prefix(w) => write!(f, "P({})", bits_to_string(w)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rectangle {
    bits: Vec<bool>,
    lo: BigUint,
    hi: BigUint,
}

impl Rectangle {
    /// Checks `1 ≤ lo ≤ hi ≤ min{h(ω): ω in the column}` and the word cap.
    pub fn new(column: Column, lo: BigUint, hi: BigUint, spec: &GrowthSpec) -> Result<Self> {
        let bits = column.bits();
        if bits.len() > spec.cap_depth() {
            return Err(Error::InfeasibleRectangle(format!(
                "prefix length {} exceeds cap depth {}",
                bits.len(),
                spec.cap_depth()
            )));
        }
        if lo.is_zero() || lo > hi {
            return Err(Error::InfeasibleRectangle(format!("empty or invalid level range [{lo}, {hi}]")));
        }
        let top = spec.min_height_for_prefix(&bits)?;
        if &hi > top {
            return Err(Error::InfeasibleRectangle(format!(
                "level {hi} exceeds the column minimum height {top} for {}",
                Column::from_bits(&bits)
            )));
        }
        Ok(Rectangle { bits, lo, hi })
    }

    pub fn class(k: usize, lo: u64, hi: u64, spec: &GrowthSpec) -> Result<Self> {
        Rectangle::new(Column::Class(k), lo.into(), hi.into(), spec)
    }

    pub fn prefix(bits: &str, lo: u64, hi: u64, spec: &GrowthSpec) -> Result<Self> {
        let w = parse_bits(bits).ok_or_else(|| Error::InfeasibleRectangle(format!("bad bit string {bits:?}")))?;
        Rectangle::new(Column::Prefix(w), lo.into(), hi.into(), spec)
    }

    // Callers guarantee feasibility.
    fn raw(bits: Vec<bool>, lo: BigUint, hi: BigUint) -> Self {
        debug_assert!(!lo.is_zero() && lo <= hi);
        Rectangle { bits, lo, hi }
    }

    pub fn column(&self) -> Column {
        Column::from_bits(&self.bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn lo(&self) -> &BigUint {
        &self.lo
    }

    pub fn hi(&self) -> &BigUint {
        &self.hi
    }

    pub fn width(&self) -> BigUint {
        &self.hi - &self.lo + 1u32
    }

    pub fn measure(&self) -> Dyadic {
        Dyadic::from_biguint(&self.width()).shr(self.bits.len() as u32)
    }

    pub fn contains(&self, p: &TowerPoint) -> bool {
        p.level() >= &self.lo && p.level() <= &self.hi && matches!(p.word().starts_with(&self.bits), Ok(true))
    }

    fn compatible(&self, other: &Rectangle) -> bool {
        let n = self.bits.len().min(other.bits.len());
        self.bits[..n] == other.bits[..n]
    }

    pub fn intersect(&self, other: &Rectangle) -> Option<Rectangle> {
        if !self.compatible(other) {
            return None;
        }
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        if lo > hi {
            return None;
        }
        let bits = if self.bits.len() >= other.bits.len() { &self.bits } else { &other.bits };
        Some(Rectangle::raw(bits.clone(), lo, hi))
    }

    pub fn is_disjoint(&self, other: &Rectangle) -> bool {
        self.intersect(other).is_none()
    }

    /// `self \ other` as disjoint rectangles.
    pub fn subtract(&self, other: &Rectangle) -> Vec<Rectangle> {
        let Some(common) = self.intersect(other) else {
            return vec![self.clone()];
        };
        let mut out = Vec::new();
        // split the column: siblings of `other`'s deeper constraint
        for i in self.bits.len()..common.bits.len() {
            let mut sib = common.bits[..i].to_vec();
            sib.push(!common.bits[i]);
            out.push(Rectangle::raw(sib, self.lo.clone(), self.hi.clone()));
        }
        // inside the common column, keep levels outside the overlap
        if self.lo < common.lo {
            out.push(Rectangle::raw(common.bits.clone(), self.lo.clone(), &common.lo - 1u32));
        }
        if common.hi < self.hi {
            out.push(Rectangle::raw(common.bits.clone(), &common.hi + 1u32, self.hi.clone()));
        }
        out
    }

    /// `T^{-1}(self)`. Level-1 slices pull back to column tops of the
    /// predecessor cylinder; an all-ones predecessor cylinder is cut into
    /// column classes up to `k_max` and the rest is returned as tail mass.
    pub fn preimage(&self, spec: &GrowthSpec, k_max: usize) -> Result<RegionSet> {
        let mut parts = Vec::new();
        let mut tail = Dyadic::zero();
        let lowest_interior = if self.lo.is_one() { BigUint::from(2u32) } else { self.lo.clone() };
        if lowest_interior <= self.hi {
            parts.push(Rectangle::raw(self.bits.clone(), &lowest_interior - 1u32, &self.hi - 1u32));
        }
        if self.lo.is_one() {
            let pre = decrement_bits(&self.bits);
            match pre.iter().position(|b| !b) {
                Some(k) => {
                    if k > k_max {
                        return Err(Error::TruncationExceeded { index: k, k: k_max });
                    }
                    let top = spec.h(k)?.clone();
                    parts.push(Rectangle::raw(pre, top.clone(), top));
                }
                None => {
                    let ones = pre.len();
                    if ones > k_max {
                        return Err(Error::TruncationExceeded { index: ones, k: k_max });
                    }
                    for k in ones..=k_max {
                        let top = spec.h(k)?.clone();
                        parts.push(Rectangle::raw(Column::Class(k).bits(), top.clone(), top));
                    }
                    tail = Dyadic::pow2_neg(k_max as u32 + 1);
                }
            }
        }
        Ok(RegionSet { parts, tail_bound: tail })
    }

    /// `T(self)`. Always exact: a column top is either fixed by the prefix or
    /// the all-ones cylinder splits into `C(L)` and a strictly taller cylinder.
    pub fn image(&self, spec: &GrowthSpec) -> Result<Vec<Rectangle>> {
        let top = spec.min_height_for_prefix(&self.bits)?;
        if &self.hi < top {
            return Ok(vec![Rectangle::raw(self.bits.clone(), &self.lo + 1u32, &self.hi + 1u32)]);
        }
        if self.bits.iter().all(|&b| b) {
            let ones = self.bits.len();
            let mut out = Rectangle::raw(Column::Class(ones).bits(), self.lo.clone(), self.hi.clone()).image(spec)?;
            let taller = Rectangle::raw(vec![true; ones + 1], self.lo.clone(), self.hi.clone());
            if taller.bits.len() > spec.cap_depth() {
                return Err(Error::CapExceeded { index: ones + 1, cap: spec.cap_depth() });
            }
            out.extend(taller.image(spec)?);
            return Ok(out);
        }
        let mut out = Vec::new();
        if self.lo < self.hi {
            out.push(Rectangle::raw(self.bits.clone(), &self.lo + 1u32, self.hi.clone()));
        }
        out.push(Rectangle::raw(increment_bits(&self.bits), BigUint::one(), BigUint::one()));
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let column = match self.column() {
            Column::Class(k) => json!({ "class": k }),
            Column::Prefix(w) => json!({ "prefix": bits_to_string(&w) }),
        };
        json!({
            "column": column,
            "levels": [big_to_json(&self.lo), big_to_json(&self.hi)],
            "mass": self.measure().to_string(),
        })
    }

    pub fn from_json(v: &Value, spec: &GrowthSpec) -> Result<Self> {
        let bad = |m: &str| Error::InfeasibleRectangle(format!("bad rectangle JSON ({m}): {v}"));
        let col = v.get("column").ok_or_else(|| bad("missing column"))?;
        let column = if let Some(k) = col.get("class").and_then(Value::as_u64) {
            Column::Class(k as usize)
        } else if let Some(p) = col.get("prefix").and_then(Value::as_str) {
            Column::Prefix(parse_bits(p).ok_or_else(|| bad("prefix"))?)
        } else {
            return Err(bad("column"));
        };
        let levels = v.get("levels").and_then(Value::as_array).ok_or_else(|| bad("levels"))?;
        if levels.len() != 2 {
            return Err(bad("levels"));
        }
        let lo = big_from_json(&levels[0]).ok_or_else(|| bad("levels"))?;
        let hi = big_from_json(&levels[1]).ok_or_else(|| bad("levels"))?;
        Rectangle::new(column, lo, hi, spec)
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}..{}]", self.column(), self.lo, self.hi)
    }
}

fn big_to_json(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn big_from_json(v: &Value) -> Option<BigUint> {
    match v {
        Value::Number(n) => n.as_u64().map(BigUint::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// A finite disjoint union of rectangles and a bound on untracked mass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionSet {
    parts: Vec<Rectangle>,
    tail_bound: Dyadic,
}

impl Default for RegionSet {
    fn default() -> Self {
        RegionSet::empty()
    }
}

impl From<Rectangle> for RegionSet {
    fn from(r: Rectangle) -> Self {
        RegionSet { parts: vec![r], tail_bound: Dyadic::zero() }
    }
}

impl RegionSet {
    pub fn empty() -> Self {
        RegionSet { parts: Vec::new(), tail_bound: Dyadic::zero() }
    }

    /// Builds from rectangles that must be pairwise disjoint.
    pub fn from_parts(parts: Vec<Rectangle>, tail_bound: Dyadic) -> Result<Self> {
        if tail_bound.is_negative() {
            return Err(Error::InvalidParameter("negative tail bound".into()));
        }
        let region = RegionSet { parts, tail_bound };
        if !region.parts_disjoint() {
            return Err(Error::InvalidParameter("region parts overlap".into()));
        }
        Ok(region)
    }

    /// Union of possibly overlapping rectangles.
    pub fn from_overlapping(rects: impl IntoIterator<Item = Rectangle>) -> Self {
        rects.into_iter().fold(RegionSet::empty(), |acc, r| acc.union(&r.into()))
    }

    pub fn parts(&self) -> &[Rectangle] {
        &self.parts
    }

    pub fn tail_bound(&self) -> &Dyadic {
        &self.tail_bound
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Exact mass of the tracked parts.
    pub fn mass(&self) -> Dyadic {
        self.parts.iter().map(Rectangle::measure).sum()
    }

    /// Tracked mass plus the tail bound.
    pub fn mass_upper(&self) -> Dyadic {
        &self.mass() + &self.tail_bound
    }

    pub fn contains(&self, p: &TowerPoint) -> bool {
        self.parts.iter().any(|r| r.contains(p))
    }

    pub fn parts_disjoint(&self) -> bool {
        self.parts
            .iter()
            .enumerate()
            .all(|(i, a)| self.parts[i + 1..].iter().all(|b| a.is_disjoint(b)))
    }

    pub fn intersection(&self, other: &RegionSet) -> RegionSet {
        let parts = self
            .parts
            .iter()
            .flat_map(|a| other.parts.iter().filter_map(move |b| a.intersect(b)))
            .collect();
        let tail_bound = (&self.tail_bound).min(&other.tail_bound).clone();
        RegionSet { parts, tail_bound }
    }

    pub fn difference(&self, other: &RegionSet) -> RegionSet {
        let mut parts = self.parts.clone();
        for b in &other.parts {
            parts = parts.iter().flat_map(|a| a.subtract(b)).collect();
        }
        RegionSet { parts, tail_bound: self.tail_bound.clone() }
    }

    pub fn union(&self, other: &RegionSet) -> RegionSet {
        let mut parts = self.parts.clone();
        parts.extend(other.difference(self).parts);
        RegionSet { parts, tail_bound: &self.tail_bound + &other.tail_bound }
    }

    /// `T^{-1}(self)`, with columns beyond `spec.truncation_k()` in the tail.
    pub fn preimage(&self, spec: &GrowthSpec) -> Result<RegionSet> {
        let mut out = RegionSet { parts: Vec::new(), tail_bound: self.tail_bound.clone() };
        for r in &self.parts {
            let pre = r.preimage(spec, spec.truncation_k())?;
            out.parts.extend(pre.parts);
            out.tail_bound += &pre.tail_bound;
        }
        Ok(out)
    }

    /// `T(self)`; exact.
    pub fn image(&self, spec: &GrowthSpec) -> Result<RegionSet> {
        let mut parts = Vec::new();
        for r in &self.parts {
            parts.extend(r.image(spec)?);
        }
        Ok(RegionSet { parts, tail_bound: self.tail_bound.clone() })
    }

    /// `T^steps(self)`: images for positive steps, preimages for negative.
    pub fn transport(&self, steps: i64, spec: &GrowthSpec) -> Result<RegionSet> {
        let mut region = self.clone();
        for _ in 0..steps.unsigned_abs() {
            region = if steps > 0 { region.image(spec)? } else { region.preimage(spec)? };
        }
        Ok(region)
    }

    /// Merges level-adjacent parts sharing a column. Keeps sets small under
    /// repeated transport without changing the point set.
    pub fn coalesce(&self) -> RegionSet {
        let mut parts = self.parts.clone();
        parts.sort_by(|a, b| a.bits.cmp(&b.bits).then_with(|| a.lo.cmp(&b.lo)));
        let mut out: Vec<Rectangle> = Vec::with_capacity(parts.len());
        for r in parts {
            if let Some(last) = out.last_mut() {
                if last.bits == r.bits && &last.hi + 1u32 == r.lo {
                    last.hi = r.hi;
                    continue;
                }
            }
            out.push(r);
        }
        RegionSet { parts: out, tail_bound: self.tail_bound.clone() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "parts": self.parts.iter().map(Rectangle::to_json).collect::<Vec<_>>(),
            "mass": self.mass().to_string(),
            "tail_bound": self.tail_bound.to_string(),
        })
    }

    pub fn from_json(v: &Value, spec: &GrowthSpec) -> Result<Self> {
        let parts_json = match v {
            Value::Array(a) => a,
            _ => v
                .get("parts")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidParameter(format!("bad region JSON: {v}")))?,
        };
        let parts = parts_json.iter().map(|p| Rectangle::from_json(p, spec)).collect::<Result<Vec<_>>>()?;
        let tail = match v.get("tail_bound").and_then(Value::as_str) {
            Some(s) => s.parse()?,
            None => Dyadic::zero(),
        };
        RegionSet::from_parts(parts, tail)
    }
}

impl fmt::Display for RegionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// The finite-measure window `X_L = {(ω,n): n ≤ L}` with columns `k ≤ K`
/// tracked and the rest reported as tail mass.
pub fn window(levels: u64, k_max: usize, spec: &GrowthSpec) -> Result<RegionSet> {
    if levels == 0 {
        return Err(Error::InvalidParameter("window height L must be at least 1".into()));
    }
    if k_max >= spec.cap_depth() {
        return Err(Error::TruncationExceeded { index: k_max, k: spec.cap_depth() - 1 });
    }
    let l = BigUint::from(levels);
    let mut parts = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let hi = spec.h(k)?.min(&l).clone();
        parts.push(Rectangle::raw(Column::Class(k).bits(), BigUint::one(), hi));
    }
    Ok(RegionSet { parts, tail_bound: window_tail(&l, k_max, spec)? })
}

/// `Σ_{k>K} 2^{-(k+1)} min(h_k, L)`, summed exactly: once `h_k ≥ L` the rest
/// is `L · 2^{-k}`.
fn window_tail(l: &BigUint, k_max: usize, spec: &GrowthSpec) -> Result<Dyadic> {
    let mut tail = Dyadic::zero();
    let mut k = k_max + 1;
    loop {
        let h = spec.h(k)?;
        if h >= l {
            tail += &Dyadic::from_biguint(l).shr(k as u32);
            return Ok(tail);
        }
        tail += &Dyadic::from_biguint(h).shr(k as u32 + 1);
        k += 1;
    }
}

/// `μ(X_L) = Σ_k 2^{-(k+1)} min(h_k, L)`, exactly.
pub fn window_mass(levels: u64, spec: &GrowthSpec) -> Result<Dyadic> {
    let w = window(levels, 0, spec)?;
    Ok(w.mass_upper())
}
