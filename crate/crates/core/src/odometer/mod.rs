//! The infinite measure preserving base: a Kakutani tower over the dyadic
//! odometer with column heights `h_k = n_k - Σ_{j<k} n_j`.
//!
//! Points are `(ω, n)` with `1 ≤ n ≤ h(ω)`; `T` climbs a column and moves the
//! top to the floor of the successor column. Measurable sets are handled
//! symbolically as unions of cylinder × level-interval rectangles.

mod region;
mod tower;
mod word;

pub use region::{window, window_mass, Column, Rectangle, RegionSet};
pub use tower::{height, TowerPoint};
pub use word::{bits_to_string, decrement_bits, increment_bits, parse_bits, LazyWord};

use crate::error::Result;
use crate::growth::GrowthSpec;

pub fn succ(word: &LazyWord) -> Result<LazyWord> {
    word.succ()
}

pub fn apply_t(p: &TowerPoint, spec: &GrowthSpec) -> Result<TowerPoint> {
    p.apply_t(spec)
}

pub fn apply_t_inv(p: &TowerPoint, spec: &GrowthSpec) -> Result<TowerPoint> {
    p.apply_t_inv(spec)
}

/// `T^{-1}(r)` with columns beyond the spec's truncation index in the tail.
pub fn rect_preimage(r: &Rectangle, spec: &GrowthSpec) -> Result<RegionSet> {
    r.preimage(spec, spec.truncation_k())
}

pub fn rect_image(r: &Rectangle, spec: &GrowthSpec) -> Result<RegionSet> {
    RegionSet::from(r.clone()).image(spec)
}
