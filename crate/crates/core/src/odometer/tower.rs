use num_bigint::BigUint;
use num_traits::One;

use super::word::LazyWord;
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;

/// A point `(ω, n)` of the tower, `1 ≤ n ≤ h(ω)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TowerPoint {
    word: LazyWord,
    level: BigUint,
}

/// `h(ω) = h[k(ω)]`.
pub fn height<'a>(word: &LazyWord, spec: &'a GrowthSpec) -> Result<&'a BigUint> {
    spec.h(word.first_zero()?)
}

impl TowerPoint {
    pub fn new(word: LazyWord, level: BigUint, spec: &GrowthSpec) -> Result<Self> {
        let h = height(&word, spec)?;
        if level < BigUint::one() || &level > h {
            return Err(Error::InvalidParameter(format!("level {level} outside [1, {h}]")));
        }
        Ok(TowerPoint { word, level })
    }

    pub fn word(&self) -> &LazyWord {
        &self.word
    }

    pub fn level(&self) -> &BigUint {
        &self.level
    }

    /// `T(ω,n) = (ω,n+1)` below the top of the column, `(ω+1̄,1)` at the top.
    pub fn apply_t(&self, spec: &GrowthSpec) -> Result<TowerPoint> {
        let h = height(&self.word, spec)?;
        if &self.level < h {
            Ok(TowerPoint { word: self.word.clone(), level: &self.level + 1u32 })
        } else {
            Ok(TowerPoint { word: self.word.succ()?, level: BigUint::one() })
        }
    }

    pub fn apply_t_inv(&self, spec: &GrowthSpec) -> Result<TowerPoint> {
        if self.level > BigUint::one() {
            Ok(TowerPoint { word: self.word.clone(), level: &self.level - 1u32 })
        } else {
            let word = self.word.pred()?;
            let level = height(&word, spec)?.clone();
            Ok(TowerPoint { word, level })
        }
    }

    /// `T^steps`, negative steps applying the inverse.
    pub fn iterate(&self, steps: i64, spec: &GrowthSpec) -> Result<TowerPoint> {
        let mut p = self.clone();
        for _ in 0..steps.unsigned_abs() {
            p = if steps > 0 { p.apply_t(spec)? } else { p.apply_t_inv(spec)? };
        }
        Ok(p)
    }
}
