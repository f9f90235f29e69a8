use std::fmt;

use super::observable::{Observable, Space};
use crate::error::{Error, Result};
use crate::odometer::{Rectangle, RegionSet, TowerPoint};
use crate::point_process::CountingMeasure;

/// `Σ c_i 1_{R_i}` over pairwise disjoint rectangles.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction {
    terms: Vec<(f64, Rectangle)>,
}

impl SimpleFunction {
    pub fn new(terms: Vec<(f64, Rectangle)>) -> Result<Self> {
        for (i, (_, a)) in terms.iter().enumerate() {
            if terms[i + 1..].iter().any(|(_, b)| !a.is_disjoint(b)) {
                return Err(Error::InvalidParameter(format!("simple function rectangles overlap at {a}")));
            }
        }
        Ok(SimpleFunction { terms })
    }

    pub fn indicator(rect: Rectangle) -> Self {
        SimpleFunction { terms: vec![(1.0, rect)] }
    }

    pub fn terms(&self) -> &[(f64, Rectangle)] {
        &self.terms
    }

    pub fn value(&self, p: &TowerPoint) -> f64 {
        self.terms.iter().find(|(_, r)| r.contains(p)).map_or(0.0, |(c, _)| *c)
    }

    pub fn integral(&self) -> f64 {
        self.terms.iter().map(|(c, r)| c * r.measure().to_f64()).sum()
    }

    /// The union of the rectangles carrying the function.
    pub fn support(&self) -> RegionSet {
        RegionSet::from_overlapping(self.terms.iter().map(|(_, r)| r.clone()))
    }
}

impl fmt::Display for SimpleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, r)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{r}")?;
        }
        Ok(())
    }
}

/// The tower with intensity `μ`, configurations being sampled counting measures.
#[derive(Clone, Copy, Debug, Default)]
pub struct TowerSpace;

pub type TowerObservable = Observable<RegionSet, SimpleFunction>;

impl Space for TowerSpace {
    type Point = TowerPoint;
    type Region = RegionSet;
    type Function = SimpleFunction;
    type Config = CountingMeasure;

    fn region_contains(&self, region: &RegionSet, p: &TowerPoint) -> bool {
        region.contains(p)
    }

    fn function_value(&self, f: &SimpleFunction, p: &TowerPoint) -> f64 {
        f.value(p)
    }

    fn integral(&self, f: &SimpleFunction) -> f64 {
        f.integral()
    }

    fn count(&self, region: &RegionSet, config: &CountingMeasure) -> f64 {
        config.count(region) as f64
    }

    fn linear(&self, f: &SimpleFunction, config: &CountingMeasure) -> f64 {
        config.atoms().iter().map(|p| f.value(p)).sum()
    }
}

impl fmt::Display for TowerObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Const(c) => write!(f, "{c}"),
            Observable::Count(r) => write!(f, "N({r})"),
            Observable::I1(g) => write!(f, "I1({g})"),
            Observable::Sum(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Observable::Product(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Observable::Scale(c, x) => write!(f, "{c} * {x}"),
        }
    }
}
