//! Polynomial functionals of counting measures: counts `N(A)`, first
//! stochastic integrals `I¹(f)`, their sums and products, the difference
//! operators `Dⁿ`, Monte Carlo chaos projections and a Mecke harness.
//!
//! The algebra is generic over a [`Space`]; the tower instance lives here and
//! the finite ground set instance in [`crate::oracle`].

mod estimate;
mod observable;
mod parse;
mod tower;

pub use estimate::{mecke_check, project_n, support_of, MeckeReport, ProjectionEstimate};
pub use observable::{Observable, Space};
pub use parse::{parse, parse_with, Cursor, LeafSyntax, TowerSyntax};
pub use tower::{SimpleFunction, TowerObservable, TowerSpace};

use crate::odometer::TowerPoint;
use crate::point_process::CountingMeasure;

/// `F(ν + Σ δ_y)`.
pub fn eval(f: &TowerObservable, nu: &CountingMeasure, extra: &[TowerPoint]) -> f64 {
    f.eval(&TowerSpace, nu, extra)
}

/// `D¹_y F`.
pub fn diff1(f: &TowerObservable, y: &TowerPoint) -> TowerObservable {
    f.diff1(&TowerSpace, y)
}

/// `Dⁿ_{y₁…yₙ} F`.
pub fn diffn(f: &TowerObservable, ys: &[TowerPoint]) -> TowerObservable {
    f.diffn(&TowerSpace, ys)
}
