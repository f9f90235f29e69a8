use serde::Serialize;
use serde_json::Value;

use super::observable::Observable;
use super::tower::{SimpleFunction, TowerObservable, TowerSpace};
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;
use crate::odometer::{bits_to_string, RegionSet, TowerPoint};
use crate::point_process::{sample_poisson, uniform_point};
use crate::rng::derive;
use crate::stats::{run_trials, z_score, Estimate};

/// Monte Carlo estimate of `PₙF(y₁,…,yₙ) = E[Dⁿ_{y₁…yₙ} F]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionEstimate {
    pub order: usize,
    pub points: Vec<Value>,
    pub estimate: f64,
    pub standard_error: f64,
    pub trials: usize,
}

/// Both sides of Mecke's identity for `h(ν, x) = g(ν) f(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeckeReport {
    pub lhs: f64,
    pub rhs: f64,
    pub se_lhs: f64,
    pub se_rhs: f64,
    pub z: f64,
    pub trials: usize,
}

fn point_json(p: &TowerPoint) -> Value {
    serde_json::json!({
        "prefix": bits_to_string(p.word().revealed()),
        "level": p.level().to_string(),
    })
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 trials, got {trials}")));
    }
    Ok(())
}

/// Estimates `E[Dⁿ F]` at `ys` from `trials` Poisson samples on `region`.
pub fn project_n(
    f: &TowerObservable,
    ys: &[TowerPoint],
    region: &RegionSet,
    trials: usize,
    seed: u64,
    spec: &GrowthSpec,
) -> Result<ProjectionEstimate> {
    check_trials(trials)?;
    let d = f.diffn(&TowerSpace, ys);
    let values = run_trials(trials, seed, |s| sample_poisson(region, s, spec).map(|nu| d.eval(&TowerSpace, &nu, &[])))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let e = Estimate::from_samples(&values);
    Ok(ProjectionEstimate {
        order: ys.len(),
        points: ys.iter().map(point_json).collect(),
        estimate: e.mean,
        standard_error: e.se,
        trials,
    })
}

/// Compares `E[Σ_{x∈ν} g(ν) f(x)]` with `∫ E[g(ν+δ_x)] f(x) μ(dx)`.
///
/// The left side uses samples seeded from `derive(seed, 0)`, the right side
/// independent samples from `derive(seed, 1)`; the right side draws one
/// auxiliary atom per rectangle term of `f` and weights it by the term's mass.
pub fn mecke_check(
    g: &TowerObservable,
    f: &SimpleFunction,
    region: &RegionSet,
    trials: usize,
    seed: u64,
    spec: &GrowthSpec,
) -> Result<MeckeReport> {
    check_trials(trials)?;
    let lhs = run_trials(trials, derive(seed, 0), |s| {
        let nu = sample_poisson(region, s, spec)?;
        let weight: f64 = nu.atoms().iter().map(|x| f.value(x)).sum();
        Ok(if weight == 0.0 { 0.0 } else { g.eval(&TowerSpace, &nu, &[]) * weight })
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let rhs = run_trials(trials, derive(seed, 1), |s| {
        let nu = sample_poisson(region, s, spec)?;
        let mut total = 0.0;
        for (i, (coeff, rect)) in f.terms().iter().enumerate() {
            let x = uniform_point(rect, derive(s, u64::MAX - i as u64), spec)?;
            total += coeff * rect.measure().to_f64() * g.eval(&TowerSpace, &nu, &[x]);
        }
        Ok(total)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let l = Estimate::from_samples(&lhs);
    let r = Estimate::from_samples(&rhs);
    Ok(MeckeReport {
        lhs: l.mean,
        rhs: r.mean,
        se_lhs: l.se,
        se_rhs: r.se,
        z: z_score(l.mean - r.mean, (l.se * l.se + r.se * r.se).sqrt()),
        trials,
    })
}

/// The union of every region and function support an observable reads.
pub fn support_of(f: &TowerObservable) -> RegionSet {
    match f {
        Observable::Const(_) => RegionSet::empty(),
        Observable::Count(r) => r.clone(),
        Observable::I1(g) => g.support(),
        Observable::Sum(xs) | Observable::Product(xs) => {
            xs.iter().fold(RegionSet::empty(), |acc, x| acc.union(&support_of(x)))
        }
        Observable::Scale(_, x) => support_of(x),
    }
}
