//! One handler per subcommand. Handlers build the whole report in memory so
//! the output is written in one piece, in a fixed order.

use std::fs;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};
use suspension_lab::config::ExperimentConfig;
use suspension_lab::fock::{mecke_check, parse, project_n, support_of, Observable, SimpleFunction, TowerObservable};
use suspension_lab::odometer::window;
use suspension_lab::oracle::{FiniteGround, GroundFunction, GroundObservable};
use suspension_lab::point_process::{sample_marked, sample_poisson, split, superpose, thin, uniform_point, pushforward};
use suspension_lab::riesz::{
    autocorr_exact, autocorr_monte_carlo, coeff_at, coeff_at_power, convolution_power_coeffs, default_grid,
    lags_along_heights, partial_coeffs, singularity_evidence, write_density_csv,
};
use suspension_lab::rng::derive;
use suspension_lab::stats::{chi_square_poisson, covariance, run_trials, Estimate};
use suspension_lab::suite::run_suite;
use suspension_lab::{CountingMeasure, GrowthSpec, RegionSet};

use crate::cli::{
    AutocorrArgs, Command, EvolveArgs, MeckeArgs, OracleArgs, OracleOp, ProjectArgs, RegionArgs, RieszArgs, RieszOp,
    SampleArgs, SuiteArgs, SuperposeArgs, ThinArgs,
};
use crate::error::{at_flag, CliError};

type Result<T> = std::result::Result<T, CliError>;

/// A finished report and whether any statistical check failed.
pub struct Outcome {
    pub text: String,
    pub failed: bool,
}

struct Report {
    lines: Vec<String>,
    failed: bool,
}

impl Report {
    fn new(command: &str, config: &ExperimentConfig, args: &impl Serialize) -> Self {
        let mut r = Report { lines: Vec::new(), failed: false };
        r.push(json!({ "type": "header", "command": command, "config": config.to_value(), "args": args }));
        r
    }

    fn push(&mut self, v: Value) {
        self.lines.push(serde_json::to_string(&v).expect("json"));
    }

    fn finish(self) -> Outcome {
        let mut text = self.lines.join("\n");
        text.push('\n');
        Outcome { text, failed: self.failed }
    }
}

fn header_extra(command: &str, config: &ExperimentConfig, args: &impl Serialize) -> Value {
    json!({ "command": command, "config": config.to_value(), "args": args })
}

pub fn run(command: &Command, config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.spec().map_err(|e| CliError::usage("--config", e.to_string()))?;
    match command {
        Command::Sample(a) => sample(a, config, &spec),
        Command::Evolve(a) => evolve(a, config, &spec),
        Command::Superpose(a) => superpose_cmd(a, config, &spec),
        Command::Thin(a) => thin_cmd(a, config, &spec),
        Command::Mecke(a) => mecke(a, config, &spec),
        Command::Project(a) => project(a, config, &spec),
        Command::Oracle(a) => oracle(a, config),
        Command::Riesz(a) => riesz(a, config, &spec),
        Command::Autocorr(a) => autocorr(a, config, &spec),
        Command::Suite(a) => suite(a, config),
    }
}

/// `L=<levels>` for a window, otherwise a union of rectangles.
fn parse_region(flag: &str, src: &str, spec: &GrowthSpec) -> Result<RegionSet> {
    if let Some(levels) = src.trim().strip_prefix("L=") {
        let levels: u64 =
            levels.trim().parse().map_err(|_| CliError::usage(flag, format!("expected L=<levels>, got {src:?}")))?;
        return at_flag(flag, window(levels, spec.truncation_k(), spec));
    }
    match at_flag(flag, parse(&format!("N({src})"), spec))? {
        Observable::Count(r) => Ok(r),
        _ => Err(CliError::usage(flag, format!("{src:?} is not a union of rectangles"))),
    }
}

fn region_of(args: &RegionArgs, spec: &GrowthSpec) -> Result<Option<RegionSet>> {
    match (&args.window, &args.region) {
        (Some(w), _) => {
            let src = if w.trim_start().starts_with("L=") { w.clone() } else { format!("L={w}") };
            parse_region("--window", &src, spec).map(Some)
        }
        (None, Some(r)) => parse_region("--region", r, spec).map(Some),
        (None, None) => Ok(None),
    }
}

fn required_region(args: &RegionArgs, spec: &GrowthSpec) -> Result<RegionSet> {
    region_of(args, spec)?.ok_or_else(|| CliError::usage("--window", "one of --window or --region is required"))
}

fn sample(a: &SampleArgs, config: &ExperimentConfig, spec: &GrowthSpec) -> Result<Outcome> {
    let region = required_region(&a.region, spec)?;
    let mut extra = header_extra("sample", config, a);
    extra["mass"] = json!({ "exact": region.mass() });
    let nu = sample_marked(&region, config.seed, spec)?;
    let text = if a.marked { nu.to_jsonl(extra)? } else { nu.unmarked().to_jsonl(extra)? };
    Ok(Outcome { text, failed: false })
}

fn evolve(a: &EvolveArgs, config: &ExperimentConfig, spec: &GrowthSpec) -> Result<Outcome> {
    let nu = match &a.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::usage("--input", e.to_string()))?;
            at_flag("--input", CountingMeasure::from_jsonl(&text, spec))?
        }
        None => sample_poisson(&required_region(&a.region, spec)?, config.seed, spec)?,
    };
    let moved = pushforward(&nu, a.steps, spec)?;
    let mut extra = header_extra("evolve", config, a);
    extra["mass"] = json!({ "exact": moved.support().mass() });
    Ok(Outcome { text: moved.to_jsonl(extra)?, failed: false })
}

fn trials(config: &ExperimentConfig) -> Result<usize> {
    if config.trials < 2 {
        return Err(CliError::usage("--trials", "need at least 2 trials"));
    }
    Ok(config.trials)
}

/// Mean and chi-square checks of counts against `Poisson(lambda)`.
fn poisson_line(name: &str, counts: &[u64], lambda: f64) -> (Value, bool) {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let e = Estimate::from_samples(&xs);
    let z = e.z_against(lambda);
    let chi = chi_square_poisson(counts, lambda);
    let passed = z.abs() <= 3.0 && chi.p_value > 0.001;
    let line = json!({
        "type": "check", "name": name, "exact": lambda, "mean": e.mean, "se": e.se, "z": z,
        "chi_square": chi.statistic, "dof": chi.dof, "p_value": chi.p_value, "trials": e.trials, "passed": passed,
    });
    (line, passed)
}

fn superpose_cmd(a: &SuperposeArgs, config: &ExperimentConfig, spec: &GrowthSpec) -> Result<Outcome> {
    let first = parse_region("--first", &a.first, spec)?;
    let second = parse_region("--second", &a.second, spec)?;
    let draw = |s: u64| -> suspension_lab::Result<CountingMeasure> {
        superpose(&sample_poisson(&first, derive(s, 0), spec)?, &sample_poisson(&second, derive(s, 1), spec)?)
    };
    if !a.check {
        let mut extra = header_extra("superpose", config, a);
        extra["mass"] = json!({ "exact": first.mass() + second.mass() });
        return Ok(Outcome { text: draw(config.seed)?.to_jsonl(extra)?, failed: false });
    }
    let counts = run_trials(trials(config)?, config.seed, |s| draw(s).map(|nu| nu.len() as u64))
        .into_iter()
        .collect::<suspension_lab::Result<Vec<u64>>>()?;
    let mut report = Report::new("superpose", config, a);
    let (line, passed) = poisson_line("superposed count", &counts, first.mass().to_f64() + second.mass().to_f64());
    report.push(line);
    report.failed = !passed;
    Ok(report.finish())
}

fn thin_cmd(a: &ThinArgs, config: &ExperimentConfig, spec: &GrowthSpec) -> Result<Outcome> {
    if !(a.c > 0.0 && a.c <= 1.0) {
        return Err(CliError::usage("--c", format!("thinning level {} not in (0, 1]", a.c)));
    }
    let region = required_region(&a.region, spec)?;
    if !a.check {
        let kept = thin(&sample_marked(&region, config.seed, spec)?, a.c)?;
        let mut extra = header_extra("thin", config, a);
        extra["mass"] = json!({ "exact": a.c * region.mass().to_f64() });
        return Ok(Outcome { text: kept.to_jsonl(extra)?, failed: false });
    }
    let pairs = run_trials(trials(config)?, config.seed, |s| {
        let (kept, dropped) = split(&sample_marked(&region, s, spec)?, a.c)?;
        Ok((kept.len() as u64, dropped.len() as u64))
    })
    .into_iter()
    .collect::<suspension_lab::Result<Vec<(u64, u64)>>>()?;
    let mut report = Report::new("thin", config, a);
    let kept: Vec<u64> = pairs.iter().map(|p| p.0).collect();
    let (line, passed) = poisson_line("retained count", &kept, a.c * region.mass().to_f64());
    report.push(line);
    let xs: Vec<f64> = kept.iter().map(|&k| k as f64).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
    let cov = covariance(&xs, &ys);
    let z = cov.z_against(0.0);
    report.push(json!({
        "type": "check", "name": "retained/discarded covariance", "exact": 0.0,
        "mean": cov.mean, "se": cov.se, "z": z, "trials": cov.trials, "passed": z.abs() <= 3.0,
    }));
    report.failed = !passed || z.abs() > 3.0;
    Ok(report.finish())
}

fn parse_observable(flag: &str, src: &str, spec: &GrowthSpec) -> Result<TowerObservable> {
    at_flag(flag, parse(src, spec))
}

fn parse_function(flag: &str, src: &str, spec: &GrowthSpec) -> Result<SimpleFunction> {
    match parse_observable(flag, &format!("I1({src})"), spec)? {
        Observable::I1(f) => Ok(f),
        _ => Err(CliError::usage(flag, format!("{src:?} is not a simple function"))),
    }
}

fn mecke(a: &MeckeArgs, config: &ExperimentConfig, spec: &GrowthSpec) -> Result<Outcome> {
    let g = parse_observable("--g", &a.g, spec)?;
    let f = parse_function("--f", &a.f, spec)?;
    let region = region_of(&a.region, spec)?.unwrap_or_else(|| support_of(&g).union(&f.support()));
    let r = mecke_check(&g, &f, &region, trials(config)?, config.seed, spec)?;
    let mut report = Report::new("mecke", config, a);
    let mut line = serde_json::to_value(&r).expect("json");
    line["type"] = json!("mecke");
    report.push(line);
    report.failed = r.z.abs() > 3.0;
    Ok(report.finish())
}

fn project(a: &ProjectArgs, config: &ExperimentConfig, spec: &GrowthSpec) -> Result<Outcome> {
    let f = parse_observable("--f", &a.f, spec)?;
    let mut points = Vec::with_capacity(a.at.len());
    for (i, src) in a.at.iter().enumerate() {
        let region = parse_region("--at", src, spec)?;
        let [rect] = region.parts() else {
            return Err(CliError::usage("--at", format!("{src:?} must be a single rectangle")));
        };
        points.push(uniform_point(rect, derive(derive(config.seed, 1), i as u64), spec)?);
    }
    let region = match region_of(&a.region, spec)? {
        Some(r) => r,
        None => {
            let s = support_of(&f);
            if s.is_empty() {
                window(1, spec.truncation_k(), spec)?
            } else {
                s
            }
        }
    };
    let p = project_n(&f, &points, &region, trials(config)?, derive(config.seed, 0), spec)?;
    let mut report = Report::new("project", config, a);
    let mut line = serde_json::to_value(&p).expect("json");
    line["type"] = json!("projection");
    report.push(line);
    Ok(report.finish())
}

fn ground_of(a: &OracleArgs, config: &ExperimentConfig) -> Result<FiniteGround> {
    let (lambda, cap) = match &a.ground {
        Some(src) => {
            let v: Value = serde_json::from_str(src).map_err(|e| CliError::usage("--ground", e.to_string()))?;
            let lambda: Vec<f64> = serde_json::from_value(v["lambda"].clone())
                .map_err(|_| CliError::usage("--ground", "expected {\"lambda\": [...], \"count_cap\": K}"))?;
            (lambda, v["count_cap"].as_u64().map(|k| k as usize))
        }
        None => (a.lambda.clone(), None),
    };
    if lambda.is_empty() {
        return Err(CliError::usage("--lambda", "the ground set needs at least one atom mass"));
    }
    let cap = a.count_cap.or(cap).unwrap_or(config.count_cap);
    FiniteGround::new(lambda, cap).map_err(|e| match e {
        suspension_lab::Error::InvalidParameter(m) => CliError::usage("--lambda", m),
        e => CliError::Lib(e),
    })
}

fn expectation_json(e: &suspension_lab::oracle::Expectation) -> Value {
    json!({ "exact": e.value, "bound": e.bound, "tail_bound": e.tail_bound, "states": e.states as u64 })
}

fn oracle(a: &OracleArgs, config: &ExperimentConfig) -> Result<Outcome> {
    let g = ground_of(a, config)?;
    let parse_at = |flag: &str, src: &str| -> Result<GroundObservable> { at_flag(flag, g.parse(src)) };
    let mut report = Report::new("oracle", config, a);
    match &a.op {
        OracleOp::Expect { f } => {
            let e = g.exact_expect(&parse_at("--f", f)?)?;
            let mut line = expectation_json(&e);
            line["type"] = json!("expectation");
            report.push(line);
        }
        OracleOp::Project { f, order } => {
            let table = g.oracle_projection(&parse_at("--f", f)?, *order)?;
            for e in &table.entries {
                report.push(json!({ "type": "projection", "points": e.points, "exact": e.value, "bound": e.bound }));
            }
        }
        OracleOp::Mecke { g: obs, f } => {
            let func: GroundFunction = match parse_at("--f", &format!("I1({f})"))? {
                Observable::I1(func) => func,
                _ => return Err(CliError::usage("--f", format!("{f:?} is not a function on atoms"))),
            };
            let r = g.oracle_mecke_product(&parse_at("--g", obs)?, &func)?;
            report.push(json!({
                "type": "mecke", "lhs": expectation_json(&r.lhs), "rhs": expectation_json(&r.rhs),
                "exact": r.difference, "bound": r.bound, "holds": r.holds,
            }));
            report.failed = !r.holds;
        }
        OracleOp::Orth { h, g: prod } => {
            let r = at_flag("--h", g.oracle_chaos_orthogonality(&parse_at("--h", h)?, &parse_at("--g", prod)?))?;
            let diffs: Vec<Value> = r
                .differences
                .iter()
                .map(|d| json!({ "atom": d.atom, "exact": d.expectation.value, "bound": d.expectation.bound }))
                .collect();
            report.push(json!({
                "type": "orthogonality", "exact": r.inner.value, "differences": diffs,
                "bound": r.bound, "holds": r.holds,
            }));
            report.failed = !r.holds;
        }
    }
    Ok(report.finish())
}

fn parse_frequency(flag: &str, src: &str) -> Result<BigInt> {
    src.trim().parse().map_err(|_| CliError::usage(flag, format!("{src:?} is not an integer frequency")))
}

fn riesz(a: &RieszArgs, config: &ExperimentConfig, spec: &GrowthSpec) -> Result<Outcome> {
    let mut report = Report::new("riesz", config, a);
    match &a.op {
        RieszOp::Coeff { at, levels } => {
            let m = parse_frequency("--at", at)?;
            let partial = partial_coeffs(spec, *levels)?.get(&m);
            let full = coeff_at(spec, &m)?;
            report.push(json!({
                "type": "coefficient", "frequency": m.to_string(), "levels": levels,
                "exact": partial, "limit": full,
            }));
        }
        RieszOp::Power { p, levels, at } => {
            if *p == 0 {
                return Err(CliError::usage("--p", "the power must be at least 1"));
            }
            match at {
                Some(at) => {
                    let m = parse_frequency("--at", at)?;
                    let partial = convolution_power_coeffs(spec, *p, *levels)?.get(&m);
                    report.push(json!({
                        "type": "coefficient", "frequency": m.to_string(), "power": p, "levels": levels,
                        "exact": partial, "limit": coeff_at_power(spec, &m, *p)?,
                    }));
                }
                None => {
                    for (m, v) in convolution_power_coeffs(spec, *p, *levels)?.to_map() {
                        report.push(json!({
                            "type": "coefficient", "frequency": m.to_string(), "power": p, "levels": levels, "exact": v,
                        }));
                    }
                }
            }
        }
        RieszOp::Singular { p, q, levels, grid, csv } => {
            if *p == 0 || *q == 0 {
                return Err(CliError::usage(if *p == 0 { "--p" } else { "--q" }, "powers must be at least 1"));
            }
            if levels.is_empty() {
                return Err(CliError::usage("--levels", "give at least one level"));
            }
            let mut overlaps = Vec::new();
            for &level in levels {
                let n = match grid {
                    Some(g) => *g,
                    None => default_grid(spec, level)?,
                };
                let r = at_flag("--grid", singularity_evidence(spec, *p, *q, level, n))?;
                overlaps.push(r.overlap);
                let mut line = serde_json::to_value(&r).expect("json");
                line["type"] = json!("singularity");
                line["exact"] = json!(r.divergence_witness);
                report.push(line);
            }
            let monotone = overlaps.windows(2).all(|w| w[1] < w[0]);
            report.push(json!({ "type": "summary", "exact": { "overlap_decreasing": monotone } }));
            if let Some(path) = csv {
                let level = *levels.last().expect("non-empty");
                let n = match grid {
                    Some(g) => *g,
                    None => default_grid(spec, level)?,
                };
                let file = fs::File::create(path).map_err(|e| CliError::usage("--csv", e.to_string()))?;
                let mut w = std::io::BufWriter::new(file);
                write_density_csv(&mut w, spec, *p, *q, level, n)?;
            }
        }
    }
    Ok(report.finish())
}

fn autocorr(a: &AutocorrArgs, config: &ExperimentConfig, spec: &GrowthSpec) -> Result<Outcome> {
    let set = parse_region("--set", &a.set, spec)?;
    let lags: Vec<u64> = if a.lags.trim() == "auto-nj" {
        lags_along_heights(spec, a.max_j)?
    } else {
        a.lags
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| CliError::usage("--lags", format!("{s:?} is not a lag"))))
            .collect::<Result<_>>()?
    };
    let mut report = Report::new("autocorr", config, a);
    for (i, &lag) in lags.iter().enumerate() {
        let r = at_flag("--set", autocorr_exact(&set, lag, spec))?;
        let mut line = json!({ "type": "autocorr", "lag": lag, "exact": r.value, "normalized": r.normalized });
        if a.monte_carlo {
            let mc = autocorr_monte_carlo(&set, lag, trials(config)?, derive(config.seed, i as u64), spec)?;
            let z = suspension_lab::stats::z_score(mc.covariance - r.value.to_f64(), mc.se);
            line["estimate"] = json!(mc.covariance);
            line["se"] = json!(mc.se);
            line["z"] = json!(z);
            line["trials"] = json!(mc.trials);
            report.failed |= z.abs() > 3.0;
        }
        report.push(line);
    }
    Ok(report.finish())
}

fn suite(a: &SuiteArgs, config: &ExperimentConfig) -> Result<Outcome> {
    let results = run_suite(&a.name, config.seed, &a.only).map_err(|e| {
        let flag = if e.to_string().contains("criterion") { "--only" } else { "--name" };
        CliError::usage(flag, e.to_string())
    })?;
    let mut report = Report::new("suite", config, a);
    let passed = results.iter().filter(|r| r.passed).count();
    for r in &results {
        let mut line = serde_json::to_value(r).expect("json");
        line["type"] = json!("criterion");
        report.push(line);
    }
    report.push(json!({ "type": "summary", "exact": { "passed": passed, "total": results.len() } }));
    report.failed = passed < results.len();
    Ok(report.finish())
}
