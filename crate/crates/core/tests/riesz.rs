use std::collections::HashMap;

use num_bigint::BigInt;
use suspension_lab::fock::parse;
use suspension_lab::fock::Observable;
use suspension_lab::riesz::{
    autocorr_by_preimage, autocorr_exact, autocorr_monte_carlo, check_invariants, coeff_at, coeff_at_power,
    convolution_power_coeffs, default_grid, expand_partial_product, find_collision, lags_along_heights,
    partial_coeffs, singularity_evidence, write_density_csv,
};
use suspension_lab::{Dyadic, Error, GrowthConfig, GrowthSpec, RegionSet};

fn spec() -> GrowthSpec {
    GrowthSpec::default()
}

fn d(s: &str) -> Dyadic {
    s.parse().unwrap()
}

/// Every `Σ ε_j n_j` for `ε ∈ {-1,0,1}^J` with plain integer arithmetic.
fn brute_force(ns: &[i64], power: u32) -> HashMap<i64, Vec<(Vec<i8>, f64)>> {
    let mut out: HashMap<i64, Vec<(Vec<i8>, f64)>> = HashMap::new();
    let mut eps = vec![-1i8; ns.len()];
    loop {
        let f: i64 = eps.iter().zip(ns).map(|(&e, &n)| e as i64 * n).sum();
        let w = eps.iter().filter(|&&e| e != 0).count() as i32;
        out.entry(f).or_default().push((eps.clone(), 0.5f64.powi(w * power as i32)));
        let mut i = 0;
        while i < eps.len() && eps[i] == 1 {
            eps[i] = -1;
            i += 1;
        }
        if i == eps.len() {
            break;
        }
        eps[i] += 1;
    }
    out
}

fn powers_of_three(j: usize) -> Vec<i64> {
    (0..j as u32).map(|k| 3i64.pow(k)).collect()
}

#[test]
fn coefficient_at_heights_is_one_half() {
    let spec = spec();
    for j in 0..=8 {
        let n = BigInt::from(spec.n(j).unwrap().clone());
        assert_eq!(coeff_at(&spec, &n).unwrap(), d("1/2"));
        assert_eq!(coeff_at(&spec, &-n.clone()).unwrap(), d("1/2"));
        for level in j + 1..=12 {
            assert_eq!(partial_coeffs(&spec, level).unwrap().get(&n), d("1/2"));
        }
    }
}

#[test]
fn small_examples() {
    let spec = spec();
    let zero = partial_coeffs(&spec, 0).unwrap();
    assert_eq!(zero.to_map().into_iter().collect::<Vec<_>>(), vec![(BigInt::from(0), Dyadic::one())]);
    let two = partial_coeffs(&spec, 2).unwrap().to_map();
    assert_eq!(two.len(), 9);
    for (m, c) in [(1, "1/2"), (3, "1/2"), (2, "1/4"), (4, "1/4")] {
        assert_eq!(two[&BigInt::from(m)], d(c));
        assert_eq!(two[&BigInt::from(-m)], d(c));
    }
    assert_eq!(coeff_at(&spec, &BigInt::from(0)).unwrap(), Dyadic::one());
    assert_eq!(coeff_at(&spec, &BigInt::from(2)).unwrap(), d("1/4"));
    // 5 lies outside the level-2 partial product but 5 = 9 - 3 - 1 in the full one
    assert!(partial_coeffs(&spec, 2).unwrap().get(&BigInt::from(5)).is_zero());
    assert_eq!(coeff_at(&spec, &BigInt::from(5)).unwrap(), d("1/8"));
    let five = GrowthSpec::constant(5).unwrap();
    assert!(coeff_at(&five, &BigInt::from(2)).unwrap().is_zero());
    assert_eq!(coeff_at(&five, &BigInt::from(4)).unwrap(), d("1/4"));
}

#[test]
fn dissociation_by_brute_force() {
    let spec = spec();
    for level in [1, 4, 8, 12] {
        assert_eq!(find_collision(&spec, level).unwrap(), None);
        let brute = brute_force(&powers_of_three(level), 1);
        assert_eq!(brute.len(), 3usize.pow(level as u32));
        assert!(brute.values().all(|v| v.len() == 1));
    }
    // a ratio of 2 admits collisions: 1 + 2 = 4 - 1
    let ns = [1i64, 2, 4];
    assert!(brute_force(&ns, 1).values().any(|v| v.len() > 1));
}

#[test]
fn lazy_coefficients_match_brute_force_and_expansion() {
    let spec = spec();
    for level in [0, 1, 3, 6, 9] {
        let brute = brute_force(&powers_of_three(level), 1);
        let lazy = partial_coeffs(&spec, level).unwrap();
        let expanded = expand_partial_product(&spec, 1, level).unwrap();
        assert_eq!(expanded.len(), brute.len());
        for (m, reps) in &brute {
            let m = BigInt::from(*m);
            assert_eq!(lazy.get(&m).to_f64(), reps[0].1);
            assert_eq!(expanded[&m], lazy.get(&m));
            assert_eq!(coeff_at(&spec, &m).unwrap(), lazy.get(&m));
        }
        // frequencies outside the representable set vanish
        let bound = (3i64.pow(level as u32) - 1) / 2;
        for m in -bound - 3..=bound + 3 {
            if !brute.contains_key(&m) {
                assert!(lazy.get(&BigInt::from(m)).is_zero());
            }
        }
        assert!(check_invariants(&lazy));
    }
}

#[test]
fn convolution_powers() {
    let spec = spec();
    let p1 = convolution_power_coeffs(&spec, 1, 7).unwrap();
    assert_eq!(p1, partial_coeffs(&spec, 7).unwrap());
    for p in 1..=4 {
        let c = convolution_power_coeffs(&spec, p, 8).unwrap();
        for (m, v) in c.iter() {
            assert_eq!(v, coeff_at(&spec, &m).unwrap().pow(p));
            assert_eq!(v, coeff_at_power(&spec, &m, p).unwrap());
        }
        let expanded = expand_partial_product(&spec, p, 8).unwrap();
        assert!(expanded.iter().all(|(m, v)| *v == c.get(m)));
        assert_eq!(c.get(&BigInt::from(9)), Dyadic::pow2_neg(p));
    }
    let c2 = convolution_power_coeffs(&spec, 2, 4).unwrap();
    assert_eq!(c2.get(&BigInt::from(4)), d("1/16"));
}

#[test]
fn level_caps_and_ranges() {
    let spec = spec();
    assert!(matches!(partial_coeffs(&spec, 19), Err(Error::LevelTooLarge { level: 19, cap: 18 })));
    assert!(matches!(expand_partial_product(&spec, 1, 15), Err(Error::LevelTooLarge { .. })));
    let finite = GrowthSpec::new(GrowthConfig { m: vec![3, 5], repeat_last: false, ..Default::default() }).unwrap();
    assert!(coeff_at(&finite, &BigInt::from(1)).is_ok());
    assert!(matches!(coeff_at(&finite, &BigInt::from(30)), Err(Error::OutOfRange(_))));
    // mixed radix: n = 1, 3, 15
    assert_eq!(coeff_at(&finite, &BigInt::from(14)).unwrap(), d("1/4"));
    assert_eq!(coeff_at(&finite, &BigInt::from(12)).unwrap(), d("1/4"));
    assert!(coeff_at(&finite, &BigInt::from(7)).unwrap().is_zero());
}

#[test]
fn singularity_witness_and_overlap() {
    let spec = spec();
    let mut previous = f64::INFINITY;
    for level in [4, 6, 8, 10] {
        let grid = default_grid(&spec, level).unwrap();
        let r = singularity_evidence(&spec, 1, 2, level, grid).unwrap();
        // (2^0 - 2^{-1})² = 1/4 per level
        assert_eq!(r.witness_step, d("1/4"));
        assert_eq!(r.divergence_witness, Dyadic::from(level as i64) * d("1/4"));
        assert!((r.mass_p - 1.0).abs() < 1e-9 && (r.mass_q - 1.0).abs() < 1e-9, "{r:?}");
        assert!(r.min_density >= -1e-12);
        assert!(r.overlap < previous, "{r:?}");
        previous = r.overlap;
    }
    assert!(previous < 0.5);
    let same = singularity_evidence(&spec, 2, 2, 6, default_grid(&spec, 6).unwrap()).unwrap();
    assert!((same.overlap - 1.0).abs() < 1e-9);
    assert!(same.divergence_witness.is_zero());
}

#[test]
fn overlap_matches_direct_evaluation() {
    // J = 4 on a small grid, recomputed with plain floating point
    let spec = spec();
    let grid = default_grid(&spec, 4).unwrap();
    let r = singularity_evidence(&spec, 1, 2, 4, grid).unwrap();
    let mut sum = 0.0;
    for i in 0..grid {
        let t = i as f64 / grid as f64;
        let (mut fp, mut fq) = (1.0, 1.0);
        for n in [1.0, 3.0, 9.0, 27.0] {
            let c = (std::f64::consts::TAU * n * t).cos();
            fp *= 1.0 + c;
            fq *= 1.0 + 0.5 * c;
        }
        sum += fp.min(fq);
    }
    assert!((r.overlap - sum / grid as f64).abs() < 1e-9);
}

#[test]
fn grid_validation() {
    let spec = spec();
    assert!(matches!(singularity_evidence(&spec, 1, 2, 4, 100), Err(Error::GridTooCoarse { .. })));
    assert!(matches!(singularity_evidence(&spec, 1, 2, 4, 128), Err(Error::GridTooCoarse { .. })));
    assert!(singularity_evidence(&spec, 1, 2, 4, 256).is_ok());
}

#[test]
fn density_dump() {
    let spec = spec();
    let mut buf = Vec::new();
    write_density_csv(&mut buf, &spec, 1, 2, 2, 32).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,f_p,f_q");
    assert_eq!(lines.len(), 33);
    // at t = 0 both densities take their maximum
    assert_eq!(lines[1], "0,4,2.25");
}

fn a0() -> RegionSet {
    match parse("N(C(0)[1..1])", &spec()).unwrap() {
        Observable::Count(r) => r,
        _ => unreachable!(),
    }
}

#[test]
fn autocorrelation_values() {
    let spec = spec();
    let a = a0();
    assert_eq!(autocorr_exact(&a, 0, &spec).unwrap().value, d("1/2"));
    let lags = lags_along_heights(&spec, 4).unwrap();
    assert_eq!(lags, vec![1, 3, 9, 27, 81]);
    let expected = ["0", "1/4", "1/4", "1/4", "1/4"];
    for (lag, e) in lags.iter().zip(expected) {
        let r = autocorr_exact(&a, *lag, &spec).unwrap();
        assert_eq!(r.value, d(e), "lag {lag}");
    }
    for (lag, e) in [(2, "0"), (4, "0"), (5, "0"), (6, "1/8")] {
        assert_eq!(autocorr_exact(&a, lag, &spec).unwrap().value, d(e), "lag {lag}");
    }
}

#[test]
fn autocorrelation_is_bounded_by_the_mass() {
    let spec = spec();
    let sets = ["N(C(0)[1..1])", "N(C(1)[1..2] | C(2)[2..4])", "N(P(1101)[1..5])"];
    for s in sets {
        let Observable::Count(a) = parse(s, &spec).unwrap() else { unreachable!() };
        for lag in 0..60 {
            let r = autocorr_exact(&a, lag, &spec).unwrap();
            assert!(r.value <= a.mass());
            let (pre, tail) = autocorr_by_preimage(&a, lag, &spec).unwrap();
            assert!(pre <= r.value && r.value <= &pre + &tail, "{s} lag {lag}");
        }
    }
}

#[test]
fn autocorrelation_matches_monte_carlo() {
    let spec = spec();
    let a = a0();
    for (i, lag) in [1u64, 3, 9, 27].into_iter().enumerate() {
        let exact = autocorr_exact(&a, lag, &spec).unwrap().value.to_f64();
        let mc = autocorr_monte_carlo(&a, lag, 10_000, 500 + i as u64, &spec).unwrap();
        assert!((mc.covariance - exact).abs() <= 3.0 * mc.se.max(1e-12), "{mc:?} vs {exact}");
    }
}
