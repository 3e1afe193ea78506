use nalgebra::{DMatrix, DVector};
use oculolipid::stats::{bh_fdr, fisher_ci, p_value, partial_correlation, pearson};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn naive_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn normal_equation_residuals(y: &[f64], covs: &[&[f64]]) -> Vec<f64> {
    let n = y.len();
    let x = DMatrix::from_fn(n, covs.len() + 1, |i, j| if j == 0 { 1.0 } else { covs[j - 1][i] });
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let beta = xtx.try_inverse().unwrap() * x.transpose() * &yv;
    (yv - x * beta).iter().copied().collect()
}

#[test]
fn one_covariate_matches_recursive_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let z = normals(&mut rng, 50);
        let mut x = normals(&mut rng, 50);
        let mut y = normals(&mut rng, 50);
        let (a, b, c): (f64, f64, f64) = (
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-1.0..1.0),
        );
        for i in 0..50 {
            x[i] += a * z[i];
            y[i] += b * z[i] + c * x[i];
        }
        let (rxy, rxz, ryz) = (naive_r(&x, &y), naive_r(&x, &z), naive_r(&y, &z));
        let expected = (rxy - rxz * ryz) / ((1.0 - rxz * rxz) * (1.0 - ryz * ryz)).sqrt();
        let got = partial_correlation(&x, &y, &[&z]).unwrap();
        assert!((got.r - expected).abs() < 1e-10, "{} vs {expected}", got.r);
        assert_eq!(got.df, 47);
    }
}

#[test]
fn two_covariates_match_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let n = rng.random_range(20..120);
        let z1 = normals(&mut rng, n);
        let z2: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let mut x = normals(&mut rng, n);
        let mut y = normals(&mut rng, n);
        for i in 0..n {
            x[i] = 40.0 + 3.0 * x[i] + 0.8 * z1[i] - 2.0 * z2[i];
            y[i] = 1e-3 * (y[i] - 0.5 * z1[i] + z2[i] + 0.3 * x[i]);
        }
        let rx = normal_equation_residuals(&x, &[&z1, &z2]);
        let ry = normal_equation_residuals(&y, &[&z1, &z2]);
        let expected = naive_r(&rx, &ry);
        let got = partial_correlation(&x, &y, &[&z1, &z2]).unwrap();
        assert!((got.r - expected).abs() < 1e-9, "{} vs {expected}", got.r);
    }
}

fn naive_bh(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    p.iter()
        .map(|&pi| {
            p.iter()
                .filter(|&&pj| pj >= pi)
                .map(|&pj| {
                    let rank = p.iter().filter(|&&pk| pk <= pj).count();
                    m as f64 * pj / rank as f64
                })
                .fold(1.0f64, f64::min)
        })
        .collect()
}

#[test]
fn bh_matches_quadratic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..500 {
        let m = rng.random_range(1..=500);
        let mut p: Vec<f64> = (0..m).map(|_| rng.random::<f64>().powi(3)).collect();
        if case % 5 == 0 {
            // Force ties.
            p.iter_mut().for_each(|v| *v = (*v * 20.0).round() / 20.0);
        }
        let got = bh_fdr(&p, 0.05).unwrap();
        assert_eq!(got.p_adjusted, naive_bh(&p), "case {case}");
    }
}

#[test]
fn bh_hand_cases() {
    let a = bh_fdr(&[0.01, 0.02, 0.03, 0.04], 0.05).unwrap();
    assert!(a.p_adjusted.iter().all(|&v| (v - 0.04).abs() < 1e-15));
    assert!(a.significant.iter().all(|&s| s));
    let b = bh_fdr(&[0.005, 0.1, 0.8], 0.05).unwrap();
    for (got, want) in b.p_adjusted.iter().zip([0.015, 0.15, 0.8]) {
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }
    assert_eq!(b.significant, vec![true, false, false]);
}

#[test]
fn p_value_matches_student_t_tail() {
    for &df in &[3usize, 10, 47, 500, 6996] {
        let t_dist = StudentsT::new(0.0, 1.0, df as f64).unwrap();
        for &r in &[0.0, 0.01, 0.05, 0.1, 0.3, -0.5, 0.9] {
            let t = r * (df as f64 / (1.0 - r * r)).sqrt();
            let expected = 2.0 * (1.0 - t_dist.cdf(t.abs()));
            let got = p_value(r, df);
            if expected > 1e-10 {
                assert!(
                    (got - expected).abs() < 1e-8 * expected.max(1e-2),
                    "df {df} r {r}: {got} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn confidence_interval_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rho: f64 = 0.3;
    let reps = 4000;
    let mut hits = 0;
    for _ in 0..reps {
        let x = normals(&mut rng, 60);
        let e = normals(&mut rng, 60);
        let y: Vec<f64> = x
            .iter()
            .zip(&e)
            .map(|(a, b)| rho * a + (1.0 - rho * rho).sqrt() * b)
            .collect();
        let r = pearson(&x, &y).unwrap();
        if r.ci_lower <= rho && rho <= r.ci_upper {
            hits += 1;
        }
    }
    let coverage = hits as f64 / reps as f64;
    // Binomial SE at 0.95 with 4000 reps is 0.0034.
    assert!((coverage - 0.95).abs() < 0.012, "{coverage}");
}

#[test]
fn recoding_covariates_does_not_change_r() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200;
    let age: Vec<f64> = (0..n).map(|_| rng.random_range(40.0..70.0)).collect();
    let sex: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
    let x: Vec<f64> = (0..n)
        .map(|i| 0.1 * age[i] + sex[i] + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| -0.05 * age[i] + 0.3 * x[i] + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let base = partial_correlation(&x, &y, &[&age, &sex]).unwrap();
    let sex12: Vec<f64> = sex.iter().map(|s| s + 1.0).collect();
    let sex_pm: Vec<f64> = sex.iter().map(|s| 2.0 * s - 1.0).collect();
    let months: Vec<f64> = age.iter().map(|a| 12.0 * a - 3.0).collect();
    for covs in [[&age, &sex12], [&age, &sex_pm], [&months, &sex]] {
        let other = partial_correlation(&x, &y, &[covs[0], covs[1]]).unwrap();
        assert!((other.r - base.r).abs() < 1e-12);
    }
    let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
    assert!((partial_correlation(&x, &flipped, &[&age, &sex]).unwrap().r + base.r).abs() < 1e-12);
}

#[test]
fn sign_follows_the_planted_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for &b in &[-0.6, 0.6] {
        let z = normals(&mut rng, 300);
        let x: Vec<f64> = z.iter().map(|v| v + rng.sample::<f64, _>(StandardNormal)).collect();
        // y shares z with the same sign as x, so the raw correlation is positive even when b < 0.
        let y: Vec<f64> = (0..300)
            .map(|i| 2.0 * z[i] + b * x[i] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let r = partial_correlation(&x, &y, &[&z]).unwrap();
        assert_eq!(r.r.signum(), b.signum());
        assert!(r.p < 1e-6);
    }
}

#[test]
fn null_p_values_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut p: Vec<f64> = (0..10_000)
        .map(|_| {
            let n = 30;
            let x = normals(&mut rng, n);
            let y = normals(&mut rng, n);
            let z = normals(&mut rng, n);
            partial_correlation(&x, &y, &[&z]).unwrap().p
        })
        .collect();
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    let d = p
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max);
    assert!(d < 1.6276 / n.sqrt(), "D = {d}");
}

#[test]
fn fisher_interval_for_reported_triple() {
    let (lo, hi) = fisher_ci(-0.22, 7068, 1, 0.95).unwrap();
    assert!((lo + 0.25).abs() < 0.01 && (hi + 0.20).abs() < 0.01, "({lo}, {hi})");
}
