use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

use super::{CorrelationResult, StatsError};

/// Relative norm below which a column counts as linearly dependent.
const RANK_TOL: f64 = 1e-10;
/// Relative norm below which a residualised variable counts as constant.
const CONSTANT_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn centered(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}

/// Two-sided p-value of a correlation with `df` residual degrees of freedom.
///
/// With t = r·√(df/(1−r²)), the t tail equals I_{1−r²}(df/2, 1/2).
/// Never returns 0: underflow is reported as the smallest positive normal value.
pub fn p_value(r: f64, df: usize) -> f64 {
    let x = 1.0 - r * r;
    if x <= 0.0 || df == 0 {
        return f64::MIN_POSITIVE;
    }
    beta_reg(df as f64 / 2.0, 0.5, x.min(1.0)).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Fisher-z interval for r from `n` observations with `k` covariates.
pub fn fisher_ci(r: f64, n: usize, k: usize, level: f64) -> Result<(f64, f64), StatsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidLevel(level));
    }
    if n < k + 4 {
        return Err(StatsError::InsufficientSamples { n, required: k + 4 });
    }
    if r.abs() >= 1.0 {
        return Ok((r, r));
    }
    let crit = Normal::standard().inverse_cdf((1.0 + level) / 2.0);
    let z = r.atanh();
    let half = crit / ((n - 3 - k) as f64).sqrt();
    Ok(((z - half).tanh(), (z + half).tanh()))
}

fn finish(r: f64, n: usize, k: usize, level: f64) -> Result<CorrelationResult, StatsError> {
    let r = r.clamp(-1.0, 1.0);
    let (ci_lower, ci_upper) = fisher_ci(r, n, k, level)?;
    let df = n - 2 - k;
    Ok(CorrelationResult {
        x_name: String::new(),
        y_name: String::new(),
        covariate_names: Vec::new(),
        r,
        p: p_value(r, df),
        ci_lower,
        ci_upper,
        n_used: n,
        df,
    })
}

fn check_lengths(x: &[f64], y: &[f64], required: usize) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < required {
        return Err(StatsError::InsufficientSamples { n: x.len(), required });
    }
    Ok(())
}

/// Product-moment correlation of already centred vectors.
fn centered_correlation(cx: &[f64], cy: &[f64]) -> Result<f64, StatsError> {
    let sxx = dot(cx, cx);
    let syy = dot(cy, cy);
    if sxx == 0.0 {
        return Err(StatsError::ConstantInput("x".into()));
    }
    if syy == 0.0 {
        return Err(StatsError::ConstantInput("y".into()));
    }
    Ok(dot(cx, cy) / (sxx.sqrt() * syy.sqrt()))
}

/// Pearson correlation with a t-based two-sided p-value and a 95 % Fisher interval.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    pearson_at(x, y, 0.95)
}

pub fn pearson_at(x: &[f64], y: &[f64], level: f64) -> Result<CorrelationResult, StatsError> {
    check_lengths(x, y, 4)?;
    let r = centered_correlation(&centered(x), &centered(y))?;
    finish(r, x.len(), 0, level)
}

/// Orthonormal basis of span{1, z_1, …, z_k}, built by modified Gram–Schmidt.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    n: usize,
    columns: Vec<Vec<f64>>,
}

impl OrthoBasis {
    pub fn new(n: usize, covariates: &[&[f64]]) -> Result<Self, StatsError> {
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(covariates.len() + 1);
        let intercept = std::iter::once(vec![1.0; n]);
        for (j, col) in intercept.chain(covariates.iter().map(|c| c.to_vec())).enumerate() {
            if col.len() != n {
                return Err(StatsError::LengthMismatch(n, col.len()));
            }
            let original = dot(&col, &col).sqrt();
            let mut v = col;
            // Two passes keep the basis orthogonal to working precision.
            for _ in 0..2 {
                for q in &columns {
                    let c = dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if n == 0 || original == 0.0 || norm <= RANK_TOL * original {
                return Err(if j == 0 {
                    StatsError::InsufficientSamples { n, required: 1 }
                } else {
                    StatsError::RankDeficient
                });
            }
            v.iter_mut().for_each(|a| *a /= norm);
            columns.push(v);
        }
        Ok(Self { n, columns })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of covariates, excluding the intercept.
    pub fn covariates(&self) -> usize {
        self.columns.len() - 1
    }

    /// Least-squares residuals of `y` on the basis.
    pub fn residualize(&self, y: &[f64]) -> Vec<f64> {
        let mut r = y.to_vec();
        for _ in 0..2 {
            for q in &self.columns {
                let c = dot(q, &r);
                r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        r
    }
}

/// Residuals of `y` regressed on an intercept plus `covariates`.
pub fn ols_residuals(y: &[f64], covariates: &[&[f64]]) -> Result<Vec<f64>, StatsError> {
    Ok(OrthoBasis::new(y.len(), covariates)?.residualize(y))
}

/// Correlation of two residual vectors; `x` and `y` are the raw vectors used for the constancy check.
pub(crate) fn residual_correlation(
    x: &[f64],
    y: &[f64],
    rx: &[f64],
    ry: &[f64],
    k: usize,
    level: f64,
) -> Result<CorrelationResult, StatsError> {
    for (name, raw, res) in [("x", x, rx), ("y", y, ry)] {
        let c = centered(raw);
        let scale = dot(&c, &c).sqrt();
        if scale == 0.0 || dot(res, res).sqrt() <= CONSTANT_TOL * scale {
            return Err(StatsError::ConstantInput(name.into()));
        }
    }
    let r = centered_correlation(&centered(rx), &centered(ry))?;
    finish(r, x.len(), k, level)
}

/// Correlation of `x` and `y` after removing the linear effect of `covariates` from both.
pub fn partial_correlation(x: &[f64], y: &[f64], covariates: &[&[f64]]) -> Result<CorrelationResult, StatsError> {
    partial_correlation_at(x, y, covariates, 0.95)
}

pub fn partial_correlation_at(
    x: &[f64],
    y: &[f64],
    covariates: &[&[f64]],
    level: f64,
) -> Result<CorrelationResult, StatsError> {
    let k = covariates.len();
    if k == 0 {
        return pearson_at(x, y, level);
    }
    check_lengths(x, y, k + 4)?;
    let basis = OrthoBasis::new(x.len(), covariates)?;
    residual_correlation(x, y, &basis.residualize(x), &basis.residualize(y), k, level)
}

/// Rows where x, y and every covariate are present.
pub fn complete_cases(
    x: &[Option<f64>],
    y: &[Option<f64>],
    covariates: &[&[Option<f64>]],
) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let keep: Vec<usize> = (0..x.len())
        .filter(|&i| x[i].is_some() && y[i].is_some() && covariates.iter().all(|c| c[i].is_some()))
        .collect();
    let pick = |v: &[Option<f64>]| keep.iter().map(|&i| v[i].unwrap()).collect::<Vec<f64>>();
    (pick(x), pick(y), covariates.iter().map(|c| pick(c)).collect())
}

/// [`partial_correlation`] over the pairwise complete cases.
pub fn partial_correlation_missing(
    x: &[Option<f64>],
    y: &[Option<f64>],
    covariates: &[&[Option<f64>]],
    level: f64,
) -> Result<CorrelationResult, StatsError> {
    let (x, y, z) = complete_cases(x, y, covariates);
    let z: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
    partial_correlation_at(&x, &y, &z, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perfect_correlation() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let r = pearson(&x, &x).unwrap();
        assert_eq!(r.r, 1.0);
        assert_eq!(r.p, f64::MIN_POSITIVE);
        assert_eq!(r.ci_upper, 1.0);
        let r = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 6.0, 8.0, 10.0]).unwrap();
        assert_abs_diff_eq!(r.r, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]),
            Err(StatsError::ConstantInput("x".into()))
        );
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]),
            Err(StatsError::InsufficientSamples { n: 3, required: 4 })
        );
    }

    #[test]
    fn fisher_closed_form() {
        let (lo, hi) = fisher_ci(0.0, 103, 0, 0.95).unwrap();
        assert_abs_diff_eq!(hi, (1.959_963_984_540_054f64 / 10.0).tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 0.1937, epsilon = 5e-4);
        assert_abs_diff_eq!(lo, -hi, epsilon = 1e-15);
        let (lo, hi) = fisher_ci(-0.22, 7068, 1, 0.95).unwrap();
        assert_abs_diff_eq!(lo, -0.242, epsilon = 1e-3);
        assert_abs_diff_eq!(hi, -0.198, epsilon = 1e-3);
        let (lo, hi) = fisher_ci(0.0, 10_000_000, 0, 0.95).unwrap();
        assert!(lo.abs() < 1e-3 && hi.abs() < 1e-3);
        assert!(fisher_ci(0.1, 4, 1, 0.95).is_err());
        assert!(fisher_ci(0.1, 40, 1, 1.0).is_err());
    }

    #[test]
    fn p_value_matches_t_distribution() {
        use statrs::distribution::StudentsT;
        for &(r, df) in &[(0.3f64, 20usize), (-0.05, 500), (0.8, 5)] {
            let t = r * (df as f64 / (1.0 - r * r)).sqrt();
            let dist = StudentsT::new(0.0, 1.0, df as f64).unwrap();
            let expected = 2.0 * (1.0 - dist.cdf(t.abs()));
            assert_abs_diff_eq!(p_value(r, df), expected, epsilon = 1e-10);
        }
        assert!(p_value(0.4, 100) < p_value(0.3, 100));
        assert_eq!(p_value(0.0, 10), 1.0);
    }

    #[test]
    fn residuals_of_exact_fit_vanish() {
        let z: Vec<f64> = (0..20).map(|i| i as f64 * 0.7 - 3.0).collect();
        let y: Vec<f64> = z.iter().map(|v| 3.0 * v + 2.0).collect();
        let r = ols_residuals(&y, &[&z]).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-10));
        let r = ols_residuals(&[1.0, 2.0, 6.0], &[]).unwrap();
        for (a, b) in r.iter().zip([-2.0, -1.0, 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn collinear_covariates_are_rank_deficient() {
        let z1: Vec<f64> = (0..10).map(f64::from).collect();
        let z2: Vec<f64> = z1.iter().map(|v| 2.0 * v - 1.0).collect();
        assert_eq!(ols_residuals(&z1, &[&z1, &z2]), Err(StatsError::RankDeficient));
        assert_eq!(ols_residuals(&z1, &[&[5.0; 10]]), Err(StatsError::RankDeficient));
    }

    #[test]
    fn no_covariates_is_pearson() {
        let x = [1.0, 3.0, 2.0, 5.0, 4.0, 7.0];
        let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
        assert_eq!(partial_correlation(&x, &y, &[]).unwrap(), pearson(&x, &y).unwrap());
    }

    #[test]
    fn variable_explained_by_covariate_is_constant() {
        let z: Vec<f64> = (0..12).map(f64::from).collect();
        let x: Vec<f64> = z.iter().map(|v| 4.0 * v).collect();
        let y: Vec<f64> = z.iter().map(|v| (v * 1.3).sin()).collect();
        assert_eq!(
            partial_correlation(&x, &y, &[&z]),
            Err(StatsError::ConstantInput("x".into()))
        );
    }

    #[test]
    fn complete_case_filtering() {
        let x = [Some(1.0), None, Some(3.0), Some(4.0)];
        let y = [Some(1.0), Some(2.0), None, Some(5.0)];
        let z = [Some(0.0), Some(0.0), Some(0.0), None];
        let (a, b, c) = complete_cases(&x, &y, &[&z]);
        assert_eq!((a, b, c), (vec![1.0], vec![1.0], vec![vec![0.0]]));
    }
}
