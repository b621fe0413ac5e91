use super::eigen::SpectralReport;
use super::matrix::SubstMatrix;
use crate::error::{Error, Result};
use crate::fit::log_slope;
use crate::subst::SubstitutionRule;
use serde::Serialize;
use twofloat::TwoFloat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiConsistency {
    /// `|ξ² - λ1| / λ1`.
    pub xi_residual: f64,
    /// `‖ξ² s - Aᵗ s‖∞ / ‖s‖∞`.
    pub left_eigen_residual: f64,
}

impl XiConsistency {
    pub fn ok(&self, tol: f64) -> bool {
        self.xi_residual < tol && self.left_eigen_residual < tol
    }
}

pub fn check_xi_consistency(rule: &SubstitutionRule, report: &SpectralReport) -> XiConsistency {
    let xi2 = rule.xi() * rule.xi();
    let s = rule.areas();
    let n = s.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        let ats: f64 = (0..n).map(|i| report.matrix[i][j] as f64 * s[i]).sum();
        worst = worst.max((xi2 * s[j] - ats).abs());
    }
    let smax = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    XiConsistency {
        xi_residual: (xi2 - report.lambda1).abs() / report.lambda1,
        left_eigen_residual: worst / smax,
    }
}

/// Residual series of the eigen-decay probes with fitted log-slopes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProbe {
    pub m: Vec<u32>,
    /// `‖Aᵐu / (β1(u) λ1ᵐ) - v1'‖∞` with `v1' = v1 / ‖v1‖₂`.
    pub eigen_residuals: Vec<f64>,
    /// `max_i |t_i / t_1 - c_i|` with `t = Aᵐu`.
    pub ratio_residuals: Vec<f64>,
    pub eigen_slope: Option<f64>,
    pub ratio_slope: Option<f64>,
    pub beta1: f64,
}

type Dd = TwoFloat;

fn dd_mat_vec(a: &SubstMatrix, x: &[Dd]) -> Vec<Dd> {
    let n = a.n();
    (0..n)
        .map(|i| {
            (0..n).fold(Dd::from(0.0), |acc, j| acc + x[j] * (a.get(i, j) as f64))
        })
        .collect()
}

fn dd_mat_t_vec(a: &SubstMatrix, x: &[Dd]) -> Vec<Dd> {
    let n = a.n();
    (0..n)
        .map(|j| {
            (0..n).fold(Dd::from(0.0), |acc, i| acc + x[i] * (a.get(i, j) as f64))
        })
        .collect()
}

/// Refines a Perron vector (first coordinate 1) in double-double arithmetic.
fn dd_refine(a: &SubstMatrix, start: &[f64], transpose: bool) -> Vec<Dd> {
    let mut x: Vec<Dd> = start.iter().map(|&v| Dd::from(v)).collect();
    for _ in 0..10_000 {
        let y = if transpose {
            dd_mat_t_vec(a, &x)
        } else {
            dd_mat_vec(a, &x)
        };
        let y0 = y[0];
        let next: Vec<Dd> = y.iter().map(|v| *v / y0).collect();
        let change = next
            .iter()
            .zip(&x)
            .map(|(p, q)| f64::from((*p - *q).abs()))
            .fold(0.0, f64::max);
        x = next;
        if change < 1e-31 {
            break;
        }
    }
    x
}

/// Runs both decay probes for `m = 1..=mmax` in double-double precision, so
/// the series are resolved well below `1e-16`.
pub fn decay_probe(a: &SubstMatrix, u: &[f64], mmax: u32, report: &SpectralReport) -> Result<DecayProbe> {
    let n = a.n();
    if u.len() != n {
        return Err(Error::InvalidArgument(format!(
            "vector of length {} for a {n}×{n} matrix",
            u.len()
        )));
    }
    if u.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument("probe vector must be nonnegative".into()));
    }
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector);
    }
    let v1 = dd_refine(a, &report.v1, false);
    let mut w1 = dd_refine(a, &report.w1, true);
    let dot = w1.iter().zip(&v1).fold(Dd::from(0.0), |s, (p, q)| s + *p * *q);
    w1.iter_mut().for_each(|t| *t = *t / dot);
    let lambda1 = dd_mat_vec(a, &v1)[0];
    let v1_norm = v1.iter().fold(Dd::from(0.0), |s, t| s + *t * *t).sqrt();
    let v1_unit: Vec<Dd> = v1.iter().map(|t| *t / v1_norm).collect();
    let ud: Vec<Dd> = u.iter().map(|&x| Dd::from(x)).collect();
    // coefficient of the unit Perron vector in u = β1 v1' + (W-part)
    let beta1 = w1.iter().zip(&ud).fold(Dd::from(0.0), |s, (p, q)| s + *p * *q) * v1_norm;

    let mut t = ud;
    let mut scale = beta1;
    let (mut ms, mut eig, mut rat) = (Vec::new(), Vec::new(), Vec::new());
    for m in 1..=mmax {
        t = dd_mat_vec(a, &t);
        scale = scale * lambda1;
        let e = t
            .iter()
            .zip(&v1_unit)
            .map(|(ti, vi)| f64::from((*ti / scale - *vi).abs()))
            .fold(0.0, f64::max);
        let r = if t[0] == 0.0 {
            f64::INFINITY
        } else {
            t.iter()
                .zip(&v1)
                .map(|(ti, ci)| f64::from((*ti / t[0] - *ci).abs()))
                .fold(0.0, f64::max)
        };
        ms.push(m);
        eig.push(e);
        rat.push(r);
    }
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    Ok(DecayProbe {
        eigen_slope: log_slope(&xs, &eig).map(|f| f.slope),
        ratio_slope: log_slope(&xs, &rat).map(|f| f.slope),
        m: ms,
        eigen_residuals: eig,
        ratio_residuals: rat,
        beta1: f64::from(beta1),
    })
}

/// Intervals for the level-0 tile count and the area of a patch whose
/// level-0 content has `t1` tiles of type 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatchPrediction {
    pub count: (f64, f64),
    pub area: (f64, f64),
}

impl PatchPrediction {
    pub fn contains(&self, count: f64, area: f64) -> bool {
        let slack = |x: f64| 1e-9 * x.abs().max(1.0);
        count >= self.count.0 - slack(count)
            && count <= self.count.1 + slack(count)
            && area >= self.area.0 - slack(area)
            && area <= self.area.1 + slack(area)
    }
}

pub fn predict_patch_stats(t1: u64, m: u32, report: &SpectralReport, c2: f64) -> PatchPrediction {
    let t1 = t1 as f64;
    let d = c2 * report.delta.powi(m as i32);
    PatchPrediction {
        count: (t1 * (report.a1 - d), t1 * (report.a1 + d)),
        area: (t1 * (report.a2 - d), t1 * (report.a2 + d)),
    }
}

/// Smallest `C2` for which every supertile `(ξH)^m(T_i)` with `m` in `ms`
/// satisfies the count and area bounds; computed from the exact counts
/// `Aᵐ e_i`. Labeled empirical: the true constant is not computable.
pub fn fit_c2_empirical(a: &SubstMatrix, report: &SpectralReport, ms: &[u32]) -> Result<f64> {
    let mut c2 = 0.0f64;
    for i in 0..a.n() {
        for &m in ms {
            let t = a.column_of_power(i, m).ok_or(Error::CapacityExceeded {
                projected: u128::MAX,
                limit: u128::MAX,
            })?;
            if t[0] == 0 {
                continue;
            }
            let t1 = t[0] as f64;
            let count: f64 = t.iter().map(|&x| x as f64).sum();
            let area: f64 = t.iter().zip(&report.areas).map(|(&x, s)| x as f64 * s).sum();
            let resid = (count / t1 - report.a1).abs().max((area / t1 - report.a2).abs());
            let scaled = resid / report.delta.powi(m as i32);
            // n = 1 residuals are rounding noise
            if resid > 1e-12 * report.a1.max(report.a2) {
                c2 = c2.max(scaled);
            }
        }
    }
    Ok(c2)
}

/// Smallest `K` with `series[k] ≤ K · rate^m[k]` for every entry.
pub fn envelope_constant(m: &[u32], series: &[f64], rate: f64) -> f64 {
    m.iter()
        .zip(series)
        .map(|(&mi, &s)| s / rate.powi(mi as i32))
        .fold(0.0, f64::max)
}
