use super::matrix::{is_primitive, SubstMatrix};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Iteration cap for power iterations.
pub const MAX_ITERATIONS: usize = 100_000;
const REL_TOL: f64 = 1e-13;

/// Perron–Frobenius data of a primitive substitution matrix together with the
/// density constants built from the tile areas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub matrix: Vec<Vec<u64>>,
    pub lambda1: f64,
    pub lambda2abs: f64,
    /// Right Perron vector with first coordinate 1.
    pub v1: Vec<f64>,
    /// Left Perron vector with `w1 · v1 = 1`.
    pub w1: Vec<f64>,
    pub areas: Vec<f64>,
    pub a1: f64,
    pub a2: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub pisot: bool,
    pub primitive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primitivity_witness: Option<u32>,
    /// `|λ1(power iteration) - λ1(characteristic polynomial)| / λ1`, for n ≤ 4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charpoly_crosscheck: Option<f64>,
    /// Every eigenvalue, from the characteristic polynomial (n ≤ 4 only).
    #[serde(skip)]
    pub eigenvalues: Vec<Complex64>,
}

impl SpectralReport {
    pub fn n(&self) -> usize {
        self.v1.len()
    }

    /// `v1 / ‖v1‖₂`.
    pub fn v1_unit(&self) -> Vec<f64> {
        let norm = self.v1.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.v1.iter().map(|x| x / norm).collect()
    }

    /// Same report with a different slack `ε` (and the matching `δ`).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<SpectralReport> {
        check_epsilon(self.lambda1, self.lambda2abs, epsilon)?;
        let mut r = self.clone();
        r.epsilon = epsilon;
        r.delta = (self.lambda2abs + epsilon) / self.lambda1;
        Ok(r)
    }
}

fn check_epsilon(l1: f64, l2: f64, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < l1 - l2) {
        return Err(Error::InvalidArgument(format!(
            "slack must lie in (0, {}), got {epsilon}",
            l1 - l2
        )));
    }
    Ok(())
}

pub(crate) fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub(crate) fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

/// Power iteration with Collatz–Wielandt bracketing. Returns `(λ, x)` with
/// `x` positive and normalized to `x[0] = 1`.
pub(crate) fn perron_pair(a: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let n = a.len();
    let mut x = vec![1.0; n];
    for it in 0..MAX_ITERATIONS {
        let y = mat_vec(a, &x);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let norm = y.iter().fold(0.0f64, |m, v| m.max(*v));
        if !(norm > 0.0) {
            return Err(Error::NotPrimitive);
        }
        x = y.iter().map(|v| v / norm).collect();
        if hi - lo <= REL_TOL * hi && it > 0 {
            let x0 = x[0];
            let v: Vec<f64> = x.iter().map(|v| v / x0).collect();
            let lambda = mat_vec(a, &v)
                .iter()
                .zip(&v)
                .map(|(p, q)| p / q)
                .sum::<f64>()
                / n as f64;
            return Ok((lambda, v));
        }
    }
    Err(Error::PowerIterationStalled(MAX_ITERATIONS))
}

/// Coefficients `c[0..=n]` of `det(λI - A) = Σ c[k] λ^(n-k)` (Faddeev–LeVerrier).
pub fn characteristic_polynomial(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![1.0];
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += a[i][l] * m[l][j];
                }
                next[i][j] = s;
            }
            next[i][i] += coeffs[k - 1];
        }
        m = next;
        let mut trace = 0.0;
        for i in 0..n {
            for l in 0..n {
                trace += a[i][l] * m[l][i];
            }
        }
        coeffs.push(-trace / k as f64);
    }
    coeffs
}

/// All roots of a monic polynomial by Durand–Kerner iteration.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    // polish each root with Newton steps on the full polynomial
    let deriv: Vec<f64> = coeffs[..n]
        .iter()
        .enumerate()
        .map(|(k, c)| c * (n - k) as f64)
        .collect();
    let eval_d = |z: Complex64| deriv.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for r in &mut roots {
        for _ in 0..3 {
            let d = eval_d(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    roots
}

/// Spectral radius of `B` by normalized iteration and averaged log growth.
fn spectral_radius_estimate(b: &[Vec<f64>]) -> f64 {
    let n = b.len();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * i as f64).collect();
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    let nx = norm(&x);
    x.iter_mut().for_each(|t| *t /= nx);
    let window = 64;
    let mut prev = f64::NAN;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let mut log_growth = 0.0;
        for _ in 0..window {
            let y = mat_vec(b, &x);
            let ny = norm(&y);
            if ny < 1e-300 {
                return 0.0;
            }
            log_growth += ny.ln();
            x = y.iter().map(|t| t / ny).collect();
        }
        iterations += window;
        let est = (log_growth / window as f64).exp();
        if iterations > 4 * window && (est - prev).abs() <= 1e-10 * est.max(1e-300) {
            return est;
        }
        prev = est;
    }
    prev
}

/// Perron–Frobenius data and the density constants `a1, a2, α`.
///
/// `epsilon` defaults to `(λ1 - |λ2|) / 10`.
pub fn perron_data(a: &SubstMatrix, areas: &[f64], epsilon: Option<f64>) -> Result<SpectralReport> {
    let n = a.n();
    if areas.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} areas for a {n}×{n} matrix",
            areas.len()
        )));
    }
    if areas.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument("areas must be positive".into()));
    }
    let (primitive, witness) = is_primitive(a);
    if !primitive {
        return Err(Error::NotPrimitive);
    }
    let af = a.to_f64();
    let (lambda1, v1) = perron_pair(&af)?;
    let (_, mut w1) = perron_pair(&transpose(&af))?;
    let dot: f64 = w1.iter().zip(&v1).map(|(p, q)| p * q).sum();
    w1.iter_mut().for_each(|t| *t /= dot);

    let (lambda2abs, charpoly_crosscheck, eigenvalues) = if n == 1 {
        (0.0, Some(0.0), vec![Complex64::new(lambda1, 0.0)])
    } else if n <= 4 {
        let roots = polynomial_roots(&characteristic_polynomial(&af));
        let (k1, _) = roots
            .iter()
            .enumerate()
            .map(|(k, z)| (k, (z - lambda1).norm()))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        let l2 = roots
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != k1)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        let cross = (roots[k1].re - lambda1).abs() / lambda1;
        (l2, Some(cross), roots)
    } else {
        let deflated: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| af[i][j] - lambda1 * v1[i] * w1[j]).collect())
            .collect();
        (spectral_radius_estimate(&deflated), None, Vec::new())
    };

    let a1: f64 = v1.iter().sum();
    let a2: f64 = v1.iter().zip(areas).map(|(c, s)| c * s).sum();
    let eps = epsilon.unwrap_or((lambda1 - lambda2abs) / 10.0);
    check_epsilon(lambda1, lambda2abs, eps)?;
    Ok(SpectralReport {
        matrix: a.rows(),
        lambda1,
        lambda2abs,
        v1,
        w1,
        areas: areas.to_vec(),
        a1,
        a2,
        alpha: a1 / a2,
        epsilon: eps,
        delta: (lambda2abs + eps) / lambda1,
        pisot: lambda2abs < 1.0,
        primitive,
        primitivity_witness: witness,
        charpoly_crosscheck,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn characteristic_polynomial_of_penrose_matrix() {
        let c = characteristic_polynomial(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(c, vec![1.0, -3.0, 1.0]);
    }

    #[test]
    fn roots_of_cubic() {
        // (x - 1)(x - 2)(x + 3) = x³ - 7x + 6
        let mut r: Vec<f64> = polynomial_roots(&[1.0, 0.0, -7.0, 6.0])
            .iter()
            .map(|z| z.re)
            .collect();
        r.sort_by(f64::total_cmp);
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn deflation_agrees_with_charpoly() {
        // symmetric 5×5, beyond the characteristic-polynomial route
        let a = SubstMatrix::from_rows(&[
            vec![1, 1, 0, 0, 1],
            vec![1, 0, 1, 0, 0],
            vec![0, 1, 0, 1, 0],
            vec![0, 0, 1, 0, 1],
            vec![1, 0, 0, 1, 1],
        ]);
        let r = perron_data(&a, &[1.0; 5], None).unwrap();
        let roots = polynomial_roots(&characteristic_polynomial(&a.to_f64()));
        let mut mods: Vec<f64> = roots.iter().map(|z| z.norm()).collect();
        mods.sort_by(|x, y| y.total_cmp(x));
        assert!((mods[0] - r.lambda1).abs() < 1e-9);
        assert!((mods[1] - r.lambda2abs).abs() < 1e-6, "{mods:?} vs {}", r.lambda2abs);
    }
}
