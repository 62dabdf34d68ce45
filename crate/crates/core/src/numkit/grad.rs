use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-4;

/// Largest relative disagreement between `analytic` and a central
/// difference of `f` at `x0`, using `max(1e-8, |g| + |ĝ|)` as the scale.
pub fn grad_check<F>(f: F, analytic: &[f64], x0: &[f64], eps: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let coords: Vec<usize> = (0..x0.len()).collect();
    grad_check_coords(f, analytic, x0, eps, &coords)
}

/// Like [`grad_check`] but probes only the listed coordinates.
pub fn grad_check_coords<F>(mut f: F, analytic: &[f64], x0: &[f64], eps: f64, coords: &[usize]) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    if analytic.len() != x0.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} gradient entries for {} parameters",
            analytic.len(),
            x0.len()
        )));
    }
    if let Some(i) = analytic.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteValue(format!("analytic gradient[{i}]")));
    }
    let mut x = x0.to_vec();
    let mut worst: f64 = 0.0;
    for &i in coords {
        let orig = x[i];
        x[i] = orig + eps;
        let plus = f(&x);
        x[i] = orig - eps;
        let minus = f(&x);
        x[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFiniteValue(format!("objective near coordinate {i}")));
        }
        let numeric = (plus - minus) / (2.0 * eps);
        let g = analytic[i];
        let err = (g - numeric).abs() / (g.abs() + numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_near_exact() {
        let x0 = [1.0, 2.0];
        let g = [2.0, 4.0];
        let err = grad_check(|x| x.iter().map(|v| v * v).sum(), &g, &x0, DEFAULT_EPS).unwrap();
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn linear_is_exact() {
        let x0 = [0.3, -7.0, 12.5];
        let err = grad_check(|x| x.iter().sum(), &[1.0; 3], &x0, DEFAULT_EPS).unwrap();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn wrong_gradient_is_detected() {
        let err = grad_check(|x| x[0] * x[0], &[1.0], &[1.0], DEFAULT_EPS).unwrap();
        assert!(err > 0.1);
    }

    #[test]
    fn non_finite_probe_is_an_error() {
        let r = grad_check(|x| (x[0]).ln(), &[1.0], &[0.0], DEFAULT_EPS);
        assert!(matches!(r, Err(Error::NonFiniteValue(_))));
    }
}
