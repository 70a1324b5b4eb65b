//! The default family of C^1 test functions with finite sup norms.

use std::sync::Arc;

/// Bounded C^1 test function with precomputed (or bounded) sup norms.
#[derive(Clone)]
pub struct TestFunction {
    pub name: &'static str,
    pub sup_norm: f64,
    pub grad_sup_norm: f64,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl TestFunction {
    pub fn new(
        name: &'static str,
        sup_norm: f64,
        grad_sup_norm: f64,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name,
            sup_norm,
            grad_sup_norm,
            eval: Arc::new(eval),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("sup_norm", &self.sup_norm)
            .field("grad_sup_norm", &self.grad_sup_norm)
            .finish()
    }
}

fn r2(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

/// Smooth bump of radius 3: exp(1 - 1/(1 - (|x|/3)^2)) inside, 0 outside.
fn bump(x: &[f64]) -> f64 {
    let u2 = r2(x) / 9.0;
    if u2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u2)).exp()
    }
}

fn bump_grad_sup() -> f64 {
    // Radial profile; numeric max of |g'(r)| on [0, 3).
    let mut worst = 0.0f64;
    let n = 30_000;
    for i in 1..n {
        let r = 3.0 * i as f64 / n as f64;
        let u2 = r * r / 9.0;
        if u2 >= 1.0 {
            continue;
        }
        let g = (1.0 - 1.0 / (1.0 - u2)).exp();
        let dgdr = -g * (2.0 * r / 9.0) / ((1.0 - u2) * (1.0 - u2));
        worst = worst.max(dgdr.abs());
    }
    worst
}

/// The default set: constant 1, a unit Gaussian window, two cosine-modulated
/// wide Gaussians, and a compactly supported bump. Gradient norms are exact
/// where closed-form, upper bounds otherwise.
pub fn default_test_functions(dim: usize) -> Vec<TestFunction> {
    let mut out = Vec::new();
    out.push(TestFunction::new("one", 1.0, 0.0, |_| 1.0));

    // exp(-|x|^2): max |grad| = sqrt(2) e^{-1/2} at |x| = 1/sqrt(2).
    out.push(TestFunction::new(
        "gauss",
        1.0,
        std::f64::consts::SQRT_2 * (-0.5f64).exp(),
        |x| (-r2(x)).exp(),
    ));

    // cos(k x_1) exp(-|x|^2 / 16): |grad| <= |k| + max(|x|/8 e^{-x^2/16}).
    let envelope_grad = (8.0f64).sqrt() / 8.0 * (-0.5f64).exp();
    for (name, k) in [("cos1_gauss", 1.0f64), ("cos2_gauss", 2.0f64)] {
        out.push(TestFunction::new(
            name,
            1.0,
            k + envelope_grad,
            move |x| (k * x[0]).cos() * (-r2(x) / 16.0).exp(),
        ));
    }

    out.push(TestFunction::new("bump", 1.0, bump_grad_sup(), bump));

    debug_assert!(dim >= 1);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_norms_finite() {
        for f in default_test_functions(1) {
            assert!(f.sup_norm.is_finite() && f.grad_sup_norm.is_finite());
            assert!(f.sup_norm > 0.0);
        }
    }

    #[test]
    fn sup_norms_are_bounds() {
        let fns = default_test_functions(1);
        for f in &fns {
            for i in -400..400 {
                let x = [i as f64 * 0.01];
                assert!(
                    f.eval(&x).abs() <= f.sup_norm + 1e-12,
                    "{} exceeds sup at {x:?}",
                    f.name
                );
            }
        }
    }

    #[test]
    fn grad_bounds_hold_numerically() {
        let fns = default_test_functions(1);
        let h = 1e-6;
        for f in &fns {
            for i in -300..300 {
                let x = i as f64 * 0.013;
                let g = (f.eval(&[x + h]) - f.eval(&[x - h])) / (2.0 * h);
                assert!(
                    g.abs() <= f.grad_sup_norm + 1e-4,
                    "{}: |G'({x})| = {} > {}",
                    f.name,
                    g.abs(),
                    f.grad_sup_norm
                );
            }
        }
    }

    #[test]
    fn cosine_distinguishes_uniform_from_gaussian() {
        // Quadrature of G * (uniform - T*_D) is far from zero for the
        // cosine-modulated window.
        let fns = default_test_functions(1);
        let g = fns.iter().find(|f| f.name == "cos1_gauss").unwrap();
        let gauss = crate::verify::GaussianFixedPoint::new(1, 0.5).unwrap();
        let spacing = 0.01;
        let half = 12.0;
        let n = (2.0 * half / spacing) as i64;
        let mut pinned = 0.0;
        let mut uniform = 0.0;
        for i in 0..n {
            let x = -half + (i as f64 + 0.5) * spacing;
            pinned += g.eval(&[x]) * gauss.eval(&[x]) * spacing;
            uniform += g.eval(&[x]) * (1.0 / (2.0 * half)) * spacing;
        }
        assert!((pinned - uniform).abs() > 0.1);
    }

    #[test]
    fn bump_vanishes_outside_radius() {
        let fns = default_test_functions(1);
        let b = fns.iter().find(|f| f.name == "bump").unwrap();
        assert_eq!(b.eval(&[3.0]), 0.0);
        assert_eq!(b.eval(&[-5.0]), 0.0);
        assert!(b.eval(&[0.0]) > 0.99);
    }
}
