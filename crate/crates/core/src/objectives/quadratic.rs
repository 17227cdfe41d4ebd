use super::Objective;

/// Separable quadratic `½ Σ h_i (x_i − c_i)²` with closed-form minimizers,
/// used by the lemma checks and tests.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    pub curvature: Vec<f64>,
    pub center: Vec<f64>,
}

impl Quadratic {
    pub fn new(curvature: Vec<f64>, center: Vec<f64>) -> Self {
        assert_eq!(curvature.len(), center.len());
        Quadratic { curvature, center }
    }

    /// `½‖x − c‖²`
    pub fn isotropic(center: Vec<f64>) -> Self {
        Quadratic::new(vec![1.0; center.len()], center)
    }

    pub fn smoothness(&self) -> f64 {
        self.curvature.iter().cloned().fold(0.0, f64::max)
    }

    pub fn strong_convexity(&self) -> f64 {
        self.curvature.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Minimizer of `self + (λ/2)‖x − anchor‖²` over `R^d`.
    pub fn regularized_minimizer(&self, lambda: f64, anchor: &[f64]) -> Vec<f64> {
        self.curvature
            .iter()
            .zip(&self.center)
            .zip(anchor)
            .map(|((h, c), a)| (h * c + lambda * a) / (h + lambda))
            .collect()
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.curvature
            .iter()
            .zip(&self.center)
            .zip(x)
            .map(|((h, c), xi)| 0.5 * h * (xi - c) * (xi - c))
            .sum()
    }

    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let g = self
            .curvature
            .iter()
            .zip(&self.center)
            .zip(x)
            .map(|((h, c), xi)| h * (xi - c))
            .collect();
        (self.value(x), g)
    }
}
