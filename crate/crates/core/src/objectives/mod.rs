//! Per-example convex losses, datasets, and (regularized) empirical risks.

mod dataset;
mod loss;
mod quadratic;
mod risk;

pub(crate) use dataset::stream;
pub use dataset::{make_neighbor, Dataset, Example, LabelModel, SyntheticSpec};
pub use loss::{certify_constants, LossKind, LossModel};
pub use quadratic::Quadratic;
pub use risk::{EmpiricalRisk, RegularizedRisk, Regularizer};

/// A differentiable objective on `R^d`.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_grad(x).1
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (**self).value_and_grad(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
}
