use nalgebra::DMatrix;

use super::{Dataset, LossModel, Objective};
use crate::mirror::MirrorMap;
use crate::vecspace::{axpy, dist2_sq, norm, DomainSpec};
use crate::{Error, Result};

/// `F_S(x) = (1/n) Σ ℓ(x; z_i)`.
#[derive(Clone, Debug)]
pub struct EmpiricalRisk {
    dataset: Dataset,
    loss: LossModel,
}

impl EmpiricalRisk {
    pub fn new(dataset: Dataset, loss: LossModel) -> Result<Self> {
        if loss.norm != dataset.norm() {
            return Err(Error::Config(format!(
                "loss certified for {:?} but the dataset geometry is {:?}",
                loss.norm,
                dataset.norm()
            )));
        }
        Ok(EmpiricalRisk { dataset, loss })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn loss(&self) -> &LossModel {
        &self.loss
    }

    pub fn n(&self) -> usize {
        self.dataset.len()
    }

    /// Euclidean strong-convexity modulus of `F_S` on `{‖x‖ ≤ radius}` in
    /// the dataset geometry: the link curvature at the largest reachable
    /// score times the smallest eigenvalue of `(1/n) Σ a_i a_iᵀ`.
    pub fn strong_convexity_on(&self, radius: f64) -> Option<f64> {
        let dual = self.dataset.norm().dual();
        let a_max = self
            .dataset
            .examples()
            .iter()
            .map(|z| norm(&z.features, dual))
            .fold(0.0, f64::max);
        let curv = self
            .loss
            .curvature_lower_bound(a_max * radius, self.dataset.max_abs_label())?;
        let d = self.dataset.dim();
        let mut m = DMatrix::<f64>::zeros(d, d);
        for z in self.dataset.examples() {
            let a = nalgebra::DVector::from_column_slice(&z.features);
            m += &a * a.transpose();
        }
        m /= self.n() as f64;
        let lmin = m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        // eigenvalue solver error is O(ε‖M‖)
        let lmin = lmin - 1e-12 * m.norm();
        (lmin > 0.0 && curv > 0.0).then_some(curv * lmin)
    }

    /// Same as [`strong_convexity_on`](Self::strong_convexity_on) using the
    /// radius of a bounded domain.
    pub fn strong_convexity_on_domain(&self, domain: DomainSpec) -> Option<f64> {
        let r = domain.radius_in(self.dataset.norm(), self.dataset.dim())?;
        self.strong_convexity_on(r)
    }
}

impl Objective for EmpiricalRisk {
    fn dim(&self) -> usize {
        self.dataset.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = self.dataset.examples().iter().map(|z| self.loss.value(x, z)).sum();
        s / self.n() as f64
    }

    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; self.dim()];
        let mut v = 0.0;
        for z in self.dataset.examples() {
            let (lv, ld) = self.loss.scalar(x, z);
            v += lv;
            axpy(&mut g, ld, &z.features);
        }
        let inv = 1.0 / self.n() as f64;
        g.iter_mut().for_each(|gi| *gi *= inv);
        (v * inv, g)
    }
}

#[derive(Clone, Debug)]
pub enum Regularizer {
    /// `½‖x − anchor‖²`
    SquaredEuclidean { anchor: Vec<f64> },
    /// The mirror map `R(x)` itself.
    Mirror(MirrorMap),
}

impl Regularizer {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Regularizer::SquaredEuclidean { anchor } => 0.5 * dist2_sq(x, anchor),
            Regularizer::Mirror(r) => r.value(x),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Regularizer::SquaredEuclidean { anchor } => x.iter().zip(anchor).map(|(a, b)| a - b).collect(),
            Regularizer::Mirror(r) => r.grad_clamped(x),
        }
    }
}

/// `F_S(x) + λ·reg(x)`; any [`Objective`] can stand in for `F_S`.
#[derive(Clone, Debug)]
pub struct RegularizedRisk<'a, F: ?Sized = EmpiricalRisk> {
    pub base: &'a F,
    pub lambda: f64,
    pub regularizer: Regularizer,
}

impl<'a, F: Objective + ?Sized> RegularizedRisk<'a, F> {
    /// `F_S(x) + (λ/2)‖x − anchor‖²`
    pub fn euclidean(base: &'a F, lambda: f64, anchor: &[f64]) -> Self {
        RegularizedRisk {
            base,
            lambda,
            regularizer: Regularizer::SquaredEuclidean {
                anchor: anchor.to_vec(),
            },
        }
    }

    /// `F_S(x) + λR(x)`
    pub fn mirror(base: &'a F, lambda: f64, mirror: MirrorMap) -> Self {
        RegularizedRisk {
            base,
            lambda,
            regularizer: Regularizer::Mirror(mirror),
        }
    }

    /// Euclidean strong-convexity modulus contributed by the regularizer;
    /// every shipped mirror map is 1-strongly convex w.r.t. ℓ2 on its domain.
    pub fn strong_convexity(&self) -> f64 {
        self.lambda
    }
}

impl<F: Objective + ?Sized> Objective for RegularizedRisk<'_, F> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let base = self.base.value(x);
        if self.lambda == 0.0 {
            return base;
        }
        base + self.lambda * self.regularizer.value(x)
    }

    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, mut g) = self.base.value_and_grad(x);
        if self.lambda == 0.0 {
            return (v, g);
        }
        axpy(&mut g, self.lambda, &self.regularizer.grad(x));
        (v + self.lambda * self.regularizer.value(x), g)
    }
}
