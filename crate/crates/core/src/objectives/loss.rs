use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Example};
use crate::vecspace::{dot, norm, NormSpec};
use crate::{Error, Result};

/// Shipped loss families. Each is a convex, smooth and Lipschitz function of
/// a linear score `a·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LossKind {
    /// `log(1 + exp(−b a·x))`, labels `±1`.
    Logistic,
    /// `δ²(√(1 + (r/δ)²) − 1)` with residual `r = a·x − b`.
    PseudoHuber { delta: f64 },
    /// Quadratically smoothed hinge on the margin `b a·x`, labels `±1`.
    SmoothedHinge { delta: f64 },
}

impl LossKind {
    pub fn validate(self) -> Result<()> {
        match self {
            LossKind::PseudoHuber { delta } | LossKind::SmoothedHinge { delta }
                if !(delta.is_finite() && delta > 0.0) =>
            {
                Err(Error::Config(format!("loss width δ must be positive, got {delta}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_classification(self) -> bool {
        !matches!(self, LossKind::PseudoHuber { .. })
    }

    /// Bounds `(sup |φ'|, sup φ'')` of the scalar link.
    fn link_bounds(self) -> (f64, f64) {
        match self {
            LossKind::Logistic => (1.0, 0.25),
            LossKind::PseudoHuber { delta } => (delta, 1.0),
            LossKind::SmoothedHinge { delta } => (1.0, 1.0 / delta),
        }
    }

    /// Scalar argument of the link: margin `b s` or residual `s − b`.
    fn argument(self, score: f64, label: f64) -> f64 {
        match self {
            LossKind::PseudoHuber { .. } => score - label,
            _ => label * score,
        }
    }

    /// `d(argument)/d(score)`.
    fn chain(self, label: f64) -> f64 {
        match self {
            LossKind::PseudoHuber { .. } => 1.0,
            _ => label,
        }
    }

    /// `(φ(u), φ'(u))`.
    fn link(self, u: f64) -> (f64, f64) {
        match self {
            LossKind::Logistic => {
                // log(1 + e^{−u}) and −σ(−u), evaluated without overflow
                if u > 0.0 {
                    let e = (-u).exp();
                    (e.ln_1p(), -e / (1.0 + e))
                } else {
                    let e = u.exp();
                    (-u + e.ln_1p(), -1.0 / (1.0 + e))
                }
            }
            LossKind::PseudoHuber { delta } => {
                let s = (1.0 + (u / delta).powi(2)).sqrt();
                (delta * delta * (s - 1.0), u / s)
            }
            LossKind::SmoothedHinge { delta } => {
                if u >= 1.0 {
                    (0.0, 0.0)
                } else if u <= 1.0 - delta {
                    (1.0 - u - 0.5 * delta, -1.0)
                } else {
                    let r = 1.0 - u;
                    (r * r / (2.0 * delta), -r / delta)
                }
            }
        }
    }
}

/// A loss together with certified smoothness `β` and Lipschitz constant `G`
/// with respect to `norm` (gradients measured in the dual norm).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub kind: LossKind,
    pub norm: NormSpec,
    pub beta: f64,
    pub lipschitz: f64,
}

impl LossModel {
    /// Constants certified from the examples actually present in `data`.
    pub fn certified(kind: LossKind, data: &Dataset) -> Result<Self> {
        let (beta, lipschitz) = certify_constants(kind, data)?;
        Ok(LossModel {
            kind,
            norm: data.norm(),
            beta,
            lipschitz,
        })
    }

    /// Constants valid for every example whose features satisfy
    /// `‖a‖_* ≤ bound` (and `|b| ≤ 1` for classification losses).
    ///
    /// Use this when the same constants must serve a dataset and all of
    /// its neighbors.
    pub fn for_feature_bound(kind: LossKind, norm: NormSpec, bound: f64) -> Result<Self> {
        kind.validate()?;
        check_geometry(norm)?;
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::DegenerateData(format!(
                "feature bound must be positive, got {bound}"
            )));
        }
        let (g, h) = kind.link_bounds();
        Ok(LossModel {
            kind,
            norm,
            beta: h * bound * bound,
            lipschitz: g * bound,
        })
    }

    pub fn value(&self, x: &[f64], z: &Example) -> f64 {
        let u = self.kind.argument(dot(&z.features, x), z.label);
        self.kind.link(u).0
    }

    pub fn grad(&self, x: &[f64], z: &Example) -> Vec<f64> {
        self.value_and_grad(x, z).1
    }

    pub fn value_and_grad(&self, x: &[f64], z: &Example) -> (f64, Vec<f64>) {
        let (v, d) = self.scalar(x, z);
        (v, z.features.iter().map(|a| d * a).collect())
    }

    /// `(ℓ(x; z), ∂ℓ/∂(a·x))`: the gradient is the second entry times `a`.
    pub fn scalar(&self, x: &[f64], z: &Example) -> (f64, f64) {
        let u = self.kind.argument(dot(&z.features, x), z.label);
        let (v, d) = self.kind.link(u);
        (v, d * self.kind.chain(z.label))
    }

    /// Lower bound on `∂²ℓ/∂(a·x)²` when `|a·x| ≤ score_bound` and
    /// `|b| ≤ label_bound`; `None` when the link has flat regions.
    pub fn curvature_lower_bound(&self, score_bound: f64, label_bound: f64) -> Option<f64> {
        match self.kind {
            LossKind::Logistic => {
                let m = score_bound * label_bound;
                let s = 1.0 / (1.0 + (-m).exp());
                Some(s * (1.0 - s) * label_bound * label_bound)
            }
            LossKind::PseudoHuber { delta } => {
                let r = score_bound + label_bound;
                Some((1.0 + (r / delta).powi(2)).powf(-1.5))
            }
            LossKind::SmoothedHinge { .. } => None,
        }
    }
}

fn check_geometry(norm: NormSpec) -> Result<()> {
    match norm {
        NormSpec::L1 | NormSpec::L2 => Ok(()),
        NormSpec::Lp(p) if p > 1.0 && p <= 2.0 => Ok(()),
        other => Err(Error::Config(format!(
            "losses are certified for ℓ1, ℓ2 and ℓp (1 < p ≤ 2) geometries, not {other:?}"
        ))),
    }
}

/// Certifies `(β, G)` for `kind` over `data` in the dataset's geometry.
///
/// For a link `φ` with `|φ'| ≤ g` and `φ'' ≤ h`, the gradient `φ'·a` has dual
/// norm at most `g‖a‖_*` and changes by at most `h‖a‖_*²‖x − y‖`, so
/// `β = h·max‖a_i‖_*²` and `G = g·max‖a_i‖_*` (labels folded into `a` for
/// margin losses).
pub fn certify_constants(kind: LossKind, data: &Dataset) -> Result<(f64, f64)> {
    kind.validate()?;
    let geometry = data.norm();
    check_geometry(geometry)?;
    let dual = geometry.dual();
    let scale = data
        .examples()
        .iter()
        .map(|z| {
            let a = norm(&z.features, dual);
            if kind.is_classification() {
                a * z.label.abs()
            } else {
                a
            }
        })
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateData(
            "every feature vector is zero; smoothness and Lipschitz constants vanish".into(),
        ));
    }
    let (g, h) = kind.link_bounds();
    Ok((h * scale * scale, g * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ex(a: &[f64], b: f64) -> Example {
        Example::new(a.to_vec(), b)
    }

    fn dataset(xs: Vec<Example>, norm: NormSpec) -> Dataset {
        Dataset::new(xs, 10.0, norm).unwrap()
    }

    #[test]
    fn logistic_values() {
        let m = LossModel::for_feature_bound(LossKind::Logistic, NormSpec::L2, 1.0).unwrap();
        let z = ex(&[0.3, -0.2], 1.0);
        assert_abs_diff_eq!(m.value(&[0.0, 0.0], &z), std::f64::consts::LN_2, epsilon = 1e-15);
        // b a·x = log 3 gives log(1 + 1/3) = log(4/3)
        let z = ex(&[1.0, 0.0], 1.0);
        let x = [3.0_f64.ln(), 0.0];
        assert_abs_diff_eq!(m.value(&x, &z), (4.0_f64 / 3.0).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(m.value(&x, &z), 0.287_682_072_451_780_9, epsilon = 1e-12);
    }

    #[test]
    fn pseudo_huber_zero_residual() {
        let m = LossModel::for_feature_bound(LossKind::PseudoHuber { delta: 1.0 }, NormSpec::L2, 1.0).unwrap();
        let z = ex(&[1.0, 2.0], 3.0);
        assert_eq!(m.value(&[1.0, 1.0], &z), 0.0);
    }

    #[test]
    fn logistic_is_stable_for_extreme_margins() {
        let m = LossModel::for_feature_bound(LossKind::Logistic, NormSpec::L2, 1.0).unwrap();
        let z = ex(&[1.0], 1.0);
        let (v, g) = m.value_and_grad(&[-800.0], &z);
        assert_abs_diff_eq!(v, 800.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g[0], -1.0, epsilon = 1e-12);
        let (v, g) = m.value_and_grad(&[800.0], &z);
        assert!((0.0..1e-300).contains(&v));
        assert!(g[0].abs() < 1e-300);
    }

    #[test]
    fn certify_examples() {
        let s = dataset(vec![ex(&[2.0, 0.0], 1.0)], NormSpec::L2);
        let (beta, g) = certify_constants(LossKind::Logistic, &s).unwrap();
        assert_abs_diff_eq!(beta, 1.0);
        assert_abs_diff_eq!(g, 2.0);

        let s = dataset(vec![ex(&[1.0, 1.0], -1.0)], NormSpec::L1);
        let (beta, g) = certify_constants(LossKind::Logistic, &s).unwrap();
        assert_abs_diff_eq!(beta, 0.25);
        assert_abs_diff_eq!(g, 1.0);

        let s = dataset(vec![ex(&[0.0, 0.0], 1.0)], NormSpec::L2);
        assert!(matches!(
            certify_constants(LossKind::Logistic, &s),
            Err(Error::DegenerateData(_))
        ));

        let s = dataset(vec![ex(&[1.0, 0.0], 1.0)], NormSpec::Linf);
        assert!(matches!(
            certify_constants(LossKind::Logistic, &s),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn smoothed_hinge_pieces_join() {
        let k = LossKind::SmoothedHinge { delta: 0.5 };
        for u in [0.5, 1.0] {
            let (l, r) = (k.link(u - 1e-12), k.link(u + 1e-12));
            assert_abs_diff_eq!(l.0, r.0, epsilon = 1e-9);
            assert_abs_diff_eq!(l.1, r.1, epsilon = 1e-9);
        }
    }
}
