use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::vecspace::{dot, norm, NormSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: f64,
}

impl Example {
    pub fn new(features: Vec<f64>, label: f64) -> Self {
        Example { features, label }
    }
}

/// An ordered training sample with a declared bound `‖a‖_* ≤ feature_bound`
/// on the dual norm of every feature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    feature_bound: f64,
    norm: NormSpec,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, feature_bound: f64, norm: NormSpec) -> Result<Self> {
        norm.validate()?;
        let Some(first) = examples.first() else {
            return Err(Error::DegenerateData("a dataset needs at least one example".into()));
        };
        let d = first.features.len();
        if d == 0 {
            return Err(Error::DegenerateData("feature dimension must be at least 1".into()));
        }
        if !(feature_bound.is_finite() && feature_bound > 0.0) {
            return Err(Error::DegenerateData(format!(
                "feature bound must be positive and finite, got {feature_bound}"
            )));
        }
        for (i, z) in examples.iter().enumerate() {
            check_example(z, d, feature_bound, norm).map_err(|e| e.context(format!("example {i}")))?;
        }
        Ok(Dataset {
            examples,
            feature_bound,
            norm,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.examples[0].features.len()
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn feature_bound(&self) -> f64 {
        self.feature_bound
    }

    /// The primal geometry; feature bounds are in its dual.
    pub fn norm(&self) -> NormSpec {
        self.norm
    }

    pub fn max_abs_label(&self) -> f64 {
        self.examples.iter().map(|z| z.label.abs()).fold(0.0, f64::max)
    }

    /// Writes the dataset as CSV with header `b,a_1,…,a_d`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["b".to_string()];
        header.extend((1..=self.dim()).map(|j| format!("a_{j}")));
        w.write_record(&header)?;
        for z in &self.examples {
            let mut row = vec![z.label.to_string()];
            row.extend(z.features.iter().map(|a| a.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout written by [`Dataset::write_csv`]. When
    /// `feature_bound` is `None` the tightest bound present in the data is
    /// used.
    pub fn read_csv<R: Read>(input: R, feature_bound: Option<f64>, geometry: NormSpec) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("b") {
            return Err(Error::Config("dataset CSV must start with a `b` column".into()));
        }
        let mut examples = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            examples.push(Example::new(vals[1..].to_vec(), vals[0]));
        }
        let bound = match feature_bound {
            Some(b) => b,
            None => examples
                .iter()
                .map(|z| norm(&z.features, geometry.dual()))
                .fold(0.0, f64::max),
        };
        Dataset::new(examples, bound, geometry)
    }
}

fn check_example(z: &Example, d: usize, bound: f64, geometry: NormSpec) -> Result<()> {
    if z.features.len() != d {
        return Err(Error::DegenerateData(format!(
            "expected {d} features, found {}",
            z.features.len()
        )));
    }
    if !z.label.is_finite() || z.features.iter().any(|a| !a.is_finite()) {
        return Err(Error::DegenerateData("non-finite entry".into()));
    }
    let a = norm(&z.features, geometry.dual());
    if a > bound * (1.0 + 1e-12) {
        return Err(Error::DegenerateData(format!(
            "feature dual norm {a} exceeds the declared bound {bound}"
        )));
    }
    Ok(())
}

/// `S'` equal to `S` except that position `i` (0-based) holds `z`.
pub fn make_neighbor(s: &Dataset, i: usize, z: Example) -> Result<Dataset> {
    if i >= s.len() {
        return Err(Error::IndexOutOfRange { index: i, len: s.len() });
    }
    check_example(&z, s.dim(), s.feature_bound, s.norm)?;
    let mut examples = s.examples.clone();
    examples[i] = z;
    Ok(Dataset {
        examples,
        feature_bound: s.feature_bound,
        norm: s.norm,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LabelModel {
    /// `P(b = +1) = σ(a·w*)`.
    Classification,
    /// `b = a·w* + noise_scale · Logistic(0, 1)`.
    Regression { noise_scale: f64 },
}

/// Seeded synthetic data: features uniform on the dual-norm ball of radius
/// `feature_bound` (the ℓ2 ball for ℓ2 and ℓp geometry, the ℓ∞ cube for ℓ1
/// geometry), labels from a planted linear model with logistic noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub feature_bound: f64,
    pub geometry: NormSpec,
    pub planted_norm: f64,
    pub labels: LabelModel,
}

impl SyntheticSpec {
    pub fn classification(seed: u64, n: usize, d: usize, feature_bound: f64, geometry: NormSpec) -> Self {
        SyntheticSpec {
            seed,
            n,
            d,
            feature_bound,
            geometry,
            planted_norm: 2.0,
            labels: LabelModel::Classification,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::Config("synthetic data needs n ≥ 1 and d ≥ 1".into()));
        }
        if !(self.feature_bound.is_finite() && self.feature_bound > 0.0) {
            return Err(Error::Config("feature bound must be positive".into()));
        }
        if !(self.planted_norm.is_finite() && self.planted_norm >= 0.0) {
            return Err(Error::Config("planted norm must be finite and nonnegative".into()));
        }
        self.geometry.validate()
    }

    /// The planted model `w*` shared by every sample drawn from this spec.
    pub fn planted(&self) -> Vec<f64> {
        let mut rng = stream(self.seed, 0);
        let mut w: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&w, NormSpec::L2);
        if n > 0.0 {
            w.iter_mut().for_each(|v| *v *= self.planted_norm / n);
        }
        w
    }

    /// The training sample keyed by `(seed, n, d, feature_bound)`.
    pub fn generate(&self) -> Result<Dataset> {
        self.validate()?;
        let w = self.planted();
        let mut rng = stream(self.seed, 1);
        let examples = (0..self.n).map(|_| self.draw(&w, &mut rng)).collect();
        Dataset::new(examples, self.feature_bound, self.geometry)
    }

    /// One example from the same distribution.
    pub fn draw<R: Rng + ?Sized>(&self, planted: &[f64], rng: &mut R) -> Example {
        let a = self.draw_features(rng);
        let s = dot(&a, planted);
        let b = match self.labels {
            LabelModel::Classification => {
                let p = 1.0 / (1.0 + (-s).exp());
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    -1.0
                }
            }
            LabelModel::Regression { noise_scale } => {
                let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
                s + noise_scale * (u / (1.0 - u)).ln()
            }
        };
        Example::new(a, b)
    }

    fn draw_features<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let b = self.feature_bound;
        match self.geometry {
            NormSpec::L1 => (0..self.d).map(|_| rng.random_range(-b..=b)).collect(),
            _ => {
                // uniform in the ℓ2 ball; contained in every ℓq ball, q ≥ 2
                let g: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
                let n = norm(&g, NormSpec::L2).max(f64::MIN_POSITIVE);
                let r = b * rng.random::<f64>().powf(1.0 / self.d as f64);
                g.iter().map(|v| v * r / n).collect()
            }
        }
    }
}

/// Independent ChaCha stream `stream_id` for `seed`.
pub(crate) fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Dataset {
        SyntheticSpec::classification(3, 4, 2, 1.0, NormSpec::L2)
            .generate()
            .unwrap()
    }

    #[test]
    fn neighbor_identity_and_involution() {
        let s = small();
        let same = make_neighbor(&s, 1, s.examples()[1].clone()).unwrap();
        assert_eq!(same, s);

        let z = Example::new(vec![0.1, 0.2], -1.0);
        let s2 = make_neighbor(&s, 0, z.clone()).unwrap();
        for i in 0..s.len() {
            assert_eq!(s2.examples()[i] == s.examples()[i], i != 0);
        }
        let back = make_neighbor(&s2, 0, s.examples()[0].clone()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn neighbor_rejects_bad_index_and_bound() {
        let s = small();
        assert!(matches!(
            make_neighbor(&s, 4, s.examples()[0].clone()),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        ));
        assert!(make_neighbor(&s, 0, Example::new(vec![3.0, 0.0], 1.0)).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_bounded() {
        let spec = SyntheticSpec::classification(11, 50, 6, 2.0, NormSpec::L1);
        let a = spec.generate().unwrap();
        let b = spec.generate().unwrap();
        assert_eq!(a, b);
        for z in a.examples() {
            assert!(norm(&z.features, NormSpec::Linf) <= 2.0);
            assert!(z.label == 1.0 || z.label == -1.0);
        }
        let other = SyntheticSpec { seed: 12, ..spec }.generate().unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn csv_round_trip() {
        let s = small();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("b,a_1,a_2\n"));
        let back = Dataset::read_csv(buf.as_slice(), Some(1.0), NormSpec::L2).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(Dataset::new(vec![], 1.0, NormSpec::L2).is_err());
    }
}
