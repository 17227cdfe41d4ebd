//! Dense vectors, norms, convex domains and Euclidean projections.
//!
//! Vectors are plain `[f64]` slices; every routine here is a pure function.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::tolerances;
use crate::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist2_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn is_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// A norm on `R^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSpec {
    L1,
    L2,
    /// ℓp with `p > 1`; the geometry side uses `p ∈ (1, 2]`, duals may
    /// have `p ≥ 2`.
    Lp(f64),
    Linf,
}

impl NormSpec {
    /// The dual norm: ℓ2 ↔ ℓ2, ℓ1 ↔ ℓ∞, ℓp ↔ ℓq with `1/p + 1/q = 1`.
    pub fn dual(self) -> NormSpec {
        match self {
            NormSpec::L1 => NormSpec::Linf,
            NormSpec::Linf => NormSpec::L1,
            NormSpec::L2 => NormSpec::L2,
            NormSpec::Lp(p) => NormSpec::Lp(conjugate_exponent(p)),
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            NormSpec::Lp(p) if !(p.is_finite() && p > 1.0) => {
                Err(Error::Config(format!("ℓp norm needs p > 1, got {p}")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(self, v: &[f64]) -> f64 {
        norm(v, self)
    }
}

pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `‖v‖_n`.
pub fn norm(v: &[f64], n: NormSpec) -> f64 {
    match n {
        NormSpec::L1 => v.iter().map(|x| x.abs()).sum(),
        NormSpec::L2 => {
            // scaled to avoid overflow for large entries
            let m = max_abs(v);
            if m == 0.0 {
                return 0.0;
            }
            m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
        }
        NormSpec::Linf => max_abs(v),
        NormSpec::Lp(p) => {
            let m = max_abs(v);
            if m == 0.0 {
                return 0.0;
            }
            m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// A closed convex feasible set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    Unconstrained,
    L2Ball {
        radius: f64,
    },
    LpBall {
        p: f64,
        radius: f64,
    },
    /// `{x ≥ 0, Σ x_i = 1}`
    Simplex,
}

impl DomainSpec {
    pub fn validate(self) -> Result<()> {
        match self {
            DomainSpec::L2Ball { radius } | DomainSpec::LpBall { radius, .. }
                if !(radius.is_finite() && radius > 0.0) =>
            {
                Err(Error::Config(format!("ball radius must be positive, got {radius}")))
            }
            DomainSpec::LpBall { p, .. } if !(p > 1.0 && p <= 2.0) => {
                Err(Error::Config(format!("ℓp ball needs p in (1, 2], got {p}")))
            }
            _ => Ok(()),
        }
    }

    pub fn contains(self, x: &[f64]) -> bool {
        self.contains_tol(x, tolerances::MEMBERSHIP)
    }

    pub fn contains_tol(self, x: &[f64], tol: f64) -> bool {
        if !is_finite(x) {
            return false;
        }
        match self {
            DomainSpec::Unconstrained => true,
            DomainSpec::L2Ball { radius } => norm(x, NormSpec::L2) <= radius * (1.0 + tol),
            DomainSpec::LpBall { p, radius } => norm(x, NormSpec::Lp(p)) <= radius * (1.0 + tol),
            DomainSpec::Simplex => x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol,
        }
    }

    pub fn is_bounded(self) -> bool {
        !matches!(self, DomainSpec::Unconstrained)
    }

    /// Euclidean diameter, `None` when unbounded.
    pub fn diameter(self) -> Option<f64> {
        match self {
            DomainSpec::Unconstrained => None,
            DomainSpec::L2Ball { radius } => Some(2.0 * radius),
            // ‖x‖₂ ≤ ‖x‖_p for p ≤ 2
            DomainSpec::LpBall { radius, .. } => Some(2.0 * radius),
            DomainSpec::Simplex => Some(std::f64::consts::SQRT_2),
        }
    }

    /// Upper bound on `‖x‖_n` over the domain in dimension `d`.
    pub fn radius_in(self, n: NormSpec, d: usize) -> Option<f64> {
        let d = d as f64;
        match (self, n) {
            (DomainSpec::Unconstrained, _) => None,
            (DomainSpec::Simplex, _) => Some(1.0),
            (DomainSpec::L2Ball { radius }, NormSpec::L1) => Some(radius * d.sqrt()),
            (DomainSpec::L2Ball { radius }, NormSpec::Lp(q)) if q < 2.0 => Some(radius * d.powf(1.0 / q - 0.5)),
            (DomainSpec::L2Ball { radius }, _) => Some(radius),
            (DomainSpec::LpBall { p, radius }, NormSpec::L1) => Some(radius * d.powf(1.0 - 1.0 / p)),
            (DomainSpec::LpBall { p, radius }, NormSpec::Lp(q)) if q < p => Some(radius * d.powf(1.0 / q - 1.0 / p)),
            (DomainSpec::LpBall { radius, .. }, _) => Some(radius),
        }
    }

    /// Euclidean projection `argmin_{x ∈ dom} ‖x − v‖₂`.
    pub fn project(self, v: &[f64]) -> Result<Vec<f64>> {
        project(v, self)
    }
}

/// Euclidean projection of `v` onto `dom`.
pub fn project(v: &[f64], dom: DomainSpec) -> Result<Vec<f64>> {
    match dom {
        DomainSpec::Unconstrained => Ok(v.to_vec()),
        DomainSpec::L2Ball { radius } => {
            let n = norm(v, NormSpec::L2);
            if n <= radius {
                Ok(v.to_vec())
            } else {
                Ok(scale(v, radius / n))
            }
        }
        DomainSpec::Simplex => Ok(project_simplex(v)),
        DomainSpec::LpBall { p, radius } => project_lp_ball(v, p, radius, tolerances::LP_BISECTION),
    }
}

/// Sort-and-threshold projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection onto `{‖x‖_p ≤ r}`.
///
/// KKT gives `x_i = sign(v_i) u_i` with `u_i + μ p u_i^{p−1} = |v_i|`; the
/// multiplier `μ` is found by bisection until `|‖x‖_p − r| ≤ tol·r`, keeping
/// the feasible end of the bracket.
pub fn project_lp_ball(v: &[f64], p: f64, radius: f64, tol: f64) -> Result<Vec<f64>> {
    if norm(v, NormSpec::Lp(p)) <= radius {
        return Ok(v.to_vec());
    }
    let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let shrink = |mu: f64| -> Vec<f64> { abs.iter().map(|&a| lp_coordinate(a, mu, p)).collect() };
    let residual = |u: &[f64]| norm(u, NormSpec::Lp(p)) - radius;

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut u_hi = shrink(hi);
    let mut grow = 0;
    while residual(&u_hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        u_hi = shrink(hi);
        grow += 1;
        if grow > 200 {
            return Err(Error::SolverFailure {
                solver: "ℓp-ball projection bracket",
                residual: residual(&u_hi),
            });
        }
    }
    let mut res_hi = residual(&u_hi);
    for _ in 0..200 {
        if res_hi.abs() <= tol * radius {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let u_mid = shrink(mid);
        let r = residual(&u_mid);
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            u_hi = u_mid;
            res_hi = r;
        }
    }
    if res_hi.abs() > tol * radius.max(1.0) * 10.0 {
        return Err(Error::SolverFailure {
            solver: "ℓp-ball projection bisection",
            residual: res_hi,
        });
    }
    Ok(u_hi.iter().zip(v).map(|(&u, &x)| u.copysign(x)).collect())
}

/// Solves `u + μ p u^{p−1} = a` for `u ∈ [0, a]` by safeguarded Newton.
fn lp_coordinate(a: f64, mu: f64, p: f64) -> f64 {
    if a == 0.0 || mu == 0.0 {
        return a;
    }
    if (p - 2.0).abs() < 1e-15 {
        return a / (1.0 + 2.0 * mu);
    }
    let h = |u: f64| u + mu * p * u.powf(p - 1.0) - a;
    let (mut lo, mut hi) = (0.0_f64, a);
    let mut u = a;
    for _ in 0..100 {
        let hu = h(u);
        if hu > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        if hi - lo <= 4.0 * f64::EPSILON * a {
            break;
        }
        let dh = 1.0 + mu * p * (p - 1.0) * u.powf(p - 2.0);
        let mut next = u - hu / dh;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if next == u {
            break;
        }
        u = next;
    }
    u
}

/// Norm of the smallest element of `g + N_dom(x)`, the normal cone of `dom`
/// at the feasible point `x`. For a μ-strongly convex objective with
/// gradient `g` at `x` this bounds `‖x − x*‖₂ ≤ residual / μ`.
pub fn stationarity_residual(dom: DomainSpec, x: &[f64], g: &[f64]) -> f64 {
    match dom {
        DomainSpec::Unconstrained => norm2(g),
        DomainSpec::L2Ball { radius } | DomainSpec::LpBall { radius, .. } => {
            let (n, normal): (f64, Vec<f64>) = match dom {
                DomainSpec::LpBall { p, .. } => (
                    norm(x, NormSpec::Lp(p)),
                    x.iter().map(|&v| v.abs().powf(p - 1.0).copysign(v)).collect(),
                ),
                _ => (norm2(x), x.to_vec()),
            };
            let nn = dot(&normal, &normal);
            if n < radius * (1.0 - 1e-12) || nn == 0.0 {
                return norm2(g);
            }
            let nu = (-dot(g, &normal) / nn).max(0.0);
            norm2(&g.iter().zip(&normal).map(|(a, b)| a + nu * b).collect::<Vec<_>>())
        }
        DomainSpec::Simplex => {
            // N(x) = {c·1 − s : s ≥ 0, s_i = 0 on the support}
            let sq = |c: f64| -> f64 {
                x.iter()
                    .zip(g)
                    .map(|(&xi, &gi)| {
                        let r = if xi > 0.0 { gi + c } else { (gi + c).min(0.0) };
                        r * r
                    })
                    .sum()
            };
            let slope = |c: f64| -> f64 {
                x.iter()
                    .zip(g)
                    .map(|(&xi, &gi)| if xi > 0.0 { gi + c } else { (gi + c).min(0.0) })
                    .sum()
            };
            let gmax = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
            let (mut lo, mut hi) = (-gmax - 1.0, -gmin + 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            sq(lo).min(sq(hi)).sqrt()
        }
    }
}

/// Draws a point of `dom` in dimension `d`: uniform on the simplex, uniform
/// in the Euclidean ball (radially rescaled into the ℓp ball), and a standard
/// normal scaled by `spread` when unconstrained.
pub fn sample_point<R: Rng + ?Sized>(dom: DomainSpec, d: usize, spread: f64, rng: &mut R) -> Vec<f64> {
    match dom {
        DomainSpec::Simplex => {
            let e: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1).max(1e-300)).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|v| v / s).collect()
        }
        DomainSpec::Unconstrained => (0..d).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect(),
        DomainSpec::L2Ball { radius } | DomainSpec::LpBall { radius, .. } => {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let n = match dom {
                DomainSpec::LpBall { p, .. } => norm(&g, NormSpec::Lp(p)),
                _ => norm2(&g),
            }
            .max(f64::MIN_POSITIVE);
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            g.iter().map(|v| v * r / n).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&[3.0, 4.0], NormSpec::L2), 5.0);
        for n in [NormSpec::L1, NormSpec::L2, NormSpec::Linf, NormSpec::Lp(1.5)] {
            assert_eq!(norm(&[0.0, 0.0, 0.0], n), 0.0);
        }
        // (1 + 1)^{1/1.5} = 2^{2/3}
        assert_abs_diff_eq!(
            norm(&[1.0, 1.0], NormSpec::Lp(1.5)),
            1.587_401_051_968_199_4,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dual_is_involution() {
        for n in [
            NormSpec::L1,
            NormSpec::L2,
            NormSpec::Linf,
            NormSpec::Lp(1.5),
            NormSpec::Lp(1.2),
        ] {
            match (n, n.dual().dual()) {
                (NormSpec::Lp(a), NormSpec::Lp(b)) => assert_abs_diff_eq!(a, b, epsilon = 1e-12),
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project(&[0.5, 0.5], DomainSpec::Simplex).unwrap(), vec![0.5, 0.5]);
        assert_eq!(project(&[2.0, 0.0], DomainSpec::Simplex).unwrap(), vec![1.0, 0.0]);
        let x = project(&[3.0, 4.0], DomainSpec::L2Ball { radius: 1.0 }).unwrap();
        assert_abs_diff_eq!(x[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn simplex_projection_matches_grid_search() {
        // d = 2: the simplex is the segment (s, 1 − s)
        let v = [2.0, 0.0];
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=100_000 {
            let s = i as f64 / 100_000.0;
            let d = dist2_sq(&v, &[s, 1.0 - s]);
            if d < best.0 {
                best = (d, s);
            }
        }
        let x = project_simplex(&v);
        assert_abs_diff_eq!(x[0], best.1, epsilon = 1e-5);
    }

    #[test]
    fn lp_projection_is_on_sphere_and_optimal_on_grid() {
        let p = 1.5;
        let v = [1.3, -0.7];
        let x = project(&v, DomainSpec::LpBall { p, radius: 1.0 }).unwrap();
        assert_abs_diff_eq!(norm(&x, NormSpec::Lp(p)), 1.0, epsilon = 1e-9);
        // grid over the ℓ1.5 unit sphere (boundary is where the optimum sits)
        let mut best = f64::INFINITY;
        for i in 0..200_000 {
            let th = i as f64 / 200_000.0 * std::f64::consts::TAU;
            let (c, s) = (th.cos(), th.sin());
            let r = norm(&[c, s], NormSpec::Lp(p));
            best = best.min(dist2_sq(&v, &[c / r, s / r]));
        }
        assert!(dist2_sq(&v, &x) <= best + 1e-9);
    }

    #[test]
    fn lp_projection_p2_matches_l2_ball() {
        let v = [3.0, 4.0, -1.0];
        let a = project(&v, DomainSpec::LpBall { p: 2.0, radius: 2.0 }).unwrap();
        let b = project(&v, DomainSpec::L2Ball { radius: 2.0 }).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn feasible_points_are_fixed() {
        let v = [0.1, -0.2, 0.3];
        for dom in [
            DomainSpec::Unconstrained,
            DomainSpec::L2Ball { radius: 1.0 },
            DomainSpec::LpBall { p: 1.3, radius: 1.0 },
        ] {
            assert_eq!(project(&v, dom).unwrap(), v.to_vec());
        }
    }

    #[test]
    fn validation() {
        assert!(DomainSpec::L2Ball { radius: 0.0 }.validate().is_err());
        assert!(DomainSpec::LpBall { p: 2.5, radius: 1.0 }.validate().is_err());
        assert!(NormSpec::Lp(1.0).validate().is_err());
    }

    #[test]
    fn stationarity_residual_cases() {
        assert_eq!(stationarity_residual(DomainSpec::Unconstrained, &[1.0], &[3.0]), 3.0);
        // outward gradient on the sphere is absorbed by the normal cone
        let b = DomainSpec::L2Ball { radius: 1.0 };
        assert_abs_diff_eq!(
            stationarity_residual(b, &[0.6, 0.8], &[-0.6, -0.8]),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(stationarity_residual(b, &[0.6, 0.8], &[0.6, 0.8]), 1.0, epsilon = 1e-15);
        // constant gradient on the simplex is stationary; at a vertex, larger
        // entries off the support are too
        let s = DomainSpec::Simplex;
        assert!(stationarity_residual(s, &[0.3, 0.7], &[2.0, 2.0]) < 1e-12);
        assert!(stationarity_residual(s, &[1.0, 0.0], &[0.0, 5.0]) < 1e-12);
        assert_abs_diff_eq!(
            stationarity_residual(s, &[0.5, 0.5], &[0.0, 2.0]),
            2f64.sqrt(),
            epsilon = 1e-9
        );
    }
}
