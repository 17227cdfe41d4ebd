//! Optimality-gap curves against a certified minimizer.

use serde::{Deserialize, Serialize};

use super::slope::{fit_loglog, SlopeFit, Window};
use crate::base_opt::OracleSolution;
use crate::objectives::Objective;
use crate::stabreg_convex::ConvexTrace;
use crate::tolerances;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: usize,
    pub gap: f64,
    /// The measured gap was not positive and has been raised to the floor.
    pub clamped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub points: Vec<CurvePoint>,
    /// Fit over the window, clamped points excluded; `None` when fewer than
    /// two points qualify.
    pub fit: Option<SlopeFit>,
    pub window: Window,
    pub floor: f64,
    pub clamped: usize,
    pub oracle_gap_bound: f64,
}

/// Gap `f(x_t) − f(x*)` at each `(t, x_t)` and a log-log fit over `window`.
/// The oracle must certify its value to `1e-12`.
pub fn measure_convergence<F: Objective + ?Sized>(
    f: &F,
    outputs: &[(usize, &[f64])],
    oracle: &OracleSolution,
    window: Window,
) -> Result<ConvergenceCurve> {
    if !(oracle.gap_bound <= tolerances::ORACLE_GAP) {
        return Err(Error::OracleFailure {
            gap_bound: oracle.gap_bound,
            tol: tolerances::ORACLE_GAP,
            iterations: oracle.iterations,
        });
    }
    let floor = tolerances::ORACLE_GAP;
    let points: Vec<CurvePoint> = outputs
        .iter()
        .map(|&(t, x)| {
            let gap = f.value(x) - oracle.value;
            if gap > 0.0 {
                CurvePoint { t, gap, clamped: false }
            } else {
                CurvePoint {
                    t,
                    gap: floor,
                    clamped: true,
                }
            }
        })
        .collect();
    let clamped = points.iter().filter(|p| p.clamped).count();
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.clamped)
        .map(|p| (p.t as f64, p.gap))
        .collect();
    let fit = fit_loglog(&usable, window).ok();
    Ok(ConvergenceCurve {
        points,
        fit,
        window,
        floor,
        clamped,
        oracle_gap_bound: oracle.gap_bound,
    })
}

/// Window starting at the output of epoch `burn_in` (0-based), which drops
/// the outputs of the first `burn_in` epochs and the starting point.
pub fn epoch_window(trace: &ConvexTrace, burn_in: usize) -> Window {
    match trace.epochs.get(burn_in) {
        Some(e) => Window::From(e.params.end_step() as f64),
        None => Window::From(f64::INFINITY),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_opt::{run_base_traced, BaseOptimizer, OptimizeRequest};
    use crate::objectives::Quadratic;
    use crate::vecspace::DomainSpec;

    fn exact(x: Vec<f64>) -> OracleSolution {
        OracleSolution {
            x,
            value: 0.0,
            gap_bound: 0.0,
            dist_bound: 0.0,
            iterations: 0,
        }
    }

    #[test]
    fn gradient_descent_on_strongly_convex_quadratic() {
        let f = Quadratic::new(vec![1.0, 0.2], vec![0.0, 0.0]);
        let req = OptimizeRequest {
            objective: &f,
            beta: 1.0,
            domain: DomainSpec::Unconstrained,
            start: &[1.0, 1.0],
            steps: 60,
        };
        let mut iterates = Vec::new();
        run_base_traced(&BaseOptimizer::gd(), &req, |t, x| iterates.push((t, x.to_vec()))).unwrap();
        let outputs: Vec<(usize, &[f64])> = iterates.iter().map(|(t, x)| (*t, x.as_slice())).collect();
        let curve = measure_convergence(&f, &outputs, &exact(vec![0.0, 0.0]), Window::From(1.0)).unwrap();
        let fit = curve.fit.unwrap();
        assert!(fit.slope <= -1.0, "{}", fit.slope);
        assert!(fit.super_polynomial);
    }

    #[test]
    fn constant_iterates_have_zero_slope() {
        let f = Quadratic::isotropic(vec![0.0]);
        let x = [1.0];
        let outputs: Vec<(usize, &[f64])> = (1..20).map(|t| (t, &x[..])).collect();
        let curve = measure_convergence(&f, &outputs, &exact(vec![0.0]), Window::All).unwrap();
        assert!(curve.fit.unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn beating_the_oracle_is_clamped_and_loose_oracles_rejected() {
        let f = Quadratic::isotropic(vec![0.0]);
        let x = [0.0];
        let mut oracle = exact(vec![1e-7]);
        oracle.value = 1e-14;
        let curve = measure_convergence(&f, &[(1, &x[..])], &oracle, Window::All).unwrap();
        assert!(curve.points[0].clamped);
        assert_eq!(curve.points[0].gap, curve.floor);
        oracle.gap_bound = 1e-6;
        assert!(measure_convergence(&f, &[(1, &x[..])], &oracle, Window::All).is_err());
    }
}
