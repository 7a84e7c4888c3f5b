//! Levenberg–Marquardt with Marquardt's diagonal scaling.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::Pose;

pub const LAMBDA_MIN: f64 = 1e-7;
pub const LAMBDA_MAX: f64 = 1e7;

/// A weighted nonlinear least-squares problem `min (y − ŷ(x))ᵀ W (y − ŷ(x))`.
pub trait LeastSquaresModel {
    fn observations(&self) -> &DVector<f64>;
    /// Model predictions; an error marks `x` as infeasible.
    fn predict(&self, x: &DVector<f64>) -> Result<DVector<f64>>;
    /// `∂ŷ/∂x`.
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmConfig {
    pub lambda0: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    /// Minimum gain ratio for accepting a step.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub cost_tolerance: f64,
    pub step_tolerance: f64,
    /// Diagonal of `W`; `None` is the identity.
    pub weights: Option<Vec<f64>>,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            lambda0: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            epsilon: 1e-3,
            max_iterations: 200,
            gradient_tolerance: 1e-8,
            cost_tolerance: 1e-10,
            step_tolerance: 1e-10,
            weights: None,
        }
    }
}

impl LmConfig {
    pub fn validate(&self, n_residuals: usize) -> Result<()> {
        let values = [
            self.lambda0,
            self.lambda_up,
            self.lambda_down,
            self.epsilon,
            self.gradient_tolerance,
            self.cost_tolerance,
            self.step_tolerance,
        ];
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.max_iterations == 0 {
            return Err(Error::Config("LM settings must all be positive".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != n_residuals || w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::Config(format!(
                    "weights need {n_residuals} positive entries, got {}",
                    w.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ZeroResidual,
    Gradient,
    CostChange,
    StepSize,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmIteration {
    pub iter: usize,
    /// Cost after this iteration (the trial cost when rejected).
    pub chi2: f64,
    /// Damping used for this iteration's step.
    pub lambda: f64,
    pub rho: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    pub initial_chi2: f64,
    pub chi2: f64,
    pub iterations: usize,
    pub history: Vec<LmIteration>,
    pub termination: Termination,
}

impl LmReport {
    pub fn pose(&self) -> Result<Pose> {
        Pose::from_slice(&self.params)
    }

    /// Costs of the starting point and every accepted iterate.
    pub fn accepted_costs(&self) -> Vec<f64> {
        std::iter::once(self.initial_chi2)
            .chain(self.history.iter().filter(|h| h.accepted).map(|h| h.chi2))
            .collect()
    }

    /// `iter,chi2,lambda,rho,accepted` with one row per iteration; row 0 is
    /// the starting point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,chi2,lambda,rho,accepted\n");
        let lambda0 = self.history.first().map_or(f64::NAN, |h| h.lambda);
        let _ = writeln!(out, "0,{:e},{:e},,", self.initial_chi2, lambda0);
        for h in &self.history {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{}",
                h.iter, h.chi2, h.lambda, h.rho, h.accepted
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

fn weighted_cost(r: &DVector<f64>, w: &DVector<f64>) -> f64 {
    r.iter().zip(w.iter()).map(|(r, w)| w * r * r).sum()
}

/// Minimizes the model's weighted cost from `x0`.
///
/// Each iteration solves `(JᵀWJ + λD)h = JᵀW(y − ŷ)` with `D = diag(JᵀWJ)`
/// (the identity if any diagonal entry is below 1e-12) and evaluates the
/// gain `ρ = (χ² − χ²_new) / hᵀ(λDh + JᵀW(y − ŷ))`.
pub fn lm_solve<M: LeastSquaresModel + ?Sized>(
    model: &M,
    x0: &[f64],
    cfg: &LmConfig,
) -> Result<LmReport> {
    let y = model.observations();
    let m = y.len();
    cfg.validate(m)?;
    let w = cfg.weights.as_ref().map_or_else(
        || DVector::from_element(m, 1.0),
        |w| DVector::from_vec(w.clone()),
    );
    let mut x = DVector::from_column_slice(x0);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "initial parameters must be finite".into(),
        ));
    }
    let mut r = y - model.predict(&x)?;
    let mut chi2 = weighted_cost(&r, &w);
    let initial_chi2 = chi2;
    let mut lambda = cfg.lambda0.clamp(LAMBDA_MIN, LAMBDA_MAX);
    let mut history = Vec::new();

    let finish = |x: &DVector<f64>, chi2, history: Vec<LmIteration>, termination| LmReport {
        params: x.iter().copied().collect(),
        initial_chi2,
        chi2,
        iterations: history.len(),
        history,
        termination,
    };

    if chi2 == 0.0 {
        return Ok(finish(&x, chi2, history, Termination::ZeroResidual));
    }

    let mut j = model.jacobian(&x)?;
    for iter in 1..=cfg.max_iterations {
        let jtw = j.transpose() * DMatrix::from_diagonal(&w);
        let a = &jtw * &j;
        let g = &jtw * &r;
        if g.amax() < cfg.gradient_tolerance {
            return Ok(finish(&x, chi2, history, Termination::Gradient));
        }
        let diag = a.diagonal();
        let d = if diag.iter().any(|v| *v < 1e-12) {
            DVector::from_element(diag.len(), 1.0)
        } else {
            diag
        };
        let damped = &a + DMatrix::from_diagonal(&(&d * lambda));
        let Some(chol) = damped.cholesky() else {
            if lambda >= LAMBDA_MAX {
                return Err(Error::SolverStall {
                    iterations: iter,
                    lambda,
                });
            }
            history.push(LmIteration {
                iter,
                chi2,
                lambda,
                rho: f64::NEG_INFINITY,
                accepted: false,
            });
            lambda = (lambda * cfg.lambda_up).min(LAMBDA_MAX);
            continue;
        };
        let h = chol.solve(&g);
        if h.norm() < cfg.step_tolerance * (x.norm() + cfg.step_tolerance) {
            return Ok(finish(&x, chi2, history, Termination::StepSize));
        }
        let x_new = &x + &h;
        let trial = model.predict(&x_new).ok().map(|p| y - p);
        let (chi2_new, rho) = match &trial {
            Some(r_new) => {
                let c = weighted_cost(r_new, &w);
                let predicted = h.dot(&(d.component_mul(&h) * lambda + &g));
                (c, (chi2 - c) / predicted)
            }
            None => (f64::INFINITY, f64::NEG_INFINITY),
        };
        let accepted = rho > cfg.epsilon && chi2_new < chi2;
        history.push(LmIteration {
            iter,
            chi2: chi2_new,
            lambda,
            rho,
            accepted,
        });
        if accepted {
            let rel = (chi2 - chi2_new) / chi2;
            x = x_new;
            r = trial.unwrap();
            chi2 = chi2_new;
            lambda = (lambda / cfg.lambda_down).max(LAMBDA_MIN);
            if chi2 == 0.0 {
                return Ok(finish(&x, chi2, history, Termination::ZeroResidual));
            }
            if rel < cfg.cost_tolerance {
                return Ok(finish(&x, chi2, history, Termination::CostChange));
            }
            j = model.jacobian(&x)?;
        } else {
            lambda = (lambda * cfg.lambda_up).min(LAMBDA_MAX);
        }
    }
    Ok(finish(&x, chi2, history, Termination::MaxIterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// `ŷ = A x + b`.
    struct Linear {
        a: DMatrix<f64>,
        b: DVector<f64>,
        y: DVector<f64>,
    }

    impl LeastSquaresModel for Linear {
        fn observations(&self) -> &DVector<f64> {
            &self.y
        }
        fn predict(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
            Ok(&self.a * x + &self.b)
        }
        fn jacobian(&self, _: &DVector<f64>) -> Result<DMatrix<f64>> {
            Ok(self.a.clone())
        }
    }

    fn linear() -> Linear {
        let a = DMatrix::from_row_slice(
            5,
            3,
            &[
                1.0, 2.0, 0.5, -1.0, 0.3, 2.0, 0.7, -0.4, 1.0, 2.0, 1.0, -1.0, 0.1, 0.2, 0.3,
            ],
        );
        let b = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, -1.0, 0.5, 3.0]);
        Linear { a, b, y }
    }

    #[test]
    fn linear_model_reaches_normal_equations() {
        let model = linear();
        let at = model.a.transpose();
        let exact = (&at * &model.a)
            .lu()
            .solve(&(&at * (&model.y - &model.b)))
            .unwrap();
        let cfg = LmConfig {
            max_iterations: 3,
            ..Default::default()
        };
        let rep = lm_solve(&model, &[0.0, 0.0, 0.0], &cfg).unwrap();
        assert!(rep.history.iter().filter(|h| h.accepted).count() <= 3);
        let err = DVector::from_vec(rep.params.clone()) - exact;
        assert!(err.amax() < 1e-10, "{err}");
    }

    #[test]
    fn zero_residual_start_stops_immediately() {
        let mut model = linear();
        let x = DVector::from_vec(vec![0.3, -0.1, 2.0]);
        model.y = &model.a * &x + &model.b;
        let rep = lm_solve(&model, x.as_slice(), &LmConfig::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.chi2, 0.0);
        assert_eq!(rep.termination, Termination::ZeroResidual);
    }

    #[test]
    fn uniform_weight_scaling_keeps_the_step_sequence() {
        let model = linear();
        let one = lm_solve(&model, &[1.0, 1.0, 1.0], &LmConfig::default()).unwrap();
        let cfg = LmConfig {
            weights: Some(vec![7.5; 5]),
            ..Default::default()
        };
        let scaled = lm_solve(&model, &[1.0, 1.0, 1.0], &cfg).unwrap();
        assert_eq!(one.history.len(), scaled.history.len());
        for (a, b) in one.history.iter().zip(&scaled.history) {
            assert_eq!(a.accepted, b.accepted);
            assert_eq!(a.lambda, b.lambda);
        }
        for k in 0..3 {
            assert_relative_eq!(one.params[k], scaled.params[k], max_relative = 1e-9);
        }
    }

    #[test]
    fn bad_config_rejected() {
        let model = linear();
        let cfg = LmConfig {
            weights: Some(vec![1.0; 2]),
            ..Default::default()
        };
        assert!(lm_solve(&model, &[0.0; 3], &cfg).is_err());
        let cfg = LmConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(lm_solve(&model, &[0.0; 3], &cfg).is_err());
    }

    #[test]
    fn csv_layout() {
        let rep = lm_solve(&linear(), &[0.0; 3], &LmConfig::default()).unwrap();
        let csv = rep.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iter,chi2,lambda,rho,accepted"));
        assert_eq!(csv.lines().count(), rep.history.len() + 2);
    }
}
