//! The Levenberg-Marquardt solver on a model other than pose: fitting
//! `y = a·exp(−b·x) + c` to noisy samples.
//!
//! ```text
//! cargo run --example lm_curve_fit
//! ```

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use raynav::pose::{lm_solve, LeastSquaresModel, LmConfig};

struct Decay {
    x: Vec<f64>,
    y: DVector<f64>,
}

impl LeastSquaresModel for Decay {
    fn observations(&self) -> &DVector<f64> {
        &self.y
    }

    fn predict(&self, p: &DVector<f64>) -> raynav::Result<DVector<f64>> {
        Ok(DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|x| p[0] * (-p[1] * x).exp() + p[2]),
        ))
    }

    fn jacobian(&self, p: &DVector<f64>) -> raynav::Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.x.len(), 3);
        for (i, x) in self.x.iter().enumerate() {
            let e = (-p[1] * x).exp();
            j[(i, 0)] = e;
            j[(i, 1)] = -p[0] * x * e;
            j[(i, 2)] = 1.0;
        }
        Ok(j)
    }
}

fn main() -> raynav::Result<()> {
    let truth = [3.0, 0.7, 0.5];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let x: Vec<f64> = (0..60).map(|i| i as f64 * 0.1).collect();
    let y = DVector::from_iterator(
        x.len(),
        x.iter()
            .map(|x| truth[0] * (-truth[1] * x).exp() + truth[2] + noise.sample(&mut rng)),
    );
    let model = Decay { x, y };
    let report = lm_solve(&model, &[1.0, 2.0, 0.0], &LmConfig::default())?;
    print!("{}", report.to_csv());
    println!(
        "{:?} after {} iterations: a = {:.4}, b = {:.4}, c = {:.4} (truth {truth:?}), χ² {:.3e} -> {:.3e}",
        report.termination, report.iterations, report.params[0], report.params[1], report.params[2], report.initial_chi2, report.chi2
    );
    Ok(())
}
