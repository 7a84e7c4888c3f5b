//! Perspective-n-point measurement model, its analytic Jacobian, a
//! Levenberg–Marquardt solver, and pose estimation from correspondences.

mod estimate;
mod lm;

pub use estimate::{
    estimate_pose, parse_correspondences, reprojection_rms, synthesize_correspondences,
    visible_points, Correspondence, FeatureSource, NoiseConfig, PnpModel,
};
pub use lm::{
    lm_solve, LeastSquaresModel, LmConfig, LmIteration, LmReport, Termination, LAMBDA_MAX,
    LAMBDA_MIN,
};

use nalgebra::{DMatrix, Matrix3, SMatrix};

use crate::error::{Error, Result};
use crate::math::{crp_matrix, CameraIntrinsics, Pose, Vec3, MIN_DEPTH};

/// `g(x)`: rows of `[R(q) | t]` flattened row-major, so entries 4, 8 and 12
/// (1-based) are the translation.
pub fn g_of_x(x: &Pose) -> [f64; 12] {
    let r = crp_matrix(&x.q);
    let mut h = [0.0; 12];
    for row in 0..3 {
        for col in 0..3 {
            h[row * 4 + col] = r[(row, col)];
        }
        h[row * 4 + 3] = x.t[row];
    }
    h
}

/// Folds intrinsics into `h`: the rows of `K·[R|t]`.
pub fn apply_intrinsics(h: &[f64; 12], k: &CameraIntrinsics) -> [f64; 12] {
    let km = k.matrix();
    let mut out = [0.0; 12];
    for r in 0..3 {
        for c in 0..4 {
            out[r * 4 + c] = (0..3).map(|m| km[(r, m)] * h[m * 4 + c]).sum();
        }
    }
    out
}

fn depth(h: &[f64; 12], p: &Vec3) -> f64 {
    h[8] * p.x + h[9] * p.y + h[10] * p.z + h[11]
}

/// `f(h)`: interleaved pixel coordinates `(u₁, v₁, …, u_n, v_n)`.
pub fn f_of_h(h: &[f64; 12], points: &[Vec3]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * points.len());
    for (i, p) in points.iter().enumerate() {
        let s = depth(h, p);
        if s.abs() < MIN_DEPTH {
            return Err(Error::DegenerateDepth { index: i, depth: s });
        }
        out.push((h[0] * p.x + h[1] * p.y + h[2] * p.z + h[3]) / s);
        out.push((h[4] * p.x + h[5] * p.y + h[6] * p.z + h[7]) / s);
    }
    Ok(out)
}

/// `∂f/∂h`, shape `2n × 12`.
pub fn jacobian_f(h: &[f64; 12], points: &[Vec3]) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(2 * points.len(), 12);
    for (i, p) in points.iter().enumerate() {
        let s = depth(h, p);
        if s.abs() < MIN_DEPTH {
            return Err(Error::DegenerateDepth { index: i, depth: s });
        }
        let a = [p.x, p.y, p.z, 1.0];
        let u = (h[0] * p.x + h[1] * p.y + h[2] * p.z + h[3]) / s;
        let v = (h[4] * p.x + h[5] * p.y + h[6] * p.z + h[7]) / s;
        for c in 0..4 {
            j[(2 * i, c)] = a[c] / s;
            j[(2 * i, 8 + c)] = -u * a[c] / s;
            j[(2 * i + 1, 4 + c)] = a[c] / s;
            j[(2 * i + 1, 8 + c)] = -v * a[c] / s;
        }
    }
    Ok(j)
}

/// `∂R/∂q_k` for the Cayley rotation.
pub fn crp_derivatives(q: &Vec3) -> [Matrix3<f64>; 3] {
    let s = 1.0 + q.norm_squared();
    let m = crp_matrix(q) * s;
    std::array::from_fn(|k| {
        let e = Vec3::ith(k, 1.0);
        let dm = Matrix3::identity() * (-2.0 * q[k])
            + (e * q.transpose() + q * e.transpose()) * 2.0
            - crate::math::skew(&e) * 2.0;
        dm / s - m * (2.0 * q[k] / (s * s))
    })
}

/// `∂g/∂x`, shape `12 × 6`.
pub fn jacobian_g(x: &Pose) -> SMatrix<f64, 12, 6> {
    let d = crp_derivatives(&x.q);
    let mut j = SMatrix::<f64, 12, 6>::zeros();
    for (k, dk) in d.iter().enumerate() {
        for r in 0..3 {
            for c in 0..3 {
                j[(r * 4 + c, k)] = dk[(r, c)];
            }
        }
    }
    for r in 0..3 {
        j[(r * 4 + 3, 3 + r)] = 1.0;
    }
    j
}

/// `∂(K·h)/∂h`, shape `12 × 12`.
pub fn intrinsics_jacobian(k: &CameraIntrinsics) -> SMatrix<f64, 12, 12> {
    let km = k.matrix();
    let mut j = SMatrix::<f64, 12, 12>::zeros();
    for r in 0..3 {
        for m in 0..3 {
            for c in 0..4 {
                j[(r * 4 + c, m * 4 + c)] = km[(r, m)];
            }
        }
    }
    j
}

/// Pixel projections of `points` at pose `x` through intrinsics `k`.
pub fn project_points(x: &Pose, points: &[Vec3], k: &CameraIntrinsics) -> Result<Vec<f64>> {
    f_of_h(&apply_intrinsics(&g_of_x(x), k), points)
}

/// `J = J_f · J_K · J_g`, shape `2n × 6`.
pub fn analytic_jacobian(x: &Pose, points: &[Vec3], k: &CameraIntrinsics) -> Result<DMatrix<f64>> {
    let h = apply_intrinsics(&g_of_x(x), k);
    let jf = jacobian_f(&h, points)?;
    let jkg = intrinsics_jacobian(k) * jacobian_g(x);
    let jkg = DMatrix::from_column_slice(12, 6, jkg.as_slice());
    Ok(jf * jkg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::crp_to_rotation;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn g_examples() {
        let x = Pose::new(Vec3::zeros(), Vec3::new(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(
            g_of_x(&x),
            [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 1.0, 3.0]
        );
        let x = Pose::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros()).unwrap();
        let h = g_of_x(&x);
        let r = crp_to_rotation(&x.q).unwrap();
        for row in 0..3 {
            for col in 0..3 {
                assert_abs_diff_eq!(h[row * 4 + col], r.matrix()[(row, col)], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn f_examples() {
        let id = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        assert_eq!(
            f_of_h(&id, &[Vec3::new(1.0, 2.0, 4.0)]).unwrap(),
            vec![0.25, 0.5]
        );
        let k = CameraIntrinsics::focal(100.0).unwrap();
        let x = Pose::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 10.0)).unwrap();
        let uv = project_points(&x, &[Vec3::new(1.0, 0.0, 0.0)], &k).unwrap();
        assert_abs_diff_eq!(uv[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(uv[1], 0.0, epsilon = 1e-12);
        let err = f_of_h(&id, &[Vec3::new(1.0, 1.0, 1.0), Vec3::new(1.0, 1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::DegenerateDepth { index: 1, .. }));
    }

    #[test]
    fn structural_zeros_and_translation_rows() {
        let x = Pose::new(Vec3::new(0.1, -0.3, 0.2), Vec3::new(0.5, 0.1, 8.0)).unwrap();
        let pts = [Vec3::new(1.0, 0.5, 0.2), Vec3::new(-0.3, 0.2, 1.0)];
        let jf = jacobian_f(&g_of_x(&x), &pts).unwrap();
        for i in 0..pts.len() {
            for c in 4..8 {
                assert_eq!(jf[(2 * i, c)], 0.0);
            }
        }
        let jg = jacobian_g(&x);
        for (row, col) in [(3, 3), (7, 4), (11, 5)] {
            for c in 0..6 {
                assert_eq!(jg[(row, c)], if c == col { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn rotation_rows_match_closed_forms() {
        // Hand-expanded derivatives of the first two rows of R(q).
        let q = Vec3::new(0.3, -0.7, 1.1);
        let (q1, q2, q3) = (q.x, q.y, q.z);
        let d = (1.0 + q.norm_squared()).powi(2);
        let jg = jacobian_g(&Pose::new(q, Vec3::zeros()).unwrap());
        let g1 = [
            4.0 * q1 * (q2 * q2 + q3 * q3) / d,
            -4.0 * q2 * (1.0 + q1 * q1) / d,
            -4.0 * q3 * (1.0 + q1 * q1) / d,
        ];
        let g2 = [
            2.0 * (q2 + q2 * q3 * q3 + q2.powi(3) - 2.0 * q1 * q3 - q1 * q1 * q2) / d,
            2.0 * (q1.powi(3) - q1 * q2 * q2 + q1 * q3 * q3 + q1 - 2.0 * q2 * q3) / d,
            2.0 * (q1 * q1 - 2.0 * q1 * q2 * q3 + q2 * q2 - q3 * q3 + 1.0) / d,
        ];
        let g5 = [
            2.0 * (-q1 * q1 * q2 + 2.0 * q1 * q3 + q2.powi(3) + q2 * q3 * q3 + q2) / d,
            2.0 * (q1.powi(3) - q1 * q2 * q2 + q1 * q3 * q3 + q1 + 2.0 * q2 * q3) / d,
            -2.0 * (q1 * q1 + 2.0 * q1 * q2 * q3 + q2 * q2 - q3 * q3 + 1.0) / d,
        ];
        let g6 = [
            -4.0 * q1 * (q2 * q2 + 1.0) / d,
            4.0 * q2 * (q1 * q1 + q3 * q3) / d,
            -4.0 * q3 * (q2 * q2 + 1.0) / d,
        ];
        for (row, expected) in [(0, g1), (1, g2), (4, g5), (5, g6)] {
            for k in 0..3 {
                assert_abs_diff_eq!(jg[(row, k)], expected[k], epsilon = 1e-14);
            }
        }
    }

    fn fd_jacobian(x: &Pose, pts: &[Vec3], k: &CameraIntrinsics, delta: f64) -> DMatrix<f64> {
        let base = x.to_array();
        let mut j = DMatrix::zeros(2 * pts.len(), 6);
        for c in 0..6 {
            let mut plus = base;
            let mut minus = base;
            plus[c] += delta;
            minus[c] -= delta;
            let fp = project_points(&Pose::from_slice(&plus).unwrap(), pts, k).unwrap();
            let fm = project_points(&Pose::from_slice(&minus).unwrap(), pts, k).unwrap();
            for r in 0..fp.len() {
                j[(r, c)] = (fp[r] - fm[r]) / (2.0 * delta);
            }
        }
        j
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn jacobian_matches_central_differences(
            q in prop::array::uniform3(-1.1f64..1.1),
            t in prop::array::uniform3(-1.0f64..1.0),
            pts in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 4..12),
        ) {
            let q = Vec3::from(q);
            prop_assume!(q.norm() <= 2.0);
            let x = Pose::new(q, Vec3::from(t) + Vec3::new(0.0, 0.0, 10.0)).unwrap();
            let pts: Vec<Vec3> = pts.into_iter().map(Vec3::from).collect();
            let k = CameraIntrinsics::new(800.0, 780.0, 320.0, 240.0).unwrap();
            let ja = analytic_jacobian(&x, &pts, &k).unwrap();
            let jd = fd_jacobian(&x, &pts, &k, 1e-6);
            let diff = (&ja - &jd).abs().max();
            let scale = jd.abs().max().max(1.0);
            prop_assert!(diff / scale < 1e-6, "relative error {}", diff / scale);
        }
    }
}
