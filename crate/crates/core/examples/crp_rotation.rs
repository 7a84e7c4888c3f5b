//! Classical Rodrigues parameters: conversion to and from rotation matrices
//! and the analytic projection Jacobian against finite differences.
//!
//! ```text
//! cargo run --example crp_rotation
//! ```

use raynav::math::{crp_to_rotation, rotation_to_crp, CameraIntrinsics, Pose, Rotation3, Vec3};
use raynav::pose::{analytic_jacobian, project_points};

fn main() -> raynav::Result<()> {
    for degrees in [10.0, 90.0, 170.0] {
        let axis = Vec3::new(1.0, -2.0, 0.5).normalize();
        let r = Rotation3::from_axis_angle(&axis, f64::to_radians(degrees));
        let q = rotation_to_crp(&r)?;
        let back = crp_to_rotation(&q)?;
        println!(
            "{degrees:>5} deg: q = [{:+.6}, {:+.6}, {:+.6}], |q| = tan(θ/2) = {:.6}, round trip error {:.1e}",
            q.x,
            q.y,
            q.z,
            q.norm(),
            back.angle_to(&r)
        );
    }

    let pose = Pose::new(Vec3::new(0.2, -0.1, 0.3), Vec3::new(0.5, -0.2, 6.0))?;
    let k = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0)?;
    let points = [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.5, -0.5),
        Vec3::new(-0.8, 1.2, 0.7),
    ];
    let analytic = analytic_jacobian(&pose, &points, &k)?;
    let x = pose.to_array();
    let mut worst: f64 = 0.0;
    for j in 0..6 {
        let h = 1e-6;
        let (mut xp, mut xm) = (x, x);
        xp[j] += h;
        xm[j] -= h;
        let fp = project_points(&Pose::from_slice(&xp)?, &points, &k)?;
        let fm = project_points(&Pose::from_slice(&xm)?, &points, &k)?;
        for i in 0..fp.len() {
            worst = worst.max(((fp[i] - fm[i]) / (2.0 * h) - analytic[(i, j)]).abs());
        }
    }
    println!(
        "projection Jacobian ({}x{}):\n{analytic:.3}",
        analytic.nrows(),
        analytic.ncols()
    );
    println!("largest difference from central differences: {worst:.2e}");
    Ok(())
}
