use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raynav::math::Vec3;
use raynav::render::sampling::{cosine_hemisphere, phong_lobe, phong_lobe_pdf, uniform_disk};

#[test]
fn cosine_hemisphere_mean_cosine() {
    let n = Vec3::new(0.3, -0.5, 0.8).normalize();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draws = 1_000_000;
    let mut sum = 0.0;
    for _ in 0..draws {
        let (d, pdf) = cosine_hemisphere(&n, rng.random(), rng.random());
        let c = d.dot(&n);
        assert!(c >= 0.0);
        assert!((pdf - c / std::f64::consts::PI).abs() < 1e-12);
        sum += c;
    }
    let mean = sum / draws as f64;
    assert!((mean - 2.0 / 3.0).abs() / (2.0 / 3.0) < 0.005, "{mean}");
}

#[test]
fn phong_lobe_mean_cosine() {
    let axis = Vec3::z();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for exponent in [1.0, 10.0, 100.0] {
        let draws = 200_000;
        let mut mean_cos = 0.0;
        for _ in 0..draws {
            let (d, pdf) = phong_lobe(&axis, exponent, rng.random(), rng.random());
            let c = d.dot(&axis);
            assert!((pdf - phong_lobe_pdf(exponent, c)).abs() <= 1e-9 * pdf.max(1.0));
            mean_cos += c;
        }
        mean_cos /= draws as f64;
        let expected = (exponent + 1.0) / (exponent + 2.0);
        assert!(
            (mean_cos - expected).abs() < 0.005,
            "n = {exponent}: {mean_cos} vs {expected}"
        );
    }
}

#[test]
fn disk_samples_cover_unit_disk_uniformly() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let draws = 200_000;
    let mut inner = 0;
    for _ in 0..draws {
        let (x, y) = uniform_disk(rng.random(), rng.random());
        let r2 = x * x + y * y;
        assert!(r2 <= 1.0 + 1e-12);
        if r2 < 0.25 {
            inner += 1;
        }
    }
    let frac = inner as f64 / draws as f64;
    assert!((frac - 0.25).abs() < 0.005, "{frac}");
}
