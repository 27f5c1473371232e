use approx::assert_relative_eq;
use fsmrc::oracles::{adaptive_quadrature, numeric_laplace, QuadOptions};
use fsmrc::{BranchParams, Moment};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma_lr;

const SHAPES: [(f64, f64); 5] = [
    (0.5, 1.25),
    (1.0, 1.0),
    (1.5, 1.25),
    (2.5, 1.5),
    (2.5, 50.0),
];
const SCALES: [f64; 3] = [1.0, 10.0, 100.0];

fn grid() -> impl Iterator<Item = BranchParams> {
    SHAPES.iter().flat_map(|&(m, ms)| {
        SCALES
            .iter()
            .map(move |&g| BranchParams::new(m, ms, g).unwrap())
    })
}

#[test]
fn unit_case_values() {
    let p = BranchParams::new(1.0, 1.0, 1.0).unwrap();
    assert_relative_eq!(p.pdf(1.0).unwrap(), 0.25, max_relative = 1e-14);
    assert_relative_eq!(p.cdf(1.0).unwrap(), 0.5, max_relative = 1e-14);
    assert_eq!(p.cdf(0.0).unwrap(), 0.0);
    assert_eq!(p.mgf(0.0).unwrap().value, 1.0);
}

#[test]
fn pdf_integrates_to_one() {
    let q = QuadOptions::rel(1e-12).with_abs_tol(1e-10);
    for p in grid() {
        let total = adaptive_quadrature(|g| p.pdf(g).unwrap(), 0.0, f64::INFINITY, &q);
        assert!((total.value - 1.0).abs() < 1e-8, "{p:?}: {}", total.value);
    }
}

#[test]
fn cdf_is_running_integral_of_pdf() {
    let q = QuadOptions::rel(1e-13).with_abs_tol(1e-12);
    for p in grid() {
        let upper = 50.0 * p.gamma_bar;
        let mut acc = 0.0;
        let mut prev = 0.0;
        let mut worst = 0.0f64;
        for k in 1..=100 {
            // quadratic spacing resolves the origin
            let g = upper * (k as f64 / 100.0).powi(2);
            acc += adaptive_quadrature(|x| p.pdf(x).unwrap(), prev, g, &q).value;
            prev = g;
            worst = worst.max((acc - p.cdf(g).unwrap()).abs());
        }
        assert!(worst <= 1e-7, "{p:?}: {worst:e}");
    }
}

#[test]
fn mgf_is_laplace_transform_of_pdf() {
    let q = QuadOptions::rel(1e-11);
    for p in grid() {
        for t in [0.1, 1.0, 10.0] {
            let closed = p.mgf(t).unwrap();
            let numeric = numeric_laplace(|g| p.pdf(g).unwrap(), t, &q);
            assert!(closed.converged);
            assert_relative_eq!(closed.value, numeric.value, max_relative = 1e-6);
        }
    }
}

#[test]
fn mgf_decreases_in_t() {
    for p in grid() {
        let mut last = 1.0;
        for k in 1..40 {
            let v = p.mgf(0.05 * 1.3f64.powi(k)).unwrap().value;
            assert!(v < last && v > 0.0, "{p:?}");
            last = v;
        }
    }
}

#[test]
fn light_shadowing_gives_nakagami() {
    for m in [0.5, 1.0, 2.0, 3.5] {
        let p = BranchParams::new(m, 1e5, 2.0).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let want = (1.0 + p.gamma_bar * t / m).powf(-m);
            assert!((p.mgf(t).unwrap().value - want).abs() < 1e-3);
        }
        let mut worst = 0.0f64;
        for k in 1..=200 {
            let g = 0.05 * k as f64;
            let want = gamma_lr(m, m * g / p.gamma_bar);
            worst = worst.max((p.cdf(g).unwrap() - want).abs());
        }
        assert!(worst < 1e-3, "m = {m}: {worst:e}");
    }
}

#[test]
fn unit_fading_with_light_shadowing_gives_rayleigh() {
    let p = BranchParams::new(1.0, 1e5, 3.0).unwrap();
    for k in 0..=100 {
        let g = 0.2 * k as f64;
        assert!((p.cdf(g).unwrap() - (1.0 - (-g / 3.0).exp())).abs() < 1e-3);
    }
}

#[test]
fn moments() {
    let p = BranchParams::new(2.0, 3.0, 4.0).unwrap();
    assert_relative_eq!(
        p.moment(1).value().unwrap(),
        4.0 * 3.0 / 2.0,
        max_relative = 1e-12
    );
    assert!(matches!(
        BranchParams::new(2.0, 1.5, 1.0).unwrap().moment(2),
        Moment::Infinite
    ));
    let light = BranchParams::new(2.0, 1e7, 4.0).unwrap();
    assert_relative_eq!(light.moment(1).value().unwrap(), 4.0, max_relative = 1e-6);
}

#[test]
fn sample_mean_matches_first_moment() {
    // m_s > 2 so the variance is finite and the standard error is meaningful
    let p = BranchParams::new(2.5, 5.3, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 1_000_000;
    let xs: Vec<f64> = (0..n).map(|_| p.sample(&mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = p.moment(1).value().unwrap();
    assert!(
        (mean - want).abs() < 4.0 * (var / n as f64).sqrt(),
        "{mean} vs {want}"
    );
    assert!((mean / want - 1.0).abs() < 5e-3);
}

#[test]
fn light_shadowing_sample_mean() {
    let p = BranchParams::new(1.5, 1e5, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 200_000;
    let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
    assert!((mean / 2.0 - 1.0).abs() < 0.01);
}

#[test]
fn histogram_bin_matches_pdf() {
    let p = BranchParams::new(2.5, 1.5, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 2_000_000;
    let (lo, hi) = (4.75, 5.25);
    let hits = (0..n)
        .filter(|_| (lo..hi).contains(&p.sample(&mut rng)))
        .count() as f64;
    let prob = p.cdf(hi).unwrap() - p.cdf(lo).unwrap();
    let sigma = (n as f64 * prob * (1.0 - prob)).sqrt();
    assert!(
        (hits - n as f64 * prob).abs() < 4.0 * sigma,
        "{hits} vs {}",
        n as f64 * prob
    );
    // the bin average is within a hair of the midpoint density
    assert_relative_eq!(prob / (hi - lo), p.pdf(5.0).unwrap(), max_relative = 2e-3);
}

#[test]
fn fixed_seed_fixed_stream() {
    let p = BranchParams::new(0.5, 1.25, 1.0).unwrap();
    let draw = || {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        (0..1000).map(|_| p.sample(&mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(draw(), draw());
}
