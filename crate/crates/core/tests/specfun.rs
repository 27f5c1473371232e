use approx::assert_relative_eq;
use fsmrc::oracles::{adaptive_quadrature, QuadOptions};
use fsmrc::specfun::{
    beta, gauss_2f1, gaussian_q, kummer_m, lauricella_fb, ln_gamma, log_gamma, meijer_g_ber,
    meijer_g_mgf, tricomi_u, CompensatedSum, SeriesOptions,
};
use fsmrc::{BranchParams, Modulation, SumChannel};

fn opts() -> SeriesOptions {
    SeriesOptions::default()
}

/// Stirling series after shifting the argument above 20.
fn ln_gamma_oracle(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = x;
    while z < 20.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

#[test]
fn log_gamma_examples_and_accuracy() {
    assert_eq!(log_gamma(1.0).unwrap(), 0.0);
    assert_relative_eq!(
        log_gamma(0.5).unwrap(),
        0.5 * std::f64::consts::PI.ln(),
        max_relative = 1e-15
    );
    assert!(log_gamma(171.5).unwrap().is_finite());
    assert!(log_gamma(0.0).is_err() && log_gamma(-1.0).is_err());
    let mut x = 1e-3;
    while x <= 1e6 {
        let got = log_gamma(x).unwrap();
        let want = ln_gamma_oracle(x);
        // relative to max(1, |lnΓ|): lnΓ has zeros at 1 and 2
        assert!(
            (got - want).abs() <= 1e-13 * want.abs().max(1.0),
            "x = {x}: {got} vs {want}"
        );
        x *= 1.37;
    }
}

#[test]
fn beta_examples() {
    assert_relative_eq!(beta(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(
        beta(0.5, 0.5).unwrap(),
        std::f64::consts::PI,
        max_relative = 1e-14
    );
    let q = QuadOptions::rel(1e-13);
    let integral = adaptive_quadrature(|t| t.powf(1.5) * (1.0 - t).powf(0.5), 0.0, 1.0, &q).value;
    assert_relative_eq!(beta(2.5, 1.5).unwrap(), integral, max_relative = 1e-11);
    assert!(beta(0.0, 1.0).is_err());
}

#[test]
fn gaussian_q_examples() {
    assert_eq!(gaussian_q(0.0), 0.5);
    assert_eq!(gaussian_q(f64::INFINITY), 0.0);
    assert_eq!(gaussian_q(f64::NEG_INFINITY), 1.0);
    assert_relative_eq!(
        gaussian_q(1.0),
        0.158_655_253_931_457_05,
        max_relative = 1e-14
    );
    let mut last = 1.0;
    for k in -40..=40 {
        let v = gaussian_q(0.2 * k as f64);
        assert!(v < last);
        last = v;
    }
}

#[test]
fn gauss_examples() {
    assert_eq!(gauss_2f1(0.3, 0.7, 1.9, 0.0, &opts()).unwrap().value, 1.0);
    assert_relative_eq!(
        gauss_2f1(1.0, 2.0, 2.0, 0.5, &opts()).unwrap().value,
        2.0,
        max_relative = 1e-12
    );
    // Euler integral Γ(c)/(Γ(b)Γ(c-b)) ∫ t^{b-1}(1-t)^{c-b-1}(1-xt)^{-a} dt
    let (a, b, c, x) = (0.5, 1.5, 2.5, -0.3);
    let q = QuadOptions::rel(1e-13);
    let integral = adaptive_quadrature(
        |t| t.powf(b - 1.0) * (1.0 - t).powf(c - b - 1.0) * (1.0 - x * t).powf(-a),
        0.0,
        1.0,
        &q,
    )
    .value
        / beta(b, c - b).unwrap();
    assert_relative_eq!(
        gauss_2f1(a, b, c, x, &opts()).unwrap().value,
        integral,
        max_relative = 1e-11
    );
    assert!(gauss_2f1(1.0, 1.0, -3.0, 0.2, &opts()).is_err());
}

#[test]
fn kummer_examples() {
    assert_eq!(kummer_m(0.4, 1.2, 0.0, &opts()).unwrap().value, 1.0);
    for z in [-7.0, -1.0, 2.5, 15.0] {
        assert_relative_eq!(
            kummer_m(1.3, 1.3, z, &opts()).unwrap().value,
            f64::exp(z),
            max_relative = 1e-11
        );
    }
    let (a, b, z) = (0.5, 1.5, -2.0);
    let mut acc = CompensatedSum::new();
    let mut t = 1.0;
    for n in 0..200 {
        acc.add(t);
        let n = n as f64;
        t *= (a + n) / ((b + n) * (n + 1.0)) * z;
    }
    assert_relative_eq!(
        kummer_m(a, b, z, &opts()).unwrap().value,
        acc.value(),
        max_relative = 1e-12
    );
    assert!(kummer_m(1.0, -2.0, 0.5, &opts()).is_err());
}

#[test]
fn tricomi_examples() {
    for (a, z) in [(0.5, 0.3), (2.0, 4.0), (1.7, 40.0)] {
        assert_relative_eq!(
            tricomi_u(a, a + 1.0, z, &opts()).unwrap().value,
            z.powf(-a),
            max_relative = 1e-10
        );
    }
    let q = QuadOptions::rel(1e-12);
    let (a, b, z) = (1.0, 1.0 - 1.5, 2.0);
    let integral = adaptive_quadrature(
        |t| (-z * t).exp() * t.powf(a - 1.0) * (1.0 + t).powf(b - a - 1.0),
        0.0,
        f64::INFINITY,
        &q,
    )
    .value;
    assert_relative_eq!(
        tricomi_u(a, b, z, &opts()).unwrap().value,
        integral,
        max_relative = 1e-10
    );
    let z = 1e6;
    assert!((tricomi_u(1.2, -0.4, z, &opts()).unwrap().value * z.powf(1.2) - 1.0).abs() < 1e-5);
}

#[test]
fn lauricella_examples() {
    assert_eq!(
        lauricella_fb(&[1.0, 2.0], &[0.5, 0.5], 2.0, &[0.0, 0.0], &opts())
            .unwrap()
            .value,
        1.0
    );
    // brute-force double series
    let (x1, x2) = (-0.4f64, -0.7f64);
    let mut acc = CompensatedSum::new();
    for i in 0..400u32 {
        for j in 0..400u32 {
            let (fi, fj) = (i as f64, j as f64);
            // (1)_i (1)_i / i! = i!, and (3)_{i+j} = (i+j+2)!/2
            let ln = ln_gamma(fi + 1.0) + ln_gamma(fj + 1.0) + 2f64.ln() - ln_gamma(fi + fj + 3.0);
            let t = ln.exp() * x1.powi(i as i32) * x2.powi(j as i32);
            acc.add(t);
        }
    }
    let got = lauricella_fb(&[1.0, 1.0], &[1.0, 1.0], 3.0, &[x1, x2], &opts()).unwrap();
    assert_relative_eq!(got.value, acc.value(), max_relative = 1e-12);
}

#[test]
fn meijer_mgf_examples() {
    // the normalised MGF instance at t → 0 tends to 1
    let p = BranchParams::new(2.0, 3.0, 1.0).unwrap();
    let z = p.m / (p.m_s * p.gamma_bar * 1e-9);
    assert!((meijer_g_mgf(p.m, p.m_s, z, &opts()).unwrap().value - 1.0).abs() < 1e-6);
    // unit case against ∫ e^{-γ}(1+γ)^{-2} dγ
    let q = QuadOptions::rel(1e-12);
    let lap =
        adaptive_quadrature(|g| (-g).exp() * (1.0 + g).powi(-2), 0.0, f64::INFINITY, &q).value;
    assert_relative_eq!(
        meijer_g_mgf(1.0, 1.0, 1.0, &opts()).unwrap().value,
        lap,
        max_relative = 1e-10
    );
    // Nakagami limit
    let (m, g, t) = (2.0f64, 1.5, 0.7);
    let ms = 1e5;
    let want = (1.0 + g * t / m).powf(-m);
    assert!(
        (meijer_g_mgf(m, ms, m / (ms * g * t), &opts())
            .unwrap()
            .value
            - want)
            .abs()
            < 1e-3
    );
}

#[test]
fn meijer_ber_examples() {
    let opts = opts();
    // the normalised instance reproduces the single-branch quadrature BER
    let p = BranchParams::new(1.5, 2.5, 4.0).unwrap();
    let ch = SumChannel::new(vec![p]).unwrap();
    let q = fsmrc::metrics::ber_quadrature(&ch, &Modulation::BPSK, &opts)
        .unwrap()
        .value;
    let g = meijer_g_ber(p.m, p.m_s, p.m / (p.m_s * p.gamma_bar), &opts)
        .unwrap()
        .value;
    assert_relative_eq!(
        g / (2.0 * std::f64::consts::PI.sqrt()),
        q,
        max_relative = 1e-8
    );
    // zero SNR: √π, so the BER is ½
    let g = meijer_g_ber(1.5, 2.5, 1e12, &opts).unwrap().value;
    assert_relative_eq!(g, std::f64::consts::PI.sqrt(), max_relative = 1e-5);
    // unit fading at high SNR: 1/(4λγ̄)
    let gb = 1e5;
    let g = meijer_g_ber(1.0, 3.0, 1.0 / (3.0 * gb), &opts)
        .unwrap()
        .value;
    assert_relative_eq!(
        g / (2.0 * std::f64::consts::PI.sqrt()),
        1.0 / (4.0 * gb),
        max_relative = 2e-2
    );
}
