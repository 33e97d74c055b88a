use lclt_core::rng::stream;
use lclt_core::toolbox::{
    bernoulli_charfn_modulus, binomial_charfn_bound, gaussian_tail, gaussian_tail_quadrature, kimvu_bound,
    kimvu_variance_ratio, paley_zygmund_check, verify_binomial_charfn_bound, verify_chernoff,
};
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn bernoulli_bound_on_dense_grid() {
    let r = verify_binomial_charfn_bound(100, 100, 1e-15);
    assert_eq!(r.cases, 10_000);
    assert!(r.passed(), "{r:?}");
}

#[test]
fn chernoff_for_small_n() {
    let ps: Vec<f64> = (1..20).map(|i| f64::from(i) / 20.0).collect();
    let r = verify_chernoff(30, &ps, 1e-15);
    assert!(r.passed(), "{r:?}");
}

proptest! {
    #[test]
    fn bernoulli_bound_random_points(p in 0.0f64..=1.0, t in -50.0f64..50.0) {
        prop_assert!(bernoulli_charfn_modulus(p, t) <= binomial_charfn_bound(p, t) + 1e-15);
    }
}

#[test]
fn gaussian_tail_against_normal_cdf() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let root = (2.0 * std::f64::consts::PI).sqrt();
    for i in 0..=40 {
        let k = 2.0 + 0.2 * f64::from(i);
        let exact = root * normal.sf(k);
        let quad = gaussian_tail_quadrature(k, 1e-13);
        assert!((quad - exact).abs() <= 1e-10 * exact, "K={k}: {quad} vs {exact}");
        let mid = gaussian_tail(k).unwrap();
        assert!(exact <= mid && mid <= (-k).exp(), "K={k}");
    }
    assert!(gaussian_tail(1.5).is_err());
}

#[test]
fn gaussian_tail_reference_values() {
    // √(π/2)·erfc(K/√2) at 30 digits
    let reference = [
        (2.0, 0.057_026_123_992_892_048),
        (3.0, 0.003_383_692_573_952_727_6),
        (5.0, 7.185_289_350_398_080_6e-7),
        (5.6, 2.686_501_477_739_194_4e-8),
        (8.0, 1.559_363_567_083_436e-15),
    ];
    for (k, want) in reference {
        let got = gaussian_tail_quadrature(k, 1e-13);
        assert!((got - want).abs() <= 1e-12 * want, "K={k}: {got} vs {want}");
    }
}

#[test]
fn paley_zygmund_on_random_measures() {
    let mut rng = stream(77, 0);
    for case in 0..200 {
        let len = 5 + case % 50;
        let values: Vec<f64> = (0..len).map(|_| rng.random::<f64>().powi(1 + case % 4)).collect();
        for theta in [0.1, 0.5, 0.9] {
            assert!(paley_zygmund_check(&values, theta).unwrap().holds);
        }
    }
}

#[test]
fn kimvu_ratio_stays_bounded_on_critical_path() {
    // along p = 4n^{-1/2}, E₀E₁ and σ² both grow like n^{3/2}
    let mut ratios = Vec::new();
    for n in [100u64, 1_000, 10_000, 100_000] {
        let p = 4.0 / (n as f64).sqrt();
        ratios.push(kimvu_variance_ratio(n, p).unwrap());
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(max / min < 2.0, "{ratios:?}");
    let kv = kimvu_bound(1000, 0.2, 20.0, 1.0).unwrap();
    assert!((kv.tail - (-20.0f64 + 2.0 * 1000f64.ln()).exp()).abs() < 1e-15);
}
