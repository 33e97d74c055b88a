use lclt_core::metrics::{
    anticoncentration_stat, distance_report, invert_charfn, l1_parts, mc_pmf, sup_lattice_detail, Pmf, PmfSource,
};
use lclt_core::oracle::build_table;
use lclt_core::{exact_charfn, moments};

#[test]
fn inversion_reproduces_exact_law() {
    for n in 3..=6 {
        let table = build_table(n).unwrap();
        let top = table.max_triangles() as u64;
        for i in 1..=9 {
            let p = f64::from(i) / 10.0;
            let exact = Pmf::from_exact(&table, p);
            let inv = invert_charfn(|t| exact_charfn(&table, p, t), n as u64, p, 0..=top).unwrap();
            assert_eq!(inv.source, PmfSource::Inversion);
            inv.validate().unwrap();
            for k in 0..=top {
                assert!((inv.prob(k) - exact.prob(k)).abs() < 1e-10, "n={n} p={p} k={k}");
            }
        }
    }
}

#[test]
fn monte_carlo_law_within_aggregate_radius() {
    let table = build_table(6).unwrap();
    let exact = Pmf::from_exact(&table, 0.3);
    let mc = mc_pmf(6, 0.3, 200_000, 12).unwrap();
    assert!((mc.total() - 1.0).abs() < 1e-12);
    assert!(mc.tv_distance(&exact) <= 3.0 * mc.aggregate_ci());
}

#[test]
fn pinned_exact_distances() {
    let pmf = Pmf::from_exact(&build_table(6).unwrap(), 0.3);
    let m = moments(6, 0.3).unwrap();
    let l1 = l1_parts(&pmf, &m).unwrap();
    assert!((l1.total() - PINNED_L1).abs() < 1e-9, "{:.15}", l1.total());
    let again = l1_parts(&pmf, &m).unwrap();
    assert_eq!(l1, again);
    let sup = sup_lattice_detail(&pmf, &m).unwrap();
    assert!(sup.value > 0.0 && sup.ci == 0.0);
}

const PINNED_L1: f64 = 0.496_205_293_971_493;

#[test]
fn distances_shrink_from_small_to_moderate_n() {
    let small = distance_report(&Pmf::from_exact(&build_table(6).unwrap(), 0.3), 0.1).unwrap();
    let pmf = mc_pmf(60, 0.3, 100_000, 2).unwrap();
    let big = distance_report(&pmf, 0.1).unwrap();
    assert!(big.sup_lattice < small.sup_lattice);
    assert!(big.l1 < small.l1);
    let m = moments(60, 0.3).unwrap();
    let a = anticoncentration_stat(&pmf, &m);
    assert!(a <= 0.45, "{a}");
    assert_eq!(big.source, PmfSource::MonteCarlo);
    assert_eq!(big.samples, 100_000);
}
