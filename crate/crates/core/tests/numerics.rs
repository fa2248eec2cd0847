use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng as _;
use rgglab::rng::rng_from_seed;
use rgglab::spectral::{eigenvalues_symmetric, SymMatrix};
use rgglab::sphere::{calibrate_tau, cap_probability, sample_unit_vectors};
use rgglab::walks::{
    brute_trace_oracle, check_counting_bound, multiplicity_reduce, tree_walk_prediction, walk_space_size,
};

// tau(p, d) computed independently with scipy.special.betaincinv;
// rows are d, columns p = 0.4, 0.1, 0.01, 1e-4
const TAU_TABLE: [(usize, [f64; 4]); 4] = [
    (10, [0.08665788544026776, 0.4186621829403686, 0.6850953517516406, 0.894728661611028]),
    (100, [0.025522559564155736, 0.12858960204957529, 0.23121225796422412, 0.36193297064524493]),
    (300, [0.014662908293898219, 0.07407409249895162, 0.13404053290020973, 0.21278592660881931]),
    (1000, [0.00801742491141863, 0.04053997222963266, 0.07352115845902908, 0.11728749382874619]),
];
const TAU_PS: [f64; 4] = [0.4, 0.1, 0.01, 1e-4];

#[test]
fn tau_matches_scipy_table() {
    for (d, row) in TAU_TABLE {
        for (p, want) in TAU_PS.iter().zip(row) {
            let got = calibrate_tau(*p, d, 1e-13).unwrap().tau;
            assert!((got - want).abs() < 1e-10, "d={d} p={p}: {got} vs {want}");
        }
    }
}

#[test]
fn cap_matches_scipy_values() {
    let cases = [
        (0.3, 100, 0.0011519828563450415),
        (0.7, 10, 0.008235489418257214),
        (0.1, 1000, 0.0007678569210681975),
        (0.05, 300, 0.19368436336422049),
    ];
    for (tau, d, want) in cases {
        let got = cap_probability(tau, d).unwrap();
        assert!(((got - want) / want).abs() < 1e-10, "tau={tau} d={d}: {got} vs {want}");
    }
}

#[test]
fn calibration_argument_errors() {
    assert!(calibrate_tau(0.0, 10, 1e-12).is_err());
    assert!(calibrate_tau(1.0, 10, 1e-12).is_err());
    assert!(calibrate_tau(0.1, 1, 1e-12).is_err());
    assert!(cap_probability(1.5, 10).is_err());
}

fn random_symmetric(n: usize, seed: u64) -> (SymMatrix, DMatrix<f64>) {
    let mut rng = rng_from_seed(seed);
    let mut m = SymMatrix::zeros(n);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.random_range(-1.0..1.0);
            m.set_sym(i, j, v);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    (m, d)
}

#[test]
fn eigenvalues_agree_with_nalgebra() {
    for (n, seed) in [(1, 1), (2, 2), (3, 3), (7, 4), (16, 5), (33, 6), (64, 7), (150, 8)] {
        let (m, d) = random_symmetric(n, seed);
        let ours = eigenvalues_symmetric(&m).unwrap();
        let mut theirs: Vec<f64> = d.symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        let scale = theirs.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() <= 1e-11 * scale * n as f64, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn eigenvalues_of_geometric_adjacency_agree_with_nalgebra() {
    let v = sample_unit_vectors(300, 20, 11).unwrap();
    let cap = calibrate_tau(0.05, 20, 1e-12).unwrap();
    let a = rgglab::graphgen::geometric_graph(&v, &cap).unwrap();
    let m = a.dense();
    let d = DMatrix::from_row_slice(300, 300, m.as_slice());
    let ours = eigenvalues_symmetric(&m).unwrap();
    let mut theirs: Vec<f64> = d.symmetric_eigenvalues().iter().copied().collect();
    theirs.sort_by(f64::total_cmp);
    for (a, b) in ours.iter().zip(&theirs) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn counting_bound_small_exhaustive() {
    let buckets = check_counting_bound(4, 6).unwrap();
    assert!(buckets.iter().all(|b| b.within_bound), "{buckets:?}");
    let total: u64 = buckets.iter().map(|b| b.count).sum();
    // closed walks of length 6 on K_4 with no repeated consecutive vertex:
    // tr(A^6) for A = J - I equals 3^6 + 3 * 1
    assert_eq!(total, 3u64.pow(6) + 3);
    assert!(walk_space_size(4, 6) >= total as u128);
}

#[test]
fn multiplicity_identity_spot_values() {
    let (a, b) = multiplicity_reduce(2, 0.3).unwrap();
    // (a - p)^2 = (1 - 2p)(a - p) + p(1 - p)
    assert!((a - 0.4).abs() < 1e-15 && (b - 0.21).abs() < 1e-15);
    assert!(multiplicity_reduce(0, 0.3).is_err());
    assert!(multiplicity_reduce(3, 1.0).is_err());
}

#[test]
fn oracle_second_moment_is_exact_at_finite_n() {
    // E (1/n) tr(Q / sqrt(n p (1-p)))^2 = (n - 1) / n for any edge law with P(edge) = p
    let r = brute_trace_oracle(6, 40, 0.3, 2, 4000, 5).unwrap();
    let exact = 5.0 / 6.0;
    assert!((r.total_hat - exact).abs() < 4.0 * r.standard_errors.total, "{r:?}");
    assert!((r.s1_exact - tree_walk_prediction(6, 2)).abs() < 1e-15);
    assert!((r.s1_exact - exact).abs() < 1e-15);
    assert!((r.total_hat - r.spectral_total).abs() < 1e-9);
}

proptest! {
    #[test]
    fn cap_closed_form_in_three_dimensions(tau in -1.0f64..1.0) {
        let got = cap_probability(tau, 3).unwrap();
        prop_assert!((got - (1.0 - tau) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cap_is_monotone_and_symmetric(a in -0.99f64..0.99, b in -0.99f64..0.99, d in 3usize..400) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (pl, ph) = (cap_probability(lo, d).unwrap(), cap_probability(hi, d).unwrap());
        prop_assert!(pl >= ph);
        let mirror = cap_probability(-a, d).unwrap();
        prop_assert!((cap_probability(a, d).unwrap() + mirror - 1.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_round_trip(p in 1e-4f64..0.5, d in 3usize..2000) {
        let cap = calibrate_tau(p, d, 1e-12).unwrap();
        prop_assert!(cap.tau >= 0.0);
        let back = cap_probability(cap.tau, d).unwrap();
        prop_assert!((back - p).abs() <= 1e-9 * p.max(1e-3));
    }

    #[test]
    fn spectrum_preserves_trace_and_frobenius(n in 1usize..40, seed in any::<u64>()) {
        let (m, _) = random_symmetric(n, seed);
        let e = eigenvalues_symmetric(&m).unwrap();
        prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
        let fro: f64 = m.as_slice().iter().map(|x| x * x).sum();
        prop_assert!((e.iter().sum::<f64>() - m.trace()).abs() < 1e-10 * n as f64);
        prop_assert!((e.iter().map(|x| x * x).sum::<f64>() - fro).abs() < 1e-9 * fro.max(1.0));
    }

    #[test]
    fn unit_vectors_are_unit_and_reproducible(n in 1usize..30, d in 2usize..30, seed in any::<u64>()) {
        let a = sample_unit_vectors(n, d, seed).unwrap();
        for i in 0..n {
            prop_assert!((a.inner(i, i) - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(a, sample_unit_vectors(n, d, seed).unwrap());
    }

    #[test]
    fn multiplicity_identity(k in 1u32..=20, p in 0.001f64..0.999) {
        let (alpha, beta) = multiplicity_reduce(k, p).unwrap();
        for a in [0.0, 1.0] {
            let lhs = (a - p).powi(k as i32);
            prop_assert!((lhs - (alpha * (a - p) + beta)).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplicity_ranges_for_p_at_most_half(k in 1u32..=64, p in 0.0001f64..=0.5) {
        // alpha_k = (1-p)^k - (-p)^k leaves [0, 1] for even k once p > 1/2
        let (alpha, beta) = multiplicity_reduce(k, p).unwrap();
        prop_assert!((0.0..=1.0).contains(&alpha));
        prop_assert!(beta.abs() <= 2.0 * p * (1.0 - p) + 1e-15);
    }
}
