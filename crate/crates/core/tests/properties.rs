use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use proptest::prelude::*;

use gearsieve::arith::{is_prime_trial, primes_between};
use gearsieve::constellation::density_product;
use gearsieve::correlation::{off_diagonal_exact, tau_period_sum, universal_average};
use gearsieve::diophantine::gear_sequence;
use gearsieve::harness::{read_csv, write_table1, RunConfig, Table1Row};
use gearsieve::signal::{
    build_basis, certify, certify_with_survivors, classical_oracle_count, classical_oracle_window,
    composite_signal_with, torus_average, HitRule, SignalOptions, TraceMode, Window,
};
use gearsieve::{canonical_seed, structural_is_prime, Constellation};

fn tuples() -> Vec<Constellation> {
    [
        &[0u64, 2][..],
        &[0, 4],
        &[0, 6],
        &[0, 2, 6],
        &[0, 4, 6],
        &[0, 2, 6, 8],
        &[0, 6, 12],
    ]
    .iter()
    .map(|o| Constellation::new(o.to_vec()).unwrap())
    .collect()
}

fn tuple() -> impl Strategy<Value = Constellation> {
    prop::sample::select(tuples())
}

fn odd_m0(lo: u64, hi: u64) -> impl Strategy<Value = u64> {
    (lo / 2..=hi / 2).prop_map(|k| 2 * k + 1)
}

/// Anchors coprime to 6 in `[5, bound)`.
fn anchor(bound: u64) -> impl Strategy<Value = u64> {
    (0..bound / 3 - 1).prop_map(|k| 6 * (k / 2) + if k % 2 == 0 { 5 } else { 7 })
}

fn opts(rule: HitRule) -> SignalOptions {
    SignalOptions {
        rule,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn seed_decomposes_target(n in 4u64..(1 << 62)) {
        let s = canonical_seed(n).unwrap();
        prop_assert!(s.n0 < 3);
        prop_assert_eq!(2 * s.n0 + 3 * s.m0, n);
        prop_assert_eq!(s.is_prime_candidate(), n % 2 == 1 && n % 3 != 0);
    }

    #[test]
    fn structural_primality_matches_trial_division(n in 4u64..50_000_000) {
        prop_assert_eq!(structural_is_prime(n).unwrap(), is_prime_trial(n));
    }

    #[test]
    fn gears_cover_every_odd_modulus(m0 in odd_m0(3, 200_001), n0 in 1u64..3) {
        let seed = canonical_seed(2 * n0 + 3 * m0).unwrap();
        prop_assert_eq!((seed.n0, seed.m0), (n0, m0));
        let gears = gear_sequence(&seed);
        prop_assert_eq!(gears.len() as u64, (m0 - 1) / 2);
        for (i, g) in gears.iter().enumerate() {
            prop_assert_eq!(g.m_k, m0 - 2 * i as u64);
            prop_assert_eq!(2 * g.n_k + 3 * g.m_k, seed.n);
            prop_assert_eq!(g.is_locked(), seed.n.is_multiple_of(g.m_k));
        }
    }

    #[test]
    fn proper_divisor_certification_matches_oracle(
        m0 in odd_m0(9, 301),
        a in anchor(200),
        c in tuple(),
    ) {
        prop_assume!(a < m0 * m0);
        let basis = build_basis(m0).unwrap();
        let window = Window::certification(a, m0).unwrap();
        let trace = composite_signal_with(&basis, &window, &c, &opts(HitRule::ProperDivisor)).unwrap();
        prop_assert_eq!(certify(&trace).count, classical_oracle_count(&window, &c).unwrap());
    }

    #[test]
    fn divisor_certification_counts_tuples_above_the_basis(
        m0 in odd_m0(9, 301),
        a in anchor(200),
        c in tuple(),
    ) {
        prop_assume!(a < m0 * m0);
        let basis = build_basis(m0).unwrap();
        let window = Window::certification(a, m0).unwrap();
        let trace = composite_signal_with(&basis, &window, &c, &Default::default()).unwrap();
        let oracle = classical_oracle_window(a.max(m0 + 1), m0 * m0, &c).unwrap();
        prop_assert_eq!(certify(&trace).count, oracle);
    }

    #[test]
    fn survivors_are_prime_tuples(m0 in odd_m0(9, 401), c in tuple(), survivors_mode: bool) {
        let basis = build_basis(m0).unwrap();
        let window = Window::certification(7, m0).unwrap();
        let mode = if survivors_mode { TraceMode::Survivors } else { TraceMode::Full };
        let o = SignalOptions { mode, ..Default::default() };
        let trace = composite_signal_with(&basis, &window, &c, &o).unwrap();
        let res = certify_with_survivors(&trace);
        let list = res.survivors.unwrap();
        prop_assert_eq!(list.len() as u64, res.count);
        prop_assert!(list.windows(2).all(|w| w[0] < w[1]));
        for n in list {
            prop_assert!(n > m0 && n + c.max_offset() < window.end());
            for &h in c.offsets() {
                prop_assert!(is_prime_trial(n + h), "{} + {} composite", n, h);
            }
        }
    }

    #[test]
    fn trace_is_independent_of_partition(
        m0 in odd_m0(9, 301),
        segments in 1usize..64,
        c in tuple(),
        rule in prop::sample::select(vec![HitRule::Divisor, HitRule::ProperDivisor]),
    ) {
        let basis = build_basis(m0).unwrap();
        let window = Window::certification(7, m0).unwrap();
        let reference = composite_signal_with(&basis, &window, &c, &opts(rule)).unwrap();
        let split = SignalOptions { rule, segments: Some(segments), ..Default::default() };
        let t = composite_signal_with(&basis, &window, &c, &split).unwrap();
        prop_assert_eq!(t.values(), reference.values());
        let bits = SignalOptions { mode: TraceMode::Survivors, ..split };
        let t = composite_signal_with(&basis, &window, &c, &bits).unwrap();
        prop_assert_eq!(certify_with_survivors(&t), certify_with_survivors(&reference));
    }

    #[test]
    fn identities_hold_at_every_prime(p in prop::sample::select(primes_between(2, 1000)), c in tuple()) {
        prop_assume!(c.omega(p) < p);
        let w = c.omega(p);
        prop_assert_eq!(universal_average(&c, p).unwrap(), Ratio::from_integer(1));
        prop_assert_eq!(tau_period_sum(&c, p).unwrap(), Ratio::new((p - w) * (p - w), p));
    }

    #[test]
    fn partial_density_is_non_increasing(c in tuple(), m0 in 3u64..5000, step in 1u64..500) {
        let a = density_product(&c, m0).unwrap().partial_product;
        let b = density_product(&c, m0 + step).unwrap().partial_product;
        prop_assert!(b <= a);
        prop_assert!(b > 0.0);
    }

    #[test]
    fn table1_csv_round_trip(
        rows in prop::collection::vec(
            (5u64..100_000, 0u64..1_000_000, 1e-3f64..1e4, 1e-3f64..1e4, 1e-3f64..10.0),
            1..8,
        ),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { output_dir: dir.path().to_path_buf(), ..Default::default() };
        let rows: Vec<Table1Row> = rows
            .into_iter()
            .map(|(m0, twins, mean, var, ratio)| Table1Row {
                m0,
                window: m0 * m0,
                twins,
                mean,
                var,
                ratio,
                twins_inclusive: None,
                twins_strict: None,
            })
            .collect();
        let written = write_table1(&cfg, &rows).unwrap();
        prop_assert_eq!(written.len(), 1);
        let back: Vec<Table1Row> = read_csv(&written[0]).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!((a.m0, a.window, a.twins), (b.m0, b.window, b.twins));
            for (x, y) in [(a.mean, b.mean), (a.var, b.var), (a.ratio, b.ratio)] {
                prop_assert!(((x - y) / x).abs() <= 5e-6, "{} vs {}", x, y);
            }
        }
    }
}

/// Zero counts of the first `n` positions for every anchor class mod `Q`.
fn counts_over_anchors(m0: u64, c: &Constellation, n: u64) -> (u64, Vec<u64>) {
    let basis = build_basis(m0).unwrap();
    let q: u64 = basis.primes().iter().product();
    let counts = (0..q)
        .map(|x| {
            let a = if x % 2 == 1 { x } else { x + q };
            let window = Window::span(a, n).unwrap();
            let trace = composite_signal_with(&basis, &window, c, &Default::default()).unwrap();
            trace.values().unwrap()[..n as usize]
                .iter()
                .filter(|&&s| s == 0)
                .count() as u64
        })
        .collect();
    (q, counts)
}

#[test]
fn anchor_average_equals_torus_density() {
    for m0 in [5u64, 7, 11] {
        let basis = build_basis(m0).unwrap();
        for c in tuples() {
            let mu = torus_average(basis.primes(), &c).unwrap();
            let closed: Ratio<u64> = basis
                .primes()
                .iter()
                .map(|&p| Ratio::new(c.nu(p), p))
                .product();
            assert_eq!(mu, closed);
            for n in [1u64, 4, 13, 40] {
                let (q, counts) = counts_over_anchors(m0, &c, n);
                let total: u64 = counts.iter().sum();
                assert_eq!(Ratio::new(total, q), mu * n, "m0={m0} {c} n={n}");
            }
        }
    }
}

#[test]
fn anchor_variance_equals_exact_decomposition() {
    for m0 in [5u64, 7, 11] {
        let basis = build_basis(m0).unwrap();
        for c in tuples() {
            let mu = torus_average(basis.primes(), &c).unwrap();
            let mu = BigRational::new(BigInt::from(*mu.numer()), BigInt::from(*mu.denom()));
            for n in [1u64, 2, 9, 30, 77] {
                let (q, counts) = counts_over_anchors(m0, &c, n);
                let q = BigInt::from(q);
                let s: BigInt = counts.iter().map(|&k| BigInt::from(k)).sum();
                let s2: BigInt = counts.iter().map(|&k| BigInt::from(k * k)).sum();
                let mean = BigRational::new(s, q.clone());
                let brute = BigRational::new(s2, q) - &mean * &mean;
                let one = BigRational::from_integer(1.into());
                let diag = BigRational::from_integer(n.into()) * &mu * (one - &mu);
                let off = off_diagonal_exact(&c, basis.primes(), n).unwrap();
                assert_eq!(brute, diag + off, "m0={m0} {c} n={n}");
            }
        }
    }
}
