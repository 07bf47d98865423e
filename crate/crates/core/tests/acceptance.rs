//! Acceptance suite. Each criterion runs at its stated tolerance and time
//! budget and prints one PASS/FAIL line; the test fails if any criterion does.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gearsieve::arith::{is_prime_trial, primes_between, primes_up_to};
use gearsieve::constellation::density_product;
use gearsieve::correlation::{
    crt_average, fano_theoretical, sigma_diag, squared_density, tau, tau_period_sum,
    universal_average,
};
use gearsieve::diophantine::{gear_sequence, CanonicalSeed};
use gearsieve::fourier::{
    exp_sum_bound, fit_decay_exponent, product_variance_constant, tau_fourier, two_prime_checks,
    variance_stats, weighted_ergodic_sum, weighted_exp_sum, HConvention,
};
use gearsieve::signal::{
    build_basis, certify, classical_oracle_window, composite_signal_with, goldbach_count,
    signal_summary, torus_average, HitRule, SieveBasis, SignalOptions, TraceMode, Window,
};
use gearsieve::{structural_is_prime, Constellation};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn strict_count(m0: u64, c: &Constellation) -> u64 {
    let basis = SieveBasis::for_bound(m0).unwrap();
    let window = Window::certification(7, m0).unwrap();
    let opts = SignalOptions {
        mode: TraceMode::Survivors,
        ..Default::default()
    };
    certify(&composite_signal_with(&basis, &window, c, &opts).unwrap()).count
}

const LADDER: [u64; 6] = [30, 50, 100, 200, 500, 1000];

fn certified_counts() -> Check {
    const EXPECTED: [u64; 6] = [30, 66, 197, 576, 2564, 8134];
    let tw = Constellation::twins();
    for (&m0, &want) in LADDER.iter().zip(&EXPECTED) {
        let got = strict_count(m0, &tw);
        let oracle = classical_oracle_window(m0 + 1, m0 * m0, &tw).unwrap();
        ensure(got == want && oracle == want, || {
            format!("m0={m0}: certified {got}, oracle {oracle}, expected {want}")
        })?;
    }
    Ok(format!("{EXPECTED:?}"))
}

fn diagonal_variance() -> Check {
    const EXPECTED: [f64; 6] = [28.0, 62.5, 189.2, 559.4, 2511.4, 8001.7];
    let tw = Constellation::twins();
    let mut worst = 0.0f64;
    for (&m0, &want) in LADDER.iter().zip(&EXPECTED) {
        let positions = Window::certification(7, m0).unwrap().positions();
        let got = sigma_diag(strict_count(m0, &tw) as f64, positions);
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 0.1, || {
            format!("m0={m0}: sigma_diag {got:.3}, expected {want}")
        })?;
    }
    Ok(format!("max deviation {worst:.3}"))
}

/// Half a unit in the third significant digit of `want`.
fn three_sig_figs(got: f64, want: f64) -> bool {
    let unit = 10f64.powi(want.abs().log10().floor() as i32 - 2);
    (got - want).abs() <= 0.5 * unit + 1e-9 * unit
}

fn equidistribution() -> Check {
    const SUMS: [f64; 6] = [5.277e3, 2.424e4, 2.196e5, 1.952e6, 4.217e7, 4.496e8];
    const ERRORS: [f64; 6] = [1.41, 0.63, 0.20, 0.065, 0.014, 0.0041];
    let convention = HConvention::Direct;
    let mut points = Vec::new();
    let mut worst = 0.0f64;
    for ((&m0, &sum), &err) in LADDER.iter().zip(&SUMS).zip(&ERRORS) {
        let r = weighted_ergodic_sum(m0, convention).unwrap();
        ensure(three_sig_figs(r.weighted_sum, sum), || {
            format!(
                "m0={m0}: weighted sum {:.6e}, expected {sum:e}",
                r.weighted_sum
            )
        })?;
        let rel = (r.rel_error_pct - err).abs() / err;
        worst = worst.max(rel);
        ensure(rel <= 0.10, || {
            format!(
                "m0={m0}: rel error {:.5}%, expected {err}%",
                r.rel_error_pct
            )
        })?;
        points.push((m0 as f64, r.rel_error_pct));
    }
    let alpha = fit_decay_exponent(&points).unwrap().alpha;
    ensure((1.5..=1.85).contains(&alpha), || {
        format!("alpha {alpha:.3}")
    })?;
    Ok(format!(
        "{} convention, worst rel-error deviation {:.1}%, alpha {alpha:.3}",
        convention.name(),
        100.0 * worst
    ))
}

fn signal_statistics() -> Check {
    const M0: [u64; 5] = [30, 50, 100, 500, 1000];
    const MEANS: [f64; 5] = [2.05, 2.31, 2.60, 3.19, 3.40];
    const RATIOS: [f64; 5] = [0.65, 0.67, 0.70, 0.75, 0.76];
    let tw = Constellation::twins();
    for ((&m0, &mean), &ratio) in M0.iter().zip(&MEANS).zip(&RATIOS) {
        let basis = SieveBasis::for_bound(m0).unwrap();
        let window = Window::certification(7, m0).unwrap();
        let s = signal_summary(&basis, &window, &tw, HitRule::ProperDivisor).unwrap();
        ensure((s.mean() - mean).abs() <= 0.03, || {
            format!("m0={m0}: mean {:.4}, expected {mean}", s.mean())
        })?;
        ensure((s.fano() - ratio).abs() <= 0.02, || {
            format!("m0={m0}: ratio {:.4}, expected {ratio}", s.fano())
        })?;
        if m0 >= 100 {
            let f = fano_theoretical(m0).unwrap();
            ensure((f - ratio).abs() <= 0.02, || {
                format!("m0={m0}: fano_theoretical {f:.4}, expected {ratio}")
            })?;
        }
    }
    Ok("proper-divisor hit rule".into())
}

fn exact_identities() -> Check {
    let tuples = [
        Constellation::twins(),
        Constellation::cousins(),
        Constellation::sexy(),
        Constellation::new(vec![0, 2, 6]).unwrap(),
    ];
    let primes = primes_up_to(200);
    for c in &tuples {
        for &p in &primes {
            let w = c.omega(p);
            ensure(
                universal_average(c, p).unwrap() == Ratio::from_integer(1),
                || format!("universal average {c} p={p}"),
            )?;
            ensure(
                tau_period_sum(c, p).unwrap() == Ratio::new((p - w) * (p - w), p),
                || format!("tau period sum {c} p={p}"),
            )?;
        }
    }
    let small = [3u64, 5, 7, 11];
    for c in &tuples {
        for mask in 0..16u32 {
            let subset: Vec<u64> = (0..4)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| small[i])
                .collect();
            if subset.iter().any(|&p| c.omega(p) >= p) {
                continue;
            }
            ensure(
                crt_average(c, &subset).unwrap() == squared_density(c, &subset),
                || format!("crt average {c} {subset:?}"),
            )?;
        }
    }
    for c in [Constellation::twins(), Constellation::cousins()] {
        for d in 0..300 {
            let blocked = tau(&c, 3, d).unwrap().tau == Ratio::from_integer(0);
            ensure(blocked == (d % 3 != 0), || format!("blocking {c} d={d}"))?;
        }
    }
    Ok(format!("primes 2..=199 x {} tuples", tuples.len()))
}

fn fourier_suite() -> Check {
    let mut worst_dft = 0.0f64;
    let mut worst_parseval = 0.0f64;
    for p in primes_between(5, 97) {
        for row in tau_fourier(p).unwrap() {
            worst_dft = worst_dft
                .max((row.dft_re - row.coeff_closed).abs())
                .max(row.dft_im.abs());
        }
        let v = variance_stats(p).unwrap();
        worst_parseval = worst_parseval.max(((v.var_parseval - v.var_closed) / v.var_closed).abs());
    }
    ensure(worst_dft <= 1e-12, || {
        format!("DFT deviation {worst_dft:e}")
    })?;
    ensure(worst_parseval <= 1e-14, || {
        format!("Parseval deviation {worst_parseval:e}")
    })?;

    let cvar = product_variance_constant(100_000).unwrap();
    ensure((cvar - 0.242).abs() <= 0.005, || format!("C_var {cvar:.5}"))?;

    let primes = primes_up_to(31);
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[i + 1..] {
            let r = two_prime_checks(p, q).unwrap();
            ensure(r.injective && r.freq_sum <= r.full_sum_bound, || {
                format!("two-prime check ({p}, {q})")
            })?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for l in [99u64, 999, 9999] {
        for _ in 0..1000 {
            let theta: f64 = rng.gen_range(f64::EPSILON..1.0);
            let w = weighted_exp_sum(theta, l).unwrap().norm();
            let bound = exp_sum_bound(theta, l).unwrap();
            ensure(w <= bound, || {
                format!("|W({theta})| = {w} > {bound} at L={l}")
            })?;
        }
    }
    Ok(format!(
        "DFT {worst_dft:.1e}, Parseval {worst_parseval:.1e}, C_var {cvar:.4}"
    ))
}

fn constants() -> Check {
    let twins = density_product(&Constellation::twins(), 1_000_000)
        .unwrap()
        .singular_constant;
    let sexy = density_product(&Constellation::sexy(), 1_000_000)
        .unwrap()
        .singular_constant;
    ensure((twins - 0.66016).abs() <= 1e-4, || format!("C2 {twins:.6}"))?;
    let ratio = sexy / twins;
    ensure((1.99..=2.01).contains(&ratio), || {
        format!("sexy/twin {ratio:.6}")
    })?;
    Ok(format!("C2 {twins:.6}, ratio {ratio:.6}"))
}

fn oracle_equivalence() -> Check {
    for n in (5..=100_000u64).filter(|n| n % 2 == 1 && n % 3 != 0) {
        ensure(structural_is_prime(n).unwrap() == is_prime_trial(n), || {
            format!("structural primality n={n}")
        })?;
    }
    for m0 in (3..=999u64).step_by(2) {
        let seed = CanonicalSeed {
            n: 2 + 3 * m0,
            n0: 1,
            m0,
        };
        let moduli: Vec<u64> = gear_sequence(&seed).iter().map(|g| g.m_k).collect();
        let want: Vec<u64> = (3..=m0).rev().step_by(2).collect();
        ensure(moduli == want, || format!("gear coverage m0={m0}"))?;
    }
    let tuples = [
        Constellation::twins(),
        Constellation::cousins(),
        Constellation::sexy(),
    ];
    for m0 in [9u64, 15, 21, 31, 45, 99] {
        for c in &tuples {
            let basis = build_basis(m0).unwrap();
            let window = Window::certification(7, m0).unwrap();
            let trace = composite_signal_with(&basis, &window, c, &Default::default()).unwrap();
            let got = certify(&trace).count;
            let oracle = classical_oracle_window(m0 + 1, m0 * m0, c).unwrap();
            ensure(got == oracle, || {
                format!("certify {got} vs oracle {oracle}, m0={m0} {c}")
            })?;
        }
    }
    for c in &tuples {
        for mask in 0..16u32 {
            let subset: Vec<u64> = [3u64, 5, 7, 11]
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            let closed: Ratio<u64> = subset
                .iter()
                .map(|&p| Ratio::new(p - c.omega(p), p))
                .product();
            ensure(torus_average(&subset, c).unwrap() == closed, || {
                format!("torus average {c} {subset:?}")
            })?;
        }
    }
    let basis = build_basis(99).unwrap();
    let window = Window::certification(7, 99).unwrap();
    let tw = Constellation::twins();
    let reference = composite_signal_with(&basis, &window, &tw, &Default::default()).unwrap();
    for segments in [1usize, 3, 8, 17] {
        let opts = SignalOptions {
            segments: Some(segments),
            ..Default::default()
        };
        let t = composite_signal_with(&basis, &window, &tw, &opts).unwrap();
        ensure(t.values() == reference.values(), || {
            format!("partition with {segments} segments")
        })?;
    }
    Ok("all sub-suites".into())
}

fn goldbach() -> Check {
    let limit = 10_000u64;
    let mut is_prime = vec![true; limit as usize + 1];
    is_prime[0] = false;
    is_prime[1] = false;
    for i in 2..=limit as usize {
        if is_prime[i] {
            for j in (i * i..=limit as usize).step_by(i) {
                is_prime[j] = false;
            }
        }
    }
    for e in (8..=limit).step_by(2) {
        let want = (3..=e / 2)
            .filter(|&n| is_prime[n as usize] && is_prime[(e - n) as usize])
            .count() as u64;
        let got = goldbach_count(e).unwrap().count;
        ensure(got == want, || format!("E={e}: {got} vs {want}"))?;
    }
    let ten = goldbach_count(10).unwrap().count;
    let hundred = goldbach_count(100).unwrap().count;
    ensure(ten == 2 && hundred == 6, || {
        format!("E=10 -> {ten}, E=100 -> {hundred}")
    })?;
    Ok(format!("{} even targets", (limit - 8) / 2 + 1))
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    check: fn() -> Check,
}

#[test]
fn acceptance_criteria() {
    let criteria = [
        Criterion {
            id: 1,
            name: "certified twin counts",
            budget: Duration::from_secs(10),
            check: certified_counts,
        },
        Criterion {
            id: 2,
            name: "diagonal variance",
            budget: Duration::from_secs(1),
            check: diagonal_variance,
        },
        Criterion {
            id: 3,
            name: "equidistribution",
            budget: Duration::from_secs(60),
            check: equidistribution,
        },
        Criterion {
            id: 4,
            name: "signal statistics",
            budget: Duration::from_secs(30),
            check: signal_statistics,
        },
        Criterion {
            id: 5,
            name: "exact identities",
            budget: Duration::from_secs(5),
            check: exact_identities,
        },
        Criterion {
            id: 6,
            name: "fourier suite",
            budget: Duration::from_secs(10),
            check: fourier_suite,
        },
        Criterion {
            id: 7,
            name: "constants",
            budget: Duration::from_secs(5),
            check: constants,
        },
        Criterion {
            id: 8,
            name: "oracle equivalence",
            budget: Duration::from_secs(30),
            check: oracle_equivalence,
        },
        Criterion {
            id: 9,
            name: "goldbach",
            budget: Duration::from_secs(10),
            check: goldbach,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let verdict = match &outcome {
            Ok(_) if elapsed > c.budget => Err(format!(
                "over budget: {:.2} s > {} s",
                elapsed.as_secs_f64(),
                c.budget.as_secs()
            )),
            other => other.clone(),
        };
        match &verdict {
            Ok(detail) => println!(
                "criterion {} PASS {} ({detail}) [{:.2} s]",
                c.id,
                c.name,
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                println!(
                    "criterion {} FAIL {} ({why}) [{:.2} s]",
                    c.id,
                    c.name,
                    elapsed.as_secs_f64()
                );
                failed.push(c.id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn table3_alternate_convention_also_within_tolerance() {
    const ERRORS: [f64; 6] = [1.41, 0.63, 0.20, 0.065, 0.014, 0.0041];
    for (&m0, &err) in LADDER.iter().zip(&ERRORS) {
        let r = weighted_ergodic_sum(m0, HConvention::Tripled).unwrap();
        let rel = (r.rel_error_pct - err).abs() / err;
        assert!(rel <= 0.10, "m0={m0}: {} vs {err}", r.rel_error_pct);
    }
}
