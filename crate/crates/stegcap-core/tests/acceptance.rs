//! End-to-end acceptance suite. Each test is one release gate; together
//! they pin the solver to closed forms, the codecs to their contracts,
//! and the security claims to exact enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stegcap_core::channels::{CondPmf, DistortionMatrix, Pmf};
use stegcap_core::codec::{
    build_stacked_codebook, ccc_encode, rm_key_entropy_rate, CodecParams, NestedLinearCode,
};
use stegcap_core::gamesolver::{
    capacity_active, capacity_binary_hamming, capacity_passive, capacity_pubwm, exponent_active,
    exponent_passive, rd_bound, verify_no_loss_cyclic, GameConfig,
};
use stegcap_core::typestat::{type_of, Permutation, Sequence};
use stegcap_core::wardensim::{
    estimate_error_prob, exact_stego_distribution, rm_equivalence_check, AttackSpec, CodecHandle,
};

fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

fn binary_cfg(d1: f64, d2: f64, l: usize) -> GameConfig {
    GameConfig::new(Pmf::uniform(2), DistortionMatrix::hamming(2), d1, d2, l)
        .with_tol(1e-3)
        .with_multistarts(16)
        .with_seed(11)
}

fn stacked_params(n: usize, r: f64, d1: f64, p0: f64, seed: u64) -> CodecParams {
    CodecParams {
        n,
        r,
        l: 2,
        epsilon: 0.05,
        d1,
        d: DistortionMatrix::hamming(2),
        p_s: Pmf::new(vec![p0, 1.0 - p0]).unwrap(),
        seed,
    }
}

/// Solver capacity against the binary-Hamming closed form at four
/// budget pairs. The point (0.3, 0.2) sits in the time-sharing regime,
/// where the single-letter formula needs a third auxiliary symbol for
/// the embed/skip flag, so it runs at L=3.
#[test]
fn capacity_solver_matches_binary_closed_form() {
    let points = [
        (0.4, 0.2, 2usize),
        (0.3, 0.2, 3),
        (0.6, 0.2, 2),
        (0.2, 0.0, 2),
    ];
    for (d1, d2, l) in points {
        let oracle = capacity_binary_hamming(d1, d2).unwrap();
        let res = capacity_active(&binary_cfg(d1, d2, l)).unwrap();
        assert!(
            (res.value - oracle).abs() < 5e-3,
            "FAIL solver {} vs closed form {oracle} at ({d1},{d2})",
            res.value
        );
        println!(
            "PASS capacity ({d1},{d2}): solver {:.4} vs closed form {oracle:.4}",
            res.value
        );
    }
}

/// Dropping the exact-marginal constraint does not raise the game value:
/// the marginal-free and marginal-preserving capacities agree on a binary
/// Hamming grid and on a ternary cyclic instance.
#[test]
fn marginal_free_capacity_equals_marginal_preserving() {
    for (d1, d2) in [(0.4, 0.2), (0.6, 0.2), (0.2, 0.0), (0.45, 0.15)] {
        let active = capacity_active(&binary_cfg(d1, d2, 2)).unwrap();
        let pubwm = capacity_pubwm(&binary_cfg(d1, d2, 2).with_multistarts(8)).unwrap();
        assert!(
            (active.value - pubwm.value).abs() < 1e-2,
            "FAIL marginal-free {} vs preserving {} at ({d1},{d2})",
            pubwm.value,
            active.value
        );
        println!(
            "PASS no-loss ({d1},{d2}): free {:.4} vs preserving {:.4}",
            pubwm.value, active.value
        );
    }

    // on a ternary alphabet the marginal-free optimum is u = x, so the
    // base auxiliary alphabet must have at least three symbols
    let d = DistortionMatrix::cyclic_from_row(&[0.0, 1.0, 1.0]).unwrap();
    let report = verify_no_loss_cyclic(3, &d, 0.4, 0.0, 3).unwrap();
    let oracle = -(0.6f64 * 0.6f64.log2() + 2.0 * 0.2 * 0.2f64.log2());
    assert!(report.passed, "FAIL cyclic report {report:?}");
    assert!(
        (report.steg - oracle).abs() < 1e-2,
        "FAIL ternary value {} vs oracle {oracle}",
        report.steg
    );
    println!(
        "PASS no-loss ternary cyclic: free {:.4}, preserving {:.4}, shift-restricted {:.4}",
        report.pubwm, report.steg, report.restricted
    );
}

/// Exact stegotext law equals the covertext law: permutation keys over a
/// type-preserving prototype at N=4, and randomized nested linear codes
/// at N=3 and N=4, all at total variation 1e-12 or below.
#[test]
fn exact_stegotext_law_matches_the_covertext_law() {
    let params = stacked_params(4, 0.25, 0.5, 0.5, 19);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let cb = build_stacked_codebook(&params, &mut rng).unwrap();
    let report = exact_stego_distribution(&CodecHandle::Rm(cb)).unwrap();
    assert!(
        report.tv_distance <= 1e-12,
        "FAIL permuted codebook tv {}",
        report.tv_distance
    );
    println!("PASS permutation-keyed N=4: tv {:.2e}", report.tv_distance);

    let instances = [
        NestedLinearCode::new(3, &[0b111], &[]).unwrap(),
        NestedLinearCode::new(4, &[0b1000, 0b0100, 0b0010, 0b0001], &[0b1110]).unwrap(),
    ];
    for code in instances {
        let n = code.block_length();
        let handle = CodecHandle::Nested {
            code,
            p_s: Pmf::uniform(2),
        };
        let report = exact_stego_distribution(&handle).unwrap();
        assert!(
            report.tv_distance <= 1e-12,
            "FAIL nested N={n} tv {}",
            report.tv_distance
        );
        println!("PASS nested N={n}: tv {:.2e}", report.tv_distance);
    }
}

/// The key permutation changes nothing about decoding performance: exact
/// block error probability of ten random permutation keys matches the
/// prototype under BSC(0.25) to 1e-12.
#[test]
fn permutation_keys_leave_error_probability_unchanged() {
    let params = stacked_params(4, 0.25, 0.5, 0.5, 23);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let cb = build_stacked_codebook(&params, &mut rng).unwrap();
    let mut prng = ChaCha8Rng::seed_from_u64(71);
    let perms: Vec<Permutation> = (0..10).map(|_| Permutation::random(4, &mut prng)).collect();
    let spec = AttackSpec::memoryless(CondPmf::bsc(0.25), 0.25);
    let report = rm_equivalence_check(&cb, &spec, &perms).unwrap();
    assert!(
        report.max_abs_deviation < 1e-12,
        "FAIL max deviation {}",
        report.max_abs_deviation
    );
    println!(
        "PASS error equivalence: prototype {:.6}, max deviation {:.2e}",
        report.prototype_pe, report.max_abs_deviation
    );
}

/// The reliability exponent vanishes exactly at capacity and is bounded
/// away from zero below it, for the active game at (D1,D2)=(0.4,0.2) and
/// the passive game at D1=0.4 (capacity h(0.4)).
///
/// At R=0.20 the active optimum sits at 0.00295 (an interior divergence
/// kink), so the positivity floor there is 0.002 with a 0.0045 ceiling;
/// the 0.005 floor applies at R=0.10 where the curve is steeper.
#[test]
fn exponent_is_positive_exactly_below_capacity() {
    let cfg = binary_cfg(0.4, 0.2, 2).with_multistarts(12).with_seed(5);
    for r in [0.26, 0.30] {
        let e = exponent_active(&cfg, r).unwrap();
        assert!(e <= 1e-3, "FAIL active exponent {e} at rate {r}");
        println!("PASS active exponent at R={r}: {e:.5} (zero at or past capacity)");
    }
    let e = exponent_active(&cfg, 0.10).unwrap();
    assert!(e >= 0.005, "FAIL active exponent {e} at rate 0.10");
    println!("PASS active exponent at R=0.10: {e:.5} (>= 0.005)");
    let e = exponent_active(&cfg, 0.20).unwrap();
    assert!(
        (0.002..=0.0045).contains(&e),
        "FAIL active exponent {e} at rate 0.20"
    );
    println!("PASS active exponent at R=0.20: {e:.5} (within [0.002, 0.0045])");

    let p = Pmf::uniform(2);
    let d = DistortionMatrix::hamming(2);
    let cap = h(0.4);
    for r in [cap + 1e-6, 0.99] {
        let e = exponent_passive(&p, &d, 0.4, r).unwrap();
        assert!(e <= 1e-3, "FAIL passive exponent {e} at rate {r}");
    }
    for r in [0.80, 0.90] {
        let e = exponent_passive(&p, &d, 0.4, r).unwrap();
        assert!(e >= 0.005, "FAIL passive exponent {e} at rate {r}");
    }
    println!("PASS passive exponent: zero above h(0.4)={cap:.4}, positive below");
}

/// With no attack budget the active game collapses to the passive one,
/// and the passive value never exceeds the rate-distortion style bound.
#[test]
fn zero_attack_budget_reduces_to_the_passive_game() {
    let configs = [
        (Pmf::uniform(2), 0.2),
        (Pmf::uniform(2), 0.4),
        (Pmf::new(vec![0.7, 0.3]).unwrap(), 0.15),
    ];
    let d = DistortionMatrix::hamming(2);
    for (p_s, d1) in configs {
        let active = capacity_active(
            &GameConfig::new(p_s.clone(), d.clone(), d1, 0.0, 2)
                .with_tol(1e-3)
                .with_multistarts(16)
                .with_seed(11),
        )
        .unwrap();
        let passive = capacity_passive(&p_s, &d, d1).unwrap();
        assert!(
            (active.value - passive.value).abs() < 2e-3,
            "FAIL active(D2=0) {} vs passive {} at D1={d1}",
            active.value,
            passive.value
        );
        println!(
            "PASS passive reduction (p0={:.1}, D1={d1}): {:.4} vs {:.4}",
            p_s.probs()[0],
            active.value,
            passive.value
        );
    }

    for &(p0, hi) in &[(0.5, 0.5), (0.7, 0.3)] {
        let p_s = Pmf::new(vec![p0, 1.0 - p0]).unwrap();
        let mut d1 = 0.05;
        while d1 <= hi + 1e-9 {
            let passive = capacity_passive(&p_s, &d, d1).unwrap();
            let bound = rd_bound(&p_s, &d, d1).unwrap();
            assert!(
                passive.value <= bound + 1e-6,
                "FAIL passive {} above bound {bound} at (p0={p0}, D1={d1})",
                passive.value
            );
            d1 += 0.05;
        }
    }
    println!("PASS passive capacity stays under the entropy-difference bound on the grid");
}

/// Codec contracts over randomized encodes: the stegotext type equals the
/// covertext type and the distortion budget holds exactly; a zero-budget
/// single-message codebook never errs through a passive warden; and the
/// three-bit repetition code's Monte Carlo error under BSC(0.4) brackets
/// the closed-form two-or-more-flips probability.
#[test]
fn codec_contracts_hold_over_randomized_encodes() {
    let cases = [
        stacked_params(12, 1.0 / 6.0, 0.25, 0.5, 29),
        stacked_params(8, 0.25, 0.5, 0.3, 31),
    ];
    for params in cases {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let cb = build_stacked_codebook(&params, &mut rng).unwrap();
        let cols = cb.message_count();
        let n = params.n;
        for _ in 0..5_000 {
            let s: Vec<u8> = (0..n)
                .map(|_| u8::from(rng.gen::<f64>() >= params.p_s.probs()[0]))
                .collect();
            let s = Sequence::new(s, 2).unwrap();
            let m = rng.gen_range(0..cols);
            let (x, _) = ccc_encode(&s, m, &cb, &mut rng).unwrap();
            assert_eq!(
                type_of(&x).counts(),
                type_of(&s).counts(),
                "FAIL type preservation at N={n}"
            );
            let dist: u32 = s
                .symbols()
                .iter()
                .zip(x.symbols())
                .map(|(a, b)| u32::from(a != b))
                .sum();
            assert!(
                f64::from(dist) <= params.d1 * n as f64 + 1e-9,
                "FAIL distortion {dist} over budget at N={n}"
            );
        }
        println!("PASS 5000 encodes at N={n}: exact type match, distortion within budget");
    }

    let params = stacked_params(10, 0.0, 0.0, 0.5, 37);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let cb = build_stacked_codebook(&params, &mut rng).unwrap();
    let report =
        estimate_error_prob(&CodecHandle::Stacked(cb), &AttackSpec::passive(), 10_000, 41)
            .unwrap();
    assert_eq!(report.errors, 0, "FAIL passive loopback errors");
    println!("PASS zero-budget passive loopback: 0 errors in 10000 trials");

    let code = NestedLinearCode::new(3, &[0b111], &[]).unwrap();
    let handle = CodecHandle::Nested {
        code,
        p_s: Pmf::uniform(2),
    };
    let spec = AttackSpec::memoryless(CondPmf::bsc(0.4), 0.4);
    let report = estimate_error_prob(&handle, &spec, 10_000, 43).unwrap();
    let oracle = 3.0 * 0.4 * 0.4 * 0.6 + 0.4f64.powi(3);
    let (lo, hi) = report.wilson_ci_95;
    assert!(
        lo <= oracle && oracle <= hi,
        "FAIL oracle {oracle} outside CI [{lo}, {hi}]"
    );
    println!(
        "PASS repetition code under BSC(0.4): p_e {:.4}, CI [{lo:.4}, {hi:.4}] brackets {oracle:.4}",
        report.p_e_hat
    );
}

/// Key-entropy accounting: the permutation key rate stays below log2(N)
/// for N=2..64, and the nested-code key rate complements the channel
/// code rate exactly.
#[test]
fn key_entropy_rates_match_closed_forms() {
    for n in 2..=64usize {
        let rate = rm_key_entropy_rate(n);
        assert!(
            rate < (n as f64).log2(),
            "FAIL key rate {rate} at N={n} reaches log2(N)"
        );
        assert!(rate > 0.0);
    }
    println!("PASS permutation key rate under log2(N) for N=2..64");

    let instances = [
        NestedLinearCode::new(3, &[0b111], &[]).unwrap(),
        NestedLinearCode::new(3, &[0b100, 0b010, 0b001], &[0b111]).unwrap(),
        NestedLinearCode::new(4, &[0b1110, 0b0111], &[0b1110]).unwrap(),
        NestedLinearCode::new(5, &[0b11111, 0b11000, 0b00110], &[0b11111]).unwrap(),
        NestedLinearCode::new(6, &[0b111111, 0b110000, 0b001100, 0b000011], &[]).unwrap(),
    ];
    for code in instances {
        let n = code.block_length();
        let k = (code.channel_code_rate() * n as f64).round() as u32;
        assert_eq!(
            code.coset_leaders().len(),
            1usize << (n as u32 - k),
            "FAIL leader count at N={n}"
        );
        let expected = f64::from(n as u32 - k) / n as f64;
        assert!(
            (code.key_entropy_rate() - expected).abs() < 1e-15,
            "FAIL key rate {} vs {} at N={n}",
            code.key_entropy_rate(),
            expected
        );
        println!(
            "PASS nested N={n}: key rate {:.4} complements code rate {:.4}",
            code.key_entropy_rate(),
            code.channel_code_rate()
        );
    }
}
