//! Pushes the crate's real workloads through the parallel front door and
//! through the sequential twin, so `cargo bench` shows what the `parallel`
//! feature buys on this machine.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stegcap_core::codec::{nested_decode, nested_encode, NestedLinearCode};
use stegcap_core::exec::{kahan_sum, map_indexed, map_indexed_seq, sum_indexed};
use stegcap_core::gamesolver::capacity_passive;
use stegcap_core::wardensim::apply_attack;
use stegcap_core::{AttackSpec, CondPmf, DistortionMatrix, Pmf, Sequence};

/// Five independent repetition blocks; 32 inner codewords keeps the
/// nearest-codeword search busy without dominating the RNG cost.
fn bench_code() -> NestedLinearCode {
    let gen2 = [
        0b111_000_000_000_000u64,
        0b000_111_000_000_000,
        0b000_000_111_000_000,
        0b000_000_000_111_000,
        0b000_000_000_000_111,
    ];
    NestedLinearCode::new(15, &gen2, &gen2[..1]).expect("valid generators")
}

fn loopback_trial(code: &NestedLinearCode, spec: &AttackSpec, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
    let n = code.block_length();
    let symbols: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
    let s = Sequence::new(symbols, 2).unwrap();
    let m = rng.gen_range(0..code.message_count());
    let key = code.leader(rng.gen_range(0..code.coset_leaders().len()));
    let x = nested_encode(&s, m, code, &key).unwrap();
    let y = apply_attack(&x, spec, &mut rng).unwrap();
    u64::from(nested_decode(&y, code, &key).unwrap() != m)
}

fn monte_carlo_trials(c: &mut Criterion) {
    let code = bench_code();
    let spec = AttackSpec::memoryless(CondPmf::bsc(0.02), 0.02);
    let mut group = c.benchmark_group("monte_carlo_trials");
    for &trials in &[1usize << 12, 1 << 14] {
        group.throughput(Throughput::Elements(trials as u64));
        group.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |b, &n| {
            b.iter(|| -> u64 { map_indexed(n, |i| loopback_trial(&code, &spec, i)).iter().sum() })
        });
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &n| {
            b.iter(|| -> u64 {
                map_indexed_seq(n, |i| loopback_trial(&code, &spec, i)).iter().sum()
            })
        });
    }
    group.finish();
}

/// The shape of an exact-enumeration pass: one cheap weight per index,
/// reduced to a single compensated total.
fn posterior_weight(i: usize) -> f64 {
    let x = (i as f64).mul_add(0.5e-6, 1e-9);
    (-x).exp() * (1.0 + x).ln_1p()
}

fn deterministic_reductions(c: &mut Criterion) {
    let mut group = c.benchmark_group("deterministic_reductions");
    for &n in &[1usize << 16, 1 << 19] {
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("blocked_parallel", n), &n, |b, &n| {
            b.iter(|| sum_indexed(n, posterior_weight))
        });
        group.bench_with_input(BenchmarkId::new("sequential_kahan", n), &n, |b, &n| {
            b.iter(|| {
                let xs = map_indexed_seq(n, posterior_weight);
                kahan_sum(&xs)
            })
        });
    }
    group.finish();
}

fn budget_point(i: usize) -> f64 {
    let p_s = Pmf::new(vec![0.5, 0.5]).unwrap();
    let d = DistortionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let d1 = 0.05 + 0.05 * i as f64;
    capacity_passive(&p_s, &d, d1).unwrap().value
}

fn budget_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("budget_sweep");
    group.sample_size(10);
    let points = 8usize;
    group.bench_function(BenchmarkId::new("parallel", points), |b| {
        b.iter(|| -> f64 { map_indexed(points, budget_point).iter().sum() })
    });
    group.bench_function(BenchmarkId::new("sequential", points), |b| {
        b.iter(|| -> f64 { map_indexed_seq(points, budget_point).iter().sum() })
    });
    group.finish();
}

criterion_group!(benches, monte_carlo_trials, deterministic_reductions, budget_sweep);
criterion_main!(benches);
