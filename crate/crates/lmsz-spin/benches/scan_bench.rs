//! Compares sequential and thread-pool execution of a numeric sweep-rate
//! scan, the workload the `parallel` feature exists for.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use lmsz_spin::params::CouplingParams;
use lmsz_spin::propagate::{propagate, PropagationConfig, SweepHamiltonian};
use lmsz_spin::qubit::decompose_qubit_blocks;
use lmsz_spin::scan::{log_grid, run_indexed_sequential};
use lmsz_spin::state::QuantumState;
use lmsz_spin::sweep::{CrossingMode, SweepProtocol, SystemKind};

/// One numeric two-level crossing at rate `alpha`, coupled so the final
/// transition probability is one half; returns the tail-estimated upper
/// population.
fn crossing_at(alpha: f64) -> f64 {
    let m = (std::f64::consts::LN_2 * alpha / (2.0 * std::f64::consts::PI)).sqrt();
    let sweep = SweepProtocol::with_window_factor(
        alpha,
        CrossingMode::Full,
        15.0,
        m,
        SystemKind::QubitPair,
    )
    .expect("valid sweep");
    let p = CouplingParams::new(m, 0.0, 0.0, 0.0, 0.0);
    let blocks = decompose_qubit_blocks(&p, 0.0, 0.0);
    let ham = SweepHamiltonian::qubit_block(&blocks[0], &sweep).expect("valid block generator");
    let psi0 = QuantumState::from_label(ham.labels().to_vec(), "--").expect("basis state");
    let cfg = PropagationConfig {
        tolerance: 1e-8,
        sample_count: 64,
        window: Some(sweep.time_range()),
        ..Default::default()
    };
    let r = propagate(&ham, &psi0, &cfg).expect("propagation");
    r.estimates[0].value
}

fn bench_alpha_scan(c: &mut Criterion) {
    let alphas = log_grid(0.5, 4.0, 24).expect("grid");
    let mut group = c.benchmark_group("alpha-scan");
    group.sample_size(10);

    group.bench_function("sequential", |b| {
        b.iter(|| run_indexed_sequential(alphas.len(), |i| crossing_at(black_box(alphas[i]))))
    });

    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        use lmsz_spin::scan::run_indexed_parallel;
        b.iter(|| run_indexed_parallel(alphas.len(), |i| crossing_at(black_box(alphas[i]))))
    });

    group.finish();
}

criterion_group!(benches, bench_alpha_scan);
criterion_main!(benches);
