use std::hint::black_box;

use cellnet::channel::SystemParams;
use cellnet::geometry::{LayoutKind, PolarPoint};
use cellnet::interference::intercell_moment_mc;
use cellnet::parallel::Execution;
use cellnet::rate_sim::{average_rate, DrawCounts};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn rates(c: &mut Criterion) {
    let cases = [
        ("da_single_user_L64", LayoutKind::Da, SystemParams::with_snr_db(4.0, 10.0, 1, 64, 2).unwrap()),
        ("da_bd_L64_K32", LayoutKind::Da, SystemParams::with_snr_db(4.0, 10.0, 32, 64, 2).unwrap()),
        ("small_cell_L100_K20", LayoutKind::SmallCell, SystemParams::with_snr_db(4.0, 10.0, 20, 100, 2).unwrap()),
    ];
    let draws = DrawCounts::new(20, 8, 2).unwrap();
    let mut g = c.benchmark_group("average_rate");
    g.sample_size(10);
    for (name, kind, params) in cases {
        for (mode, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, mode), &params, |b, p| {
                b.iter(|| average_rate(kind, black_box(p), draws, 1, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn interference(c: &mut Criterion) {
    let params = SystemParams::new(4.0, 10.0, 1, 4, 2).unwrap();
    let mut g = c.benchmark_group("intercell_moment_mc");
    g.sample_size(10);
    for (mode, exec) in MODES {
        g.bench_function(mode, |b| {
            b.iter(|| intercell_moment_mc(PolarPoint::ORIGIN, 1, black_box(&params), 50_000, 1, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, rates, interference);
criterion_main!(benches);
