use apc_lab::dynamics::PropagationConfig;
use apc_lab::experiments::{epsilon_scaling_sweep, Lab};
use apc_lab::gef::{build_spectral_basis, resonance_scan};
use apc_lab::radial::{Channel, PotentialSpec, Shape, SwitchingProfile};
use apc_lab::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("serial", Exec::Serial), ("parallel", Exec::Parallel)];

fn lab(exec: Exec) -> Lab {
    Lab::calibrate(0.05, Channel::Plus, PotentialSpec::new(2.0, 0.5, Shape::SmoothBump).unwrap(), exec).unwrap()
}

fn eigenbasis(c: &mut Criterion) {
    let lab = lab(Exec::Serial);
    let grid = lab.grid_nodes(1024).unwrap();
    let op = lab.operator(&grid, 1.05).unwrap();
    let mut g = c.benchmark_group("eigenbasis_1024");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| build_spectral_basis(&op, exec).unwrap()));
    }
    g.finish();
}

fn k_scan(c: &mut Criterion) {
    let lab = lab(Exec::Serial);
    let k: Vec<f64> = (0..121).map(|j| 0.02 * 100f64.powf(j as f64 / 120.0)).collect();
    let mut g = c.benchmark_group("gef_k_scan");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| resonance_scan(lab.h, lab.channel, &lab.potential, 1.01, &k, exec).unwrap())
        });
    }
    g.finish();
}

fn eps_sweep(c: &mut Criterion) {
    let profile = SwitchingProfile::new(-1.0, 1.0, 1.5).unwrap();
    let eps = [0.125, 0.0625, 1.0 / 32.0, 1.0 / 64.0];
    let cfg = PropagationConfig::default();
    let mut g = c.benchmark_group("epsilon_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        let lab = lab(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| epsilon_scaling_sweep(&lab, &profile, &eps, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, eigenbasis, k_scan, eps_sweep);
criterion_main!(benches);
