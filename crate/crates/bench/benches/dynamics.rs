use asi_sim::dynamics::{evolve_lindblad, evolve_schrodinger, Hamiltonian, LindbladModel};
use asi_sim::floquet::kappa_t0;
use asi_sim::operator::C64;
use asi_sim::units::{mhz, ns};
use asi_sim_bench::*;
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

fn hamiltonian_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply");
    for (n, fock) in [(3, 3), (5, 4)] {
        let h = lab_frame(n, fock);
        let x = first_excited(&h);
        let mut out = vec![C64::new(0.0, 0.0); h.space().dim()];
        group.bench_function(format!("lab_{n}q_fock{fock}"), |b| {
            b.iter(|| h.apply_add(black_box(12.5e-9), C64::new(0.0, -1.0), x.amplitudes().as_slice(), &mut out))
        });
    }
    group.finish();
}

fn schrodinger(c: &mut Criterion) {
    let mut group = c.benchmark_group("schrodinger");
    group.sample_size(10);
    let t0 = kappa_t0(mhz(G_MHZ), DELTA_MHZ / NU_MHZ, mhz(NU_MHZ)).t0;
    let cfg = integration();

    let eff = effective(3);
    let psi = first_excited(&eff);
    let g = grid(3.0 * t0, 301);
    group.bench_function("effective_3q_3t0", |b| b.iter(|| evolve_schrodinger(&eff, &psi, &g, &cfg).unwrap()));

    let lab = lab_frame(3, 3);
    let psi = first_excited(&lab);
    let g = grid(t0, 51);
    group.bench_function("lab_3q_t0", |b| b.iter(|| evolve_schrodinger(&lab, &psi, &g, &cfg).unwrap()));
    group.finish();
}

fn lindblad(c: &mut Criterion) {
    let mut group = c.benchmark_group("lindblad");
    group.sample_size(10);
    let lab = lab_frame(2, 3);
    let model = LindbladModel { relaxation: vec![1.0 / 20e-6; 2], dephasing: vec![1.0 / 10e-6; 2], ..LindbladModel::closed(2) };
    let g = grid(ns(100.0), 11);
    let cfg = integration();
    group.bench_function("lab_2q_100ns", |b| {
        b.iter_batched(|| first_excited_density(&lab), |rho| evolve_lindblad(&lab, &rho, &g, &model, &cfg).unwrap(), BatchSize::SmallInput)
    });
    group.finish();
}

criterion_group!(benches, hamiltonian_apply, schrodinger, lindblad);
criterion_main!(benches);
