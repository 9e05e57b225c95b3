//! Throughput of the per-stage solver phases: residual assembly, the
//! reconstructed-flux solves, the subcell FV update, and a full corrected
//! stage, at a production-like order and a high order.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use dgfv_bench::fixture;
use dgfv_core::correction::detect;
use dgfv_core::presets::Preset;
use dgfv_core::residual::{
    assemble_residual, fv_update_subcell, ledger_face_values, solve_all_reconstructed, VolumeFlux,
};
use dgfv_core::stepper::{cfl_timestep, euler_stage, global_wavespeed, StepContext};

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_residual");
    for (label, k) in [("k2", 2usize), ("k5", 5usize)] {
        let (disc, state, _) = fixture(Preset::AdvectionSine, k, 6);
        let gamma = global_wavespeed(&disc, &state.submeans);
        group.bench_function(format!("advection_144c_{label}"), |b| {
            b.iter(|| {
                black_box(assemble_residual(
                    &disc,
                    black_box(&state.moments),
                    gamma,
                    VolumeFlux::Exact,
                ))
            })
        });
    }
    let (disc, state, _) = fixture(Preset::Sod, 2, 12);
    let gamma = global_wavespeed(&disc, &state.submeans);
    group.bench_function("euler_230c_k2", |b| {
        b.iter(|| {
            black_box(assemble_residual(&disc, black_box(&state.moments), gamma, VolumeFlux::Exact))
        })
    });
    group.finish();
}

fn bench_flux_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("reconstructed_flux_solve");
    for (label, k) in [("k2", 2usize), ("k5", 5usize)] {
        let (disc, state, _) = fixture(Preset::AdvectionSine, k, 6);
        let gamma = global_wavespeed(&disc, &state.submeans);
        let (phi, ledger) = assemble_residual(&disc, &state.moments, gamma, VolumeFlux::Exact);
        group.bench_function(format!("advection_144c_{label}"), |b| {
            b.iter_batched(
                || ledger.clone(),
                |mut fresh| {
                    solve_all_reconstructed(&disc, black_box(&phi), &mut fresh).unwrap();
                    fresh
                },
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_fv_update(c: &mut Criterion) {
    let (disc, state, _) = fixture(Preset::AdvectionSine, 2, 6);
    let gamma = global_wavespeed(&disc, &state.submeans);
    let (phi, mut ledger) = assemble_residual(&disc, &state.moments, gamma, VolumeFlux::Exact);
    solve_all_reconstructed(&disc, &phi, &mut ledger).unwrap();
    let values = ledger_face_values(&disc, &ledger);
    let dt = 1e-4;
    c.bench_function("fv_update_all_subcells_144c_k2", |b| {
        b.iter_batched(
            || state.submeans.clone(),
            |mut sub| {
                for s in 0..disc.conn.n_subcells() {
                    fv_update_subcell(&disc, &state.submeans, black_box(&values), dt, s, &mut sub);
                }
                sub
            },
            criterion::BatchSize::SmallInput,
        )
    });
}

fn bench_detection(c: &mut Criterion) {
    let (disc, state, cfg) = fixture(Preset::AdvectionCrenel, 3, 6);
    c.bench_function("detect_crenel_144c_k3", |b| {
        b.iter(|| {
            black_box(detect(
                &disc,
                &cfg.detection,
                black_box(&state.submeans),
                black_box(&state.moments),
                black_box(&state.submeans),
            ))
        })
    });
}

fn bench_full_stage(c: &mut Criterion) {
    let mut group = c.benchmark_group("corrected_stage");
    group.sample_size(20);
    for (label, preset, k, n) in [
        ("crenel_144c_k3", Preset::AdvectionCrenel, 3usize, 6usize),
        ("sod_230c_k2", Preset::Sod, 2, 12),
    ] {
        let (disc, state, correction) = fixture(preset, k, n);
        let ctx = StepContext {
            disc: &disc,
            volume_flux: VolumeFlux::Exact,
            correction,
            cfl: 0.95,
            dt_cap: None,
        };
        let dt = cfl_timestep(&ctx, &state.submeans, f64::INFINITY).unwrap();
        let mut moments_out = state.moments.clone();
        let mut submeans_out = state.submeans.clone();
        group.bench_function(label, |b| {
            b.iter(|| {
                euler_stage(
                    &ctx,
                    black_box(&state.moments),
                    black_box(&state.submeans),
                    dt,
                    &mut moments_out,
                    &mut submeans_out,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_assembly,
    bench_flux_solve,
    bench_fv_update,
    bench_detection,
    bench_full_stage
);
criterion_main!(benches);
