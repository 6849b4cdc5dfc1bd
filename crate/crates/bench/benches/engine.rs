use std::hint::black_box;

use akg_core::diagnosis::{plausible_causes, ObservationContext};
use akg_core::scheduler::{brute_force_schedule, build_instance, schedule, SchedulePolicy};
use akg_core::{eligible_resources, fixtures, instantiate_run_at, load_turtle, serialize_turtle, validate, Iri};
use akg_testkit::gen::{random_graph, random_instance, GraphParams};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn ex(local: &str) -> Iri {
    Iri::new(format!("http://ex.org/{local}")).unwrap()
}

fn turtle(c: &mut Criterion) {
    let demo_text = fixtures::DEMO_TTL;
    let random = random_graph(&mut akg_testkit::rng(1), GraphParams::default());
    let random_text = serialize_turtle(&random);
    c.bench_function("ttl/parse_demo", |b| b.iter(|| load_turtle(black_box(demo_text)).unwrap()));
    c.bench_function("ttl/parse_random_200", |b| b.iter(|| load_turtle(black_box(&random_text)).unwrap()));
    c.bench_function("ttl/serialize_random_200", |b| b.iter(|| serialize_turtle(black_box(&random))));
}

fn analysis(c: &mut Criterion) {
    let g = fixtures::demo();
    c.bench_function("validate/demo", |b| b.iter(|| validate(black_box(&g))));
    c.bench_function("match/demo_unscrew", |b| b.iter(|| eligible_resources(black_box(&g), &ex("Unscrew")).unwrap()));
    let ctx = ObservationContext::new(ex("BatteryLate"));
    c.bench_function("diagnose/demo_battery_late", |b| b.iter(|| plausible_causes(black_box(&g), &ctx).unwrap()));
}

fn scheduling(c: &mut Criterion) {
    let mut g = fixtures::demo();
    let runs = instantiate_run_at(&mut g, &ex("BatteryPack"), 10, 0).unwrap();
    let demo10 = build_instance(&g, &runs).unwrap();
    c.bench_function("schedule/demo_10_runs_list", |b| b.iter(|| schedule(black_box(&demo10), &SchedulePolicy::default())));
    c.bench_function("schedule/demo_10_runs_improve", |b| b.iter(|| schedule(black_box(&demo10), &SchedulePolicy::improving())));

    let mut rng = akg_testkit::rng(2);
    let small: Vec<_> = (0..16).map(|_| random_instance(&mut rng, 8, 3)).collect();
    c.bench_function("schedule/brute_force_8_steps", |b| {
        b.iter_batched(|| small.clone(), |xs| xs.iter().map(|i| brute_force_schedule(i).unwrap().makespan_s).sum::<u64>(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, turtle, analysis, scheduling);
criterion_main!(benches);
