use chamberflow_bench::{bundled_direction_family, bundled_plan};
use chamberflow_core::bundled::{sl3_alphabet, H_WORD};
use chamberflow_core::dense_subgroup::{nonneg_integer_approx, ApproxOptions};
use chamberflow_core::limit_cone::{sample_cone, ConeKind};
use chamberflow_core::mixing_witness::{WitnessOptions, WitnessPlan};
use chamberflow_core::schottky::{alternating_words, empirical_c};
use chamberflow_core::{CartanVector, Word};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn cone(c: &mut Criterion) {
    let base = sl3_alphabet();
    let mut group = c.benchmark_group("sample_cone");
    for depth in [3usize, 5] {
        group.bench_function(format!("jordan_depth{depth}"), |b| b.iter(|| sample_cone(&base, depth, ConeKind::Jordan).unwrap()));
    }
    group.finish();
}

fn estimates(c: &mut Criterion) {
    let df = bundled_direction_family();
    let words = alternating_words(df.family.len(), 50, 8, 3, 0);
    c.bench_function("empirical_c_50_words", |b| b.iter(|| empirical_c(&df.family, black_box(&words)).unwrap()));
}

fn witnesses(c: &mut Criterion) {
    let plan = bundled_plan();
    let x = CartanVector::zeros(3);
    let t = plan.t_min(&x).unwrap().ceil();
    let mut group = c.benchmark_group("witness");
    group.sample_size(10);
    group.bench_function("integer_search", |b| {
        let mut target = vec![0.37, -0.21];
        for l in &plan.ls {
            target.iter_mut().zip(l).for_each(|(y, v)| *y += 20.0 * v);
        }
        b.iter(|| nonneg_integer_approx(&plan.ls, black_box(&target), plan.eta / 2.0, &ApproxOptions::default()).ok())
    });
    for k in [0.0, 5.0, 10.0] {
        group.bench_function(format!("at_t_min_plus_{k}"), |b| b.iter(|| plan.witness(&x, black_box(t + k)).unwrap()));
    }
    let df = bundled_direction_family();
    let h = Word::parse(H_WORD, 3).unwrap();
    group.bench_function("prepare_plan", |b| b.iter(|| WitnessPlan::prepare(&df, &h, &WitnessOptions::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, cone, estimates, witnesses);
criterion_main!(benches);
