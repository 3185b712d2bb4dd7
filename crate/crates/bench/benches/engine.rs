//! Benchmarks for the hot paths: rolling statistics, the stress pipeline
//! and the backtest recursion.

use chrono::NaiveDate;
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riskon_core::backtest::{run_backtest, CostModel};
use riskon_core::fixtures::{generate, FixtureSpec};
use riskon_core::series::{rolling_mean, rolling_zscore, DailySeries, RollingParams};
use riskon_core::signal::{stress_index_pipeline, StressIndexParams};
use riskon_core::strategy::WeightSeries;

fn daily(n: usize, seed: u64) -> DailySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2005, 1, 3).unwrap();
    let dates = (0..n as u64).map(|i| start + chrono::Days::new(i)).collect();
    let values = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    DailySeries::new(dates, values).unwrap()
}

fn bench_rolling(c: &mut Criterion) {
    let s = daily(5000, 1);
    let params = RollingParams {
        window: 250,
        min_obs: 250,
    };
    c.bench_function("rolling_mean_5000x250", |b| {
        b.iter(|| rolling_mean(black_box(&s), &params).unwrap())
    });
    c.bench_function("rolling_zscore_5000x250", |b| {
        b.iter(|| rolling_zscore(black_box(&s), &params).unwrap())
    });
}

fn bench_stress(c: &mut Criterion) {
    let data = generate(&FixtureSpec {
        n_days: 2500,
        ..Default::default()
    })
    .unwrap();
    let risk = data.risk.forward_fill(5).unwrap();
    let params = StressIndexParams::default();
    c.bench_function("stress_index_2500d_16f", |b| {
        b.iter(|| stress_index_pipeline(black_box(&risk), &params).unwrap())
    });
}

fn bench_backtest(c: &mut Criterion) {
    let rets = daily(5000, 2).map(|v| v * 0.02);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let weights = WeightSeries::new(
        rets.dates().to_vec(),
        vec!["A".into()],
        vec![(0..rets.len()).map(|_| rng.gen::<f64>()).collect()],
    )
    .unwrap();
    let cost = CostModel::default();
    c.bench_function("backtest_5000d", |b| {
        b.iter(|| run_backtest(black_box(&weights), &[("A", &rets)], &cost).unwrap())
    });
}

criterion_group!(benches, bench_rolling, bench_stress, bench_backtest);
criterion_main!(benches);
