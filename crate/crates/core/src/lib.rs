//! Risk-on/risk-off backtesting engine.
//!
//! Daily market, risk-factor and news-sentiment inputs are turned into three
//! timing signals (a news tone signal, a cross-asset stress index and a VIX
//! percentile rule), mapped to long/flat or fractional equity weights, and
//! run through a transaction-cost-aware value recursion. A monthly selector
//! switches between the stress-index strategy and its news-filtered variant
//! on trailing Sharpe. The `report` module drives whole experiment matrices
//! from a JSON config and writes deterministic CSV outputs plus a manifest.

pub mod backtest;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod series;
pub mod signal;
pub mod strategy;

pub use backtest::{run_backtest, BacktestResult, CostModel};
pub use config::{Config, Universe};
pub use error::{Error, Result};
pub use ingest::{PriceTable, RiskFactorTable, StressCategory};
pub use metrics::{perf_stats, perf_table, PerfStats, PerfTable};
pub use report::{run_matrix, ExperimentMatrix, RunManifest};
pub use series::DailySeries;
pub use signal::{SignalKind, SignalSeries};
pub use strategy::{StrategyId, WeightSeries};
