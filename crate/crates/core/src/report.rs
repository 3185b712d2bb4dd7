//! Configuration-driven experiment runner: loads and validates all inputs,
//! computes every (universe, strategy) cell of the matrix in memory, then
//! writes result files, per-universe tables, plot data and a manifest.
//!
//! The run is fail-fast: nothing is written until every experiment has
//! computed, so a failed run never leaves a partial output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::backtest::{rescale_to_target_vol, run_backtest, BacktestResult, CostModel};
use crate::config::{Config, Universe};
use crate::error::{Error, Result};
use crate::ingest::{
    load_price_csv, load_risk_csv, load_sentiment_csv, LexiconScorer, PriceTable,
    RiskFactorTable, SentimentDay,
};
use crate::metrics::perf_table;
use crate::series::{align, DailySeries};
use crate::signal::{
    news_signal_pipeline, si_risk_appetite, stress_index_pipeline, vix_signal, SignalSeries,
};
use crate::strategy::{
    dynamic_selector, equal_weight_basket_returns, si_news_weights, weights_from_signal,
    SelectionLog, StrategyId, WeightSeries,
};

/// Which (universe, strategy) cells to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentMatrix {
    pub universes: Vec<Universe>,
    pub strategies: Vec<StrategyId>,
    pub config: Config,
}

impl ExperimentMatrix {
    /// Build from a config, optionally narrowing to subsets of universes or
    /// strategies.
    pub fn new(
        config: Config,
        universes: Option<Vec<Universe>>,
        strategies: Option<Vec<StrategyId>>,
    ) -> Result<Self> {
        let universes = universes.unwrap_or_else(|| config.universes.clone());
        let strategies = strategies.unwrap_or_else(|| config.strategies.clone());
        if universes.is_empty() || strategies.is_empty() {
            return Err(Error::Config("empty experiment matrix".into()));
        }
        Ok(Self {
            universes,
            strategies,
            config,
        })
    }
}

/// Reproducibility record written last: outputs are a function of (config,
/// inputs), and the digests pin the inputs.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub config: Config,
    /// sha256 of each input file, recorded before any computation.
    pub input_digests: BTreeMap<String, String>,
    /// Output files relative to the run directory.
    pub outputs: Vec<String>,
}

/// All loaded inputs and derived signals, shared across the matrix.
pub struct PreparedData {
    pub prices: PriceTable,
    pub risk: RiskFactorTable,
    pub sentiment: Vec<SentimentDay>,
    pub news: SignalSeries,
    pub stress: SignalSeries,
    pub si_appetite: SignalSeries,
    pub vix: SignalSeries,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Load every input file and compute the three signals.
pub fn prepare(config: &Config, data_dir: &Path) -> Result<PreparedData> {
    let prices = load_price_csv(&data_dir.join(&config.files.prices))?;
    let risk_raw = load_risk_csv(&data_dir.join(&config.files.risk))?;
    let sentiment = load_sentiment_csv(
        &data_dir.join(&config.files.sentiment),
        &LexiconScorer,
        config.headline_budget,
    )?;

    let risk = risk_raw.forward_fill(config.risk_ffill_limit)?;
    let news = news_signal_pipeline(&sentiment, &config.news)?;
    let stress = stress_index_pipeline(&risk, &config.stress)?.signal;
    let si_appetite = si_risk_appetite(&stress, config.si_mapping)?;
    let vix_series = risk
        .get(&config.vix.factor_id)
        .ok_or_else(|| Error::Validation {
            path: config.files.risk.clone(),
            msg: format!("no risk factor '{}' for the VIX signal", config.vix.factor_id),
        })?
        .series
        .clone();
    let vix = vix_signal(&vix_series, config.vix.quantile, config.vix.min_obs)?;

    Ok(PreparedData {
        prices,
        risk,
        sentiment,
        news,
        stress,
        si_appetite,
        vix,
    })
}

/// Returns and asset label for one universe.
pub fn universe_returns(config: &Config, data: &PreparedData, universe: Universe) -> Result<(String, DailySeries)> {
    match universe {
        Universe::Sp500 | Universe::Nasdaq => {
            let id = universe.as_str();
            let series = data.prices.get(id).ok_or_else(|| Error::Validation {
                path: config.files.prices.clone(),
                msg: format!("market '{id}' missing from price table"),
            })?;
            Ok((id.to_string(), series.simple_returns()?))
        }
        Universe::World6 => {
            let mut subset = BTreeMap::new();
            for id in &config.world6_markets {
                let series = data.prices.get(id).ok_or_else(|| Error::Validation {
                    path: config.files.prices.clone(),
                    msg: format!("basket market '{id}' missing from price table"),
                })?;
                subset.insert(id.clone(), series.clone());
            }
            let basket = equal_weight_basket_returns(&PriceTable::new(subset)?)?;
            Ok(("WORLD6".to_string(), basket))
        }
    }
}

fn clip_weights(w: WeightSeries, start: Option<chrono::NaiveDate>) -> Result<WeightSeries> {
    let Some(start) = start else { return Ok(w) };
    let idx = w.dates().partition_point(|d| *d < start);
    if idx == w.len() {
        return Err(Error::Validation {
            path: "start_date".into(),
            msg: format!("no weights on or after {start}"),
        });
    }
    WeightSeries::new(
        w.dates()[idx..].to_vec(),
        w.assets().to_vec(),
        w.columns().iter().map(|c| c[idx..].to_vec()).collect(),
    )
}

/// Restrict two weight series to their common dates so candidate backtests
/// share one calendar.
fn intersect_weights(a: &WeightSeries, b: &WeightSeries) -> Result<(WeightSeries, WeightSeries)> {
    let common: Vec<chrono::NaiveDate> = a
        .dates()
        .iter()
        .copied()
        .filter(|d| b.row(*d).is_some())
        .collect();
    if common.is_empty() {
        return Err(Error::EmptyIntersection {
            names: vec!["SI weights".into(), "SI+News weights".into()],
        });
    }
    let pick = |w: &WeightSeries| -> Result<WeightSeries> {
        let mut columns = vec![Vec::with_capacity(common.len()); w.assets().len()];
        for &date in &common {
            for (col, v) in columns.iter_mut().zip(w.row(date).unwrap()) {
                col.push(v);
            }
        }
        WeightSeries::new(common.clone(), w.assets().to_vec(), columns)
    };
    Ok((pick(a)?, pick(b)?))
}

/// One computed experiment plus its optional selector log.
pub struct ExperimentOutput {
    pub universe: Universe,
    pub strategy: StrategyId,
    pub result: BacktestResult,
    pub selection_log: Option<SelectionLog>,
}

/// Compute one (universe, strategy) cell.
pub fn run_experiment(
    config: &Config,
    data: &PreparedData,
    universe: Universe,
    strategy: StrategyId,
) -> Result<ExperimentOutput> {
    let (asset, returns) = universe_returns(config, data, universe)?;
    let cost = CostModel {
        b: config.cost_rate,
        charge_initial_entry: config.charge_initial_entry,
    };
    let lag = config.signal_lag;

    let simple_weights = |signal: &SignalSeries| -> Result<WeightSeries> {
        clip_weights(weights_from_signal(signal, lag, &asset)?, config.start_date)
    };

    let mut selection_log = None;
    let weights = match strategy {
        StrategyId::LongOnly => clip_weights(
            WeightSeries::constant(&asset, returns.dates().to_vec(), 1.0)?,
            config.start_date,
        )?,
        StrategyId::Vix => simple_weights(&data.vix)?,
        StrategyId::Si => simple_weights(&data.si_appetite)?,
        StrategyId::News => simple_weights(&data.news)?,
        StrategyId::SiNews => clip_weights(
            si_news_weights(&data.si_appetite, &data.news, lag, &asset)?,
            config.start_date,
        )?,
        StrategyId::DynamicSiNews => {
            let w_si = simple_weights(&data.si_appetite)?;
            let w_sn = clip_weights(
                si_news_weights(&data.si_appetite, &data.news, lag, &asset)?,
                config.start_date,
            )?;
            let (w_si, w_sn) = intersect_weights(&w_si, &w_sn)?;
            let bt_si = run_backtest(&w_si, &[(asset.as_str(), &returns)], &cost)?;
            let bt_sn = run_backtest(&w_sn, &[(asset.as_str(), &returns)], &cost)?;
            let (weights, log) = dynamic_selector(
                &bt_si,
                &bt_sn,
                config.selector_window,
                config.annualization,
            )?;
            selection_log = Some(log);
            weights
        }
    };

    let result = run_backtest(&weights, &[(asset.as_str(), &returns)], &cost)?;
    Ok(ExperimentOutput {
        universe,
        strategy,
        result,
        selection_log,
    })
}

/// Strategy value path, vol-matched benchmark path and allocation, as one
/// plot-data CSV `date,strategy_value,benchmark_value,allocation`.
pub fn emit_benchmark_comparison(
    strategy_bt: &BacktestResult,
    benchmark_returns: &DailySeries,
    annualization: f64,
) -> Result<String> {
    let strat_vol = crate::metrics::annualized_vol(strategy_bt.daily_returns.values(), annualization)
        .ok_or(Error::ZeroVol)?;
    if strat_vol == 0.0 {
        return Err(Error::ZeroVol);
    }
    let aligned = align(&[
        ("strategy", &strategy_bt.daily_returns),
        ("benchmark", benchmark_returns),
    ])?;
    let bench = rescale_to_target_vol(&aligned[1], strat_vol, annualization)?;

    let alloc = strategy_bt.weights_applied.total_allocation();
    let base = strategy_bt
        .values
        .get(aligned[0].first_date())
        .expect("aligned dates come from the strategy");
    // re-base both paths to 1 at the first shared date
    let mut out = String::from("date,strategy_value,benchmark_value,allocation\n");
    let mut bench_value = 1.0;
    let mut first = true;
    for (date, bench_ret) in bench.iter() {
        if first {
            first = false;
        } else {
            bench_value *= 1.0 + bench_ret;
        }
        let strat_value = strategy_bt.values.get(date).unwrap() / base;
        let allocation = alloc.get(date).unwrap();
        out.push_str(&format!(
            "{date},{strat_value:.10},{bench_value:.10},{allocation:.10}\n"
        ));
    }
    Ok(out)
}

/// Run the whole matrix and write all outputs. Returns the manifest, which
/// is also written (last) as `manifest.json`.
pub fn run_matrix(matrix: &ExperimentMatrix, data_dir: &Path, out_dir: &Path) -> Result<RunManifest> {
    let config = &matrix.config;
    config.validate()?;

    // digests first, before any computation touches the data
    let mut input_digests = BTreeMap::new();
    for name in [&config.files.prices, &config.files.risk, &config.files.sentiment] {
        input_digests.insert(name.clone(), sha256_file(&data_dir.join(name))?);
    }

    let data = prepare(config, data_dir)?;

    // compute everything before writing anything
    let mut pending: Vec<(PathBuf, String)> = Vec::new();
    for &universe in &matrix.universes {
        let (_, returns) = universe_returns(config, &data, universe)?;
        let mut cell_results: Vec<(StrategyId, BacktestResult)> = Vec::new();
        let mut logs: Vec<SelectionLog> = Vec::new();
        for &strategy in &matrix.strategies {
            let out = run_experiment(config, &data, universe, strategy)?;
            if let Some(log) = out.selection_log {
                logs.push(log);
            }
            cell_results.push((strategy, out.result));
        }

        let udir = PathBuf::from(universe.as_str());
        for (strategy, result) in &cell_results {
            let mut csv = String::from("date,value,weight,cost,ret\n");
            let alloc = result.weights_applied.total_allocation();
            for (i, (date, value)) in result.values.iter().enumerate() {
                csv.push_str(&format!(
                    "{date},{value:.10},{:.10},{:.10},{:.10}\n",
                    alloc.values()[i],
                    result.cost_paid.values()[i],
                    result.daily_returns.values()[i],
                ));
            }
            pending.push((udir.join(format!("{strategy}.csv")), csv));

            let plot = emit_benchmark_comparison(result, &returns, config.annualization)?;
            pending.push((udir.join(format!("{strategy}_vs_benchmark.csv")), plot));
        }

        let refs: Vec<(StrategyId, &BacktestResult)> =
            cell_results.iter().map(|(s, r)| (*s, r)).collect();
        let table = perf_table(&refs, config.annualization)?;
        pending.push((udir.join("perf_table.csv"), table.to_csv_string()));
        pending.push((udir.join("perf_table.md"), table.to_markdown()));

        for log in logs {
            pending.push((udir.join("selection_log.csv"), log.to_csv_string()));
        }
    }

    // all computation succeeded; now write
    let mut outputs = Vec::new();
    for (rel, content) in &pending {
        let path = out_dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::Io {
                path: parent.display().to_string(),
                source: e,
            })?;
        }
        std::fs::write(&path, content).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        outputs.push(rel.display().to_string());
    }
    outputs.sort();

    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        input_digests,
        outputs,
    };
    let manifest_path = out_dir.join("manifest.json");
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )
    .map_err(|e| Error::Io {
        path: manifest_path.display().to_string(),
        source: e,
    })?;
    Ok(manifest)
}

/// Export the three raw signals as `date,value` CSVs into `out_dir`.
pub fn export_signals(config: &Config, data_dir: &Path, out_dir: &Path) -> Result<Vec<String>> {
    config.validate()?;
    let data = prepare(config, data_dir)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let mut written = Vec::new();
    for (name, signal) in [
        ("news_signal.csv", &data.news),
        ("stress_index.csv", &data.stress),
        ("vix_signal.csv", &data.vix),
    ] {
        let mut csv = String::from("date,value\n");
        for (date, value) in signal.series().iter() {
            csv.push_str(&format!("{date},{value:.10}\n"));
        }
        let path = out_dir.join(name);
        std::fs::write(&path, csv).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        written.push(name.to_string());
    }
    Ok(written)
}
