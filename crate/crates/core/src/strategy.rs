//! Signal-to-weight construction for the six strategies, including the
//! monthly Sharpe-based selector between SI and SI+News.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::backtest::BacktestResult;
use crate::error::{Error, Result};
use crate::ingest::PriceTable;
use crate::metrics;
use crate::series::{align, DailySeries};
use crate::signal::SignalSeries;

/// The six strategies under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrategyId {
    LongOnly,
    Vix,
    Si,
    News,
    SiNews,
    DynamicSiNews,
}

impl StrategyId {
    pub const ALL: [StrategyId; 6] = [
        StrategyId::LongOnly,
        StrategyId::Vix,
        StrategyId::Si,
        StrategyId::News,
        StrategyId::SiNews,
        StrategyId::DynamicSiNews,
    ];

    /// Row label used in the performance tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            StrategyId::LongOnly => "Long Only",
            StrategyId::Vix => "VIX",
            StrategyId::Si => "SI",
            StrategyId::News => "News",
            StrategyId::SiNews => "SI+News",
            StrategyId::DynamicSiNews => "Dynamic SI+News",
        }
    }

    /// Stable identifier used in file names, config and CSV.
    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyId::LongOnly => "LongOnly",
            StrategyId::Vix => "VIX",
            StrategyId::Si => "SI",
            StrategyId::News => "News",
            StrategyId::SiNews => "SINews",
            StrategyId::DynamicSiNews => "DynamicSINews",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StrategyId::ALL
            .iter()
            .find(|id| id.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown strategy '{s}'"))
    }
}

/// Calendar-aligned portfolio weights in [0, 1], one column per asset.
/// Warm-up dates are absent, never zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSeries {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl WeightSeries {
    pub fn new(dates: Vec<NaiveDate>, assets: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if dates.is_empty() || assets.is_empty() || assets.len() != columns.len() {
            return Err(Error::InvalidParam("empty or mismatched weight series".into()));
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::UnsortedDates(pair[1]));
            }
        }
        for (asset, col) in assets.iter().zip(&columns) {
            if col.len() != dates.len() {
                return Err(Error::LengthMismatch {
                    dates: dates.len(),
                    values: col.len(),
                });
            }
            for &w in col {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::WeightRange {
                        asset: asset.clone(),
                        value: w,
                    });
                }
            }
        }
        Ok(Self {
            dates,
            assets,
            columns,
        })
    }

    pub fn from_single(asset: &str, series: &DailySeries) -> Result<Self> {
        Self::new(
            series.dates().to_vec(),
            vec![asset.to_string()],
            vec![series.values().to_vec()],
        )
    }

    /// Constant weight on every given date.
    pub fn constant(asset: &str, dates: Vec<NaiveDate>, weight: f64) -> Result<Self> {
        let n = dates.len();
        Self::new(dates, vec![asset.to_string()], vec![vec![weight; n]])
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Weight row at `date`, if present.
    pub fn row(&self, date: NaiveDate) -> Option<Vec<f64>> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.columns.iter().map(|c| c[i]).collect())
    }

    /// Total allocation (sum over assets) per date.
    pub fn total_allocation(&self) -> DailySeries {
        let values = (0..self.dates.len())
            .map(|i| self.columns.iter().map(|c| c[i]).sum())
            .collect();
        DailySeries::new(self.dates.clone(), values).expect("dates already validated")
    }

    pub fn truncate_at(&self, cutoff: NaiveDate) -> Option<WeightSeries> {
        let n = self.dates.partition_point(|d| *d <= cutoff);
        if n == 0 {
            return None;
        }
        Some(WeightSeries {
            dates: self.dates[..n].to_vec(),
            assets: self.assets.clone(),
            columns: self.columns.iter().map(|c| c[..n].to_vec()).collect(),
        })
    }
}

/// w_t = signal_{t-lag}: the signal computed at one close earns returns only
/// after `lag` further trading days, so nothing trades on same-day
/// information.
pub fn weights_from_signal(signal: &SignalSeries, lag: usize, asset: &str) -> Result<WeightSeries> {
    if lag == 0 {
        return Err(Error::InvalidParam("signal-to-weight lag must be >= 1".into()));
    }
    let s = signal.series();
    if s.len() <= lag {
        return Err(Error::EmptySeries(format!(
            "signal too short for lag {lag}"
        )));
    }
    let dates = s.dates()[lag..].to_vec();
    let values = s.values()[..s.len() - lag].to_vec();
    WeightSeries::new(dates, vec![asset.to_string()], vec![values])
}

/// w_t = appetite_{t-lag} * news_{t-lag}: the SI+News combination.
pub fn si_news_weights(
    si_appetite: &SignalSeries,
    news: &SignalSeries,
    lag: usize,
    asset: &str,
) -> Result<WeightSeries> {
    if lag == 0 {
        return Err(Error::InvalidParam("signal-to-weight lag must be >= 1".into()));
    }
    let aligned = align(&[
        ("si_appetite", si_appetite.series()),
        ("news", news.series()),
    ])?;
    let product: Vec<f64> = aligned[0]
        .values()
        .iter()
        .zip(aligned[1].values())
        .map(|(a, b)| a * b)
        .collect();
    let dates = aligned[0].dates();
    if dates.len() <= lag {
        return Err(Error::EmptySeries(format!(
            "combined signal too short for lag {lag}"
        )));
    }
    WeightSeries::new(
        dates[lag..].to_vec(),
        vec![asset.to_string()],
        vec![product[..product.len() - lag].to_vec()],
    )
}

/// Daily-rebalanced equal-weight basket: per-date mean of the member
/// markets' simple returns.
pub fn equal_weight_basket_returns(markets: &PriceTable) -> Result<DailySeries> {
    if markets.len() < 2 {
        return Err(Error::InvalidParam(
            "basket needs at least 2 markets".into(),
        ));
    }
    let named: Vec<(&str, &DailySeries)> = markets.markets().collect();
    let aligned = align(&named)?;
    let returns: Vec<DailySeries> = aligned
        .iter()
        .map(|s| s.simple_returns())
        .collect::<Result<_>>()?;
    let dates = returns[0].dates().to_vec();
    let n_markets = returns.len() as f64;
    let values = (0..dates.len())
        .map(|i| returns.iter().map(|r| r.values()[i]).sum::<f64>() / n_markets)
        .collect();
    DailySeries::new(dates, values)
}

/// One monthly selector decision: the trailing Sharpe of each candidate at a
/// month end and the strategy chosen for the following month.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEntry {
    pub month_end: NaiveDate,
    pub sharpe_si: Option<f64>,
    pub sharpe_si_news: Option<f64>,
    pub selected: StrategyId,
}

/// Every decision the selector made, in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionLog {
    pub entries: Vec<SelectionEntry>,
}

impl SelectionLog {
    /// CSV in the shape `month,sharpe_si,sharpe_si_news,selected`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("month,sharpe_si,sharpe_si_news,selected\n");
        for e in &self.entries {
            let fmt_opt = |v: Option<f64>| match v {
                Some(x) => format!("{x:.6}"),
                None => String::new(),
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.month_end.format("%Y-%m"),
                fmt_opt(e.sharpe_si),
                fmt_opt(e.sharpe_si_news),
                e.selected.as_str()
            ));
        }
        out
    }
}

/// The bare selection rule: given the (Sharpe SI, Sharpe SI+News) pair
/// observed at consecutive month ends, return the strategy applied in each
/// following month. Higher Sharpe wins; a tie (or missing Sharpe) retains
/// the previous selection, starting from SI.
pub fn apply_selection_rule(pairs: &[(f64, f64)]) -> Vec<StrategyId> {
    let mut selected = StrategyId::Si;
    pairs
        .iter()
        .map(|&(si, si_news)| {
            if si > si_news {
                selected = StrategyId::Si;
            } else if si_news > si {
                selected = StrategyId::SiNews;
            }
            selected
        })
        .collect()
}

/// Monthly selection between the SI and SI+News candidates.
///
/// At each month end the trailing `window` daily net-of-cost returns of each
/// candidate are turned into a Sharpe ratio and the winner's weights are
/// copied for the whole following month. Until `window` observations exist
/// the SI candidate is held.
pub fn dynamic_selector(
    bt_si: &BacktestResult,
    bt_si_news: &BacktestResult,
    window: usize,
    annualization: f64,
) -> Result<(WeightSeries, SelectionLog)> {
    if bt_si.values.dates() != bt_si_news.values.dates() {
        return Err(Error::CalendarMismatch);
    }
    if bt_si.weights_applied.assets() != bt_si_news.weights_applied.assets() {
        return Err(Error::CalendarMismatch);
    }
    let dates = bt_si.values.dates();
    let ret_si = bt_si.daily_returns.values();
    let ret_sn = bt_si_news.daily_returns.values();

    let trailing_sharpe = |rets: &[f64], end: usize| -> Option<f64> {
        if end + 1 < window {
            return None;
        }
        metrics::sharpe(&rets[end + 1 - window..=end], 0.0, annualization)
    };

    let mut log = SelectionLog::default();
    let mut current = StrategyId::Si;
    let mut selections: Vec<StrategyId> = Vec::with_capacity(dates.len());
    for i in 0..dates.len() {
        selections.push(current);
        let month_end = i + 1 == dates.len()
            || (dates[i + 1].year(), dates[i + 1].month()) != (dates[i].year(), dates[i].month());
        if month_end {
            let s_si = trailing_sharpe(ret_si, i);
            let s_sn = trailing_sharpe(ret_sn, i);
            match (s_si, s_sn) {
                (Some(a), Some(b)) => {
                    if a > b {
                        current = StrategyId::Si;
                    } else if b > a {
                        current = StrategyId::SiNews;
                    }
                    // tie retains the previous selection
                }
                _ => {} // warm-up or undefined Sharpe: hold the SI default
            }
            log.entries.push(SelectionEntry {
                month_end: dates[i],
                sharpe_si: s_si,
                sharpe_si_news: s_sn,
                selected: current,
            });
        }
    }

    let assets = bt_si.weights_applied.assets().to_vec();
    let mut columns = vec![Vec::with_capacity(dates.len()); assets.len()];
    for (i, &date) in dates.iter().enumerate() {
        let source = match selections[i] {
            StrategyId::Si => &bt_si.weights_applied,
            _ => &bt_si_news.weights_applied,
        };
        let row = source.row(date).ok_or(Error::CalendarMismatch)?;
        for (col, w) in columns.iter_mut().zip(row) {
            col.push(w);
        }
    }
    let weights = WeightSeries::new(dates.to_vec(), assets, columns)?;
    Ok((weights, log))
}

/// Share of months each strategy was selected, summing to 1.
pub fn selection_frequency(log: &SelectionLog) -> Result<BTreeMap<StrategyId, f64>> {
    if log.entries.is_empty() {
        return Err(Error::EmptySeries("selection log".into()));
    }
    let mut counts: BTreeMap<StrategyId, usize> = BTreeMap::new();
    counts.insert(StrategyId::Si, 0);
    counts.insert(StrategyId::SiNews, 0);
    for e in &log.entries {
        *counts.entry(e.selected).or_insert(0) += 1;
    }
    let total = log.entries.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(k, v)| (k, v as f64 / total))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SignalKind;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn dates_from(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
        (0..n).map(|i| start + chrono::Days::new(i as u64)).collect()
    }

    fn binary_signal(values: Vec<f64>) -> SignalSeries {
        SignalSeries::new(
            SignalKind::Binary,
            DailySeries::new(dates_from(d(2020, 1, 1), values.len()), values).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn weights_shift_by_lag() {
        let sig = binary_signal(vec![0.0, 0.0, 1.0, 1.0, 0.0]);
        let w = weights_from_signal(&sig, 1, "SP500").unwrap();
        assert_eq!(w.dates(), &dates_from(d(2020, 1, 2), 4)[..]);
        assert_eq!(w.columns()[0], vec![0.0, 0.0, 1.0, 1.0]);
        // flip at index 2 shows up in weights one day later
        assert_eq!(w.row(d(2020, 1, 3)).unwrap(), vec![0.0]);
        assert_eq!(w.row(d(2020, 1, 4)).unwrap(), vec![1.0]);
    }

    #[test]
    fn weights_shift_matches_elementwise_oracle() {
        let values: Vec<f64> = (0..60).map(|i| ((i * 31 + 7) % 2) as f64).collect();
        let sig = binary_signal(values.clone());
        for lag in 1..=3usize {
            let w = weights_from_signal(&sig, lag, "X").unwrap();
            for (i, &date) in w.dates().iter().enumerate() {
                assert_eq!(w.row(date).unwrap()[0], values[i]);
            }
            assert_eq!(w.len(), values.len() - lag);
        }
    }

    #[test]
    fn si_news_product() {
        let news = binary_signal(vec![0.0, 1.0, 1.0, 0.0, 1.0]);
        let appetite = SignalSeries::new(
            SignalKind::OpenUnit,
            DailySeries::new(dates_from(d(2020, 1, 1), 5), vec![0.7; 5]).unwrap(),
        )
        .unwrap();
        let w = si_news_weights(&appetite, &news, 1, "X").unwrap();
        // product [0, .7, .7, 0, .7] shifted by one
        assert_eq!(w.columns()[0], vec![0.0, 0.7, 0.7, 0.0]);
    }

    #[test]
    fn si_news_random_matches_elementwise_oracle() {
        let n = 80;
        let news_vals: Vec<f64> = (0..n).map(|i| ((i * 17 + 3) % 2) as f64).collect();
        let app_vals: Vec<f64> = (0..n).map(|i| 0.05 + 0.9 * ((i * 29 + 11) % 97) as f64 / 97.0).collect();
        let news = binary_signal(news_vals.clone());
        let appetite = SignalSeries::new(
            SignalKind::OpenUnit,
            DailySeries::new(dates_from(d(2020, 1, 1), n), app_vals.clone()).unwrap(),
        )
        .unwrap();
        let w = si_news_weights(&appetite, &news, 1, "X").unwrap();
        for i in 0..n - 1 {
            assert!((w.columns()[0][i] - news_vals[i] * app_vals[i]).abs() < 1e-15);
        }
    }

    fn price_table(levels: Vec<(&str, Vec<f64>)>) -> PriceTable {
        let mut map = std::collections::BTreeMap::new();
        for (id, vals) in levels {
            map.insert(
                id.to_string(),
                DailySeries::new(dates_from(d(2020, 1, 1), vals.len()), vals).unwrap(),
            );
        }
        PriceTable::new(map).unwrap()
    }

    #[test]
    fn basket_identical_markets() {
        let table = price_table(vec![
            ("A", vec![100.0, 101.0, 99.0]),
            ("B", vec![200.0, 202.0, 198.0]),
        ]);
        let basket = equal_weight_basket_returns(&table).unwrap();
        let a = table.get("A").unwrap().simple_returns().unwrap();
        for (i, (_, r)) in basket.iter().enumerate() {
            assert!((r - a.values()[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn basket_cancellation() {
        let table = price_table(vec![
            ("A", vec![100.0, 101.0]),
            ("B", vec![100.0, 99.0]),
        ]);
        let basket = equal_weight_basket_returns(&table).unwrap();
        assert!(basket.values()[0].abs() < 1e-15);
    }

    #[test]
    fn basket_needs_two_markets() {
        let table = price_table(vec![("A", vec![100.0, 101.0])]);
        assert!(equal_weight_basket_returns(&table).is_err());
    }

    #[test]
    fn basket_matches_mean_of_returns_oracle() {
        let n = 100;
        let walk = |seed: u64, t: usize| {
            let mut level = 100.0;
            let mut x = seed;
            for _ in 0..t {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1);
                level *= 1.0 + (((x >> 33) as f64 / (1u64 << 31) as f64) - 0.5) * 0.02;
            }
            level
        };
        let table = price_table(
            (0..6)
                .map(|m| {
                    let vals: Vec<f64> = (0..n).map(|t| walk(m as u64 + 1, t)).collect();
                    (["A", "B", "C", "D", "E", "F"][m], vals)
                })
                .collect(),
        );
        let basket = equal_weight_basket_returns(&table).unwrap();
        for (i, (_, got)) in basket.iter().enumerate() {
            let mut sum = 0.0;
            for m in 0..6u64 {
                let p0 = walk(m + 1, i);
                let p1 = walk(m + 1, i + 1);
                sum += p1 / p0 - 1.0;
            }
            assert!((got - sum / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn selection_rule_reproduces_documented_pattern() {
        // month-end pairs Dec..Apr, applied selections Jan..May
        let pairs = [(0.4, 0.9), (-0.1, 0.7), (0.2, 0.5), (0.5, 0.1), (1.2, 0.6)];
        let applied = apply_selection_rule(&pairs);
        assert_eq!(
            applied,
            vec![
                StrategyId::SiNews,
                StrategyId::SiNews,
                StrategyId::SiNews,
                StrategyId::Si,
                StrategyId::Si,
            ]
        );
    }

    #[test]
    fn selection_rule_tie_retains_previous() {
        let applied = apply_selection_rule(&[(0.1, 0.5), (0.3, 0.3), (0.7, 0.2), (0.4, 0.4)]);
        assert_eq!(
            applied,
            vec![
                StrategyId::SiNews,
                StrategyId::SiNews,
                StrategyId::Si,
                StrategyId::Si
            ]
        );
        // all ties from the start: SI throughout
        let applied = apply_selection_rule(&[(0.2, 0.2), (0.0, 0.0)]);
        assert_eq!(applied, vec![StrategyId::Si, StrategyId::Si]);
    }

    #[test]
    fn selection_frequency_cases() {
        let mk_log = |n_si: usize, n_sn: usize| SelectionLog {
            entries: (0..n_si + n_sn)
                .map(|i| SelectionEntry {
                    month_end: d(2020, 1, 1) + chrono::Months::new(i as u32),
                    sharpe_si: Some(0.0),
                    sharpe_si_news: Some(0.0),
                    selected: if i < n_si {
                        StrategyId::Si
                    } else {
                        StrategyId::SiNews
                    },
                })
                .collect(),
        };
        let f = selection_frequency(&mk_log(10, 0)).unwrap();
        assert_eq!(f[&StrategyId::Si], 1.0);
        assert_eq!(f[&StrategyId::SiNews], 0.0);

        let f = selection_frequency(&mk_log(71, 29)).unwrap();
        assert_eq!(f[&StrategyId::Si], 0.71);
        assert_eq!(f[&StrategyId::SiNews], 0.29);

        let f = selection_frequency(&mk_log(13, 37)).unwrap();
        assert!((f[&StrategyId::Si] - 13.0 / 50.0).abs() < 1e-15);
        assert!((f[&StrategyId::SiNews] - 37.0 / 50.0).abs() < 1e-15);
        assert!((f.values().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
