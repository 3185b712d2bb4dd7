//! Performance statistics: Sharpe, Calmar, annualized volatility and
//! return, maximum drawdown, and the comparison table built from them.
//!
//! Undefined ratios (zero variance, zero drawdown) are reported as `None`,
//! never coerced to 0 or infinity. The risk-free rate defaults to 0.

use crate::backtest::{turnover, BacktestResult};
use crate::error::{Error, Result};
use crate::strategy::StrategyId;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    // a constant series must report exactly zero variance; the two-pass
    // formula leaves ~1e-17 residue when the mean is not representable
    if xs.iter().all(|x| *x == xs[0]) {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Sample std of daily returns scaled by the square root of the
/// annualization factor. `None` with fewer than 2 observations.
pub fn annualized_vol(daily_returns: &[f64], factor: f64) -> Option<f64> {
    if daily_returns.len() < 2 {
        return None;
    }
    Some(sample_std(daily_returns) * factor.sqrt())
}

/// Annualized Sharpe ratio over daily excess returns. `None` when the
/// variance is zero.
pub fn sharpe(daily_returns: &[f64], rf_daily: f64, factor: f64) -> Option<f64> {
    if daily_returns.len() < 2 {
        return None;
    }
    let excess: Vec<f64> = daily_returns.iter().map(|r| r - rf_daily).collect();
    let sd = sample_std(&excess);
    if sd == 0.0 {
        return None;
    }
    Some(mean(&excess) / sd * factor.sqrt())
}

/// Largest peak-to-trough fractional decline, running-peak O(n) scan.
pub fn max_drawdown(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySeries("drawdown input".into()));
    }
    if values.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidParam("drawdown needs positive values".into()));
    }
    let mut peak = values[0];
    let mut worst = 0.0f64;
    for &v in values {
        if v > peak {
            peak = v;
        }
        worst = worst.max(1.0 - v / peak);
    }
    Ok(worst)
}

/// Geometric annualized return `(S_T / S_0)^(factor / steps) - 1`, where a
/// step is one move between consecutive values.
pub fn annualized_return(values: &[f64], factor: f64) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let steps = (values.len() - 1) as f64;
    let total = values[values.len() - 1] / values[0];
    Some(total.powf(factor / steps) - 1.0)
}

/// Calmar ratio: geometric annualized return over maximum drawdown. `None`
/// when the path never draws down.
pub fn calmar(values: &[f64], factor: f64) -> Result<Option<f64>> {
    let dd = max_drawdown(values)?;
    if dd == 0.0 {
        return Ok(None);
    }
    Ok(annualized_return(values, factor).map(|r| r / dd))
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfStats {
    pub sharpe: Option<f64>,
    pub calmar: Option<f64>,
    pub vol: f64,
    pub max_dd: f64,
    pub ann_return: f64,
    pub turnover: Option<f64>,
}

/// Compute the stats of one backtest. The Long Only row carries no turnover
/// by convention (it holds forever).
pub fn perf_stats(id: StrategyId, result: &BacktestResult, factor: f64) -> Result<PerfStats> {
    let rets = result.daily_returns.values();
    let values = result.values.values();
    Ok(PerfStats {
        sharpe: sharpe(rets, 0.0, factor),
        calmar: calmar(values, factor)?,
        vol: annualized_vol(rets, factor).unwrap_or(0.0),
        max_dd: max_drawdown(values)?,
        ann_return: annualized_return(values, factor).unwrap_or(0.0),
        turnover: if id == StrategyId::LongOnly {
            None
        } else {
            Some(turnover(&result.weights_applied, factor)?)
        },
    })
}

/// The per-universe comparison table: one row per strategy, sorted by
/// Sharpe descending (ties and missing Sharpes fall back to the strategy
/// enum order).
#[derive(Debug, Clone, PartialEq)]
pub struct PerfTable {
    pub rows: Vec<(StrategyId, PerfStats)>,
}

pub fn perf_table(results: &[(StrategyId, &BacktestResult)], factor: f64) -> Result<PerfTable> {
    if results.is_empty() {
        return Err(Error::EmptySeries("perf table input".into()));
    }
    let mut rows: Vec<(StrategyId, PerfStats)> = results
        .iter()
        .map(|(id, bt)| perf_stats(*id, bt, factor).map(|s| (*id, s)))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        let sa = a.1.sharpe.unwrap_or(f64::NEG_INFINITY);
        let sb = b.1.sharpe.unwrap_or(f64::NEG_INFINITY);
        sb.partial_cmp(&sa)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    Ok(PerfTable { rows })
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) => format!("{x:.digits$}"),
        None => "n.a.".to_string(),
    }
}

impl PerfTable {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("Strategy,Sharpe,Calmar,Vol,Max DD,Turnover\n");
        for (id, s) in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.4},{:.4},{}\n",
                id.display_name(),
                fmt_opt(s.sharpe, 2),
                fmt_opt(s.calmar, 2),
                s.vol,
                s.max_dd,
                fmt_opt(s.turnover, 1),
            ));
        }
        out
    }

    /// Aligned-column markdown mirroring the published table layout.
    pub fn to_markdown(&self) -> String {
        let header = ["Strategy", "Sharpe", "Calmar", "Vol", "Max DD", "Turnover"];
        let mut cells: Vec<[String; 6]> = Vec::new();
        for (id, s) in &self.rows {
            cells.push([
                id.display_name().to_string(),
                fmt_opt(s.sharpe, 2),
                fmt_opt(s.calmar, 2),
                format!("{:.1}%", s.vol * 100.0),
                format!("{:.0}%", s.max_dd * 100.0),
                fmt_opt(s.turnover, 1),
            ]);
        }
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let fmt_row = |row: &[String]| {
            let cols: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            format!("| {} |\n", cols.join(" | "))
        };
        let mut out = fmt_row(&header.map(String::from));
        let sep: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&format!("|-{}-|\n", sep.join("-|-")));
        for row in &cells {
            out.push_str(&fmt_row(row));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vol_cases() {
        assert_eq!(annualized_vol(&[0.01; 10], 252.0), Some(0.0));
        // alternating +-1%: sample std converges to 0.01 on long series
        let alt: Vec<f64> = (0..10_000).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let vol = annualized_vol(&alt, 252.0).unwrap();
        assert!((vol - 0.01 * 252.0_f64.sqrt()).abs() < 1e-4);
        assert!((vol - 0.1587).abs() < 1e-3);
    }

    #[test]
    fn vol_matches_two_pass_oracle() {
        let rets: Vec<f64> = (0..500)
            .map(|i| (((i * 53 + 7) % 211) as f64 / 211.0 - 0.5) * 0.03)
            .collect();
        let got = annualized_vol(&rets, 252.0).unwrap();
        let m = rets.iter().sum::<f64>() / rets.len() as f64;
        let var = rets.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (rets.len() - 1) as f64;
        let expect = var.sqrt() * 252.0_f64.sqrt();
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn sharpe_cases() {
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
        assert!(sharpe(&alt, 0.0, 252.0).unwrap().abs() < 1e-12);
        // scale invariance
        let rets: Vec<f64> = (0..300)
            .map(|i| (((i * 31 + 3) % 97) as f64 / 97.0 - 0.45) * 0.02)
            .collect();
        let base = sharpe(&rets, 0.0, 252.0).unwrap();
        for k in [0.5, 2.0, 17.0] {
            let scaled: Vec<f64> = rets.iter().map(|r| r * k).collect();
            assert!((sharpe(&scaled, 0.0, 252.0).unwrap() - base).abs() <= 1e-12);
        }
        // direct formula oracle
        let m = rets.iter().sum::<f64>() / rets.len() as f64;
        let var = rets.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (rets.len() - 1) as f64;
        let expect = m / var.sqrt() * 252.0_f64.sqrt();
        assert!((base - expect).abs() < 1e-14);
        // zero variance -> None, never 0
        assert_eq!(sharpe(&[0.01; 10], 0.0, 252.0), None);
    }

    #[test]
    fn drawdown_cases() {
        assert_eq!(max_drawdown(&[1.0, 1.1, 1.2, 1.3]).unwrap(), 0.0);
        let dd = max_drawdown(&[1.0, 1.2, 0.9, 1.1]).unwrap();
        assert!((dd - 0.25).abs() < 1e-15);
    }

    #[test]
    fn drawdown_matches_all_pairs_oracle() {
        let mut x = 7u64;
        let mut rnd = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 33) as f64 / (1u64 << 31) as f64
        };
        for _ in 0..20 {
            let mut path = vec![1.0];
            for _ in 0..150 {
                let last = *path.last().unwrap();
                path.push(last * (1.0 + (rnd() - 0.5) * 0.05));
            }
            let fast = max_drawdown(&path).unwrap();
            let mut brute = 0.0f64;
            for i in 0..path.len() {
                for j in i..path.len() {
                    brute = brute.max(1.0 - path[j] / path[i]);
                }
            }
            assert_eq!(fast, brute);
        }
    }

    #[test]
    fn annualized_return_cases() {
        assert_eq!(annualized_return(&[1.0; 10], 252.0), Some(0.0));
        let mut path = vec![1.0];
        let per_step = 2.0f64.powf(1.0 / 252.0);
        for _ in 0..252 {
            path.push(path.last().unwrap() * per_step);
        }
        assert!((annualized_return(&path, 252.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn annualized_return_matches_log_oracle() {
        let mut x = 11u64;
        let mut rnd = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 33) as f64 / (1u64 << 31) as f64
        };
        let mut path = vec![1.0];
        for _ in 0..400 {
            let last = *path.last().unwrap();
            path.push(last * (1.0 + (rnd() - 0.49) * 0.02));
        }
        let got = annualized_return(&path, 252.0).unwrap();
        let log_growth: f64 = path.windows(2).map(|w| (w[1] / w[0]).ln()).sum::<f64>()
            / (path.len() - 1) as f64;
        let expect = (log_growth * 252.0).exp() - 1.0;
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn calmar_cases() {
        // documented ratio check: 0.0616 / 0.11 = 0.56
        assert!((0.0616_f64 / 0.11 - 0.56).abs() < 1e-12);
        // negative-return path has negative Calmar
        let falling = vec![1.0, 0.95, 0.9, 0.85];
        let c = calmar(&falling, 252.0).unwrap().unwrap();
        assert!(c < 0.0);
        // zero drawdown -> None
        assert_eq!(calmar(&[1.0, 1.1, 1.2], 252.0).unwrap(), None);
        // composition of the two underlying quantities
        let path = vec![1.0, 1.05, 0.98, 1.1, 1.02, 1.15];
        let c = calmar(&path, 252.0).unwrap().unwrap();
        let expect = annualized_return(&path, 252.0).unwrap() / max_drawdown(&path).unwrap();
        assert!((c - expect).abs() < 1e-15);
    }

    fn fake_result(rets: &[f64]) -> BacktestResult {
        use crate::series::DailySeries;
        use crate::strategy::WeightSeries;
        use chrono::NaiveDate;
        let dates: Vec<NaiveDate> = (0..rets.len())
            .map(|i| NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Days::new(i as u64))
            .collect();
        let mut values = Vec::new();
        let mut v = 1.0;
        for r in rets {
            v *= 1.0 + r;
            values.push(v);
        }
        BacktestResult {
            values: DailySeries::new(dates.clone(), values).unwrap(),
            weights_applied: WeightSeries::constant("X", dates.clone(), 1.0).unwrap(),
            daily_returns: DailySeries::new(dates.clone(), rets.to_vec()).unwrap(),
            cost_paid: DailySeries::new(dates, vec![0.0; rets.len()]).unwrap(),
            turnover_annualized: 0.0,
        }
    }

    #[test]
    fn table_sorted_by_sharpe_descending() {
        let strong = fake_result(&[0.01, 0.012, 0.009, 0.011, 0.0095, 0.0102]);
        let weak = fake_result(&[0.01, -0.012, 0.009, -0.011, 0.0095, -0.002]);
        let table = perf_table(
            &[(StrategyId::LongOnly, &weak), (StrategyId::DynamicSiNews, &strong)],
            252.0,
        )
        .unwrap();
        assert_eq!(table.rows[0].0, StrategyId::DynamicSiNews);
        assert_eq!(table.rows[1].0, StrategyId::LongOnly);
        // Long Only turnover renders as n.a.
        let csv = table.to_csv_string();
        assert!(csv.lines().last().unwrap().ends_with("n.a."));
        assert!(csv.starts_with("Strategy,Sharpe,Calmar,Vol,Max DD,Turnover\n"));
    }

    #[test]
    fn table_tie_breaks_by_enum_order() {
        let a = fake_result(&[0.01, -0.01, 0.012, -0.008]);
        let table = perf_table(
            &[(StrategyId::SiNews, &a), (StrategyId::Si, &a), (StrategyId::Vix, &a)],
            252.0,
        )
        .unwrap();
        let order: Vec<StrategyId> = table.rows.iter().map(|r| r.0).collect();
        assert_eq!(order, vec![StrategyId::Vix, StrategyId::Si, StrategyId::SiNews]);
    }

    #[test]
    fn single_row_table() {
        let a = fake_result(&[0.01, -0.002, 0.004]);
        let table = perf_table(&[(StrategyId::Si, &a)], 252.0).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert!(table.to_markdown().contains("| SI"));
    }
}
