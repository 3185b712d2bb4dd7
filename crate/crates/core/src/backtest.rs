//! The cost-aware strategy value recursion, turnover and volatility
//! rescaling.
//!
//! Each step multiplies the running value by
//! `1 + sum_i w_{t-1}^i r_t^i - b * sum_i |w_t^i - w_{t-1}^i|`:
//! the position held since the previous close earns today's return while the
//! trade into today's position pays linear costs. The weight before the
//! first date is 0, so establishing the initial position is charged unless
//! `charge_initial_entry` is switched off.

use std::path::Path;

use crate::error::{Error, Result};
use crate::series::DailySeries;
use crate::strategy::WeightSeries;

/// Linear transaction costs: `b` per unit of absolute weight change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub b: f64,
    /// Charge the trade from flat into the first position. Switchable since
    /// either convention is defensible; charged is the default so late
    /// entrants do not get a free fill.
    pub charge_initial_entry: bool,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            b: 0.0002,
            charge_initial_entry: true,
        }
    }
}

impl CostModel {
    pub fn new(b: f64) -> Result<Self> {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidParam(format!("cost rate b {b}")));
        }
        Ok(Self {
            b,
            ..Default::default()
        })
    }
}

/// Result of one simulated strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    /// Strategy value path; starts from an implicit 1 before the first date.
    pub values: DailySeries,
    /// The weights actually applied on each evaluated date.
    pub weights_applied: WeightSeries,
    /// Daily net returns `S_t / S_{t-1} - 1`.
    pub daily_returns: DailySeries,
    /// Cost paid per step, as a fraction of value.
    pub cost_paid: DailySeries,
    pub turnover_annualized: f64,
}

impl BacktestResult {
    /// Export as `date,value,weight,cost,ret`. The weight column is the
    /// total allocation across assets.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let alloc = self.weights_applied.total_allocation();
        let mut out = String::from("date,value,weight,cost,ret\n");
        for (i, (date, value)) in self.values.iter().enumerate() {
            out.push_str(&format!(
                "{date},{value:.10},{:.10},{:.10},{:.10}\n",
                alloc.values()[i],
                self.cost_paid.values()[i],
                self.daily_returns.values()[i],
            ));
        }
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// Run the value recursion over the dates shared by the weights and every
/// return series. `returns` is matched to the weight columns by asset name.
pub fn run_backtest(
    weights: &WeightSeries,
    returns: &[(&str, &DailySeries)],
    cost: &CostModel,
) -> Result<BacktestResult> {
    let mut matched: Vec<&DailySeries> = Vec::with_capacity(weights.assets().len());
    for asset in weights.assets() {
        let r = returns
            .iter()
            .find(|(name, _)| name == asset)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::InvalidParam(format!("no return series for asset {asset}")))?;
        matched.push(r);
    }

    // evaluation dates: weight dates on which every return series is defined
    let mut dates: Vec<chrono::NaiveDate> = weights.dates().to_vec();
    for r in &matched {
        dates.retain(|d| r.get(*d).is_some());
    }
    if dates.is_empty() {
        return Err(Error::EmptyIntersection {
            names: weights.assets().to_vec(),
        });
    }

    let n_assets = weights.assets().len();
    let mut prev_w = vec![0.0; n_assets];
    let mut value = 1.0;
    let mut values = Vec::with_capacity(dates.len());
    let mut rets = Vec::with_capacity(dates.len());
    let mut costs = Vec::with_capacity(dates.len());
    let mut columns = vec![Vec::with_capacity(dates.len()); n_assets];
    let mut abs_change_total = 0.0;

    for (step, &date) in dates.iter().enumerate() {
        let w = weights.row(date).expect("dates drawn from weight series");
        let ret_earned: f64 = prev_w
            .iter()
            .zip(&matched)
            .map(|(pw, r)| pw * r.get(date).expect("dates filtered on returns"))
            .sum();
        let change: f64 = w.iter().zip(&prev_w).map(|(a, b)| (a - b).abs()).sum();
        abs_change_total += change;
        let charged = if step == 0 && !cost.charge_initial_entry {
            0.0
        } else {
            cost.b * change
        };
        let factor = 1.0 + ret_earned - charged;
        if factor <= 0.0 {
            return Err(Error::ValueAnnihilation { date, factor });
        }
        value *= factor;
        values.push(value);
        rets.push(factor - 1.0);
        costs.push(charged);
        for (col, wi) in columns.iter_mut().zip(&w) {
            col.push(*wi);
        }
        prev_w = w;
    }

    let steps = dates.len() as f64;
    let turnover_annualized = abs_change_total * 252.0 / steps;
    Ok(BacktestResult {
        values: DailySeries::new(dates.clone(), values)?,
        weights_applied: WeightSeries::new(dates.clone(), weights.assets().to_vec(), columns)?,
        daily_returns: DailySeries::new(dates.clone(), rets)?,
        cost_paid: DailySeries::new(dates, costs)?,
        turnover_annualized,
    })
}

/// Average yearly sum of absolute weight changes, the initial move from flat
/// included.
pub fn turnover(weights: &WeightSeries, annualization: f64) -> Result<f64> {
    if weights.len() < 2 {
        return Err(Error::InvalidParam("turnover needs at least 2 dates".into()));
    }
    let mut prev = vec![0.0; weights.assets().len()];
    let mut total = 0.0;
    for &date in weights.dates() {
        let w = weights.row(date).unwrap();
        total += w.iter().zip(&prev).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prev = w;
    }
    Ok(total * annualization / weights.len() as f64)
}

/// Multiply a return series by the scalar that brings its realized
/// annualized volatility to `target_vol` (ex-post, full sample).
pub fn rescale_to_target_vol(
    returns: &DailySeries,
    target_vol: f64,
    annualization: f64,
) -> Result<DailySeries> {
    let realized = crate::metrics::annualized_vol(returns.values(), annualization)
        .ok_or(Error::ZeroVol)?;
    if realized == 0.0 {
        return Err(Error::ZeroVol);
    }
    let k = target_vol / realized;
    Ok(returns.map(|r| k * r))
}
