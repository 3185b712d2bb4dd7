//! The three raw signals: binary news sentiment, the composite stress index
//! and the VIX-percentile regime indicator.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{RiskFactorTable, SentimentDay, StressCategory};
use crate::series::{
    expanding_percentile, expanding_zscore, normal_cdf, rolling_mean, rolling_zscore,
    DailySeries, RollingParams,
};

/// Value-range contract of a signal series, checked on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// Values in {0, 1}.
    Binary,
    /// Values strictly inside (0, 1).
    OpenUnit,
}

/// A daily signal with an enforced range. Warm-up dates are absent, never
/// zero-filled.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    kind: SignalKind,
    series: DailySeries,
}

impl SignalSeries {
    pub fn new(kind: SignalKind, series: DailySeries) -> Result<Self> {
        for &v in series.values() {
            let ok = match kind {
                SignalKind::Binary => v == 0.0 || v == 1.0,
                SignalKind::OpenUnit => v > 0.0 && v < 1.0,
            };
            if !ok {
                return Err(Error::SignalRange {
                    kind: match kind {
                        SignalKind::Binary => "binary",
                        SignalKind::OpenUnit => "open-unit",
                    },
                    value: v,
                });
            }
        }
        Ok(Self { kind, series })
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    pub fn series(&self) -> &DailySeries {
        &self.series
    }
}

/// Z-score baseline: the window lengths behind the z-scores are exposed as
/// configuration rather than hard-coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZscoreSpec {
    Expanding { min_obs: usize },
    Rolling { window: usize, min_obs: usize },
}

impl ZscoreSpec {
    pub fn apply(&self, s: &DailySeries) -> Result<DailySeries> {
        match *self {
            ZscoreSpec::Expanding { min_obs } => expanding_zscore(s, min_obs),
            ZscoreSpec::Rolling { window, min_obs } => {
                rolling_zscore(s, &RollingParams::new(window, min_obs)?)
            }
        }
    }
}

/// Parameters of the four-stage news pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewsSignalParams {
    pub agg_window: usize,
    pub smooth_window: usize,
    pub zscore: ZscoreSpec,
    pub threshold: f64,
}

impl Default for NewsSignalParams {
    fn default() -> Self {
        Self {
            agg_window: 10,
            smooth_window: 10,
            zscore: ZscoreSpec::Expanding { min_obs: 60 },
            threshold: 0.0,
        }
    }
}

/// Parameters of the stress-index pipeline. Categories are weighted
/// uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StressIndexParams {
    pub z_window: usize,
    pub z_min_obs: usize,
}

impl Default for StressIndexParams {
    fn default() -> Self {
        Self {
            z_window: 500,
            z_min_obs: 250,
        }
    }
}

/// Daily sentiment score: positive headlines minus negative ones; indecisive
/// headlines contribute nothing.
pub fn daily_sentiment_score(day: &SentimentDay) -> i64 {
    day.n_pos as i64 - day.n_neg as i64
}

fn score_series(days: &[SentimentDay]) -> Result<DailySeries> {
    let mut sorted: Vec<&SentimentDay> = days.iter().collect();
    sorted.sort_by_key(|d| d.date);
    let dates = sorted.iter().map(|d| d.date).collect();
    let values = sorted
        .iter()
        .map(|d| daily_sentiment_score(d) as f64)
        .collect();
    DailySeries::new(dates, values)
}

/// The binary news signal: daily score -> trailing mean over `agg_window`
/// -> z-score -> trailing mean over `smooth_window` -> 1 when strictly above
/// the threshold, else 0.
pub fn news_signal_pipeline(days: &[SentimentDay], p: &NewsSignalParams) -> Result<SignalSeries> {
    let scores = score_series(days)?;
    let agg = rolling_mean(&scores, &RollingParams::new(p.agg_window, p.agg_window)?)?;
    let z = p.zscore.apply(&agg)?;
    let smooth = rolling_mean(&z, &RollingParams::new(p.smooth_window, p.smooth_window)?)?;
    let threshold = p.threshold;
    let binary = smooth.map(|v| if v > threshold { 1.0 } else { 0.0 });
    SignalSeries::new(SignalKind::Binary, binary)
}

/// Stress-index output plus the dates that could not be evaluated because a
/// whole category had no defined factor there.
#[derive(Debug, Clone)]
pub struct StressIndexOutput {
    pub signal: SignalSeries,
    pub skipped_dates: Vec<NaiveDate>,
}

/// The composite stress index: per-factor z-score, category mean of member
/// z-scores, grand mean over the eight categories, then the standard normal
/// CDF to land in (0, 1).
///
/// A date where some category has no defined factor is absent from the
/// output; those dates are returned and logged, never partially averaged.
pub fn stress_index_pipeline(
    risks: &RiskFactorTable,
    p: &StressIndexParams,
) -> Result<StressIndexOutput> {
    if p.z_min_obs < 2 || p.z_min_obs > p.z_window {
        return Err(Error::InvalidParam(format!(
            "stress z_window {} / z_min_obs {}",
            p.z_window, p.z_min_obs
        )));
    }
    for cat in StressCategory::ALL {
        if !risks.factors().any(|f| f.category == cat) {
            return Err(Error::Validation {
                path: "risk factors".into(),
                msg: format!("category {cat} has no factor"),
            });
        }
    }

    let params = RollingParams::new(p.z_window, p.z_min_obs)?;
    let mut zs: Vec<(StressCategory, DailySeries)> = Vec::new();
    for f in risks.factors() {
        zs.push((f.category, rolling_zscore(&f.series, &params)?));
    }

    let mut union: Vec<NaiveDate> = Vec::new();
    for (_, z) in &zs {
        union.extend_from_slice(z.dates());
    }
    union.sort_unstable();
    union.dedup();

    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    'dates: for &date in &union {
        let mut cat_sum = 0.0;
        for cat in StressCategory::ALL {
            let members: Vec<f64> = zs
                .iter()
                .filter(|(c, _)| *c == cat)
                .filter_map(|(_, z)| z.get(date))
                .collect();
            if members.is_empty() {
                skipped.push(date);
                continue 'dates;
            }
            cat_sum += members.iter().sum::<f64>() / members.len() as f64;
        }
        let grand_mean = cat_sum / StressCategory::ALL.len() as f64;
        dates.push(date);
        values.push(normal_cdf(grand_mean)?);
    }
    if !skipped.is_empty() {
        log::warn!(
            "stress index undefined on {} date(s) with an empty category, first {} last {}",
            skipped.len(),
            skipped[0],
            skipped[skipped.len() - 1]
        );
    }
    let signal = SignalSeries::new(SignalKind::OpenUnit, DailySeries::new(dates, values)?)?;
    Ok(StressIndexOutput {
        signal,
        skipped_dates: skipped,
    })
}

/// VIX regime signal: 1 (risk-on) while the VIX sits at or below its
/// expanding `q`-percentile, 0 above it. Expanding rather than full-sample
/// so no future data leaks into the threshold.
pub fn vix_signal(vix: &DailySeries, q: f64, min_obs: usize) -> Result<SignalSeries> {
    let pct = expanding_percentile(vix, q, min_obs)?;
    let mut dates = Vec::with_capacity(pct.len());
    let mut values = Vec::with_capacity(pct.len());
    for (date, threshold) in pct.iter() {
        let level = vix.get(date).expect("percentile dates come from the input");
        dates.push(date);
        values.push(if level <= threshold { 1.0 } else { 0.0 });
    }
    SignalSeries::new(SignalKind::Binary, DailySeries::new(dates, values)?)
}

/// How the stress index maps to a risk appetite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SiMapping {
    /// appetite = 1 - stress: invest less as stress rises.
    Proportional,
    /// appetite = 1 while stress < theta, else 0.
    Threshold { theta: f64 },
}

impl Default for SiMapping {
    fn default() -> Self {
        SiMapping::Proportional
    }
}

/// Turn the stress index into a risk appetite in the chosen mode.
pub fn si_risk_appetite(stress: &SignalSeries, mapping: SiMapping) -> Result<SignalSeries> {
    if stress.kind() != SignalKind::OpenUnit {
        return Err(Error::InvalidParam(
            "risk appetite needs an open-unit stress signal".into(),
        ));
    }
    match mapping {
        SiMapping::Proportional => {
            SignalSeries::new(SignalKind::OpenUnit, stress.series().map(|v| 1.0 - v))
        }
        SiMapping::Threshold { theta } => SignalSeries::new(
            SignalKind::Binary,
            stress.series().map(|v| if v < theta { 1.0 } else { 0.0 }),
        ),
    }
}
