//! Run configuration. Every field has a default so an empty JSON document
//! is a valid config; unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{NewsSignalParams, SiMapping, StressIndexParams};
use crate::strategy::StrategyId;

/// The three test universes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Universe {
    #[serde(rename = "SP500")]
    Sp500,
    #[serde(rename = "NASDAQ")]
    Nasdaq,
    #[serde(rename = "WORLD6")]
    World6,
}

impl Universe {
    pub const ALL: [Universe; 3] = [Universe::Sp500, Universe::Nasdaq, Universe::World6];

    pub fn as_str(&self) -> &'static str {
        match self {
            Universe::Sp500 => "SP500",
            Universe::Nasdaq => "NASDAQ",
            Universe::World6 => "WORLD6",
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Universe {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Universe::ALL
            .iter()
            .find(|u| u.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown universe '{s}'"))
    }
}

/// VIX-percentile signal parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VixParams {
    /// Risk-factor id carrying the VIX level series.
    pub factor_id: String,
    pub quantile: f64,
    pub min_obs: usize,
}

impl Default for VixParams {
    fn default() -> Self {
        Self {
            factor_id: "VIX".into(),
            quantile: 0.8,
            min_obs: 60,
        }
    }
}

/// Input file names, relative to the data directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataFiles {
    pub prices: String,
    pub risk: String,
    pub sentiment: String,
}

impl Default for DataFiles {
    fn default() -> Self {
        Self {
            prices: "prices.csv".into(),
            risk: "risk.csv".into(),
            sentiment: "sentiment.csv".into(),
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub universes: Vec<Universe>,
    pub strategies: Vec<StrategyId>,
    /// Linear transaction cost per unit of absolute weight change.
    pub cost_rate: f64,
    pub charge_initial_entry: bool,
    /// Trading days between a signal's computation and the first position
    /// that uses it.
    pub signal_lag: usize,
    /// Annualization factor for volatility, Sharpe and turnover.
    pub annualization: f64,
    /// Trailing observation count behind the monthly selector's Sharpes.
    pub selector_window: usize,
    pub news: NewsSignalParams,
    pub stress: StressIndexParams,
    pub vix: VixParams,
    pub si_mapping: SiMapping,
    pub headline_budget: usize,
    /// Maximum trading-day gap forward-filled in risk factors.
    pub risk_ffill_limit: usize,
    /// Optional hard start for every strategy; signals are never
    /// extrapolated backwards before their data begins regardless.
    pub start_date: Option<NaiveDate>,
    pub files: DataFiles,
    /// Market ids composing the equal-weight world basket.
    pub world6_markets: Vec<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            universes: Universe::ALL.to_vec(),
            strategies: StrategyId::ALL.to_vec(),
            cost_rate: 0.0002,
            charge_initial_entry: true,
            signal_lag: 1,
            annualization: 252.0,
            selector_window: 250,
            news: NewsSignalParams::default(),
            stress: StressIndexParams::default(),
            vix: VixParams::default(),
            si_mapping: SiMapping::default(),
            headline_budget: 15,
            risk_ffill_limit: 5,
            start_date: None,
            files: DataFiles::default(),
            world6_markets: vec![
                "SP500".into(),
                "NASDAQ".into(),
                "NIKKEI".into(),
                "EUROSTOXX".into(),
                "EM".into(),
                "FTSE".into(),
            ],
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.universes.is_empty() || self.strategies.is_empty() {
            return Err(Error::Config("universes and strategies must be non-empty".into()));
        }
        if !(self.cost_rate >= 0.0) {
            return Err(Error::Config(format!("cost_rate {} must be >= 0", self.cost_rate)));
        }
        if self.signal_lag == 0 {
            return Err(Error::Config("signal_lag must be >= 1".into()));
        }
        if self.selector_window == 0
            || self.news.agg_window == 0
            || self.news.smooth_window == 0
            || self.stress.z_window == 0
        {
            return Err(Error::Config("all windows must be >= 1".into()));
        }
        if !(self.vix.quantile > 0.0 && self.vix.quantile < 1.0) {
            return Err(Error::Config(format!(
                "vix quantile {} must lie in (0,1)",
                self.vix.quantile
            )));
        }
        if self.headline_budget == 0 {
            return Err(Error::Config("headline_budget must be >= 1".into()));
        }
        if self.world6_markets.len() != 6 {
            return Err(Error::Config(format!(
                "world6_markets needs exactly 6 ids, got {}",
                self.world6_markets.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_valid() {
        let cfg = Config::from_json("{}").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.cost_rate, 0.0002);
        assert_eq!(cfg.selector_window, 250);
        assert_eq!(cfg.universes.len(), 3);
        assert_eq!(cfg.strategies.len(), 6);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_json(r#"{"costrate": 0.1}"#).is_err());
        assert!(Config::from_json(r#"{"news": {"agg_window": 5, "bogus": 1}}"#).is_err());
    }

    #[test]
    fn partial_override() {
        let cfg = Config::from_json(
            r#"{"cost_rate": 0.0005, "universes": ["SP500"], "si_mapping": {"mode": "threshold", "theta": 0.6}}"#,
        )
        .unwrap();
        assert_eq!(cfg.cost_rate, 0.0005);
        assert_eq!(cfg.universes, vec![Universe::Sp500]);
        assert_eq!(
            cfg.si_mapping,
            crate::signal::SiMapping::Threshold { theta: 0.6 }
        );
        assert_eq!(cfg.annualization, 252.0);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(Config::from_json(r#"{"cost_rate": -0.1}"#).is_err());
        assert!(Config::from_json(r#"{"signal_lag": 0}"#).is_err());
        assert!(Config::from_json(r#"{"vix": {"quantile": 1.5}}"#).is_err());
        assert!(Config::from_json(r#"{"universes": []}"#).is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = Config::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(Config::from_json(&text).unwrap(), cfg);
    }
}
