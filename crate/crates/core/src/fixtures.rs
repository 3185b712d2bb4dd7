//! Deterministic synthetic datasets.
//!
//! The production inputs (premium market-wrap news, the proprietary
//! stress-factor universe) are not redistributable, so the repo generates
//! its own: six equity markets, sixteen risk factors over the eight stress
//! categories and up to fifteen mock headlines per day, all driven by one
//! latent stress state so the signals have something real to find. A fixed
//! seed gives byte-identical files on every run.

use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{
    write_price_csv, write_risk_csv, HeadlineRecord, PriceTable, RiskFactor, RiskFactorTable,
    StressCategory,
};
use crate::series::DailySeries;

/// Shape of the generated dataset.
#[derive(Debug, Clone, Copy)]
pub struct FixtureSpec {
    pub n_days: usize,
    pub seed: u64,
    pub start: NaiveDate,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            n_days: 2500,
            seed: 42,
            start: NaiveDate::from_ymd_opt(2005, 1, 3).unwrap(),
        }
    }
}

/// The generated tables, before serialization.
#[derive(Debug, Clone)]
pub struct FixtureData {
    pub prices: PriceTable,
    pub risk: RiskFactorTable,
    pub headlines: Vec<HeadlineRecord>,
}

pub const MARKETS: [&str; 6] = ["SP500", "NASDAQ", "NIKKEI", "EUROSTOXX", "EM", "FTSE"];

const FACTORS: [(&str, StressCategory); 16] = [
    ("VIX", StressCategory::Equities),
    ("VSTOXX", StressCategory::Equities),
    ("EMBI_SPREAD", StressCategory::EmergingBonds),
    ("EM_CDS", StressCategory::EmergingBonds),
    ("UST_VOL", StressCategory::GovernmentBonds),
    ("BUND_VOL", StressCategory::GovernmentBonds),
    ("BANK_CDS", StressCategory::FinancialStocks),
    ("FIN_VOL", StressCategory::FinancialStocks),
    ("FX_VOL", StressCategory::Fx),
    ("EMFX_VOL", StressCategory::Fx),
    ("OIL_VOL", StressCategory::Commodities),
    ("GOLD_VOL", StressCategory::Commodities),
    ("TED", StressCategory::InterestRates),
    ("MOVE", StressCategory::InterestRates),
    ("CDX_IG", StressCategory::CorporateCredit),
    ("ITRAXX", StressCategory::CorporateCredit),
];

const POS_TEMPLATES: [&str; 3] = [
    "stocks rally as earnings beat forecasts",
    "tech shares surge on upbeat guidance",
    "global equities gain on strong growth data",
];

const NEG_TEMPLATES: [&str; 3] = [
    "markets slump as recession fears deepen",
    "bank shares plunge on credit crisis worries",
    "equities tumble in broad selloff",
];

const NEUTRAL_TEMPLATES: [&str; 3] = [
    "central bank holds rates unchanged",
    "oil little moved ahead of inventory data",
    "treasury yields end the session flat",
];

fn weekday_calendar(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(n);
    let mut cur = start;
    while dates.len() < n {
        if !matches!(cur.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(cur);
        }
        cur = cur.succ_opt().unwrap();
    }
    dates
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generate the full synthetic dataset.
pub fn generate(spec: &FixtureSpec) -> Result<FixtureData> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dates = weekday_calendar(spec.start, spec.n_days);
    let n = dates.len();

    // latent stress state: mean-reverting with occasional crisis jumps
    let mut stress = vec![0.0f64; n];
    let mut s = 0.0;
    for item in stress.iter_mut() {
        s += 0.03 * (0.0 - s) + 0.18 * gauss(&mut rng);
        if rng.gen::<f64>() < 0.004 {
            s += 1.5 + rng.gen::<f64>();
        }
        *item = s;
    }

    // market levels: drift down and vol up with stress
    let mut markets = std::collections::BTreeMap::new();
    for (m, name) in MARKETS.iter().enumerate() {
        let mut level = 100.0 * (1.0 + m as f64 * 0.5);
        let beta = 0.8 + 0.1 * m as f64 / 6.0;
        let mut values = Vec::with_capacity(n);
        for t in 0..n {
            let vol = 0.008 * (1.0 + 0.6 * stress[t].max(0.0));
            let drift = 0.00035 - 0.0012 * stress[t].max(0.0) * beta;
            level *= 1.0 + drift + vol * gauss(&mut rng);
            level = level.max(1.0);
            values.push(level);
        }
        markets.insert(name.to_string(), DailySeries::new(dates.clone(), values)?);
    }
    let prices = PriceTable::new(markets)?;

    // risk factors: positive levels loading on the stress state, with small
    // publication gaps on non-equity factors
    let mut factors = Vec::new();
    for (k, (id, category)) in FACTORS.iter().enumerate() {
        let base = 10.0 + 3.0 * k as f64;
        let loading = 0.5 + 0.07 * k as f64;
        let mut f_dates = Vec::new();
        let mut f_values = Vec::new();
        let mut noise = 0.0;
        for t in 0..n {
            noise += 0.1 * (0.0 - noise) + 0.4 * gauss(&mut rng);
            let value = base * (0.25 * (loading * stress[t] + noise)).exp();
            // every factor prints on day 0 so forward-fill has an anchor
            let gap = t > 0 && *category != StressCategory::Equities && rng.gen::<f64>() < 0.02;
            if !gap {
                f_dates.push(dates[t]);
                f_values.push(value);
            }
        }
        factors.push(RiskFactor {
            id: id.to_string(),
            category: *category,
            series: DailySeries::new(f_dates, f_values)?,
        });
    }
    let risk = RiskFactorTable::new(factors)?;

    // headlines: tone probabilities tied to the negated stress state, texts
    // drawn from templates the lexicon scorer labels as intended
    let mut headlines = Vec::new();
    for t in 0..n {
        let mood = (-stress[t] * 0.7 + 0.2 * gauss(&mut rng)).tanh();
        let p_pos = 0.34 + 0.3 * mood;
        let p_neg = 0.33 - 0.3 * mood;
        let count = 12 + (rng.gen::<f64>() * 4.0) as usize; // 12..15
        for h in 0..count.min(15) {
            let draw = rng.gen::<f64>();
            let text = if draw < p_pos {
                POS_TEMPLATES[(t + h) % POS_TEMPLATES.len()]
            } else if draw < p_pos + p_neg {
                NEG_TEMPLATES[(t + h) % NEG_TEMPLATES.len()]
            } else {
                NEUTRAL_TEMPLATES[(t + h) % NEUTRAL_TEMPLATES.len()]
            };
            headlines.push(HeadlineRecord {
                date: dates[t],
                headline_text: format!("{text} ({h})"),
                label: None,
            });
        }
    }

    Ok(FixtureData {
        prices,
        risk,
        headlines,
    })
}

/// Write the dataset into `dir` under the default loader file names:
/// `prices.csv`, `risk.csv` and `sentiment.csv` (per-headline schema with
/// labels left blank for the scorer).
pub fn write_to_dir(dir: &Path, data: &FixtureData) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    write_price_csv(&dir.join("prices.csv"), &data.prices)?;
    write_risk_csv(&dir.join("risk.csv"), &data.risk)?;

    let mut out = String::from("date,headline_text,label\n");
    for h in &data.headlines {
        out.push_str(&format!("{},{},\n", h.date, h.headline_text));
    }
    let path = dir.join("sentiment.csv");
    std::fs::write(&path, out).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
