//! Flat-file loaders and validation for prices, risk factors and news
//! sentiment, plus the headline-scorer seam that replaces the proprietary
//! LLM step with a deterministic lexicon mock.
//!
//! This is the only layer allowed to drop, fill or reorder dates. Everything
//! downstream receives fully validated, immutable tables or fails loudly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::DailySeries;

/// Index levels per market id.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    markets: BTreeMap<String, DailySeries>,
}

impl PriceTable {
    pub fn new(markets: BTreeMap<String, DailySeries>) -> Result<Self> {
        for (id, s) in &markets {
            if let Some(&bad) = s.values().iter().find(|v| **v <= 0.0 || !v.is_finite()) {
                return Err(Error::Validation {
                    path: id.clone(),
                    msg: format!("non-positive level {bad}"),
                });
            }
        }
        Ok(Self { markets })
    }

    pub fn get(&self, market: &str) -> Option<&DailySeries> {
        self.markets.get(market)
    }

    pub fn markets(&self) -> impl Iterator<Item = (&str, &DailySeries)> {
        self.markets.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.markets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markets.is_empty()
    }
}

/// The eight stress-index categories. Closed set; anything else is rejected
/// at load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressCategory {
    Equities,
    EmergingBonds,
    GovernmentBonds,
    FinancialStocks,
    Fx,
    Commodities,
    InterestRates,
    CorporateCredit,
}

impl StressCategory {
    pub const ALL: [StressCategory; 8] = [
        StressCategory::Equities,
        StressCategory::EmergingBonds,
        StressCategory::GovernmentBonds,
        StressCategory::FinancialStocks,
        StressCategory::Fx,
        StressCategory::Commodities,
        StressCategory::InterestRates,
        StressCategory::CorporateCredit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StressCategory::Equities => "equities",
            StressCategory::EmergingBonds => "emerging_bonds",
            StressCategory::GovernmentBonds => "government_bonds",
            StressCategory::FinancialStocks => "financial_stocks",
            StressCategory::Fx => "fx",
            StressCategory::Commodities => "commodities",
            StressCategory::InterestRates => "interest_rates",
            StressCategory::CorporateCredit => "corporate_credit",
        }
    }
}

impl fmt::Display for StressCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StressCategory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StressCategory::ALL
            .iter()
            .find(|c| c.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown stress category '{s}'"))
    }
}

/// One risk-price series tagged with its stress category.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskFactor {
    pub id: String,
    pub category: StressCategory,
    pub series: DailySeries,
}

/// Risk factors keyed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskFactorTable {
    factors: BTreeMap<String, RiskFactor>,
}

impl RiskFactorTable {
    pub fn new(factors: Vec<RiskFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Validation {
                path: "risk factors".into(),
                msg: "empty factor set".into(),
            });
        }
        let mut map = BTreeMap::new();
        for f in factors {
            if map.insert(f.id.clone(), f).is_some() {
                return Err(Error::Validation {
                    path: "risk factors".into(),
                    msg: "duplicate factor id".into(),
                });
            }
        }
        Ok(Self { factors: map })
    }

    pub fn get(&self, id: &str) -> Option<&RiskFactor> {
        self.factors.get(id)
    }

    pub fn factors(&self) -> impl Iterator<Item = &RiskFactor> {
        self.factors.values()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Forward-fill each factor onto the union calendar of all factors.
    /// Gaps longer than `limit` trading days are an error: stress inputs
    /// publish at different cadences, but a long gap means broken data.
    pub fn forward_fill(&self, limit: usize) -> Result<RiskFactorTable> {
        let mut union: Vec<NaiveDate> = Vec::new();
        for f in self.factors.values() {
            union.extend_from_slice(f.series.dates());
        }
        union.sort_unstable();
        union.dedup();

        let mut filled = Vec::new();
        for f in self.factors.values() {
            let mut dates = Vec::new();
            let mut values = Vec::new();
            let mut last: Option<f64> = None;
            let mut gap = 0usize;
            for &date in &union {
                match f.series.get(date) {
                    Some(v) => {
                        last = Some(v);
                        gap = 0;
                        dates.push(date);
                        values.push(v);
                    }
                    None => {
                        if let Some(v) = last {
                            gap += 1;
                            if gap > limit {
                                return Err(Error::Validation {
                                    path: f.id.clone(),
                                    msg: format!(
                                        "gap exceeding {limit} trading days at {date}"
                                    ),
                                });
                            }
                            dates.push(date);
                            values.push(v);
                        }
                        // leading gap before the factor's first print: absent
                    }
                }
            }
            filled.push(RiskFactor {
                id: f.id.clone(),
                category: f.category,
                series: DailySeries::new(dates, values)?,
            });
        }
        RiskFactorTable::new(filled)
    }
}

/// Per-date counts of positive / negative / indecisive headlines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentimentDay {
    pub date: NaiveDate,
    pub n_pos: u32,
    pub n_neg: u32,
    pub n_neutral: u32,
}

impl SentimentDay {
    pub fn total(&self) -> u32 {
        self.n_pos + self.n_neg + self.n_neutral
    }
}

/// Headline sentiment label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentimentLabel {
    Positive,
    Negative,
    Indecisive,
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "positive" => Ok(SentimentLabel::Positive),
            "negative" => Ok(SentimentLabel::Negative),
            "indecisive" => Ok(SentimentLabel::Indecisive),
            other => Err(format!("unknown label '{other}'")),
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Indecisive => "indecisive",
        })
    }
}

/// One headline, optionally labeled.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadlineRecord {
    pub date: NaiveDate,
    pub headline_text: String,
    pub label: Option<SentimentLabel>,
}

/// Seam for the sentiment-scoring step. A production deployment would plug
/// in a model-backed scorer here; the bundled [`LexiconScorer`] is a
/// deterministic stand-in so the full pipeline runs offline.
pub trait HeadlineScorer {
    /// Label every record of one date. Input records all share the same date.
    fn score(&self, headlines: &[HeadlineRecord]) -> Result<Vec<HeadlineRecord>>;
}

/// Signed keyword lists for the mock scorer. Kept short and boring on
/// purpose; fixtures are generated from these same lists.
pub const POSITIVE_WORDS: &[&str] = &[
    "rally", "rallies", "surge", "surges", "gain", "gains", "strong", "beat", "beats",
    "record", "upbeat", "optimism", "soar", "soars", "rebound", "growth", "upgrade",
    "bullish",
];

pub const NEGATIVE_WORDS: &[&str] = &[
    "crash", "slump", "slumps", "fear", "fears", "loss", "losses", "weak", "tumble",
    "tumbles", "selloff", "plunge", "plunges", "recession", "downgrade", "bearish",
    "crisis", "default",
];

/// Deterministic keyword-count scorer: more positive words than negative
/// words means positive, the reverse means negative, a tie is indecisive.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexiconScorer;

impl LexiconScorer {
    fn label(text: &str) -> SentimentLabel {
        let lower = text.to_lowercase();
        let mut net = 0i32;
        for word in lower.split(|c: char| !c.is_alphanumeric()) {
            if POSITIVE_WORDS.contains(&word) {
                net += 1;
            } else if NEGATIVE_WORDS.contains(&word) {
                net -= 1;
            }
        }
        match net.cmp(&0) {
            std::cmp::Ordering::Greater => SentimentLabel::Positive,
            std::cmp::Ordering::Less => SentimentLabel::Negative,
            std::cmp::Ordering::Equal => SentimentLabel::Indecisive,
        }
    }
}

impl HeadlineScorer for LexiconScorer {
    fn score(&self, headlines: &[HeadlineRecord]) -> Result<Vec<HeadlineRecord>> {
        Ok(headlines
            .iter()
            .map(|h| HeadlineRecord {
                date: h.date,
                headline_text: h.headline_text.clone(),
                label: Some(h.label.unwrap_or_else(|| Self::label(&h.headline_text))),
            })
            .collect())
    }
}

/// Label every record, calling the scorer once per date. A date whose scoring
/// fails (or that carries no headlines) is excluded with a warning and listed
/// in the returned exclusion set; it is never silently zero-filled.
pub fn score_headlines(
    scorer: &dyn HeadlineScorer,
    records: &[HeadlineRecord],
) -> (Vec<HeadlineRecord>, Vec<NaiveDate>) {
    let mut by_date: BTreeMap<NaiveDate, Vec<HeadlineRecord>> = BTreeMap::new();
    for r in records {
        by_date.entry(r.date).or_default().push(r.clone());
    }
    let mut labeled = Vec::new();
    let mut excluded = Vec::new();
    for (date, group) in by_date {
        if group.is_empty() {
            log::warn!("no headlines for {date}; date excluded");
            excluded.push(date);
            continue;
        }
        match scorer.score(&group) {
            Ok(scored) => labeled.extend(scored),
            Err(e) => {
                log::warn!("scoring failed for {date}: {e}; date excluded");
                excluded.push(date);
            }
        }
    }
    (labeled, excluded)
}

/// Reduce labeled headlines to per-date counts. Every record must be labeled.
pub fn reduce_to_counts(records: &[HeadlineRecord]) -> Result<Vec<SentimentDay>> {
    let mut by_date: BTreeMap<NaiveDate, (u32, u32, u32)> = BTreeMap::new();
    for r in records {
        let label = r.label.ok_or_else(|| Error::Validation {
            path: "headlines".into(),
            msg: format!("unlabeled headline on {}", r.date),
        })?;
        let counts = by_date.entry(r.date).or_default();
        match label {
            SentimentLabel::Positive => counts.0 += 1,
            SentimentLabel::Negative => counts.1 += 1,
            SentimentLabel::Indecisive => counts.2 += 1,
        }
    }
    Ok(by_date
        .into_iter()
        .map(|(date, (p, n, i))| SentimentDay {
            date,
            n_pos: p,
            n_neg: n,
            n_neutral: i,
        })
        .collect())
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn parse_date(raw: &str, path: &Path, line: u64) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|_| Error::Malformed {
        path: path_str(path),
        line,
        msg: format!("bad date '{raw}' (expected ISO-8601)"),
    })
}

fn parse_f64(raw: &str, path: &Path, line: u64) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Malformed {
        path: path_str(path),
        line,
        msg: format!("bad number '{raw}'"),
    })
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path_str(path),
        source: e,
    })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn check_header(path: &Path, reader: &mut csv::Reader<std::fs::File>, expect: &[&str]) -> Result<()> {
    let headers = reader.headers()?.clone();
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expect {
        return Err(Error::Malformed {
            path: path_str(path),
            line: 1,
            msg: format!("expected header {expect:?}, got {got:?}"),
        });
    }
    Ok(())
}

/// Load `date,market_id,level`. Rows may arrive in any order; duplicate
/// (date, market) pairs and non-positive levels are rejected with the
/// offending line number.
pub fn load_price_csv(path: &Path) -> Result<PriceTable> {
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["date", "market_id", "level"])?;
    let mut rows: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 3 {
            return Err(Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("expected 3 fields, got {}", record.len()),
            });
        }
        let date = parse_date(&record[0], path, line)?;
        let market = record[1].trim().to_string();
        let level = parse_f64(&record[2], path, line)?;
        if !level.is_finite() || level <= 0.0 {
            return Err(Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("non-positive level {level} for {market}"),
            });
        }
        if rows.entry(market.clone()).or_default().insert(date, level).is_some() {
            return Err(Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("duplicate row for ({date}, {market})"),
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Validation {
            path: path_str(path),
            msg: "no data rows".into(),
        });
    }
    let mut markets = BTreeMap::new();
    for (id, by_date) in rows {
        let (dates, values): (Vec<_>, Vec<_>) = by_date.into_iter().unzip();
        markets.insert(id, DailySeries::new(dates, values)?);
    }
    PriceTable::new(markets)
}

/// Load `date,factor_id,category,value`.
pub fn load_risk_csv(path: &Path) -> Result<RiskFactorTable> {
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["date", "factor_id", "category", "value"])?;
    let mut cats: BTreeMap<String, StressCategory> = BTreeMap::new();
    let mut rows: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 4 {
            return Err(Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let date = parse_date(&record[0], path, line)?;
        let factor = record[1].trim().to_string();
        let category: StressCategory =
            record[2].trim().parse().map_err(|msg: String| Error::Malformed {
                path: path_str(path),
                line,
                msg,
            })?;
        let value = parse_f64(&record[3], path, line)?;
        if let Some(prev) = cats.insert(factor.clone(), category) {
            if prev != category {
                return Err(Error::Malformed {
                    path: path_str(path),
                    line,
                    msg: format!("factor {factor} tagged with two categories"),
                });
            }
        }
        if rows.entry(factor.clone()).or_default().insert(date, value).is_some() {
            return Err(Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("duplicate row for ({date}, {factor})"),
            });
        }
    }
    let mut factors = Vec::new();
    for (id, by_date) in rows {
        let (dates, values): (Vec<_>, Vec<_>) = by_date.into_iter().unzip();
        factors.push(RiskFactor {
            category: cats[&id],
            id,
            series: DailySeries::new(dates, values)?,
        });
    }
    RiskFactorTable::new(factors)
}

/// Load per-headline rows `date,headline_text,label` (label may be empty).
/// Enforces the per-date headline budget.
pub fn load_headline_csv(path: &Path, budget: usize) -> Result<Vec<HeadlineRecord>> {
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["date", "headline_text", "label"])?;
    let mut records = Vec::new();
    let mut per_date: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let date = parse_date(&record[0], path, line)?;
        let text = record[1].to_string();
        let label = match record[2].trim() {
            "" => None,
            raw => Some(raw.parse::<SentimentLabel>().map_err(|msg| Error::Malformed {
                path: path_str(path),
                line,
                msg,
            })?),
        };
        let count = per_date.entry(date).or_insert(0);
        *count += 1;
        if *count > budget {
            return Err(Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("more than {budget} headlines on {date}"),
            });
        }
        records.push(HeadlineRecord {
            date,
            headline_text: text,
            label,
        });
    }
    Ok(records)
}

/// Load sentiment data, auto-detecting the schema by header: either
/// per-date counts `date,n_pos,n_neg,n_neutral` or per-headline rows
/// `date,headline_text,label`. Per-headline input is scored (where labels
/// are missing) and reduced to counts.
pub fn load_sentiment_csv(
    path: &Path,
    scorer: &dyn HeadlineScorer,
    budget: usize,
) -> Result<Vec<SentimentDay>> {
    let mut reader = open_reader(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    drop(reader);
    if headers == ["date", "n_pos", "n_neg", "n_neutral"] {
        load_sentiment_counts_csv(path)
    } else if headers == ["date", "headline_text", "label"] {
        let records = load_headline_csv(path, budget)?;
        let (labeled, _excluded) = score_headlines(scorer, &records);
        reduce_to_counts(&labeled)
    } else {
        Err(Error::Malformed {
            path: path_str(path),
            line: 1,
            msg: format!("unrecognized sentiment header {headers:?}"),
        })
    }
}

fn load_sentiment_counts_csv(path: &Path) -> Result<Vec<SentimentDay>> {
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["date", "n_pos", "n_neg", "n_neutral"])?;
    let mut days = Vec::new();
    let mut seen: BTreeMap<NaiveDate, ()> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let date = parse_date(&record[0], path, line)?;
        if seen.insert(date, ()).is_some() {
            return Err(Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("duplicate sentiment row for {date}"),
            });
        }
        let parse_count = |raw: &str| -> Result<u32> {
            raw.trim().parse::<u32>().map_err(|_| Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("bad count '{raw}' (counts must be non-negative integers)"),
            })
        };
        let day = SentimentDay {
            date,
            n_pos: parse_count(&record[1])?,
            n_neg: parse_count(&record[2])?,
            n_neutral: parse_count(&record[3])?,
        };
        if day.total() == 0 {
            return Err(Error::Malformed {
                path: path_str(path),
                line,
                msg: format!("all-zero counts on {date}"),
            });
        }
        days.push(day);
    }
    days.sort_by_key(|d| d.date);
    Ok(days)
}

/// Write a price table back out in loader schema. Used for round-trip
/// checks and for re-exporting fixtures.
pub fn write_price_csv(path: &Path, table: &PriceTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "market_id", "level"])?;
    for (id, series) in table.markets() {
        for (date, level) in series.iter() {
            w.write_record([date.to_string(), id.to_string(), format!("{level}")])?;
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: path_str(path),
        source: e,
    })
}

pub fn write_risk_csv(path: &Path, table: &RiskFactorTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "factor_id", "category", "value"])?;
    for f in table.factors() {
        for (date, value) in f.series.iter() {
            w.write_record([
                date.to_string(),
                f.id.clone(),
                f.category.to_string(),
                format!("{value}"),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: path_str(path),
        source: e,
    })
}

pub fn write_sentiment_counts_csv(path: &Path, days: &[SentimentDay]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "n_pos", "n_neg", "n_neutral"])?;
    for d in days {
        w.write_record([
            d.date.to_string(),
            d.n_pos.to_string(),
            d.n_neg.to_string(),
            d.n_neutral.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path_str(path),
        source: e,
    })
}
