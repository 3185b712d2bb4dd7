//! Calendar-aligned daily series and the rolling/expanding statistics the
//! signal pipelines are built from.
//!
//! A [`DailySeries`] owns its dates; a value being "absent" on a date means
//! the date is simply not in the series. Rolling operations therefore return
//! shorter series that begin once `min_obs` observations exist, so warm-up
//! periods are absent rather than zero-filled.

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// Strictly increasing sequence of trading days.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingCalendar {
    dates: Vec<NaiveDate>,
}

impl TradingCalendar {
    pub fn new(dates: Vec<NaiveDate>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::EmptySeries("calendar".into()));
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::UnsortedDates(pair[1]));
            }
        }
        Ok(Self { dates })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// One real value per trading day. Units depend on role: index points for
/// prices, dimensionless fractions for returns and signals.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl DailySeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::EmptySeries("series".into()));
        }
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch {
                dates: dates.len(),
                values: values.len(),
            });
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::UnsortedDates(pair[1]));
            }
        }
        Ok(Self { dates, values })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last_date(&self) -> NaiveDate {
        *self.dates.last().unwrap()
    }

    /// Value at `date`, if the date is present.
    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }

    pub fn calendar(&self) -> Result<TradingCalendar> {
        TradingCalendar::new(self.dates.clone())
    }

    /// Restrict to dates `<= cutoff`. Returns `None` when nothing remains.
    pub fn truncate_at(&self, cutoff: NaiveDate) -> Option<DailySeries> {
        let n = self.dates.partition_point(|d| *d <= cutoff);
        if n == 0 {
            return None;
        }
        Some(DailySeries {
            dates: self.dates[..n].to_vec(),
            values: self.values[..n].to_vec(),
        })
    }

    /// Restrict to dates `>= start`.
    pub fn clip_start(&self, start: NaiveDate) -> Option<DailySeries> {
        let i = self.dates.partition_point(|d| *d < start);
        if i == self.dates.len() {
            return None;
        }
        Some(DailySeries {
            dates: self.dates[i..].to_vec(),
            values: self.values[i..].to_vec(),
        })
    }

    /// Elementwise map over values, dates unchanged.
    pub fn map<F: FnMut(f64) -> f64>(&self, mut f: F) -> DailySeries {
        DailySeries {
            dates: self.dates.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Simple daily returns `p_t / p_{t-1} - 1`, defined from the second date.
    pub fn simple_returns(&self) -> Result<DailySeries> {
        if self.len() < 2 {
            return Err(Error::InvalidParam(
                "need at least 2 observations for returns".into(),
            ));
        }
        let dates = self.dates[1..].to_vec();
        let values = self
            .values
            .windows(2)
            .map(|w| w[1] / w[0] - 1.0)
            .collect();
        DailySeries::new(dates, values)
    }
}

/// Trailing-window parameters. `min_obs` observations must exist before the
/// statistic is defined; until `window` observations exist the available
/// prefix is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RollingParams {
    pub window: usize,
    pub min_obs: usize,
}

impl RollingParams {
    pub fn new(window: usize, min_obs: usize) -> Result<Self> {
        if window == 0 || min_obs == 0 || min_obs > window {
            return Err(Error::InvalidParam(format!(
                "window {window} / min_obs {min_obs}"
            )));
        }
        Ok(Self { window, min_obs })
    }
}

/// Restrict every series to the intersection of their calendars, order
/// preserved. Errors with the offending names when the intersection is empty.
pub fn align(series: &[(&str, &DailySeries)]) -> Result<Vec<DailySeries>> {
    if series.is_empty() {
        return Err(Error::EmptySeries("align input".into()));
    }
    let mut common: Vec<NaiveDate> = series[0].1.dates.clone();
    for (_, s) in &series[1..] {
        common.retain(|d| s.dates.binary_search(d).is_ok());
    }
    if common.is_empty() {
        return Err(Error::EmptyIntersection {
            names: series.iter().map(|(n, _)| n.to_string()).collect(),
        });
    }
    series
        .iter()
        .map(|(_, s)| {
            let values = common.iter().map(|d| s.get(*d).unwrap()).collect();
            DailySeries::new(common.clone(), values)
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n-1 denominator), two-pass. Exactly zero on
/// constant input so the zero-variance z-score rule triggers reliably.
fn sample_std(xs: &[f64]) -> f64 {
    if xs.iter().all(|x| *x == xs[0]) {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Trailing mean over the `p.window` observations ending at t (inclusive).
pub fn rolling_mean(s: &DailySeries, p: &RollingParams) -> Result<DailySeries> {
    let n = s.len();
    if n < p.min_obs {
        return Err(Error::EmptySeries(format!(
            "series shorter than min_obs {}",
            p.min_obs
        )));
    }
    let mut dates = Vec::with_capacity(n - p.min_obs + 1);
    let mut values = Vec::with_capacity(n - p.min_obs + 1);
    for i in (p.min_obs - 1)..n {
        let lo = (i + 1).saturating_sub(p.window);
        dates.push(s.dates[i]);
        values.push(mean(&s.values[lo..=i]));
    }
    DailySeries::new(dates, values)
}

/// Trailing z-score with sample std; a zero-variance window yields 0.
pub fn rolling_zscore(s: &DailySeries, p: &RollingParams) -> Result<DailySeries> {
    if p.min_obs < 2 {
        return Err(Error::InvalidParam(
            "z-score needs min_obs >= 2".into(),
        ));
    }
    let n = s.len();
    if n < p.min_obs {
        return Err(Error::EmptySeries(format!(
            "series shorter than min_obs {}",
            p.min_obs
        )));
    }
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for i in (p.min_obs - 1)..n {
        let lo = (i + 1).saturating_sub(p.window);
        let win = &s.values[lo..=i];
        let sd = sample_std(win);
        let z = if sd == 0.0 {
            0.0
        } else {
            (s.values[i] - mean(win)) / sd
        };
        dates.push(s.dates[i]);
        values.push(z);
    }
    DailySeries::new(dates, values)
}

/// Expanding-window z-score: moments over all observations up to t.
pub fn expanding_zscore(s: &DailySeries, min_obs: usize) -> Result<DailySeries> {
    let p = RollingParams::new(s.len().max(min_obs), min_obs)?;
    rolling_zscore(s, &p)
}

/// q-th empirical percentile over all observations up to and including t,
/// with linear interpolation between closest ranks.
pub fn expanding_percentile(s: &DailySeries, q: f64, min_obs: usize) -> Result<DailySeries> {
    if !(0.0..1.0).contains(&q) || q == 0.0 {
        return Err(Error::InvalidParam(format!("percentile q {q} not in (0,1)")));
    }
    if min_obs < 2 {
        return Err(Error::InvalidParam("percentile needs min_obs >= 2".into()));
    }
    let n = s.len();
    if n < min_obs {
        return Err(Error::EmptySeries(format!(
            "series shorter than min_obs {min_obs}"
        )));
    }
    let mut sorted: Vec<f64> = Vec::with_capacity(n);
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for i in 0..n {
        let v = s.values[i];
        let pos = sorted.partition_point(|x| *x < v);
        sorted.insert(pos, v);
        if i + 1 >= min_obs {
            dates.push(s.dates[i]);
            values.push(percentile_linear(&sorted, q));
        }
    }
    DailySeries::new(dates, values)
}

/// Linear-interpolation percentile of an already sorted slice.
pub fn percentile_linear(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite(format!("normal_cdf({x})")));
    }
    Ok(0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2))
}

/// Last trading date of each calendar month present in the calendar.
pub fn month_ends(cal: &TradingCalendar) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    let dates = cal.dates();
    for i in 0..dates.len() {
        let last_of_month = i + 1 == dates.len()
            || (dates[i + 1].year(), dates[i + 1].month())
                != (dates[i].year(), dates[i].month());
        if last_of_month {
            out.push(dates[i]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn series(start_day: u32, values: &[f64]) -> DailySeries {
        let dates = (0..values.len())
            .map(|i| d(2020, 1, start_day) + chrono::Days::new(i as u64))
            .collect();
        DailySeries::new(dates, values.to_vec()).unwrap()
    }

    #[test]
    fn calendar_rejects_unsorted() {
        assert!(TradingCalendar::new(vec![d(2020, 1, 2), d(2020, 1, 1)]).is_err());
        assert!(TradingCalendar::new(vec![d(2020, 1, 1), d(2020, 1, 1)]).is_err());
        assert!(TradingCalendar::new(vec![]).is_err());
    }

    #[test]
    fn align_identity_and_intersection() {
        let a = series(1, &[1.0, 2.0, 3.0]);
        let b = series(1, &[4.0, 5.0, 6.0]);
        let out = align(&[("a", &a), ("b", &b)]).unwrap();
        assert_eq!(out[0], a);
        assert_eq!(out[1], b);

        // {d1,d2,d3} ∩ {d2,d3,d4} = {d2,d3}
        let c = series(2, &[7.0, 8.0, 9.0]);
        let out = align(&[("a", &a), ("c", &c)]).unwrap();
        assert_eq!(out[0].dates(), &[d(2020, 1, 2), d(2020, 1, 3)]);
        assert_eq!(out[0].values(), &[2.0, 3.0]);
        assert_eq!(out[1].values(), &[7.0, 8.0]);
    }

    #[test]
    fn align_disjoint_errors_with_names() {
        let a = series(1, &[1.0, 2.0]);
        let b = series(10, &[1.0, 2.0]);
        let err = align(&[("left", &a), ("right", &b)]).unwrap_err();
        match err {
            Error::EmptyIntersection { names } => {
                assert_eq!(names, vec!["left".to_string(), "right".to_string()])
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn align_matches_membership_scan_oracle() {
        // 3 series with date drops vs a brute-force per-date membership scan.
        let mk = |keep: &[usize]| {
            let dates: Vec<_> = keep
                .iter()
                .map(|i| d(2020, 1, 1) + chrono::Days::new(*i as u64))
                .collect();
            let values: Vec<f64> = keep.iter().map(|i| *i as f64).collect();
            DailySeries::new(dates, values).unwrap()
        };
        let a = mk(&[0, 1, 2, 4, 5, 7, 9]);
        let b = mk(&[0, 2, 3, 4, 5, 8, 9]);
        let c = mk(&[1, 2, 4, 5, 6, 9]);
        let out = align(&[("a", &a), ("b", &b), ("c", &c)]).unwrap();

        let mut expect = Vec::new();
        for i in 0..10usize {
            let date = d(2020, 1, 1) + chrono::Days::new(i as u64);
            if a.get(date).is_some() && b.get(date).is_some() && c.get(date).is_some() {
                expect.push(date);
            }
        }
        assert_eq!(out[0].dates(), expect.as_slice());
        assert_eq!(out[1].dates(), expect.as_slice());
        assert_eq!(out[2].dates(), expect.as_slice());
    }

    #[test]
    fn rolling_mean_hand_case() {
        let s = series(1, &[1.0, 2.0, 3.0, 4.0]);
        let p = RollingParams::new(2, 2).unwrap();
        let out = rolling_mean(&s, &p).unwrap();
        assert_eq!(out.dates().len(), 3);
        assert_eq!(out.values(), &[1.5, 2.5, 3.5]);
        // absent before min_obs
        assert_eq!(out.first_date(), d(2020, 1, 2));
    }

    #[test]
    fn rolling_mean_constant() {
        let s = series(1, &[7.0; 20]);
        let p = RollingParams::new(5, 5).unwrap();
        let out = rolling_mean(&s, &p).unwrap();
        assert!(out.values().iter().all(|v| *v == 7.0));
    }

    #[test]
    fn rolling_mean_matches_naive_oracle() {
        let vals: Vec<f64> = (0..100).map(|i| ((i * 37 + 11) % 97) as f64 / 9.7).collect();
        let s = series(1, &vals);
        let p = RollingParams::new(10, 10).unwrap();
        let out = rolling_mean(&s, &p).unwrap();
        for (k, (_, v)) in out.iter().enumerate() {
            let i = k + 9;
            let lo = (i + 1).saturating_sub(10);
            let naive: f64 = vals[lo..=i].iter().sum::<f64>() / 10.0;
            assert!((v - naive).abs() <= 1e-10);
        }
    }

    #[test]
    fn zscore_constant_is_zero() {
        let s = series(1, &[3.0; 10]);
        let p = RollingParams::new(5, 5).unwrap();
        let out = rolling_zscore(&s, &p).unwrap();
        assert!(out.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zscore_hand_case() {
        // [0,0,3], window 3: mean 1, sample std sqrt(3), z = 2/sqrt(3)
        let s = series(1, &[0.0, 0.0, 3.0]);
        let p = RollingParams::new(3, 3).unwrap();
        let out = rolling_zscore(&s, &p).unwrap();
        let expect = 2.0 / 3.0_f64.sqrt();
        assert!((out.values()[0] - expect).abs() < 1e-12);
        assert!((out.values()[0] - 1.1547).abs() < 1e-4);
    }

    #[test]
    fn zscore_matches_window_recomputation() {
        let vals: Vec<f64> = (0..200).map(|i| ((i * 53 + 7) % 211) as f64 / 21.1).collect();
        let s = series(1, &vals);
        let p = RollingParams::new(50, 50).unwrap();
        let out = rolling_zscore(&s, &p).unwrap();
        for (k, (_, z)) in out.iter().enumerate() {
            let i = k + 49;
            let win = &vals[i + 1 - 50..=i];
            let m = win.iter().sum::<f64>() / 50.0;
            let var = win.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 49.0;
            let expect = (vals[i] - m) / var.sqrt();
            assert!((z - expect).abs() <= 1e-10);
        }
    }

    #[test]
    fn expanding_percentile_uniform_1_to_100() {
        let vals: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let s = series(1, &vals);
        let out = expanding_percentile(&s, 0.8, 2).unwrap();
        let last = *out.values().last().unwrap();
        assert!((last - 80.2).abs() < 1e-12);
    }

    #[test]
    fn expanding_percentile_constant() {
        let s = series(1, &[5.0; 30]);
        let out = expanding_percentile(&s, 0.8, 2).unwrap();
        assert!(out.values().iter().all(|v| *v == 5.0));
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(normal_cdf(0.0).unwrap(), 0.5);
        assert!((normal_cdf(1.0).unwrap() - 0.841344746068543).abs() < 1e-9);
        assert!(normal_cdf(f64::NAN).is_err());
        assert!(normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn month_ends_cases() {
        let cal = TradingCalendar::new(vec![d(2020, 1, 6), d(2020, 1, 7)]).unwrap();
        assert_eq!(month_ends(&cal), vec![d(2020, 1, 7)]);

        // weekday calendar Jan 2 .. Feb 27
        let mut dates = Vec::new();
        let mut cur = d(2020, 1, 2);
        while cur <= d(2020, 2, 27) {
            use chrono::Weekday::*;
            if !matches!(cur.weekday(), Sat | Sun) {
                dates.push(cur);
            }
            cur = cur.succ_opt().unwrap();
        }
        let cal = TradingCalendar::new(dates).unwrap();
        assert_eq!(month_ends(&cal), vec![d(2020, 1, 31), d(2020, 2, 27)]);
    }

    #[test]
    fn month_ends_matches_group_by_oracle() {
        use std::collections::BTreeMap;
        let mut dates = Vec::new();
        let mut cur = d(2015, 1, 1);
        let mut i = 0u32;
        while cur <= d(2019, 12, 31) {
            // drop some days to make the calendar irregular
            if i % 7 != 3 && i % 5 != 1 {
                dates.push(cur);
            }
            cur = cur.succ_opt().unwrap();
            i += 1;
        }
        let cal = TradingCalendar::new(dates.clone()).unwrap();
        let mut groups: BTreeMap<(i32, u32), NaiveDate> = BTreeMap::new();
        for date in &dates {
            let e = groups.entry((date.year(), date.month())).or_insert(*date);
            if *date > *e {
                *e = *date;
            }
        }
        let expect: Vec<_> = groups.into_values().collect();
        assert_eq!(month_ends(&cal), expect);
    }
}
