use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Monthly,
    Yearly,
    FiveYear,
    Decade,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Monthly => "monthly",
            Granularity::Yearly => "yearly",
            Granularity::FiveYear => "five_year",
            Granularity::Decade => "decade",
        }
    }

    /// Bucket width in years; `None` for monthly.
    fn years(self) -> Option<i32> {
        match self {
            Granularity::Monthly => None,
            Granularity::Yearly => Some(1),
            Granularity::FiveYear => Some(5),
            Granularity::Decade => Some(10),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monthly" => Ok(Granularity::Monthly),
            "yearly" => Ok(Granularity::Yearly),
            "five_year" | "5y" => Ok(Granularity::FiveYear),
            "decade" => Ok(Granularity::Decade),
            _ => Err(Error::param(format!("unknown granularity `{s}`"))),
        }
    }
}

/// A month as `year * 12 + (month - 1)`.
pub fn month_index(year: i32, month: u8) -> i32 {
    year * 12 + month as i32 - 1
}

pub fn month_label(index: i32) -> String {
    format!("{:04}-{:02}", index.div_euclid(12), index.rem_euclid(12) + 1)
}

pub fn parse_month(s: &str) -> Result<i32> {
    let bad = || Error::param(format!("`{s}` is not a YYYY-MM month"));
    let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
    if y.len() != 4 || m.len() != 2 {
        return Err(bad());
    }
    let year: i32 = y.parse().map_err(|_| bad())?;
    let month: u8 = m.parse().map_err(|_| bad())?;
    if !(1..=12).contains(&month) {
        return Err(bad());
    }
    Ok(month_index(year, month))
}

/// One song-level measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub id: String,
    pub year: i32,
    pub month: Option<u8>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    /// Start year, or month index for monthly series.
    pub period_start: i32,
    pub label: String,
    pub mean: f64,
    pub count: usize,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub feature_name: String,
    pub granularity: Granularity,
    pub points: Vec<SeriesPoint>,
}

impl TimeSeries {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }
}

fn bucket(g: Granularity, year: i32, month: Option<u8>) -> Option<i32> {
    match g.years() {
        Some(w) => Some(year.div_euclid(w) * w),
        None => month.map(|m| month_index(year, m)),
    }
}

fn label(g: Granularity, start: i32) -> String {
    match g {
        Granularity::Monthly => month_label(start),
        Granularity::Yearly => start.to_string(),
        _ => format!("{}-{}", start, start + g.years().expect("multi-year") - 1),
    }
}

/// Sums kept per bucket: count, Σx, Σx².
type Moments = (usize, f64, f64);

fn from_moments(name: &str, g: Granularity, buckets: BTreeMap<i32, Moments>) -> TimeSeries {
    let points = buckets
        .into_iter()
        .map(|(start, (n, s, s2))| {
            let mean = s / n as f64;
            let var = (s2 / n as f64 - mean * mean).max(0.0);
            SeriesPoint {
                period_start: start,
                label: label(g, start),
                mean,
                count: n,
                std: var.sqrt(),
            }
        })
        .collect();
    TimeSeries {
        feature_name: name.to_string(),
        granularity: g,
        points,
    }
}

/// Groups observations by period. Empty periods are omitted; monthly
/// series skip observations without a month.
pub fn aggregate(name: &str, obs: &[Observation], g: Granularity) -> Result<TimeSeries> {
    if let Some(i) = obs.iter().position(|o| !o.value.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut buckets: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for o in obs {
        if let Some(b) = bucket(g, o.year, o.month) {
            buckets.entry(b).or_default().push(o.value);
        }
    }
    // two-pass per bucket for the std
    let points = buckets
        .into_iter()
        .map(|(start, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            SeriesPoint {
                period_start: start,
                label: label(g, start),
                mean,
                count: v.len(),
                std: var.sqrt(),
            }
        })
        .collect();
    Ok(TimeSeries {
        feature_name: name.to_string(),
        granularity: g,
        points,
    })
}

/// Merges a series into a coarser granularity using count-weighted means
/// and pooled variances.
pub fn rebucket(series: &TimeSeries, g: Granularity) -> Result<TimeSeries> {
    let from = series.granularity;
    let coarser = match (from.years(), g.years()) {
        (None, _) => true,
        (Some(a), Some(b)) => b >= a && b % a == 0,
        (Some(_), None) => false,
    };
    if !coarser {
        return Err(Error::param(format!("cannot re-bucket {from} into {g}")));
    }
    let mut buckets: BTreeMap<i32, Moments> = BTreeMap::new();
    for p in &series.points {
        let (year, month) = match from {
            Granularity::Monthly => (p.period_start.div_euclid(12), Some((p.period_start.rem_euclid(12) + 1) as u8)),
            _ => (p.period_start, None),
        };
        let b = bucket(g, year, month).expect("coarser target");
        let n = p.count as f64;
        let e = buckets.entry(b).or_insert((0, 0.0, 0.0));
        e.0 += p.count;
        e.1 += n * p.mean;
        e.2 += n * (p.std * p.std + p.mean * p.mean);
    }
    Ok(from_moments(&series.feature_name, g, buckets))
}
