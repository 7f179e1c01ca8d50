//! External event timeline and before/after window comparison.

use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::series::{month_label, parse_month, Granularity, TimeSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    /// Month index, `year * 12 + month - 1`.
    pub month: i32,
    pub name: String,
    pub tags: Vec<String>,
    pub regions: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EventTimeline {
    pub events: Vec<Event>,
}

#[derive(Deserialize)]
struct EventRow {
    month: String,
    name: String,
    #[serde(default)]
    tags: String,
    #[serde(default)]
    regions: String,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(';').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
}

impl EventTimeline {
    /// Reads a `month,name,tags,regions` CSV with a header row; list
    /// columns are `;`-joined.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
        let mut events = Vec::new();
        for (i, row) in rdr.deserialize::<EventRow>().enumerate() {
            let row = row?;
            let month = parse_month(&row.month).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line_no: i + 2,
                reason: e.to_string(),
            })?;
            events.push(Event {
                month,
                name: row.name.trim().to_string(),
                tags: split_list(&row.tags),
                regions: split_list(&row.regions),
            });
        }
        Ok(EventTimeline { events })
    }

    pub fn find(&self, name: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventWindow {
    pub event: String,
    pub month: String,
    pub window: usize,
    pub pre_n: usize,
    pub post_n: usize,
    pub pre_mean: f64,
    pub post_mean: f64,
    /// `(post − pre) / |pre|`; absent when the pre mean is 0.
    pub pct_change: Option<f64>,
    /// Two-sided Welch t-test on the monthly points of both windows.
    pub p_value: f64,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
}

/// Two-sided Welch t-test p-value. Needs at least two points per sample.
pub fn welch_p_value(a: &[f64], b: &[f64]) -> f64 {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return if ma == mb { 1.0 } else { 0.0 };
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Compares the `window` months before an event with the `window` months
/// after it (the event month itself is in neither). The series must span
/// the whole range and hold at least two points on each side.
pub fn event_windows(series: &TimeSeries, timeline: &EventTimeline, event: &str, window: usize) -> Result<EventWindow> {
    if series.granularity != Granularity::Monthly {
        return Err(Error::param("event windows need a monthly series"));
    }
    if window < 2 {
        return Err(Error::param("event window must be >= 2 months"));
    }
    let ev = timeline
        .find(event)
        .ok_or_else(|| Error::param(format!("no event named `{event}`")))?;
    let (lo, hi) = (ev.month - window as i32, ev.month + window as i32);
    let (first, last) = match (series.points.first(), series.points.last()) {
        (Some(f), Some(l)) => (f.period_start, l.period_start),
        _ => (i32::MAX, i32::MIN),
    };
    let mut missing: Vec<String> = (lo..=hi)
        .filter(|&m| m < first || m > last)
        .map(month_label)
        .collect();
    let pick = |a: i32, b: i32| -> Vec<f64> {
        series
            .points
            .iter()
            .filter(|p| p.period_start >= a && p.period_start <= b)
            .map(|p| p.mean)
            .collect()
    };
    let pre = pick(lo, ev.month - 1);
    let post = pick(ev.month + 1, hi);
    if missing.is_empty() && (pre.len() < 2 || post.len() < 2) {
        missing = (lo..=hi)
            .filter(|&m| m != ev.month && !series.points.iter().any(|p| p.period_start == m))
            .map(month_label)
            .collect();
    }
    if !missing.is_empty() {
        return Err(Error::Coverage { missing });
    }
    let pre_mean = pre.iter().sum::<f64>() / pre.len() as f64;
    let post_mean = post.iter().sum::<f64>() / post.len() as f64;
    Ok(EventWindow {
        event: ev.name.clone(),
        month: month_label(ev.month),
        window,
        pre_n: pre.len(),
        post_n: post.len(),
        pre_mean,
        post_mean,
        pct_change: (pre_mean != 0.0).then(|| (post_mean - pre_mean) / pre_mean.abs()),
        p_value: welch_p_value(&pre, &post),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trends::series::{month_index, SeriesPoint};

    fn monthly(start: i32, values: &[f64]) -> TimeSeries {
        TimeSeries {
            feature_name: "f".into(),
            granularity: Granularity::Monthly,
            points: values
                .iter()
                .enumerate()
                .map(|(i, &v)| SeriesPoint {
                    period_start: start + i as i32,
                    label: month_label(start + i as i32),
                    mean: v,
                    count: 1,
                    std: 0.0,
                })
                .collect(),
        }
    }

    fn timeline(month: i32) -> EventTimeline {
        EventTimeline {
            events: vec![Event {
                month,
                name: "e".into(),
                tags: vec![],
                regions: vec![],
            }],
        }
    }

    #[test]
    fn identical_windows() {
        let m = month_index(2000, 1);
        let s = monthly(m - 12, &[2.0; 25]);
        let w = event_windows(&s, &timeline(m), "e", 12).unwrap();
        assert_eq!(w.pct_change, Some(0.0));
        assert_eq!(w.p_value, 1.0);
    }

    #[test]
    fn step_change() {
        let m = month_index(2000, 1);
        let mut v = vec![1.0; 13];
        v.extend([1.47; 12]);
        let w = event_windows(&monthly(m - 12, &v), &timeline(m), "e", 12).unwrap();
        assert!((w.pct_change.unwrap() - 0.47).abs() < 1e-12);
        assert!(w.p_value < 1e-6);
    }

    #[test]
    fn edge_event_reports_missing_months() {
        let m = month_index(2000, 1);
        let s = monthly(m - 3, &[1.0; 20]);
        match event_windows(&s, &timeline(m), "e", 12) {
            Err(Error::Coverage { missing }) => {
                assert_eq!(missing.len(), 9);
                assert_eq!(missing[0], "1999-01");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn welch_matches_hand_computation() {
        // means 2 and 5, variances 1 and 1, n = 3 each: t = -3 / sqrt(2/3), df = 4
        let p = welch_p_value(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        let t = 3.0 / (2.0f64 / 3.0).sqrt();
        let expected = 2.0 * StudentsT::new(0.0, 1.0, 4.0).unwrap().sf(t);
        assert!((p - expected).abs() < 1e-12);
    }
}
