//! Time series of song features, changepoints and event windows.

mod bocpd;
mod events;
mod series;

pub use bocpd::{bocpd, suppress, BocpdConfig, ChangepointReport, Detection};
pub use events::{event_windows, welch_p_value, Event, EventTimeline, EventWindow};
pub use series::{
    aggregate, month_index, month_label, parse_month, rebucket, Granularity, Observation, SeriesPoint, TimeSeries,
};

/// z-scores a series; a constant series maps to zeros.
pub fn standardize(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        vec![0.0; v.len()]
    } else {
        v.iter().map(|x| (x - m) / sd).collect()
    }
}
