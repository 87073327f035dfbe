//! CSV and JSON renderings of sweep results.

use std::fmt::Write as _;

use hybridsim::RateCurve;
use serde_json::{json, Value};

use crate::config::ExperimentFile;

pub const CSV_HEADER: &str = "method,snr_db,mean_rate_bps_hz,std_rate,trials,failed_trials";

fn num(x: Option<f64>) -> String {
    // Display for f64 is locale-independent and round-trips
    x.map_or_else(|| "NaN".to_string(), |v| v.to_string())
}

/// One row per (method, SNR point), methods in configuration order.
pub fn rates_csv(curves: &[RateCurve]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.method,
                p.snr_db,
                num(p.mean_rate),
                num(p.std_rate),
                p.trials,
                p.failed_trials
            );
        }
    }
    out
}

/// The configuration echo with a `results` block appended; loadable as a
/// configuration again.
pub fn results_json(echo: &ExperimentFile, curves: &[RateCurve]) -> String {
    let mut doc = serde_json::to_value(echo).expect("configuration serializes");
    let results = json!({
        "master_seed": echo.master_seed,
        "curves": curves,
    });
    if let Value::Object(map) = &mut doc {
        map.insert("results".into(), results);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("results serialize");
    text.push('\n');
    text
}
