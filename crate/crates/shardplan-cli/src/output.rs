//! Rendering helpers shared by the subcommands: exact fractions for human
//! output, numerator/denominator pairs for machine output.

use serde_json::{json, Value};
use shardplan::maps::{Rate, RateReport};

/// Formats a rate as an exact fraction, annotated with a rounded decimal
/// when it is not an integer: `5/4 (~1.250)`.
pub fn fraction(rate: Rate) -> String {
    if *rate.denom() == 1 {
        format!("{}", rate.numer())
    } else {
        let approx = *rate.numer() as f64 / *rate.denom() as f64;
        format!("{}/{} (~{approx:.3})", rate.numer(), rate.denom())
    }
}

/// A rate as a machine-readable numerator/denominator pair.
pub fn rate_json(rate: Rate) -> Value {
    json!({ "num": *rate.numer(), "den": *rate.denom() })
}

/// A full rate report as machine-readable JSON.
pub fn rates_json(report: &RateReport) -> Value {
    json!({
        "average": rate_json(report.average()),
        "worst": rate_json(report.worst()),
        "per_participant": report.per_participant().iter().map(|&r| rate_json(r)).collect::<Vec<_>>(),
    })
}

/// One human-readable line summarizing a rate report.
pub fn rates_line(report: &RateReport) -> String {
    format!("rates: average {}, worst {}", fraction(report.average()), fraction(report.worst()))
}

/// Prints a JSON value followed by a newline.
pub fn emit_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize"));
}
