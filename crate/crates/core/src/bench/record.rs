use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::BenchError;
use crate::solve::relative_gap;

/// Serializes non-finite floats as the strings `inf`, `-inf` and `nan`.
mod lenient_f64 {
    use super::*;
    use serde::de::{self, Visitor};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct F64Visitor;

    impl Visitor<'_> for F64Visitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            v.trim().parse().map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(F64Visitor)
    }
}

/// One (instance, configuration) cell of a benchmark batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub config: String,
    pub status: String,
    #[serde(with = "lenient_f64")]
    pub time: f64,
    #[serde(with = "lenient_f64")]
    pub lower: f64,
    #[serde(with = "lenient_f64")]
    pub upper: f64,
    /// Relative gap in percent.
    #[serde(with = "lenient_f64")]
    pub gap: f64,
}

impl RunRecord {
    pub fn new(
        instance: impl Into<String>,
        config: impl Into<String>,
        status: impl Into<String>,
        time: f64,
        lower: f64,
        upper: f64,
    ) -> Self {
        RunRecord {
            instance: instance.into(),
            config: config.into(),
            status: status.into(),
            time,
            lower,
            upper,
            gap: gap_percent(lower, upper),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.status == "error"
    }
}

pub fn gap_percent(lower: f64, upper: f64) -> f64 {
    100.0 * relative_gap(lower, upper)
}

pub const CSV_HEADER: &str = "instance,config,status,time,lower,upper,gap";

pub fn records_to_csv(records: &[RunRecord]) -> Result<String, BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let mut out = format!("{CSV_HEADER}\n");
    for r in records {
        w.serialize(r).map_err(|e| BenchError::Table(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| BenchError::Table(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| BenchError::Table(e.to_string()))?);
    Ok(out)
}

pub fn records_from_csv(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| BenchError::Table(e.to_string()))?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(BenchError::Table(format!("unexpected header `{}`", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(|e| BenchError::Table(e.to_string()))).collect()
}

pub fn records_to_json(records: &[RunRecord]) -> String {
    serde_json::to_string_pretty(records).expect("record serialization is infallible")
}

pub fn records_from_json(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    serde_json::from_str(text).map_err(|e| BenchError::Table(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Vec<RunRecord> {
        vec![
            RunRecord::new("h1", "default", "optimal", 0.012345678901, -400.0, -400.0),
            RunRecord::new("g, quoted", "cuts", "time_limit", 120.0, -512.25, f64::INFINITY),
            RunRecord::new("g2", "heuristic", "error", 0.5, f64::NEG_INFINITY, f64::INFINITY),
            RunRecord::new("g3", "cuts+heuristic", "node_limit", 1e-7, -1.0 / 3.0, 0.1 + 0.2),
        ]
    }

    #[test]
    fn csv_json_csv_lossless() {
        let csv = records_to_csv(&table()).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        let parsed = records_from_csv(&csv).unwrap();
        assert_eq!(parsed, table());
        let json = records_to_json(&parsed);
        assert!(json.contains("\"inf\""));
        let back = records_from_json(&json).unwrap();
        assert_eq!(records_to_csv(&back).unwrap(), csv);
    }

    #[test]
    fn stored_gap_matches_bounds() {
        for r in table() {
            let g = gap_percent(r.lower, r.upper);
            assert!(g == r.gap || (g - r.gap).abs() <= 1e-12);
        }
    }
}
