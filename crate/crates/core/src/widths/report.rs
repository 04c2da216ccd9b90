use super::exponents::{Prediction, RateFit, WidthKind};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Lebesgue exponents in JSON: finite values as numbers, infinity as "inf".
pub mod exponent_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(de::Error::custom(format!("expected a number or \"inf\", got '{t}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryKey {
    #[serde(with = "exponent_serde")]
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub q: f64,
    pub r: f64,
    pub kind: WidthKind,
    pub n: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub exponent: f64,
    pub r_squared: f64,
}

impl From<RateFit> for FitSummary {
    fn from(f: RateFit) -> Self {
        FitSummary { exponent: f.exponent, r_squared: f.r_squared }
    }
}

/// One row of a width sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
    pub oracle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub model: String,
    pub query: QueryKey,
    /// Fits of the upper and lower certificate columns.
    pub upper: Option<FitSummary>,
    pub lower: Option<FitSummary>,
    pub predicted_exponent: Prediction,
    /// Fit of the oracle column when present, otherwise of the upper column.
    pub fit: Option<FitSummary>,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with columns n, upper, lower and, when any row has one, oracle.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let with_oracle = rows.iter().any(|r| r.oracle.is_some());
    let mut wr = csv::Writer::from_writer(out);
    let mut header = vec!["n", "upper", "lower"];
    if with_oracle {
        header.push("oracle");
    }
    wr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.n.to_string(), cell(r.upper), cell(r.lower)];
        if with_oracle {
            rec.push(cell(r.oracle));
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}
