use super::cubature::CubatureRule;
use super::lattice::Lattice;
use crate::error::{domain, Error, Result};
use crate::manifold::{ManifoldModel, ModelKind, Point};
use std::io::{Read, Write};

/// Coordinate column names for a model.
pub fn point_columns(kind: ModelKind) -> &'static [&'static str] {
    match kind {
        ModelKind::Circle => &["theta"],
        ModelKind::Torus2 => &["x1", "x2"],
        ModelKind::Sphere2 => &["colatitude", "longitude"],
    }
}

/// Write points (and optional weights) as CSV with a header row.
pub fn write_points_csv<W: Write>(
    out: W,
    model: &ManifoldModel,
    points: &[Point],
    weights: Option<&[f64]>,
) -> Result<()> {
    if let Some(w) = weights {
        if w.len() != points.len() {
            return domain("weight count does not match point count");
        }
    }
    let mut wr = csv::Writer::from_writer(out);
    let cols = point_columns(model.kind());
    let mut header: Vec<&str> = cols.to_vec();
    if weights.is_some() {
        header.push("weight");
    }
    wr.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut rec = vec![p.a.to_string()];
        if cols.len() == 2 {
            rec.push(p.b.to_string());
        }
        if let Some(w) = weights {
            rec.push(w[i].to_string());
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Read points from CSV; a `weight` column is returned when present.
pub fn read_points_csv<R: Read>(input: R, model: &ManifoldModel) -> Result<(Vec<Point>, Option<Vec<f64>>)> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    let cols = point_columns(model.kind());
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let idx: Vec<usize> = cols
        .iter()
        .map(|c| find(c).ok_or_else(|| Error::Domain(format!("missing column '{c}' for {}", model.kind()))))
        .collect::<Result<_>>()?;
    let widx = find("weight");
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Domain(format!("row {}: column {i} is not a number", line + 1)))
        };
        let a = num(idx[0])?;
        let b = if idx.len() == 2 { num(idx[1])? } else { 0.0 };
        points.push(model.normalize(Point { a, b })?);
        if let Some(w) = widx {
            weights.push(num(w)?);
        }
    }
    Ok((points, widx.map(|_| weights)))
}

impl Lattice {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_points_csv(out, &self.model, &self.points, None)
    }
}

impl CubatureRule {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_points_csv(out, &self.model, &self.points, Some(&self.weights))
    }
}
