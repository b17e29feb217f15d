//! Point cloud CSV: header `id,f0,f1,...,fk[,label]`, one point per row.
//! Labels are lowercase class names or `op:<name>`.

use crate::error::{Error, Result};
use crate::types::{PointCloud, QualityClass};

pub fn parse_point_cloud_csv(text: &str) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyCloud);
    }
    if &headers[0] != "id" {
        return Err(parse_error(1, "first column must be `id`"));
    }
    let has_label = headers.len() > 1 && &headers[headers.len() - 1] == "label";
    let n_features = headers.len() - 1 - usize::from(has_label);
    if n_features == 0 {
        return Err(parse_error(1, "at least one feature column `f0` is required"));
    }
    for (k, name) in headers.iter().skip(1).take(n_features).enumerate() {
        if name != format!("f{k}") {
            return Err(parse_error(1, format!("expected column `f{k}`, found `{name}`")));
        }
    }

    let mut ids = Vec::new();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(parse_error(
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let id: u64 = record[0]
            .parse()
            .map_err(|_| parse_error(line, format!("invalid id `{}`", &record[0])))?;
        let point = (1..=n_features)
            .map(|c| {
                record[c]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_error(line, format!("invalid number `{}`", &record[c])))
            })
            .collect::<Result<Vec<f64>>>()?;
        if has_label {
            let label: QualityClass = record[headers.len() - 1]
                .parse()
                .map_err(|e: Error| parse_error(line, e.to_string()))?;
            labels.push(label);
        }
        ids.push(id);
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    PointCloud::new(points, ids, has_label.then_some(labels))
}

pub fn write_point_cloud_csv(cloud: &PointCloud) -> String {
    let mut out = String::from("id");
    for k in 0..cloud.dim() {
        out.push_str(&format!(",f{k}"));
    }
    if cloud.labels().is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for i in 0..cloud.len() {
        out.push_str(&cloud.ids()[i].to_string());
        for v in cloud.point(i) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        if let Some(label) = cloud.label(i) {
            out.push(',');
            out.push_str(&label.to_string());
        }
        out.push('\n');
    }
    out
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    parse_error(line, e.to_string())
}
