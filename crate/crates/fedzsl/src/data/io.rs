//! CSV ingestion and emission.
//!
//! Attribute CSV: header `class_id,a_0,...,a_{d_a-1}`, one row per class.
//! Feature CSV: header `sample_id,class_id,v_0,...,v_{d_in-1}`.
//! UTF-8, `.` decimal separator, no thousands separators. Values are written
//! with shortest round-trip formatting, so load(write(x)) is bit-identical.

use ndarray::Array2;
use std::path::Path;

use super::{AttributeTable, SampleSet};
use crate::error::{Error, Result};

/// Load a per-class attribute table.
pub fn load_attribute_table(path: impl AsRef<Path>) -> Result<AttributeTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || headers.get(0) != Some("class_id") {
        return Err(Error::MalformedFile {
            path: path.display().to_string(),
            reason: "expected header class_id,a_0,...".into(),
        });
    }
    let d_a = headers.len() - 1;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (ix, record) in reader.records().enumerate() {
        let record = record?;
        let line = ix + 2; // header is line 1
        if record.len() != d_a + 1 {
            return Err(Error::MalformedFile {
                path: path.display().to_string(),
                reason: format!("line {}: expected {} fields, got {}", line, d_a + 1, record.len()),
            });
        }
        let class: usize = record[0].parse().map_err(|_| Error::MalformedFile {
            path: path.display().to_string(),
            reason: format!("line {}: bad class id {:?}", line, &record[0]),
        })?;
        let mut values = Vec::with_capacity(d_a);
        for c in 0..d_a {
            values.push(parse_float(&record[c + 1], line)?);
        }
        rows.push((class, values));
    }
    if rows.is_empty() {
        return Err(Error::NoRows(path.display().to_string()));
    }
    let n = rows.len();
    let mut matrix = Array2::<f64>::zeros((n, d_a));
    let mut filled = vec![false; n];
    for (class, values) in rows {
        if class >= n || filled[class] {
            return Err(Error::MalformedFile {
                path: path.display().to_string(),
                reason: format!(
                    "class ids must be exactly 0..{} with no duplicates (saw {})",
                    n - 1,
                    class
                ),
            });
        }
        filled[class] = true;
        for (c, v) in values.into_iter().enumerate() {
            matrix[(class, c)] = v;
        }
    }
    AttributeTable::new(matrix)
}

/// Load labeled feature vectors, checking every class id against `table`.
pub fn load_feature_set(path: impl AsRef<Path>, table: &AttributeTable) -> Result<SampleSet> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 3 || headers.get(0) != Some("sample_id") || headers.get(1) != Some("class_id") {
        return Err(Error::MalformedFile {
            path: path.display().to_string(),
            reason: "expected header sample_id,class_id,v_0,...".into(),
        });
    }
    let d_in = headers.len() - 2;
    let mut ids = Vec::new();
    let mut classes = Vec::new();
    let mut flat: Vec<f64> = Vec::new();
    for (ix, record) in reader.records().enumerate() {
        let record = record?;
        let line = ix + 2;
        if record.len() != d_in + 2 {
            return Err(Error::MalformedFile {
                path: path.display().to_string(),
                reason: format!("line {}: expected {} fields, got {}", line, d_in + 2, record.len()),
            });
        }
        let id: u64 = record[0].parse().map_err(|_| Error::MalformedFile {
            path: path.display().to_string(),
            reason: format!("line {}: bad sample id {:?}", line, &record[0]),
        })?;
        let class: usize = record[1].parse().map_err(|_| Error::MalformedFile {
            path: path.display().to_string(),
            reason: format!("line {}: bad class id {:?}", line, &record[1]),
        })?;
        if class >= table.n_classes() {
            return Err(Error::UnknownClass { class, line });
        }
        for c in 0..d_in {
            flat.push(parse_float(&record[c + 2], line)?);
        }
        ids.push(id);
        classes.push(class);
    }
    if ids.is_empty() {
        return Err(Error::NoRows(path.display().to_string()));
    }
    let n = ids.len();
    let features = Array2::from_shape_vec((n, d_in), flat)
        .expect("row-major construction matches counts");
    let set = SampleSet::new(ids, classes, features)?;
    set.validate_against(table)?;
    Ok(set)
}

/// Write an attribute table in the documented CSV format.
pub fn write_attribute_csv(path: impl AsRef<Path>, table: &AttributeTable) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["class_id".to_string()];
    header.extend((0..table.d_a()).map(|c| format!("a_{}", c)));
    writer.write_record(&header)?;
    for class in 0..table.n_classes() {
        let mut record = vec![class.to_string()];
        record.extend(table.row(class).iter().map(|v| format!("{}", v)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a sample set in the documented CSV format.
pub fn write_feature_csv(path: impl AsRef<Path>, set: &SampleSet) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["sample_id".to_string(), "class_id".to_string()];
    header.extend((0..set.d_in()).map(|c| format!("v_{}", c)));
    writer.write_record(&header)?;
    for i in 0..set.len() {
        let mut record = vec![set.id(i).to_string(), set.class(i).to_string()];
        record.extend(set.feature(i).iter().map(|v| format!("{}", v)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a plain numeric matrix (header `c_0,...`), used for inspection
/// dumps of covariance matrices and for the generator map.
pub fn write_matrix_csv(path: impl AsRef<Path>, m: &Array2<f64>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let header: Vec<String> = (0..m.ncols()).map(|c| format!("c_{}", c)).collect();
    writer.write_record(&header)?;
    for row in m.rows() {
        let record: Vec<String> = row.iter().map(|v| format!("{}", v)).collect();
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let ncols = reader.headers()?.len();
    let mut flat = Vec::new();
    let mut nrows = 0;
    for (ix, record) in reader.records().enumerate() {
        let record = record?;
        let line = ix + 2;
        if record.len() != ncols {
            return Err(Error::MalformedFile {
                path: path.display().to_string(),
                reason: format!("line {}: expected {} fields, got {}", line, ncols, record.len()),
            });
        }
        for c in 0..ncols {
            flat.push(parse_float(&record[c], line)?);
        }
        nrows += 1;
    }
    if nrows == 0 {
        return Err(Error::NoRows(path.display().to_string()));
    }
    Ok(Array2::from_shape_vec((nrows, ncols), flat).expect("row-major construction"))
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|source| Error::MalformedNumber {
        field: field.to_string(),
        line,
        source,
    })
}
