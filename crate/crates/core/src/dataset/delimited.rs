use std::sync::Arc;

use csv::{ReaderBuilder, Trim};

use super::{AttributeKind, Dataset, Instance, Schema, Value};
use crate::error::{Error, Result};

/// Parses comma-separated rows laid out as the schema's predictors followed by
/// the class column. Empty fields and `?` are missing values.
pub fn parse_csv(text: &str, schema: &Schema, has_header: bool) -> Result<Dataset> {
    let schema = Arc::new(schema.clone());
    let width = schema.num_attributes() + 1;
    let mut reader = ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(text.as_bytes());

    let mut instances = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            row: e.position().map_or(0, |p| p.line() as usize),
            column: String::new(),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != width {
            return Err(Error::Csv {
                row,
                column: "*".to_string(),
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }

        let mut values = Vec::with_capacity(width - 1);
        for (field, attr) in record.iter().zip(schema.attributes()) {
            let value = if field.is_empty() || field == "?" {
                Value::Missing
            } else {
                match &attr.kind {
                    AttributeKind::Numeric => match field.parse::<f64>() {
                        Ok(x) if x.is_finite() => Value::Numeric(x),
                        _ => {
                            return Err(Error::Csv {
                                row,
                                column: attr.name.clone(),
                                message: format!("'{field}' is not numeric"),
                            })
                        }
                    },
                    AttributeKind::Nominal(_) => match attr.category_index(field) {
                        Some(i) => Value::Nominal(i),
                        None => {
                            return Err(Error::Csv {
                                row,
                                column: attr.name.clone(),
                                message: format!("unknown category '{field}'"),
                            })
                        }
                    },
                }
            };
            values.push(value);
        }

        let class_field = &record[width - 1];
        let class = if class_field.is_empty() || class_field == "?" {
            None
        } else {
            let class_attr = schema.class_attribute();
            Some(class_attr.category_index(class_field).ok_or_else(|| Error::Csv {
                row,
                column: class_attr.name.clone(),
                message: format!("unknown category '{class_field}'"),
            })?)
        };
        instances.push(Instance::new(values, class));
    }

    Ok(Dataset { schema, instances })
}
