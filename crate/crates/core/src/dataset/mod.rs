//! Attribute schemas, instances, and datasets.
//!
//! A [`Dataset`] is an immutable list of weighted [`Instance`]s that conform to
//! a shared [`Schema`]. Loading happens through [`parse_arff`] or [`parse_csv`];
//! cross-validation partitions come from [`stratified_folds`].

mod arff;
mod delimited;
mod folds;
mod german;

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};

pub(crate) use self::arff::write_header as write_schema_header;
pub use self::arff::{parse_arff, parse_arff_with_class};
pub use self::delimited::parse_csv;
pub use self::folds::{split_grow_prune, stratified_folds, FoldPlan};
pub use self::german::german_credit_schema;

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Nominal(Vec<String>),
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn nominal<S: AsRef<str>>(name: impl Into<String>, categories: &[S]) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Nominal(categories.iter().map(|c| c.as_ref().to_string()).collect()),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }

    /// Category names for a nominal attribute, `None` for numeric ones.
    pub fn categories(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Nominal(cats) => Some(cats),
            AttributeKind::Numeric => None,
        }
    }

    pub fn num_categories(&self) -> usize {
        self.categories().map_or(0, <[String]>::len)
    }

    pub fn category_index(&self, token: &str) -> Option<usize> {
        self.categories()?.iter().position(|c| c == token)
    }

    fn validate(&self) -> Result<()> {
        if let AttributeKind::Nominal(cats) = &self.kind {
            if cats.is_empty() {
                return Err(Error::Schema(format!(
                    "nominal attribute '{}' has no categories",
                    self.name
                )));
            }
            let mut seen = HashSet::new();
            for c in cats {
                if !seen.insert(c.as_str()) {
                    return Err(Error::Schema(format!(
                        "nominal attribute '{}' repeats category '{}'",
                        self.name, c
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Predictor attributes plus a nominal class attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    relation: String,
    attributes: Vec<AttributeSpec>,
    class_attribute: AttributeSpec,
}

impl Schema {
    pub fn new(
        relation: impl Into<String>,
        attributes: Vec<AttributeSpec>,
        class_attribute: AttributeSpec,
    ) -> Result<Self> {
        if class_attribute.is_numeric() {
            return Err(Error::Schema(format!(
                "class attribute '{}' must be nominal",
                class_attribute.name
            )));
        }
        let mut names = HashSet::new();
        for attr in attributes.iter().chain(std::iter::once(&class_attribute)) {
            attr.validate()?;
            if !names.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!(
                    "attribute name '{}' is declared twice",
                    attr.name
                )));
            }
        }
        Ok(Schema {
            relation: relation.into(),
            attributes,
            class_attribute,
        })
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &AttributeSpec {
        &self.attributes[index]
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn class_attribute(&self) -> &AttributeSpec {
        &self.class_attribute
    }

    pub fn num_classes(&self) -> usize {
        self.class_attribute.num_categories()
    }

    pub fn class_names(&self) -> &[String] {
        self.class_attribute.categories().unwrap_or(&[])
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Name of the first attribute (predictors in order, then the class) on
    /// which `other` disagrees with this schema, or `None` if they match.
    /// The relation name is ignored.
    pub fn first_incompatibility(&self, other: &Schema) -> Option<String> {
        let n = self.attributes.len().max(other.attributes.len());
        for i in 0..n {
            match (self.attributes.get(i), other.attributes.get(i)) {
                (Some(a), Some(b)) if a == b => {}
                (Some(a), _) => return Some(a.name.clone()),
                (None, Some(b)) => return Some(b.name.clone()),
                (None, None) => unreachable!(),
            }
        }
        if self.class_attribute != other.class_attribute {
            return Some(self.class_attribute.name.clone());
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Nominal(usize),
    Numeric(f64),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<Value>,
    pub weight: f64,
    pub class: Option<usize>,
}

impl Instance {
    pub fn new(values: Vec<Value>, class: Option<usize>) -> Self {
        Instance {
            values,
            weight: 1.0,
            class,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn value(&self, attribute: usize) -> Value {
        self.values[attribute]
    }

    fn check(&self, schema: &Schema) -> std::result::Result<(), String> {
        if self.values.len() != schema.num_attributes() {
            return Err(format!(
                "expected {} values, found {}",
                schema.num_attributes(),
                self.values.len()
            ));
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(format!("invalid instance weight {}", self.weight));
        }
        for (value, attr) in self.values.iter().zip(schema.attributes()) {
            match (value, &attr.kind) {
                (Value::Missing, _) => {}
                (Value::Numeric(x), AttributeKind::Numeric) if x.is_finite() => {}
                (Value::Nominal(i), AttributeKind::Nominal(cats)) if *i < cats.len() => {}
                _ => return Err(format!("value {:?} does not fit attribute '{}'", value, attr.name)),
            }
        }
        if let Some(c) = self.class {
            if c >= schema.num_classes() {
                return Err(format!("class index {c} out of range"));
            }
        }
        Ok(())
    }
}

/// An immutable collection of instances sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Arc<Schema>,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema: Arc<Schema>, instances: Vec<Instance>) -> Result<Self> {
        for (i, inst) in instances.iter().enumerate() {
            inst.check(&schema)
                .map_err(|m| Error::Schema(format!("instance {i}: {m}")))?;
        }
        Ok(Dataset { schema, instances })
    }

    pub fn empty(schema: Arc<Schema>) -> Self {
        Dataset {
            schema,
            instances: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, index: usize) -> &Instance {
        &self.instances[index]
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.schema.num_classes()
    }

    /// Weighted class totals in class-category order. Instances without a
    /// class label are skipped.
    pub fn class_counts(&self) -> Vec<f64> {
        let mut counts = vec![0.0; self.num_classes()];
        for inst in &self.instances {
            if let Some(c) = inst.class {
                counts[c] += inst.weight;
            }
        }
        counts
    }

    pub fn total_weight(&self) -> f64 {
        self.instances.iter().map(|i| i.weight).sum()
    }

    /// A new dataset holding the instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: Arc::clone(&self.schema),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Drops instances whose class label is missing.
    pub fn labeled(&self) -> Dataset {
        Dataset {
            schema: Arc::clone(&self.schema),
            instances: self.instances.iter().filter(|i| i.class.is_some()).cloned().collect(),
        }
    }

    /// Serializes the dataset as ARFF text, class attribute last.
    pub fn to_arff(&self) -> String {
        arff::write_arff(self)
    }
}
