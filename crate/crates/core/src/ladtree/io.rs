//! Text format for [`LadTreeModel`].
//!
//! After the shared header, the body holds the root values followed by one
//! line per splitter in insertion order:
//!
//! ```text
//! root values=0.4236,-0.4236
//! splitter host=0 attr=0 eq 3 yes=0.61,-0.61 no=-0.24,0.24
//! splitter host=2 attr=1 lt 22.5 yes=... no=...
//! ```
//!
//! Splitter `i` owns prediction nodes `2i + 1` and `2i + 2`, so node indices
//! never need to be written out.

use std::fmt::Write as _;

use super::{AdtTest, LadTreeModel};
use crate::error::{Error, Result};
use crate::model_io::{format_list, keyed, parse_f64, parse_list, parse_usize, read_header, write_header};

pub(super) const KIND: &str = "ladtree";

pub(super) fn write_model(model: &LadTreeModel) -> String {
    let mut out = String::new();
    write_header(&mut out, KIND, &model.schema);
    let _ = writeln!(out, "root values={}", format_list(&model.nodes[0].values));
    for s in &model.splitters {
        let test = match s.test {
            AdtTest::NumericThreshold(t) => format!("lt {t}"),
            AdtTest::NominalEquals(c) => format!("eq {c}"),
        };
        let _ = writeln!(
            out,
            "splitter host={} attr={} {test} yes={} no={}",
            s.host,
            s.attribute,
            format_list(&model.nodes[s.yes].values),
            format_list(&model.nodes[s.no].values)
        );
    }
    out
}

pub(super) fn read_model(text: &str) -> Result<LadTreeModel> {
    let (schema, body) = read_header(text, KIND)?;
    let k = schema.num_classes();
    let mut lines = body.into_iter();
    let (n, root_line) = lines.next().ok_or_else(|| Error::model(1, "missing root line"))?;
    let mut toks = root_line.split_whitespace();
    if toks.next() != Some("root") {
        return Err(Error::model(n, "expected root line"));
    }
    let root = values(keyed(toks.next(), "values", n)?, k, n)?;
    let mut model = LadTreeModel::with_root(schema.clone(), root);

    for (n, line) in lines {
        let mut toks = line.split_whitespace();
        if toks.next() != Some("splitter") {
            return Err(Error::model(n, format!("unrecognised line '{}'", line.trim())));
        }
        let host = parse_usize(keyed(toks.next(), "host", n)?, n)?;
        if host >= model.nodes.len() {
            return Err(Error::model(n, format!("host {host} does not exist yet")));
        }
        let attribute = parse_usize(keyed(toks.next(), "attr", n)?, n)?;
        if attribute >= schema.num_attributes() {
            return Err(Error::model(n, format!("attribute {attribute} out of range")));
        }
        let attr = schema.attribute(attribute);
        let arg = toks.next().unwrap_or("");
        let test = match toks.next() {
            Some(v) if arg == "lt" && attr.is_numeric() => AdtTest::NumericThreshold(parse_f64(v, n)?),
            Some(v) if arg == "eq" && !attr.is_numeric() => {
                let c = parse_usize(v, n)?;
                if c >= attr.num_categories() {
                    return Err(Error::model(n, format!("category {c} out of range")));
                }
                AdtTest::NominalEquals(c)
            }
            _ => return Err(Error::model(n, "splitter test does not fit the attribute")),
        };
        let yes = values(keyed(toks.next(), "yes", n)?, k, n)?;
        let no = values(keyed(toks.next(), "no", n)?, k, n)?;
        if toks.next().is_some() {
            return Err(Error::model(n, "trailing tokens"));
        }
        model.add_splitter(host, attribute, test, yes, no);
    }
    Ok(model)
}

fn values(token: &str, k: usize, n: usize) -> Result<Vec<f64>> {
    let v = parse_list(token, n)?;
    if v.len() != k {
        return Err(Error::model(n, format!("expected {k} class values, found {}", v.len())));
    }
    Ok(v)
}
