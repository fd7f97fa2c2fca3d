//! Text format for [`RepTreeModel`].
//!
//! After the shared header, the body holds one `params` line and the nodes in
//! preorder, indented two spaces per level:
//!
//! ```text
//! params min_leaf=2 max_depth=none prune_folds=3 prune=true seed=1
//! split 0 nominal branches=274,269,63,394 dist=700,300
//!   leaf dist=139,135
//!   split 1 le 22.5 branches=180,89 dist=164,105
//!     ...
//! ```
//!
//! A numeric split has two children (`<= threshold`, then `> threshold`); a
//! nominal split has one child per category.

use std::fmt::Write as _;

use super::{GrowParams, RepNode, RepTreeModel, SplitTest};
use crate::error::{Error, Result};
use crate::model_io::{format_list, keyed, parse_f64, parse_list, parse_usize, read_header, write_header};

pub(super) const KIND: &str = "reptree";

pub(super) fn write_model(model: &RepTreeModel) -> String {
    let mut out = String::new();
    write_header(&mut out, KIND, &model.schema);
    let p = &model.params;
    let _ = writeln!(
        out,
        "params min_leaf={} max_depth={} prune_folds={} prune={} seed={}",
        p.min_instances_per_leaf,
        p.max_depth.map_or("none".to_string(), |d| d.to_string()),
        p.prune_folds,
        p.do_prune,
        p.seed
    );
    write_node(&mut out, &model.root, 0);
    out
}

fn write_node(out: &mut String, node: &RepNode, depth: usize) {
    let indent = "  ".repeat(depth);
    match node {
        RepNode::Leaf { distribution } => {
            let _ = writeln!(out, "{indent}leaf dist={}", format_list(distribution));
        }
        RepNode::Internal {
            attribute,
            test,
            children,
            branch_weights,
            distribution,
        } => {
            let test = match test {
                SplitTest::NumericThreshold(t) => format!("le {t}"),
                SplitTest::NominalMultiway => "nominal".to_string(),
            };
            let _ = writeln!(
                out,
                "{indent}split {attribute} {test} branches={} dist={}",
                format_list(branch_weights),
                format_list(distribution)
            );
            for child in children {
                write_node(out, child, depth + 1);
            }
        }
    }
}

pub(super) fn read_model(text: &str) -> Result<RepTreeModel> {
    let (schema, body) = read_header(text, KIND)?;
    let mut lines = body.into_iter();
    let (n, params_line) = lines.next().ok_or_else(|| Error::model(1, "missing params line"))?;
    let params = parse_params(params_line, n)?;

    let mut reader = NodeReader {
        lines,
        num_classes: schema.num_classes(),
        schema: &schema,
        last_line: n,
    };
    let root = reader.node()?;
    if let Some((n, _)) = reader.lines.next() {
        return Err(Error::model(n, "trailing content after tree"));
    }
    Ok(RepTreeModel::new(root, schema.clone(), params))
}

fn parse_params(line: &str, n: usize) -> Result<GrowParams> {
    let mut toks = line.split_whitespace();
    if toks.next() != Some("params") {
        return Err(Error::model(n, "expected params line"));
    }
    let min_leaf = parse_f64(keyed(toks.next(), "min_leaf", n)?, n)?;
    let max_depth = match keyed(toks.next(), "max_depth", n)? {
        "none" => None,
        d => Some(parse_usize(d, n)?),
    };
    let prune_folds = parse_usize(keyed(toks.next(), "prune_folds", n)?, n)?;
    let do_prune = match keyed(toks.next(), "prune", n)? {
        "true" => true,
        "false" => false,
        other => return Err(Error::model(n, format!("bad prune flag '{other}'"))),
    };
    let seed = keyed(toks.next(), "seed", n)?
        .parse::<u64>()
        .map_err(|_| Error::model(n, "bad seed"))?;
    let params = GrowParams {
        min_instances_per_leaf: min_leaf,
        max_depth,
        prune_folds,
        do_prune,
        seed,
    };
    params.validate().map_err(|e| Error::model(n, e.to_string()))?;
    Ok(params)
}

struct NodeReader<'a, I> {
    lines: I,
    num_classes: usize,
    schema: &'a crate::dataset::Schema,
    last_line: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> NodeReader<'_, I> {
    fn node(&mut self) -> Result<RepNode> {
        let (n, line) = self
            .lines
            .next()
            .ok_or_else(|| Error::model(self.last_line, "unexpected end of tree"))?;
        self.last_line = n;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("leaf") => {
                let distribution = self.dist(keyed(toks.next(), "dist", n)?, n)?;
                Ok(RepNode::Leaf { distribution })
            }
            Some("split") => {
                let attribute = parse_usize(toks.next().unwrap_or(""), n)?;
                if attribute >= self.schema.num_attributes() {
                    return Err(Error::model(n, format!("attribute {attribute} out of range")));
                }
                let attr = self.schema.attribute(attribute);
                let (test, arity) = match toks.next() {
                    Some("le") if attr.is_numeric() => {
                        (SplitTest::NumericThreshold(parse_f64(toks.next().unwrap_or(""), n)?), 2)
                    }
                    Some("nominal") if !attr.is_numeric() => (SplitTest::NominalMultiway, attr.num_categories()),
                    _ => return Err(Error::model(n, "split test does not fit the attribute")),
                };
                let branch_weights = parse_list(keyed(toks.next(), "branches", n)?, n)?;
                if branch_weights.len() != arity || branch_weights.iter().any(|w| *w < 0.0) {
                    return Err(Error::model(n, "wrong branch weights"));
                }
                let distribution = self.dist(keyed(toks.next(), "dist", n)?, n)?;
                let children = (0..arity).map(|_| self.node()).collect::<Result<_>>()?;
                Ok(RepNode::Internal {
                    attribute,
                    test,
                    children,
                    branch_weights,
                    distribution,
                })
            }
            _ => Err(Error::model(n, format!("unrecognised node line '{}'", line.trim()))),
        }
    }

    fn dist(&self, token: &str, n: usize) -> Result<Vec<f64>> {
        let d = parse_list(token, n)?;
        if d.len() != self.num_classes || d.iter().any(|w| *w < 0.0) {
            return Err(Error::model(n, "class distribution does not fit the schema"));
        }
        Ok(d)
    }
}
