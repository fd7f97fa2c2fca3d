//! Reader and writer for the dense ARFF subset: `@relation`, nominal and
//! numeric `@attribute` declarations, `@data`, `%` comments, `?` for missing.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{AttributeKind, AttributeSpec, Dataset, Instance, Schema, Value};
use crate::error::{Error, Result};

/// Parses ARFF text; the last declared attribute is the class.
pub fn parse_arff(text: &str) -> Result<Dataset> {
    parse_arff_with_class(text, None)
}

/// Parses ARFF text using the attribute named `class_name` as the class, or
/// the last attribute when `None`.
pub fn parse_arff_with_class(text: &str, class_name: Option<&str>) -> Result<Dataset> {
    let mut relation: Option<String> = None;
    let mut declared: Vec<(AttributeSpec, usize)> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let mut saw_data = false;
    for (lineno, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (keyword, rest) = split_keyword(line);
        match keyword.to_ascii_lowercase().as_str() {
            "@relation" => {
                let (name, _) = take_name(rest, lineno)?;
                relation = Some(name);
            }
            "@attribute" => {
                if relation.is_none() {
                    return Err(Error::parse(lineno, "@attribute before @relation"));
                }
                declared.push((parse_attribute(rest, lineno)?, lineno));
            }
            "@data" => {
                saw_data = true;
                break;
            }
            _ => return Err(Error::parse(lineno, format!("unexpected header line '{line}'"))),
        }
    }

    let relation = relation.ok_or_else(|| Error::parse(1, "missing @relation declaration"))?;
    if !saw_data {
        return Err(Error::parse(text.lines().count().max(1), "missing @data section"));
    }
    if declared.is_empty() {
        return Err(Error::parse(1, "no attributes declared"));
    }

    let class_pos = match class_name {
        Some(name) => declared
            .iter()
            .position(|(a, _)| a.name == name)
            .ok_or_else(|| Error::Schema(format!("class attribute '{name}' not declared")))?,
        None => declared.len() - 1,
    };
    if declared[class_pos].0.is_numeric() {
        return Err(Error::parse(
            declared[class_pos].1,
            format!("class attribute '{}' must be nominal", declared[class_pos].0.name),
        ));
    }

    let specs: Vec<AttributeSpec> = declared.iter().map(|(a, _)| a.clone()).collect();
    let mut predictors = specs.clone();
    let class_attr = predictors.remove(class_pos);
    let schema = Arc::new(Schema::new(relation, predictors, class_attr).map_err(|e| {
        let line = declared.last().map_or(1, |d| d.1);
        Error::parse(line, e.to_string())
    })?);

    let mut instances = Vec::new();
    for (lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line.starts_with('{') {
            return Err(Error::parse(lineno, "sparse ARFF rows are not supported"));
        }
        let tokens = split_tokens(line, lineno)?;
        if tokens.len() != specs.len() {
            return Err(Error::parse(
                lineno,
                format!("expected {} values, found {}", specs.len(), tokens.len()),
            ));
        }
        let mut values = Vec::with_capacity(specs.len() - 1);
        let mut class = None;
        for (pos, (token, spec)) in tokens.iter().zip(&specs).enumerate() {
            let value = parse_value(token, spec, lineno)?;
            if pos == class_pos {
                class = match value {
                    Value::Nominal(c) => Some(c),
                    _ => None,
                };
            } else {
                values.push(value);
            }
        }
        instances.push(Instance::new(values, class));
    }

    Ok(Dataset { schema, instances })
}

pub(crate) fn parse_value(token: &Token, spec: &AttributeSpec, line: usize) -> Result<Value> {
    if !token.quoted && token.text == "?" {
        return Ok(Value::Missing);
    }
    match &spec.kind {
        AttributeKind::Numeric => token
            .text
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Numeric)
            .ok_or_else(|| {
                Error::parse(
                    line,
                    format!("'{}' is not numeric (attribute '{}')", token.text, spec.name),
                )
            }),
        AttributeKind::Nominal(_) => spec.category_index(&token.text).map(Value::Nominal).ok_or_else(|| {
            Error::parse(
                line,
                format!("undeclared category '{}' for attribute '{}'", token.text, spec.name),
            )
        }),
    }
}

fn split_keyword(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim_start()),
        None => (line, ""),
    }
}

/// Reads a possibly quoted name, returning it and the remaining text.
fn take_name(s: &str, line: usize) -> Result<(String, &str)> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    match chars.next() {
        None => Err(Error::parse(line, "expected a name")),
        Some((_, q @ ('\'' | '"'))) => {
            let mut out = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    out.push(c);
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    return Ok((out, s[i + c.len_utf8()..].trim_start()));
                } else {
                    out.push(c);
                }
            }
            Err(Error::parse(line, "unterminated quoted name"))
        }
        Some(_) => {
            let end = s.find(|c: char| c.is_whitespace() || c == '{').unwrap_or(s.len());
            Ok((s[..end].to_string(), s[end..].trim_start()))
        }
    }
}

fn parse_attribute(rest: &str, line: usize) -> Result<AttributeSpec> {
    let (name, kind) = take_name(rest, line)?;
    if name.is_empty() {
        return Err(Error::parse(line, "empty attribute name"));
    }
    let kind = kind.trim();
    if let Some(body) = kind.strip_prefix('{') {
        let body = body
            .trim_end()
            .strip_suffix('}')
            .ok_or_else(|| Error::parse(line, "unterminated category list"))?;
        let cats: Vec<String> = split_tokens(body, line)?.into_iter().map(|t| t.text).collect();
        if cats.is_empty() || cats.iter().any(String::is_empty) {
            return Err(Error::parse(line, format!("empty category in attribute '{name}'")));
        }
        let spec = AttributeSpec {
            name,
            kind: AttributeKind::Nominal(cats),
        };
        spec.validate().map_err(|e| Error::parse(line, e.to_string()))?;
        Ok(spec)
    } else {
        match kind.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => Ok(AttributeSpec::numeric(name)),
            other => Err(Error::parse(
                line,
                format!("unsupported attribute type '{other}' for '{name}'"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub text: String,
    pub quoted: bool,
}

/// Splits a comma-separated line, honoring single or double quotes with
/// backslash escapes. Unquoted tokens are trimmed.
pub(crate) fn split_tokens(s: &str, line: usize) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = s.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut text = String::new();
        let mut quoted = false;
        match chars.peek().copied() {
            Some(q @ ('\'' | '"')) => {
                chars.next();
                quoted = true;
                let mut closed = false;
                while let Some(c) = chars.next() {
                    if c == '\\' {
                        match chars.next() {
                            Some(e) => text.push(e),
                            None => break,
                        }
                    } else if c == q {
                        closed = true;
                        break;
                    } else {
                        text.push(c);
                    }
                }
                if !closed {
                    return Err(Error::parse(line, "unterminated quoted value"));
                }
                while chars.peek().is_some_and(|c| c.is_whitespace()) {
                    chars.next();
                }
                match chars.peek() {
                    None | Some(',') => {}
                    Some(c) => return Err(Error::parse(line, format!("unexpected '{c}' after quoted value"))),
                }
            }
            _ => {
                while let Some(&c) = chars.peek() {
                    if c == ',' {
                        break;
                    }
                    text.push(c);
                    chars.next();
                }
                text = text.trim_end().to_string();
            }
        }
        tokens.push(Token { text, quoted });
        match chars.next() {
            Some(',') => continue,
            None => break,
            Some(_) => unreachable!(),
        }
    }
    Ok(tokens)
}

fn quote(token: &str) -> String {
    let plain = !token.is_empty()
        && token != "?"
        && token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '/' | '+'));
    if plain {
        token.to_string()
    } else {
        let escaped = token.replace('\\', "\\\\").replace('\'', "\\'");
        format!("'{escaped}'")
    }
}

pub(crate) fn write_header(out: &mut String, schema: &Schema) {
    let _ = writeln!(out, "@relation {}", quote(schema.relation()));
    out.push('\n');
    for attr in schema
        .attributes()
        .iter()
        .chain(std::iter::once(schema.class_attribute()))
    {
        let _ = match &attr.kind {
            AttributeKind::Numeric => writeln!(out, "@attribute {} numeric", quote(&attr.name)),
            AttributeKind::Nominal(cats) => {
                let list: Vec<String> = cats.iter().map(|c| quote(c)).collect();
                writeln!(out, "@attribute {} {{{}}}", quote(&attr.name), list.join(","))
            }
        };
    }
}

pub(crate) fn write_arff(dataset: &Dataset) -> String {
    let schema = dataset.schema();
    let mut out = String::new();
    write_header(&mut out, schema);
    out.push_str("\n@data\n");
    for inst in dataset.instances() {
        let mut fields: Vec<String> = inst
            .values
            .iter()
            .zip(schema.attributes())
            .map(|(v, a)| format_value(*v, a))
            .collect();
        fields.push(match inst.class {
            Some(c) => quote(&schema.class_names()[c]),
            None => "?".to_string(),
        });
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn format_value(value: Value, attr: &AttributeSpec) -> String {
    match value {
        Value::Missing => "?".to_string(),
        Value::Numeric(x) => format!("{x}"),
        Value::Nominal(i) => quote(&attr.categories().expect("nominal attribute")[i]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
% comment
@RELATION tiny
@attribute x numeric
@attribute 'two words' {a,b}
@attribute class {good,bad}
@data
5,?,good
1.5,b,bad
";

    #[test]
    fn parses_missing_and_nominal_tokens() {
        let ds = parse_arff(TINY).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.schema().num_attributes(), 2);
        assert_eq!(ds.schema().attribute(1).name, "two words");
        assert_eq!(ds.instance(0).values, vec![Value::Numeric(5.0), Value::Missing]);
        assert_eq!(ds.instance(0).class, Some(0));
        assert_eq!(ds.instance(1).values[1], Value::Nominal(1));
        assert_eq!(ds.instance(1).class, Some(1));
    }

    #[test]
    fn zero_rows_gives_empty_dataset() {
        let ds = parse_arff("@relation r\n@attribute a real\n@attribute c {x,y}\n@data\n").unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.schema().num_classes(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let undeclared = "@relation r\n@attribute a {x,y}\n@attribute c {g,b}\n@data\nx,g\nz,g\n";
        match parse_arff(undeclared) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("'z'"));
            }
            other => panic!("unexpected {other:?}"),
        }

        let arity = "@relation r\n@attribute a numeric\n@attribute c {g,b}\n@data\n1,g,3\n";
        assert!(matches!(parse_arff(arity), Err(Error::Parse { line: 5, .. })));

        let header = "@relation r\n@attribute a date\n@attribute c {g,b}\n@data\n";
        assert!(matches!(parse_arff(header), Err(Error::Parse { line: 2, .. })));

        let not_numeric = "@relation r\n@attribute a numeric\n@attribute c {g,b}\n@data\nabc,g\n";
        assert!(matches!(parse_arff(not_numeric), Err(Error::Parse { line: 5, .. })));

        assert!(parse_arff("@attribute a numeric\n@data\n").is_err());
        assert!(parse_arff("@relation r\n@attribute c {g,b}\n").is_err());
    }

    #[test]
    fn class_override_picks_named_attribute() {
        let text = "@relation r\n@attribute c {g,b}\n@attribute a numeric\n@data\nb,2\n";
        let ds = parse_arff_with_class(text, Some("c")).unwrap();
        assert_eq!(ds.schema().class_attribute().name, "c");
        assert_eq!(ds.instance(0).values, vec![Value::Numeric(2.0)]);
        assert_eq!(ds.instance(0).class, Some(1));
        assert!(parse_arff_with_class(text, Some("nope")).is_err());
    }

    #[test]
    fn quoted_tokens_survive_writing() {
        let text = "@relation r\n@attribute a {'<0','x y','it\\'s'}\n@attribute c {g,b}\n@data\n'it\\'s',g\n'<0',b\n";
        let ds = parse_arff(text).unwrap();
        assert_eq!(ds.schema().attribute(0).categories().unwrap()[2], "it's");
        let again = parse_arff(&ds.to_arff()).unwrap();
        assert_eq!(ds, again);
    }
}
