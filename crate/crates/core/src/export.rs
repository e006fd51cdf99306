//! GraphML, DOT and CSV exports, plus readers for the two graph formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AttrValue {
    Integer(i64),
    Number(f64),
    Text(String),
}

impl AttrValue {
    fn graphml_type(&self) -> &'static str {
        match self {
            AttrValue::Integer(_) => "long",
            AttrValue::Number(_) => "double",
            AttrValue::Text(_) => "string",
        }
    }

    fn plain(&self) -> String {
        match self {
            AttrValue::Integer(v) => v.to_string(),
            AttrValue::Number(v) => v.to_string(),
            AttrValue::Text(v) => v.clone(),
        }
    }
}

/// A labelled graph with node and edge attributes, ready for writing.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NetworkExport {
    pub nodes: Vec<(String, BTreeMap<String, AttrValue>)>,
    pub edges: Vec<(String, String, BTreeMap<String, AttrValue>)>,
}

impl NetworkExport {
    /// Nodes and edges of `graph` without attributes.
    pub fn from_graph(graph: &Graph) -> NetworkExport {
        NetworkExport {
            nodes: graph.labels().iter().map(|l| (l.clone(), BTreeMap::new())).collect(),
            edges: graph
                .edge_labels()
                .map(|(a, b)| (a.to_string(), b.to_string(), BTreeMap::new()))
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph, GraphError> {
        Graph::from_edges(
            self.nodes.iter().map(|(l, _)| l.as_str()),
            self.edges.iter().map(|(a, b, _)| (a.as_str(), b.as_str())),
        )
    }
}

fn attribute_keys<'a>(maps: impl Iterator<Item = &'a BTreeMap<String, AttrValue>>) -> BTreeMap<&'a str, &'static str> {
    let mut keys = BTreeMap::new();
    for map in maps {
        for (name, value) in map {
            keys.entry(name.as_str()).or_insert(value.graphml_type());
        }
    }
    keys
}

pub fn write_graphml(network: &NetworkExport) -> String {
    let node_keys = attribute_keys(network.nodes.iter().map(|(_, a)| a));
    let edge_keys = attribute_keys(network.edges.iter().map(|(_, _, a)| a));
    let node_id: BTreeMap<&str, usize> = node_keys.keys().enumerate().map(|(i, &k)| (k, i)).collect();
    let edge_id: BTreeMap<&str, usize> = edge_keys.keys().enumerate().map(|(i, &k)| (k, i)).collect();

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (i, (name, ty)) in node_keys.iter().enumerate() {
        let _ = writeln!(
            out,
            "  <key id=\"n{i}\" for=\"node\" attr.name=\"{}\" attr.type=\"{ty}\"/>",
            escape(*name)
        );
    }
    for (i, (name, ty)) in edge_keys.iter().enumerate() {
        let _ = writeln!(
            out,
            "  <key id=\"e{i}\" for=\"edge\" attr.name=\"{}\" attr.type=\"{ty}\"/>",
            escape(*name)
        );
    }
    out.push_str("  <graph id=\"coselection\" edgedefault=\"undirected\">\n");
    for (label, attrs) in &network.nodes {
        let _ = write!(out, "    <node id=\"{}\"", escape(label.as_str()));
        if attrs.is_empty() {
            out.push_str("/>\n");
            continue;
        }
        out.push_str(">\n");
        for (name, value) in attrs {
            let _ = writeln!(
                out,
                "      <data key=\"n{}\">{}</data>",
                node_id[name.as_str()],
                escape(value.plain().as_str())
            );
        }
        out.push_str("    </node>\n");
    }
    for (a, b, attrs) in &network.edges {
        let _ = write!(
            out,
            "    <edge source=\"{}\" target=\"{}\"",
            escape(a.as_str()),
            escape(b.as_str())
        );
        if attrs.is_empty() {
            out.push_str("/>\n");
            continue;
        }
        out.push_str(">\n");
        for (name, value) in attrs {
            let _ = writeln!(
                out,
                "      <data key=\"e{}\">{}</data>",
                edge_id[name.as_str()],
                escape(value.plain().as_str())
            );
        }
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn xml_attribute(element: &BytesStart<'_>, key: &str) -> Result<Option<String>, ExportError> {
    for attr in element.attributes() {
        let attr = attr.map_err(|e| ExportError::Parse(e.to_string()))?;
        if attr.key.as_ref() == key {
            let value = attr
                .normalized_value(XmlVersion::Implicit1_0)
                .map_err(|e| ExportError::Parse(e.to_string()))?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

/// Reads the node and edge sets of a GraphML document; data values are ignored.
pub fn read_graphml(text: &str) -> Result<Graph, ExportError> {
    let mut reader = Reader::from_str(text);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let required = |e: &BytesStart<'_>, key: &str| -> Result<String, ExportError> {
        xml_attribute(e, key)?.ok_or_else(|| ExportError::Parse(format!("element lacks `{key}`")))
    };
    loop {
        match reader.read_event().map_err(|e| ExportError::Parse(e.to_string()))? {
            Event::Start(e) | Event::Empty(e) => match e.local_name().as_ref() {
                "node" => nodes.push(required(&e, "id")?),
                "edge" => edges.push((required(&e, "source")?, required(&e, "target")?)),
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(Graph::from_edges(nodes, edges)?)
}

fn is_bare_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn dot_attributes(attrs: &BTreeMap<String, AttrValue>) -> String {
    if attrs.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = attrs
        .iter()
        .map(|(name, value)| {
            let key = if is_bare_id(name) {
                name.clone()
            } else {
                dot_quote(name)
            };
            let value = match value {
                AttrValue::Text(t) => dot_quote(t),
                other => other.plain(),
            };
            format!("{key}={value}")
        })
        .collect();
    format!(" [{}]", parts.join(", "))
}

pub fn write_dot(network: &NetworkExport) -> String {
    let mut out = String::from("graph coselection {\n");
    for (label, attrs) in &network.nodes {
        let _ = writeln!(out, "  {}{};", dot_quote(label), dot_attributes(attrs));
    }
    for (a, b, attrs) in &network.edges {
        let _ = writeln!(out, "  {} -- {}{};", dot_quote(a), dot_quote(b), dot_attributes(attrs));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Id(String),
    Punct(&'static str),
}

fn tokenize_dot(text: &str) -> Result<Vec<Token>, ExportError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('\\') => match chars.next() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            Some(e) => {
                                s.push('\\');
                                s.push(e);
                            }
                            None => return Err(ExportError::Parse("unterminated string".into())),
                        },
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                        None => return Err(ExportError::Parse("unterminated string".into())),
                    }
                }
                tokens.push(Token::Id(s));
            }
            '{' | '}' | '[' | ']' | ';' | ',' | '=' => {
                chars.next();
                let p = match c {
                    '{' => "{",
                    '}' => "}",
                    '[' => "[",
                    ']' => "]",
                    ';' => ";",
                    ',' => ",",
                    _ => "=",
                };
                tokens.push(Token::Punct(p));
            }
            '-' if text_peek_edge(&mut chars) => tokens.push(Token::Punct("--")),
            c if c.is_alphanumeric() || matches!(c, '_' | '.' | '-') => {
                let mut s = String::new();
                if c == '-' {
                    s.push(c);
                    chars.next();
                }
                while let Some(&ch) = chars.peek() {
                    if ch.is_alphanumeric() || matches!(ch, '_' | '.') {
                        s.push(ch);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Id(s));
            }
            other => return Err(ExportError::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

/// Consumes `--` if the iterator is positioned on it.
fn text_peek_edge(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> bool {
    let mut ahead = chars.clone();
    ahead.next();
    if ahead.peek() == Some(&'-') {
        chars.next();
        chars.next();
        true
    } else {
        false
    }
}

/// Reads the node and edge sets of an undirected DOT graph written by
/// [`write_dot`] or a compatible subset (statements, chains, attribute lists).
pub fn read_dot(text: &str) -> Result<Graph, ExportError> {
    let tokens = tokenize_dot(text)?;
    let mut pos = 0;
    let parse_err = |msg: &str| ExportError::Parse(msg.to_string());
    if matches!(tokens.get(pos), Some(Token::Id(k)) if k == "strict") {
        pos += 1;
    }
    match tokens.get(pos) {
        Some(Token::Id(k)) if k == "graph" => pos += 1,
        _ => return Err(parse_err("expected `graph`")),
    }
    if matches!(tokens.get(pos), Some(Token::Id(_))) {
        pos += 1;
    }
    if tokens.get(pos) != Some(&Token::Punct("{")) {
        return Err(parse_err("expected `{`"));
    }
    pos += 1;

    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    loop {
        match tokens.get(pos) {
            Some(Token::Punct("}")) => break,
            Some(Token::Punct(";")) => pos += 1,
            Some(Token::Id(first)) => {
                pos += 1;
                let defaults =
                    matches!(first.as_str(), "graph" | "node" | "edge") && tokens.get(pos) == Some(&Token::Punct("["));
                let mut chain = vec![first.clone()];
                while tokens.get(pos) == Some(&Token::Punct("--")) {
                    match tokens.get(pos + 1) {
                        Some(Token::Id(next)) => chain.push(next.clone()),
                        _ => return Err(parse_err("expected node after `--`")),
                    }
                    pos += 2;
                }
                if tokens.get(pos) == Some(&Token::Punct("=")) {
                    // graph-level `key = value`
                    pos += 2;
                    continue;
                }
                if tokens.get(pos) == Some(&Token::Punct("[")) {
                    while tokens.get(pos).is_some_and(|t| *t != Token::Punct("]")) {
                        pos += 1;
                    }
                    if tokens.get(pos).is_none() {
                        return Err(parse_err("unterminated attribute list"));
                    }
                    pos += 1;
                }
                if defaults {
                    continue;
                }
                nodes.extend(chain.iter().cloned());
                edges.extend(chain.windows(2).map(|w| (w[0].clone(), w[1].clone())));
            }
            Some(Token::Punct(p)) => return Err(ExportError::Parse(format!("unexpected `{p}`"))),
            None => return Err(parse_err("missing closing `}`")),
        }
    }
    Ok(Graph::from_edges(nodes, edges)?)
}

fn csv_text<I, R>(header: &[&str], rows: I) -> Result<String, ExportError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| ExportError::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Edge list with every edge attribute as a column, attribute names sorted.
pub fn write_edges_csv(network: &NetworkExport) -> Result<String, ExportError> {
    let keys: Vec<&str> = attribute_keys(network.edges.iter().map(|(_, _, a)| a))
        .into_keys()
        .collect();
    let mut header = vec!["source", "target"];
    header.extend(&keys);
    csv_text(
        &header,
        network.edges.iter().map(|(a, b, attrs)| {
            let mut row = vec![a.clone(), b.clone()];
            row.extend(
                keys.iter()
                    .map(|k| attrs.get(*k).map(AttrValue::plain).unwrap_or_default()),
            );
            row
        }),
    )
}

pub fn write_campaign_diversity_csv(histogram: &BTreeMap<usize, usize>) -> Result<String, ExportError> {
    csv_text(
        &["distinct_items", "campaigns"],
        histogram.iter().map(|(k, v)| [k.to_string(), v.to_string()]),
    )
}

pub fn write_slabs_per_item_csv(histogram: &BTreeMap<String, usize>, item_column: &str) -> Result<String, ExportError> {
    csv_text(
        &[item_column, "slabs"],
        histogram.iter().map(|(k, v)| [k.clone(), v.to_string()]),
    )
}

/// Generic CSV writer used for tidy tables.
pub fn write_table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, ExportError> {
    csv_text(header, rows)
}
