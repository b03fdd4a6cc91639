//! Deterministic report tree: keys sorted, floats printed with 17
//! significant digits, non-finite floats as `null`.

use std::collections::BTreeMap;
use std::fmt::Write;

use qpolar::scalar::{CMat, RMat, RVec};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Node>),
    Map(BTreeMap<String, Node>),
}

impl From<bool> for Node {
    fn from(v: bool) -> Self {
        Node::Bool(v)
    }
}

impl From<f64> for Node {
    fn from(v: f64) -> Self {
        Node::Float(v)
    }
}

impl From<usize> for Node {
    fn from(v: usize) -> Self {
        Node::Int(v as i64)
    }
}

impl From<i64> for Node {
    fn from(v: i64) -> Self {
        Node::Int(v)
    }
}

impl From<u64> for Node {
    fn from(v: u64) -> Self {
        Node::Int(v as i64)
    }
}

impl From<&str> for Node {
    fn from(v: &str) -> Self {
        Node::Str(v.to_string())
    }
}

impl From<String> for Node {
    fn from(v: String) -> Self {
        Node::Str(v)
    }
}

impl<T: Into<Node>> From<Option<T>> for Node {
    fn from(v: Option<T>) -> Self {
        v.map_or(Node::Null, Into::into)
    }
}

impl<T: Into<Node>> From<Vec<T>> for Node {
    fn from(v: Vec<T>) -> Self {
        Node::List(v.into_iter().map(Into::into).collect())
    }
}

impl From<&RMat<f64>> for Node {
    fn from(m: &RMat<f64>) -> Self {
        Node::List(m.row_iter().map(|r| Node::List(r.iter().map(|&v| Node::Float(v)).collect())).collect())
    }
}

impl From<&RVec<f64>> for Node {
    fn from(v: &RVec<f64>) -> Self {
        Node::List(v.iter().map(|&x| Node::Float(x)).collect())
    }
}

impl From<&CMat<f64>> for Node {
    fn from(m: &CMat<f64>) -> Self {
        let mut map = Map::new();
        map.insert("re", &m.map(|z| z.re));
        map.insert("im", &m.map(|z| z.im));
        map.into()
    }
}

/// Builder for an object node.
#[derive(Debug, Default, Clone)]
pub struct Map(BTreeMap<String, Node>);

impl Map {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: &str, value: impl Into<Node>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn with(mut self, key: &str, value: impl Into<Node>) -> Self {
        self.insert(key, value);
        self
    }
}

impl From<Map> for Node {
    fn from(m: Map) -> Self {
        Node::Map(m.0)
    }
}

/// Fixed float formatting shared by JSON and CSV output.
pub fn fmt_float(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

fn write_node(out: &mut String, node: &Node, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match node {
        Node::Null => out.push_str("null"),
        Node::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Node::Int(i) => write!(out, "{i}").expect("writing to a String"),
        Node::Float(v) => out.push_str(fmt_float(*v).as_deref().unwrap_or("null")),
        Node::Str(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Node::List(items) if items.is_empty() => out.push_str("[]"),
        Node::List(items) if items.iter().all(|n| !matches!(n, Node::List(_) | Node::Map(_))) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_node(out, item, indent);
            }
            out.push(']');
        }
        Node::List(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_node(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Node::Map(map) if map.is_empty() => out.push_str("{}"),
        Node::Map(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                out.push_str(": ");
                write_node(out, v, indent + 2);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn to_json(node: &Node) -> String {
    let mut out = String::new();
    write_node(&mut out, node, 0);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_floats_fixed() {
        let node: Node = Map::new().with("b", 0.1).with("a", f64::NAN).with("c", vec![1usize, 2]).into();
        let s = to_json(&node);
        assert_eq!(s, "{\n  \"a\": null,\n  \"b\": 1.0000000000000001e-1,\n  \"c\": [1, 2]\n}\n");
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["b"].as_f64(), Some(0.1));
    }
}
