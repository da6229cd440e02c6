use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Runtime value. Sets are kept sorted and duplicate-free so that structural
/// equality coincides with set equality.
///
/// In JSON, integers, booleans and arrays map to the corresponding JSON
/// values; sets and tuples are objects `{"set": [...]}` and `{"tuple": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Array(Arc<[Value]>),
    Set(Arc<[Value]>),
    Tuple(Arc<[Value]>),
}

impl Value {
    pub fn set_from(mut items: Vec<Value>) -> Value {
        items.sort();
        items.dedup();
        Value::Set(items.into())
    }

    pub fn array(items: Vec<Value>) -> Value {
        Value::Array(items.into())
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(n) => *n,
            other => panic!("expected integer, found {other}"),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("expected boolean, found {other}"),
        }
    }

    pub fn elements(&self) -> &[Value] {
        match self {
            Value::Array(v) | Value::Set(v) | Value::Tuple(v) => v,
            other => panic!("expected a compound value, found {other}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(n) => s.serialize_i64(*n),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Array(items) => items.serialize(s),
            Value::Set(items) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("set", &**items)?;
                m.end()
            }
            Value::Tuple(items) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("tuple", &**items)?;
                m.end()
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Int(i64),
    Bool(bool),
    Array(Vec<Value>),
    Set { set: Vec<Value> },
    Tuple { tuple: Vec<Value> },
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Int(n) => Value::Int(n),
            Repr::Bool(b) => Value::Bool(b),
            Repr::Array(v) => Value::Array(v.into()),
            Repr::Set { set } => Value::set_from(set),
            Repr::Tuple { tuple } => Value::Tuple(tuple.into()),
        })
    }
}

fn join(f: &mut fmt::Formatter<'_>, items: &[Value]) -> fmt::Result {
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(v) => {
                f.write_str("[")?;
                join(f, v)?;
                f.write_str("]")
            }
            Value::Set(v) => {
                f.write_str("{")?;
                join(f, v)?;
                f.write_str("}")
            }
            Value::Tuple(v) => {
                f.write_str("⟨")?;
                join(f, v)?;
                f.write_str("⟩")
            }
        }
    }
}

/// Named values, in binding order.
pub type Bindings = Vec<(String, Value)>;

pub fn format_bindings(b: &[(String, Value)]) -> String {
    b.iter()
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}
