use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eval::Value;

/// Shape of an expression's value with integer bounds erased. Arithmetic is
/// computed over unbounded integers, so expressions are typed by shape and
/// bounds are enforced only where values are bound to declared variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Bool,
    Int,
    Array(usize, Box<Ty>),
    Set(Box<Ty>),
    Tuple(Vec<Ty>),
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => f.write_str("Bool"),
            Ty::Int => f.write_str("ℤ"),
            Ty::Array(n, e) => write!(f, "Array[{n},{e}]"),
            Ty::Set(e) => write!(f, "Set[{e}]"),
            Ty::Tuple(ts) => {
                f.write_str("Tuple[")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Finite type denotation in a fixed model instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeDen {
    Bool,
    Int { lo: i64, hi: i64 },
    Array { len: usize, elem: Box<TypeDen> },
    Set(Box<TypeDen>),
    Tuple(Vec<TypeDen>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("carrier size exceeds 2^64")]
pub struct CarrierOverflow;

impl TypeDen {
    pub fn ty(&self) -> Ty {
        match self {
            TypeDen::Bool => Ty::Bool,
            TypeDen::Int { .. } => Ty::Int,
            TypeDen::Array { len, elem } => Ty::Array(*len, Box::new(elem.ty())),
            TypeDen::Set(e) => Ty::Set(Box::new(e.ty())),
            TypeDen::Tuple(ts) => Ty::Tuple(ts.iter().map(TypeDen::ty).collect()),
        }
    }

    /// Number of values in the carrier.
    pub fn size(&self) -> Result<u64, CarrierOverflow> {
        match self {
            TypeDen::Bool => Ok(2),
            TypeDen::Int { lo, hi } => {
                let span = (*hi as i128) - (*lo as i128) + 1;
                u64::try_from(span).map_err(|_| CarrierOverflow)
            }
            TypeDen::Array { len, elem } => {
                let base = elem.size()?;
                let exp = u32::try_from(*len).map_err(|_| CarrierOverflow)?;
                base.checked_pow(exp).ok_or(CarrierOverflow)
            }
            TypeDen::Set(elem) => {
                let n = elem.size()?;
                if n >= 64 {
                    Err(CarrierOverflow)
                } else {
                    Ok(1u64 << n)
                }
            }
            TypeDen::Tuple(ts) => ts.iter().try_fold(1u64, |acc, t| {
                acc.checked_mul(t.size()?).ok_or(CarrierOverflow)
            }),
        }
    }

    /// The `index`-th value in canonical order: integers ascending, arrays
    /// and tuples as mixed-radix counters with position 0 varying fastest,
    /// sets by membership bitmask with the first element as lowest bit.
    ///
    /// Panics if `index` is not below [`TypeDen::size`].
    pub fn nth(&self, index: u64) -> Value {
        match self {
            TypeDen::Bool => Value::Bool(index == 1),
            TypeDen::Int { lo, .. } => Value::Int(lo + index as i64),
            TypeDen::Array { len, elem } => {
                let base = elem.size().expect("checked carrier");
                let mut rest = index;
                let mut items = Vec::with_capacity(*len);
                for _ in 0..*len {
                    items.push(elem.nth(rest % base));
                    rest /= base;
                }
                Value::Array(items.into())
            }
            TypeDen::Set(elem) => {
                let n = elem.size().expect("checked carrier");
                let items: Vec<Value> = (0..n)
                    .filter(|b| index >> b & 1 == 1)
                    .map(|b| elem.nth(b))
                    .collect();
                Value::Set(items.into())
            }
            TypeDen::Tuple(ts) => {
                let mut rest = index;
                let mut items = Vec::with_capacity(ts.len());
                for t in ts {
                    let base = t.size().expect("checked carrier");
                    items.push(t.nth(rest % base));
                    rest /= base;
                }
                Value::Tuple(items.into())
            }
        }
    }

    /// Lazy enumeration of the carrier in canonical order.
    pub fn values(&self) -> Result<impl Iterator<Item = Value> + '_, CarrierOverflow> {
        let size = self.size()?;
        Ok((0..size).map(move |i| self.nth(i)))
    }

    /// Membership of a value in the carrier.
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (TypeDen::Bool, Value::Bool(_)) => true,
            (TypeDen::Int { lo, hi }, Value::Int(n)) => lo <= n && n <= hi,
            (TypeDen::Array { len, elem }, Value::Array(items)) => {
                items.len() == *len && items.iter().all(|x| elem.contains(x))
            }
            (TypeDen::Set(elem), Value::Set(items)) => items.iter().all(|x| elem.contains(x)),
            (TypeDen::Tuple(ts), Value::Tuple(items)) => {
                ts.len() == items.len() && ts.iter().zip(items.iter()).all(|(t, x)| t.contains(x))
            }
            _ => false,
        }
    }

    /// Short name of the base type, as shown in run headers (`ℤ`, `Bool`, ...).
    pub fn base_name(&self) -> String {
        match self {
            TypeDen::Bool => "Bool".into(),
            TypeDen::Int { .. } => "ℤ".into(),
            TypeDen::Array { len, elem } => format!("Array[{len},{}]", elem.base_name()),
            TypeDen::Set(e) => format!("Set[{}]", e.base_name()),
            TypeDen::Tuple(ts) => format!(
                "Tuple[{}]",
                ts.iter().map(TypeDen::base_name).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

impl fmt::Display for TypeDen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeDen::Bool => f.write_str("Bool"),
            TypeDen::Int { lo, hi } => write!(f, "ℤ[{lo},{hi}]"),
            TypeDen::Array { len, elem } => write!(f, "Array[{len},{elem}]"),
            TypeDen::Set(e) => write!(f, "Set[{e}]"),
            TypeDen::Tuple(ts) => {
                f.write_str("Tuple[")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// A type denotation together with its (checked) carrier size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Carrier {
    den: TypeDen,
    size: u64,
}

impl Carrier {
    pub fn new(den: TypeDen) -> Result<Self, CarrierOverflow> {
        let size = den.size()?;
        Ok(Carrier { den, size })
    }

    pub fn den(&self) -> &TypeDen {
        &self.den
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn nth(&self, index: u64) -> Value {
        self.den.nth(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.size).map(move |i| self.den.nth(i))
    }
}

pub fn carrier_size(den: &TypeDen) -> Result<u64, CarrierOverflow> {
    den.size()
}

pub fn enumerate(den: &TypeDen) -> Result<impl Iterator<Item = Value> + '_, CarrierOverflow> {
    den.values()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(lo: i64, hi: i64) -> TypeDen {
        TypeDen::Int { lo, hi }
    }

    fn ints(v: &[i64]) -> Value {
        Value::array(v.iter().map(|&n| Value::Int(n)).collect())
    }

    #[test]
    fn sizes() {
        assert_eq!(int(0, 20).size(), Ok(21));
        let arr = TypeDen::Array {
            len: 4,
            elem: Box::new(int(-3, 3)),
        };
        assert_eq!(arr.size(), Ok(2401));
        assert_eq!(TypeDen::Set(Box::new(TypeDen::Bool)).size(), Ok(4));
        assert_eq!(TypeDen::Tuple(vec![]).size(), Ok(1));
        assert_eq!(
            TypeDen::Tuple(vec![int(0, 2), TypeDen::Bool]).size(),
            Ok(6)
        );
    }

    #[test]
    fn overflow_is_reported() {
        let big = TypeDen::Array {
            len: 100,
            elem: Box::new(int(0, 9)),
        };
        assert_eq!(big.size(), Err(CarrierOverflow));
        assert_eq!(TypeDen::Set(Box::new(int(0, 63))).size(), Err(CarrierOverflow));
        assert_eq!(int(i64::MIN, i64::MAX).size(), Err(CarrierOverflow));
    }

    #[test]
    fn integers_ascend() {
        let v: Vec<_> = int(-1, 1).values().unwrap().collect();
        assert_eq!(v, vec![Value::Int(-1), Value::Int(0), Value::Int(1)]);
    }

    #[test]
    fn arrays_vary_index_zero_fastest() {
        let arr = TypeDen::Array {
            len: 4,
            elem: Box::new(int(-3, 3)),
        };
        let mut it = arr.values().unwrap();
        assert_eq!(it.next(), Some(ints(&[-3, -3, -3, -3])));
        assert_eq!(it.next(), Some(ints(&[-2, -3, -3, -3])));
    }

    #[test]
    fn sets_by_bitmask() {
        let den = TypeDen::Set(Box::new(int(0, 1)));
        let v: Vec<String> = den.values().unwrap().map(|v| v.to_string()).collect();
        assert_eq!(v, vec!["{}", "{0}", "{1}", "{0,1}"]);
    }

    #[test]
    fn membership() {
        assert!(int(0, 20).contains(&Value::Int(20)));
        assert!(!int(0, 20).contains(&Value::Int(21)));
        let arr = TypeDen::Array {
            len: 2,
            elem: Box::new(int(0, 1)),
        };
        assert!(arr.contains(&ints(&[0, 1])));
        assert!(!arr.contains(&ints(&[0, 2])));
        assert!(!arr.contains(&ints(&[0])));
    }
}
