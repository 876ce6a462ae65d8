//! Scalar parameter values and the arithmetic shared by every evaluator.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The type tag of a [`ParamValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Int,
    Real,
    Bool,
    Text,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Int => "integer",
            Tag::Real => "real",
            Tag::Bool => "boolean",
            Tag::Text => "text",
        })
    }
}

/// A single domain element or expression result.
///
/// Equality is exact and tag-sensitive: `Int(2)` and `Real(2.0)` are different
/// values. Numeric comparison with promotion happens in [`compare`], not here.
#[derive(Debug, Clone)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(Arc<str>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueError {
    #[error("real values must be finite, got {0}")]
    NonFinite(f64),
}

impl ParamValue {
    pub fn real(value: f64) -> Result<Self, ValueError> {
        if value.is_finite() {
            Ok(ParamValue::Real(value))
        } else {
            Err(ValueError::NonFinite(value))
        }
    }

    pub fn text(value: impl AsRef<str>) -> Self {
        ParamValue::Text(Arc::from(value.as_ref()))
    }

    pub fn tag(&self) -> Tag {
        match self {
            ParamValue::Int(_) => Tag::Int,
            ParamValue::Real(_) => Tag::Real,
            ParamValue::Bool(_) => Tag::Bool,
            ParamValue::Text(_) => Tag::Text,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ParamValue::Int(_) | ParamValue::Real(_))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ParamValue::Bool(v) => Some(*v),
            _ => None,
        }
    }

    /// Total order used for sorted unique-value lists: numbers by value,
    /// then booleans, then text. Only meaningful within a single tag.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        use ParamValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (Int(a), Real(b)) => cmp_int_real(*a, *b),
            (Real(a), Int(b)) => cmp_int_real(*b, *a).reverse(),
            (Bool(a), Bool(b)) => a.cmp(b),
            (Text(a), Text(b)) => a.cmp(b),
            _ => self.tag().cmp(&other.tag()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ParamValue::Int(v) => serde_json::Value::from(*v),
            ParamValue::Real(v) => serde_json::Value::from(*v),
            ParamValue::Bool(v) => serde_json::Value::Bool(*v),
            ParamValue::Text(v) => serde_json::Value::String(v.to_string()),
        }
    }

    /// Converts a JSON scalar. Integers outside the i64 range and non-scalars
    /// are rejected.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        match value {
            serde_json::Value::Bool(b) => Ok(ParamValue::Bool(*b)),
            serde_json::Value::String(s) => Ok(ParamValue::text(s)),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(ParamValue::Int(i))
                } else if n.is_u64() {
                    Err(format!("integer {n} does not fit in 64 bits"))
                } else {
                    let f = n.as_f64().ok_or_else(|| format!("unrepresentable number {n}"))?;
                    ParamValue::real(f).map_err(|e| e.to_string())
                }
            }
            other => Err(format!("expected a scalar value, found {other}")),
        }
    }
}

impl PartialEq for ParamValue {
    fn eq(&self, other: &Self) -> bool {
        use ParamValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a == b,
            (Real(a), Real(b)) => a == b,
            (Bool(a), Bool(b)) => a == b,
            (Text(a), Text(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for ParamValue {}

impl Hash for ParamValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.tag().hash(state);
        match self {
            ParamValue::Int(v) => v.hash(state),
            // -0.0 == 0.0, so both must hash alike.
            ParamValue::Real(v) => (if *v == 0.0 { 0.0f64 } else { *v }).to_bits().hash(state),
            ParamValue::Bool(v) => v.hash(state),
            ParamValue::Text(v) => v.hash(state),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            // Debug gives the shortest representation that parses back exactly.
            ParamValue::Real(v) => write!(f, "{v:?}"),
            ParamValue::Bool(true) => f.write_str("True"),
            ParamValue::Bool(false) => f.write_str("False"),
            ParamValue::Text(s) => {
                f.write_str("'")?;
                for c in s.chars() {
                    match c {
                        '\\' => f.write_str("\\\\")?,
                        '\'' => f.write_str("\\'")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("'")
            }
        }
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        ParamValue::Bool(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::text(v)
    }
}

impl Serialize for ParamValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ParamValue::Int(v) => serializer.serialize_i64(*v),
            ParamValue::Real(v) => serializer.serialize_f64(*v),
            ParamValue::Bool(v) => serializer.serialize_bool(*v),
            ParamValue::Text(v) => serializer.serialize_str(v),
        }
    }
}

impl<'de> Deserialize<'de> for ParamValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(deserializer)?;
        ParamValue::from_json(&raw).map_err(serde::de::Error::custom)
    }
}

/// Failure while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("type mismatch: cannot apply `{op}` to {left}{}", right.map(|r| format!(" and {r}")).unwrap_or_default())]
    TypeMismatch {
        op: &'static str,
        left: Tag,
        right: Option<Tag>,
    },
    #[error("integer overflow in `{0}`")]
    Overflow(&'static str),
    #[error("non-finite result in `{0}`")]
    NonFinite(&'static str),
    #[error("math domain error in `{0}`")]
    MathDomain(&'static str),
}

/// Arithmetic operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::FloorDiv => "//",
            ArithOp::Mod => "%",
            ArithOp::Pow => "**",
        }
    }
}

/// Comparison operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
        }
    }
}

/// Exact comparison of an integer against a finite real.
pub(crate) fn cmp_int_real(i: i64, r: f64) -> Ordering {
    // 2^63 is exactly representable; anything at or beyond it is out of i64 range.
    const LIMIT: f64 = 9_223_372_036_854_775_808.0;
    if r >= LIMIT {
        return Ordering::Less;
    }
    if r < -LIMIT {
        return Ordering::Greater;
    }
    let t = r.trunc();
    match i.cmp(&(t as i64)) {
        Ordering::Equal => {
            let frac = r - t;
            if frac > 0.0 {
                Ordering::Less
            } else if frac < 0.0 {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        }
        other => other,
    }
}

fn finite(v: f64, op: &'static str) -> Result<ParamValue, EvalError> {
    if v.is_finite() {
        Ok(ParamValue::Real(v))
    } else {
        Err(EvalError::NonFinite(op))
    }
}

fn mismatch(op: &'static str, a: &ParamValue, b: &ParamValue) -> EvalError {
    EvalError::TypeMismatch {
        op,
        left: a.tag(),
        right: Some(b.tag()),
    }
}

fn as_f64(v: &ParamValue) -> Option<f64> {
    match v {
        ParamValue::Int(i) => Some(*i as f64),
        ParamValue::Real(r) => Some(*r),
        _ => None,
    }
}

/// Floored integer division.
pub(crate) fn floor_div_int(a: i64, b: i64) -> Result<i64, EvalError> {
    if b == 0 {
        return Err(EvalError::DivisionByZero);
    }
    let q = a.checked_div(b).ok_or(EvalError::Overflow("//"))?;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

/// Floored integer remainder; the sign follows the divisor.
pub(crate) fn floor_mod_int(a: i64, b: i64) -> Result<i64, EvalError> {
    if b == 0 {
        return Err(EvalError::DivisionByZero);
    }
    // i64::MIN % -1 is mathematically 0.
    let r = a.checked_rem(b).unwrap_or(0);
    if r != 0 && ((r < 0) != (b < 0)) {
        Ok(r + b)
    } else {
        Ok(r)
    }
}

/// Floored real division and remainder, matching the usual divmod definition.
fn divmod_real(a: f64, b: f64) -> Result<(f64, f64), EvalError> {
    if b == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    let mut rem = a % b;
    let mut div = (a - rem) / b;
    if rem != 0.0 {
        if (b < 0.0) != (rem < 0.0) {
            rem += b;
            div -= 1.0;
        }
    } else {
        rem = 0.0f64.copysign(b);
    }
    let floordiv = if div != 0.0 {
        let mut fd = div.floor();
        if div - fd > 0.5 {
            fd += 1.0;
        }
        fd
    } else {
        0.0f64.copysign(a / b)
    };
    Ok((floordiv, rem))
}

fn pow_values(a: &ParamValue, b: &ParamValue) -> Result<ParamValue, EvalError> {
    match (a, b) {
        (ParamValue::Int(base), ParamValue::Int(exp)) => {
            if *exp >= 0 {
                let e = u32::try_from(*exp).ok();
                match (base, e) {
                    (0 | 1, _) => Ok(ParamValue::Int(if *exp == 0 { 1 } else { *base })),
                    (-1, _) => Ok(ParamValue::Int(if exp % 2 == 0 { 1 } else { -1 })),
                    (_, Some(e)) => base
                        .checked_pow(e)
                        .map(ParamValue::Int)
                        .ok_or(EvalError::Overflow("**")),
                    (_, None) => Err(EvalError::Overflow("**")),
                }
            } else if *base == 0 {
                Err(EvalError::DivisionByZero)
            } else {
                finite((*base as f64).powf(*exp as f64), "**")
            }
        }
        _ => {
            let (x, y) = match (as_f64(a), as_f64(b)) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(mismatch("**", a, b)),
            };
            if x == 0.0 && y < 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            if x < 0.0 && y.fract() != 0.0 {
                return Err(EvalError::MathDomain("**"));
            }
            finite(x.powf(y), "**")
        }
    }
}

/// Applies a binary arithmetic operator with integer overflow detection and
/// floored division semantics. Mixed integer/real operands promote to real.
pub fn arith(op: ArithOp, a: &ParamValue, b: &ParamValue) -> Result<ParamValue, EvalError> {
    use ParamValue::{Int, Real};
    let sym = op.symbol();
    match op {
        ArithOp::Pow => pow_values(a, b),
        ArithOp::Div => match (as_f64(a), as_f64(b)) {
            (Some(_), Some(0.0)) => Err(EvalError::DivisionByZero),
            (Some(x), Some(y)) => finite(x / y, sym),
            _ => Err(mismatch(sym, a, b)),
        },
        _ => match (a, b) {
            (Int(x), Int(y)) => {
                let r = match op {
                    ArithOp::Add => x.checked_add(*y).ok_or(EvalError::Overflow(sym))?,
                    ArithOp::Sub => x.checked_sub(*y).ok_or(EvalError::Overflow(sym))?,
                    ArithOp::Mul => x.checked_mul(*y).ok_or(EvalError::Overflow(sym))?,
                    ArithOp::FloorDiv => floor_div_int(*x, *y)?,
                    ArithOp::Mod => floor_mod_int(*x, *y)?,
                    ArithOp::Div | ArithOp::Pow => unreachable!(),
                };
                Ok(Int(r))
            }
            (Int(_) | Real(_), Int(_) | Real(_)) => {
                let (x, y) = (as_f64(a).unwrap(), as_f64(b).unwrap());
                match op {
                    ArithOp::Add => finite(x + y, sym),
                    ArithOp::Sub => finite(x - y, sym),
                    ArithOp::Mul => finite(x * y, sym),
                    ArithOp::FloorDiv => finite(divmod_real(x, y)?.0, sym),
                    ArithOp::Mod => finite(divmod_real(x, y)?.1, sym),
                    ArithOp::Div | ArithOp::Pow => unreachable!(),
                }
            }
            _ => Err(mismatch(sym, a, b)),
        },
    }
}

pub fn negate(a: &ParamValue) -> Result<ParamValue, EvalError> {
    match a {
        ParamValue::Int(x) => x.checked_neg().map(ParamValue::Int).ok_or(EvalError::Overflow("-")),
        ParamValue::Real(x) => Ok(ParamValue::Real(-x)),
        other => Err(EvalError::TypeMismatch {
            op: "-",
            left: other.tag(),
            right: None,
        }),
    }
}

pub fn logical_not(a: &ParamValue) -> Result<ParamValue, EvalError> {
    match a {
        ParamValue::Bool(b) => Ok(ParamValue::Bool(!b)),
        other => Err(EvalError::TypeMismatch {
            op: "not",
            left: other.tag(),
            right: None,
        }),
    }
}

/// Evaluates `a op b`. Numbers compare by value across integer and real;
/// booleans and text support only equality. Equality between incompatible
/// tags is simply false.
pub fn compare(op: CmpOp, a: &ParamValue, b: &ParamValue) -> Result<bool, EvalError> {
    use ParamValue::*;
    let ord = match (a, b) {
        (Int(x), Int(y)) => x.cmp(y),
        (Real(x), Real(y)) => x.partial_cmp(y).expect("finite reals"),
        (Int(x), Real(y)) => cmp_int_real(*x, *y),
        (Real(x), Int(y)) => cmp_int_real(*y, *x).reverse(),
        _ => {
            let equal = match (a, b) {
                (Bool(x), Bool(y)) => x == y,
                (Text(x), Text(y)) => x == y,
                _ => false,
            };
            return match op {
                CmpOp::Eq => Ok(equal),
                CmpOp::Ne => Ok(!equal),
                _ => Err(mismatch(op.symbol(), a, b)),
            };
        }
    };
    Ok(op.holds(ord))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> ParamValue {
        ParamValue::Int(v)
    }

    #[test]
    fn floored_division_follows_divisor_sign() {
        assert_eq!(arith(ArithOp::FloorDiv, &int(7), &int(2)).unwrap(), int(3));
        assert_eq!(arith(ArithOp::FloorDiv, &int(-7), &int(2)).unwrap(), int(-4));
        assert_eq!(arith(ArithOp::FloorDiv, &int(7), &int(-2)).unwrap(), int(-4));
        assert_eq!(arith(ArithOp::Mod, &int(-7), &int(2)).unwrap(), int(1));
        assert_eq!(arith(ArithOp::Mod, &int(7), &int(-2)).unwrap(), int(-1));
        assert_eq!(arith(ArithOp::Mod, &int(i64::MIN), &int(-1)).unwrap(), int(0));
        assert_eq!(
            arith(ArithOp::FloorDiv, &int(i64::MIN), &int(-1)),
            Err(EvalError::Overflow("//"))
        );
    }

    #[test]
    fn real_divmod_matches_reference_values() {
        let r = |v: f64| ParamValue::Real(v);
        assert_eq!(arith(ArithOp::FloorDiv, &r(7.0), &r(0.1)).unwrap(), r(69.0));
        assert_eq!(arith(ArithOp::Mod, &r(-7.5), &r(2.0)).unwrap(), r(0.5));
        assert_eq!(arith(ArithOp::FloorDiv, &r(-7.5), &r(2.0)).unwrap(), r(-4.0));
    }

    #[test]
    fn overflow_and_division_errors() {
        assert_eq!(arith(ArithOp::Mul, &int(i64::MAX), &int(2)), Err(EvalError::Overflow("*")));
        assert_eq!(arith(ArithOp::Div, &int(1), &int(0)), Err(EvalError::DivisionByZero));
        assert_eq!(arith(ArithOp::Mod, &int(1), &int(0)), Err(EvalError::DivisionByZero));
        assert_eq!(arith(ArithOp::Pow, &int(0), &int(-1)), Err(EvalError::DivisionByZero));
        assert_eq!(arith(ArithOp::Pow, &int(2), &int(64)), Err(EvalError::Overflow("**")));
        assert_eq!(arith(ArithOp::Pow, &int(-1), &int(1 << 40)).unwrap(), int(1));
        assert_eq!(arith(ArithOp::Pow, &int(2), &int(-1)).unwrap(), ParamValue::Real(0.5));
        assert_eq!(arith(ArithOp::Div, &int(7), &int(2)).unwrap(), ParamValue::Real(3.5));
    }

    #[test]
    fn booleans_do_not_coerce() {
        let err = arith(ArithOp::Add, &ParamValue::Bool(true), &int(1)).unwrap_err();
        assert!(matches!(err, EvalError::TypeMismatch { .. }));
        assert!(compare(CmpOp::Lt, &ParamValue::Bool(true), &ParamValue::Bool(false)).is_err());
        assert!(!compare(CmpOp::Eq, &ParamValue::Bool(true), &int(1)).unwrap());
    }

    #[test]
    fn int_real_comparison_is_exact() {
        assert!(compare(CmpOp::Eq, &int(2), &ParamValue::Real(2.0)).unwrap());
        assert!(compare(CmpOp::Lt, &int(2), &ParamValue::Real(2.5)).unwrap());
        assert!(compare(CmpOp::Gt, &int(-2), &ParamValue::Real(-2.5)).unwrap());
        // 2^53 + 1 is not representable as f64 but must still compare greater.
        let big = (1i64 << 53) + 1;
        assert!(compare(CmpOp::Gt, &int(big), &ParamValue::Real((1u64 << 53) as f64)).unwrap());
        assert!(compare(CmpOp::Lt, &int(i64::MAX), &ParamValue::Real(1e19)).unwrap());
    }

    #[test]
    fn value_equality_is_tag_exact() {
        assert_ne!(int(1), ParamValue::Real(1.0));
        assert_ne!(int(1), ParamValue::Bool(true));
        assert!(ParamValue::real(f64::NAN).is_err());
        assert!(ParamValue::real(f64::INFINITY).is_err());
    }

    #[test]
    fn json_conversion() {
        let v: serde_json::Value = serde_json::json!([1, 2.5, true, "a", 2.0]);
        let vals: Vec<ParamValue> = v.as_array().unwrap().iter().map(|x| ParamValue::from_json(x).unwrap()).collect();
        assert_eq!(vals, vec![int(1), ParamValue::Real(2.5), ParamValue::Bool(true), ParamValue::text("a"), ParamValue::Real(2.0)]);
        assert!(ParamValue::from_json(&serde_json::json!(u64::MAX)).is_err());
        assert!(ParamValue::from_json(&serde_json::json!([1])).is_err());
    }
}
