//! Interval reasoning for sum and product constraints over integer domains.
//!
//! A constraint is only eligible when every scoped value is an integer (and
//! at least 1 for products) and the largest attainable aggregate magnitude
//! fits in an i64. Under those conditions the aggregate is monotone in each
//! term and its evaluation can never overflow, so a violated bound is exact.

use std::cmp::Ordering;

use crate::compiler::{Aggregate, Bound};
use crate::value::{cmp_int_real, ParamValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Limit {
    Int(i64),
    Real(f64),
}

impl Limit {
    pub(crate) fn from_value(v: &ParamValue) -> Option<Limit> {
        match v {
            ParamValue::Int(i) => Some(Limit::Int(*i)),
            ParamValue::Real(r) => Some(Limit::Real(*r)),
            _ => None,
        }
    }

    /// Compares an in-range aggregate against the limit.
    fn cmp_aggregate(self, aggregate: i64) -> Ordering {
        match self {
            Limit::Int(l) => aggregate.cmp(&l),
            Limit::Real(r) => cmp_int_real(aggregate, r),
        }
    }
}

/// Inclusive integer range of one scoped term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Span {
    pub lo: i64,
    pub hi: i64,
}

impl Span {
    pub(crate) fn point(v: i64) -> Span {
        Span { lo: v, hi: v }
    }

    /// The range of an integer value list; `None` if empty or non-integer.
    pub(crate) fn of<'a>(values: impl IntoIterator<Item = &'a ParamValue>) -> Option<Span> {
        let mut span: Option<Span> = None;
        for v in values {
            let i = v.as_int()?;
            span = Some(match span {
                None => Span::point(i),
                Some(s) => Span {
                    lo: s.lo.min(i),
                    hi: s.hi.max(i),
                },
            });
        }
        span
    }
}

/// Whether interval reasoning is exact for `aggregate` over these term spans.
pub(crate) fn eligible(aggregate: Aggregate, spans: &[Span]) -> bool {
    match aggregate {
        Aggregate::Product => {
            if spans.iter().any(|s| s.lo < 1) {
                return false;
            }
            let mut product: i128 = 1;
            for s in spans {
                product = match product.checked_mul(s.hi as i128) {
                    Some(p) if p <= i64::MAX as i128 => p,
                    _ => return false,
                };
            }
            true
        }
        Aggregate::Sum => {
            let mut total: i128 = 0;
            for s in spans {
                total += (s.lo as i128).abs().max((s.hi as i128).abs());
                if total > i64::MAX as i128 {
                    return false;
                }
            }
            true
        }
    }
}

/// Identity element and combination for an aggregate.
pub(crate) fn identity(aggregate: Aggregate) -> i64 {
    match aggregate {
        Aggregate::Sum => 0,
        Aggregate::Product => 1,
    }
}

/// Combines two partial aggregates. Callers guarantee eligibility, so the
/// result stays in range.
pub(crate) fn combine(aggregate: Aggregate, a: i64, b: i64) -> i64 {
    match aggregate {
        Aggregate::Sum => a + b,
        Aggregate::Product => a * b,
    }
}

/// Range of the aggregate over the given spans.
pub(crate) fn aggregate_span(aggregate: Aggregate, spans: impl IntoIterator<Item = Span>) -> Span {
    let id = identity(aggregate);
    spans.into_iter().fold(Span::point(id), |acc, s| Span {
        lo: combine(aggregate, acc.lo, s.lo),
        hi: combine(aggregate, acc.hi, s.hi),
    })
}

/// True when even the smallest completion of `bound_part` exceeds the limit.
pub(crate) fn exceeds(aggregate: Aggregate, limit: Limit, bound_part: i64, rest: Span) -> bool {
    limit.cmp_aggregate(combine(aggregate, bound_part, rest.lo)) == Ordering::Greater
}

/// True when even the largest completion of `bound_part` stays below the limit.
pub(crate) fn falls_short(aggregate: Aggregate, limit: Limit, bound_part: i64, rest: Span) -> bool {
    limit.cmp_aggregate(combine(aggregate, bound_part, rest.hi)) == Ordering::Less
}

/// True when no completion of a partial aggregate `bound_part`, with the
/// remaining terms ranging over `rest`, can satisfy the bound.
pub(crate) fn violates(aggregate: Aggregate, bound: Bound, limit: Limit, bound_part: i64, rest: Span) -> bool {
    match bound {
        Bound::Max => exceeds(aggregate, limit, bound_part, rest),
        Bound::Min => falls_short(aggregate, limit, bound_part, rest),
        Bound::Exact => exceeds(aggregate, limit, bound_part, rest) || falls_short(aggregate, limit, bound_part, rest),
    }
}
