use std::collections::HashSet;

use thiserror::Error;

use crate::value::{ParamValue, Tag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("domain is empty")]
    Empty,
    #[error("duplicate domain value {0}")]
    Duplicate(ParamValue),
    #[error("mixed domain value types: {first} and {other}")]
    MixedTags { first: Tag, other: Tag },
}

/// An ordered list of distinct, same-typed values.
///
/// Construction rejects empty lists; an empty domain can still arise from
/// pruning, where it simply means there are no solutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    values: Vec<ParamValue>,
}

impl Domain {
    pub fn new(values: Vec<ParamValue>) -> Result<Self, DomainError> {
        let first = values.first().ok_or(DomainError::Empty)?.tag();
        let mut seen = HashSet::with_capacity(values.len());
        for v in &values {
            let tag = v.tag();
            if tag != first {
                return Err(DomainError::MixedTags { first, other: tag });
            }
            if !seen.insert(v) {
                return Err(DomainError::Duplicate(v.clone()));
            }
        }
        Ok(Domain { values })
    }

    pub fn ints(values: impl IntoIterator<Item = i64>) -> Result<Self, DomainError> {
        Domain::new(values.into_iter().map(ParamValue::Int).collect())
    }

    /// A subset of this domain, preserving order.
    pub fn filter(&self, mut keep: impl FnMut(&ParamValue) -> bool) -> Domain {
        Domain {
            values: self.values.iter().filter(|v| keep(v)).cloned().collect(),
        }
    }

    pub fn values(&self) -> &[ParamValue] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tag(&self) -> Option<Tag> {
        self.values.first().map(ParamValue::tag)
    }

    pub fn position(&self, value: &ParamValue) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert_eq!(Domain::new(vec![]), Err(DomainError::Empty));
        assert!(matches!(Domain::ints([1, 2, 1]), Err(DomainError::Duplicate(_))));
        assert!(matches!(
            Domain::new(vec![ParamValue::Int(1), ParamValue::Real(2.0)]),
            Err(DomainError::MixedTags { .. })
        ));
        let d = Domain::ints([4, 1, 2]).unwrap();
        assert_eq!(d.values()[0], ParamValue::Int(4));
        assert!(d.filter(|_| false).is_empty());
    }
}
