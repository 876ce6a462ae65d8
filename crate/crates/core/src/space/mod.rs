//! Indexed, immutable view over every valid configuration of a problem.

mod export;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::solver::{solve_with, Configuration, Problem, SolutionSet, SolveError, SolverOptions};
use crate::value::{ParamValue, Tag};

pub use export::{export, import, read_csv, write_csv, ExportFormat, ImportError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("the search space is empty")]
    Empty,
    #[error("parameter `{0}` is not numeric")]
    NotNumeric(String),
    #[error("configuration has {found} values, expected {expected}")]
    Arity { expected: usize, found: usize },
    #[error("value {value} for `{param}` is {found}, expected {expected}")]
    WrongType {
        param: String,
        value: ParamValue,
        expected: Tag,
        found: Tag,
    },
    #[error("value {value} is not in the domain of `{param}`")]
    OutOfDomain { param: String, value: ParamValue },
    #[error("configuration {0} is not in the search space")]
    NotMember(Configuration),
    #[error("hamming distance must be at least 1")]
    ZeroDistance,
    #[error("cannot sample {requested} configurations from a space of {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("search space has more than {} configurations", u32::MAX)]
    TooLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    /// Differs in at least one and at most `d` parameters.
    Hamming(usize),
    /// Every parameter within one step in its sorted unique value list.
    AdjacentIndex,
}

enum Index {
    /// Mixed-radix code over declared-domain indices.
    Packed(FxHashMap<u64, u32>),
    Wide(FxHashMap<Box<[u32]>, u32>),
}

pub struct SearchSpace {
    solutions: SolutionSet,
    cartesian: u128,
    /// Per parameter, declared-domain indices of values occurring in some
    /// valid configuration, sorted by value.
    unique: Vec<Vec<u32>>,
    /// Per parameter, declared index to rank in `unique` (`u32::MAX` if absent).
    rank: Vec<Vec<u32>>,
    lookup: Vec<FxHashMap<ParamValue, u32>>,
    radix: Vec<u64>,
    index: Index,
}

impl std::fmt::Debug for SearchSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SearchSpace")
            .field("parameters", &self.solutions.names())
            .field("valid", &self.len())
            .field("cartesian", &self.cartesian)
            .finish()
    }
}

/// Solves `problem` and indexes the result.
pub fn build_search_space(problem: &Problem) -> Result<SearchSpace, SolveError> {
    build_with(problem, SolverOptions::default())
}

pub fn build_with(problem: &Problem, options: SolverOptions) -> Result<SearchSpace, SolveError> {
    let solutions = solve_with(problem, options)?;
    Ok(SearchSpace::from_solutions(solutions, problem.cartesian_size()).expect("solver output fits the index"))
}

impl SearchSpace {
    /// Indexes an existing solution set. `cartesian` is recorded as metadata.
    pub fn from_solutions(solutions: SolutionSet, cartesian: u128) -> Result<SearchSpace, SpaceError> {
        if solutions.len() > u32::MAX as usize {
            return Err(SpaceError::TooLarge);
        }
        let width = solutions.width();
        let domains = solutions.domains();
        let mut used: Vec<Vec<bool>> = domains.iter().map(|d| vec![false; d.len()]).collect();
        for i in 0..solutions.len() {
            for (p, &idx) in solutions.row(i).iter().enumerate() {
                used[p][idx as usize] = true;
            }
        }
        let mut unique = Vec::with_capacity(width);
        let mut rank = Vec::with_capacity(width);
        for (p, domain) in domains.iter().enumerate() {
            let values = domain.values();
            let mut present: Vec<u32> = (0..values.len() as u32).filter(|&i| used[p][i as usize]).collect();
            present.sort_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]));
            let mut r = vec![u32::MAX; values.len()];
            for (k, &i) in present.iter().enumerate() {
                r[i as usize] = k as u32;
            }
            unique.push(present);
            rank.push(r);
        }
        let lookup = domains
            .iter()
            .map(|d| d.values().iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect())
            .collect();
        let radix: Vec<u64> = domains.iter().map(|d| d.len().max(1) as u64).collect();
        let packable = radix.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r)).is_some();
        let index = if packable {
            let mut map = FxHashMap::with_capacity_and_hasher(solutions.len(), Default::default());
            for i in 0..solutions.len() {
                map.insert(pack(&radix, solutions.row(i)), i as u32);
            }
            Index::Packed(map)
        } else {
            let mut map = FxHashMap::with_capacity_and_hasher(solutions.len(), Default::default());
            for i in 0..solutions.len() {
                map.insert(Box::from(solutions.row(i)), i as u32);
            }
            Index::Wide(map)
        };
        Ok(SearchSpace {
            solutions,
            cartesian,
            unique,
            rank,
            lookup,
            radix,
            index,
        })
    }

    pub fn names(&self) -> &[String] {
        self.solutions.names()
    }

    pub fn solutions(&self) -> &SolutionSet {
        &self.solutions
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn cartesian_size(&self) -> u128 {
        self.cartesian
    }

    pub fn get(&self, i: usize) -> Option<Configuration> {
        (i < self.len()).then(|| self.solutions.configuration(i))
    }

    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        self.solutions.configurations()
    }

    fn param(&self, name: &str) -> Result<usize, SpaceError> {
        self.names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| SpaceError::UnknownParameter(name.to_string()))
    }

    /// Values of `name` occurring in at least one valid configuration, sorted.
    pub fn unique_values(&self, name: &str) -> Result<Vec<ParamValue>, SpaceError> {
        let p = self.param(name)?;
        let values = self.solutions.domains()[p].values();
        Ok(self.unique[p].iter().map(|&i| values[i as usize].clone()).collect())
    }

    /// Smallest and largest value of a numeric parameter over the valid
    /// configurations.
    pub fn bounds(&self, name: &str) -> Result<(ParamValue, ParamValue), SpaceError> {
        let p = self.param(name)?;
        let values = self.solutions.domains()[p].values();
        let (Some(&lo), Some(&hi)) = (self.unique[p].first(), self.unique[p].last()) else {
            return Err(SpaceError::Empty);
        };
        let (lo, hi) = (&values[lo as usize], &values[hi as usize]);
        if !lo.is_numeric() {
            return Err(SpaceError::NotNumeric(name.to_string()));
        }
        Ok((lo.clone(), hi.clone()))
    }

    /// Declared-domain indices of `config`, or `None` if some value is well
    /// typed but outside its domain.
    fn encode(&self, config: &Configuration) -> Result<Option<Vec<u32>>, SpaceError> {
        let width = self.solutions.width();
        if config.0.len() != width {
            return Err(SpaceError::Arity {
                expected: width,
                found: config.0.len(),
            });
        }
        let mut out = Vec::with_capacity(width);
        for (p, v) in config.0.iter().enumerate() {
            let domain = &self.solutions.domains()[p];
            if let Some(expected) = domain.tag() {
                if expected != v.tag() {
                    return Err(SpaceError::WrongType {
                        param: self.names()[p].clone(),
                        value: v.clone(),
                        expected,
                        found: v.tag(),
                    });
                }
            }
            match self.lookup[p].get(v) {
                Some(&i) => out.push(i),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    fn encode_in_domain(&self, config: &Configuration) -> Result<Vec<u32>, SpaceError> {
        self.encode(config)?.ok_or_else(|| {
            let p = config
                .0
                .iter()
                .enumerate()
                .position(|(p, v)| !self.lookup[p].contains_key(v))
                .expect("some value is outside its domain");
            SpaceError::OutOfDomain {
                param: self.names()[p].clone(),
                value: config.0[p].clone(),
            }
        })
    }

    fn lookup_row(&self, row: &[u32]) -> Option<usize> {
        match &self.index {
            Index::Packed(map) => map.get(&pack(&self.radix, row)),
            Index::Wide(map) => map.get(row),
        }
        .map(|&i| i as usize)
    }

    /// Position of `config` in the space, if it is a valid configuration.
    pub fn index_of(&self, config: &Configuration) -> Result<Option<usize>, SpaceError> {
        Ok(self.encode(config)?.and_then(|row| self.lookup_row(&row)))
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        matches!(self.index_of(config), Ok(Some(_)))
    }

    /// Valid neighbors of `config`, ordered by index.
    pub fn neighbors(&self, config: &Configuration, method: Neighborhood) -> Result<Vec<Configuration>, SpaceError> {
        Ok(self
            .neighbor_indices(config, method)?
            .into_iter()
            .map(|i| self.solutions.configuration(i))
            .collect())
    }

    pub fn neighbor_indices(&self, config: &Configuration, method: Neighborhood) -> Result<Vec<usize>, SpaceError> {
        match method {
            Neighborhood::Hamming(0) => Err(SpaceError::ZeroDistance),
            Neighborhood::Hamming(d) => {
                let row = self.encode_in_domain(config)?;
                Ok(self.hamming(&row, d))
            }
            Neighborhood::AdjacentIndex => {
                let row = self.encode_in_domain(config)?;
                if self.lookup_row(&row).is_none() {
                    return Err(SpaceError::NotMember(config.clone()));
                }
                let ranks: Vec<u32> = row.iter().enumerate().map(|(p, &i)| self.rank[p][i as usize]).collect();
                Ok(self.adjacent(&row, &ranks))
            }
        }
    }

    fn hamming(&self, row: &[u32], d: usize) -> Vec<usize> {
        let alternatives: Vec<Vec<u32>> = self
            .unique
            .iter()
            .zip(row)
            .map(|(u, &own)| u.iter().copied().filter(|&i| i != own).collect())
            .collect();
        // Number of candidate rows: elementary symmetric sums e_1..e_d of the
        // per-parameter alternative counts.
        let mut e = vec![0f64; d + 1];
        e[0] = 1.0;
        for a in &alternatives {
            for k in (1..=d).rev() {
                e[k] += e[k - 1] * a.len() as f64;
            }
        }
        let candidates: f64 = e[1..].iter().sum();
        let mut found = Vec::new();
        if candidates < self.len() as f64 {
            let mut current = row.to_vec();
            self.enumerate_hamming(&alternatives, 0, d, &mut current, &mut found);
            found.sort_unstable();
        } else {
            for i in 0..self.len() {
                let other = self.solutions.row(i);
                let distance = other.iter().zip(row).filter(|(a, b)| a != b).count();
                if (1..=d).contains(&distance) {
                    found.push(i);
                }
            }
        }
        found
    }

    fn enumerate_hamming(
        &self,
        alternatives: &[Vec<u32>],
        from: usize,
        budget: usize,
        current: &mut Vec<u32>,
        found: &mut Vec<usize>,
    ) {
        if budget == 0 {
            return;
        }
        for p in from..current.len() {
            let own = current[p];
            for &alt in &alternatives[p] {
                current[p] = alt;
                if let Some(i) = self.lookup_row(current) {
                    found.push(i);
                }
                self.enumerate_hamming(alternatives, p + 1, budget - 1, current, found);
            }
            current[p] = own;
        }
    }

    fn adjacent(&self, row: &[u32], ranks: &[u32]) -> Vec<usize> {
        let choices: Vec<Vec<u32>> = ranks
            .iter()
            .enumerate()
            .map(|(p, &r)| {
                let lo = r.saturating_sub(1) as usize;
                let hi = (r as usize + 1).min(self.unique[p].len() - 1);
                self.unique[p][lo..=hi].to_vec()
            })
            .collect();
        let candidates: f64 = choices.iter().map(|c| c.len() as f64).product();
        let mut found = Vec::new();
        if candidates < self.len() as f64 {
            let mut current = row.to_vec();
            let mut cursor = vec![0usize; choices.len()];
            'outer: loop {
                for (p, c) in cursor.iter().enumerate() {
                    current[p] = choices[p][*c];
                }
                if current != row {
                    if let Some(i) = self.lookup_row(&current) {
                        found.push(i);
                    }
                }
                for p in (0..cursor.len()).rev() {
                    cursor[p] += 1;
                    if cursor[p] < choices[p].len() {
                        continue 'outer;
                    }
                    cursor[p] = 0;
                }
                break;
            }
            found.sort_unstable();
        } else {
            for i in 0..self.len() {
                let other = self.solutions.row(i);
                if other == row {
                    continue;
                }
                let close = other
                    .iter()
                    .zip(ranks)
                    .enumerate()
                    .all(|(p, (&idx, &r))| self.rank[p][idx as usize].abs_diff(r) <= 1);
                if close {
                    found.push(i);
                }
            }
        }
        found
    }

    /// `n` distinct configurations drawn uniformly without replacement.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Configuration>, SpaceError> {
        Ok(self
            .sample_indices(n, seed)?
            .into_iter()
            .map(|i| self.solutions.configuration(i))
            .collect())
    }

    pub fn sample_indices(&self, n: usize, seed: u64) -> Result<Vec<usize>, SpaceError> {
        if n > self.len() {
            return Err(SpaceError::SampleTooLarge {
                requested: n,
                available: self.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(rand::seq::index::sample(&mut rng, self.len(), n).into_vec())
    }
}

fn pack(radix: &[u64], row: &[u32]) -> u64 {
    row.iter().zip(radix).fold(0u64, |acc, (&i, &r)| acc * r + i as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::CompiledConstraint;
    use crate::domain::Domain;

    fn space(x: &[i64], y: &[i64], constraints: &[&str]) -> SearchSpace {
        let p = Problem::new(
            vec![
                ("x".into(), Domain::ints(x.iter().copied()).unwrap()),
                ("y".into(), Domain::ints(y.iter().copied()).unwrap()),
            ],
            constraints,
        )
        .unwrap();
        build_search_space(&p).unwrap()
    }

    fn max_product_space() -> SearchSpace {
        space(&[1, 2, 4], &[1, 2, 4], &["x*y <= 4"])
    }

    #[test]
    fn construction() {
        let s = max_product_space();
        assert_eq!((s.len(), s.cartesian_size()), (6, 9));
        assert_eq!(space(&[1, 2], &[1, 2], &[]).len(), 4);
        let empty = space(&[1, 2], &[1, 2], &["x > 100"]);
        assert!(empty.is_empty());
        assert_eq!(empty.bounds("x"), Err(SpaceError::Empty));
        for (i, c) in s.configurations().enumerate() {
            assert_eq!(s.index_of(&c).unwrap(), Some(i));
        }
    }

    #[test]
    fn true_bounds() {
        let s = max_product_space();
        assert_eq!(s.bounds("x").unwrap(), (ParamValue::Int(1), ParamValue::Int(4)));
        assert_eq!(space(&[3, 1, 2], &[1], &[]).bounds("x").unwrap(), (1.into(), 3.into()));

        let p = Problem::from_compiled(
            vec![
                ("x".into(), Domain::ints([1, 2, 12]).unwrap()),
                ("y".into(), Domain::ints([1, 2]).unwrap()),
            ],
            vec![CompiledConstraint::max_product(10, &["x", "y"])],
        )
        .unwrap();
        let s = build_search_space(&p).unwrap();
        assert_eq!(s.bounds("x").unwrap(), (1.into(), 2.into()));
        assert!(matches!(s.bounds("z"), Err(SpaceError::UnknownParameter(_))));
    }

    #[test]
    fn non_numeric_bounds_are_rejected() {
        let p = Problem::new(
            vec![("mode".into(), Domain::new(vec!["a".into(), "b".into()]).unwrap())],
            &[] as &[&str],
        )
        .unwrap();
        let s = build_search_space(&p).unwrap();
        assert_eq!(s.bounds("mode"), Err(SpaceError::NotNumeric("mode".into())));
    }

    #[test]
    fn index_lookup() {
        let s = max_product_space();
        assert!(s.index_of(&[2, 2].into()).unwrap().is_some());
        assert_eq!(s.index_of(&[4, 4].into()).unwrap(), None);
        assert_eq!(s.index_of(&[3, 1].into()).unwrap(), None);
        assert!(matches!(s.index_of(&[1].into()), Err(SpaceError::Arity { .. })));
        let wrong = Configuration(vec![ParamValue::Bool(true), ParamValue::Int(1)]);
        assert!(matches!(s.index_of(&wrong), Err(SpaceError::WrongType { .. })));
    }

    #[test]
    fn hamming_neighbors() {
        let s = max_product_space();
        let n = s.neighbors(&[2, 2].into(), Neighborhood::Hamming(1)).unwrap();
        let mut sorted = n.clone();
        sorted.sort_by_key(|c| s.index_of(c).unwrap());
        assert_eq!(n, sorted);
        let mut values: Vec<_> = n.iter().map(|c| c.to_string()).collect();
        values.sort();
        assert_eq!(values, vec!["(1, 2)", "(2, 1)"]);

        let all = s.neighbors(&[2, 2].into(), Neighborhood::Hamming(2)).unwrap();
        assert_eq!(all.len(), 5);
        assert!(!all.contains(&[2, 2].into()));
        assert_eq!(s.neighbors(&[2, 2].into(), Neighborhood::Hamming(0)), Err(SpaceError::ZeroDistance));
        // Non-member configurations are fine for hamming.
        assert_eq!(s.neighbors(&[4, 4].into(), Neighborhood::Hamming(1)).unwrap().len(), 2);
    }

    #[test]
    fn hamming_enumeration_and_scan_agree() {
        // Large space with small alternatives takes the enumeration path;
        // compare against a direct scan.
        let x: Vec<i64> = (1..=40).collect();
        let s = space(&x, &x, &["x + y <= 50"]);
        for config in [[1, 1], [10, 20], [25, 25]] {
            let c: Configuration = config.into();
            let got = s.neighbor_indices(&c, Neighborhood::Hamming(1)).unwrap();
            let row = s.encode(&c).unwrap().unwrap();
            let expected: Vec<usize> = (0..s.len())
                .filter(|&i| s.solutions.row(i).iter().zip(&row).filter(|(a, b)| a != b).count() == 1)
                .collect();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn adjacent_neighbors() {
        let s = space(&[1, 2, 4, 8], &[1, 2, 4, 8], &["x*y <= 16"]);
        let n = s.neighbors(&[2, 2].into(), Neighborhood::AdjacentIndex).unwrap();
        let mut values: Vec<_> = n.iter().map(|c| c.to_string()).collect();
        values.sort();
        assert_eq!(
            values,
            vec!["(1, 1)", "(1, 2)", "(1, 4)", "(2, 1)", "(2, 4)", "(4, 1)", "(4, 2)", "(4, 4)"]
        );
        assert!(matches!(
            s.neighbors(&[8, 8].into(), Neighborhood::AdjacentIndex),
            Err(SpaceError::NotMember(_))
        ));
    }

    #[test]
    fn sampling() {
        let s = max_product_space();
        assert!(s.sample(0, 1).unwrap().is_empty());
        let mut all: Vec<_> = s.sample(6, 7).unwrap().iter().map(|c| s.index_of(c).unwrap().unwrap()).collect();
        all.sort();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
        assert_eq!(s.sample(3, 42).unwrap(), s.sample(3, 42).unwrap());
        assert_eq!(
            s.sample(7, 1),
            Err(SpaceError::SampleTooLarge {
                requested: 7,
                available: 6
            })
        );
    }
}
