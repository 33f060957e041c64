use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{ModelError, Rational, StateId};

/// A finitely supported (sub-)distribution. Only positive weights are
/// stored and iteration follows the order of the keys.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution<T: Ord = StateId> {
    weights: BTreeMap<T, Rational>,
}

impl<T: Ord + Clone> Distribution<T> {
    /// Collects `(element, weight)` pairs, summing repeated elements and
    /// dropping zero weights. Negative weights and mass above one are errors.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (T, Rational)>) -> Result<Self, ModelError> {
        let mut weights: BTreeMap<T, Rational> = BTreeMap::new();
        for (k, w) in pairs {
            if w < Rational::zero() {
                return Err(ModelError::Weight(format!("negative weight {w}")));
            }
            if w.is_zero() {
                continue;
            }
            *weights.entry(k).or_insert_with(Rational::zero) += w;
        }
        let d = Distribution { weights };
        if d.mass() > Rational::one() {
            return Err(ModelError::Weight(format!("mass {} exceeds 1", d.mass())));
        }
        Ok(d)
    }

    pub fn dirac(x: T) -> Self {
        Distribution {
            weights: BTreeMap::from([(x, Rational::one())]),
        }
    }

    pub fn empty() -> Self {
        Distribution {
            weights: BTreeMap::new(),
        }
    }

    pub fn prob(&self, x: &T) -> Rational {
        self.weights.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn mass(&self) -> Rational {
        self.weights.values().sum()
    }

    pub fn is_full(&self) -> bool {
        self.mass().is_one()
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.weights.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Pushes the distribution forward along `f`, merging collisions.
    pub fn map_states<U: Ord + Clone>(&self, f: impl Fn(&T) -> U) -> Distribution<U> {
        let mut weights: BTreeMap<U, Rational> = BTreeMap::new();
        for (k, w) in &self.weights {
            *weights.entry(f(k)).or_insert_with(Rational::zero) += w;
        }
        Distribution { weights }
    }

    /// `Σ p_i · μ_i`; the weights must be nonnegative and sum to one.
    pub fn convex_combine(parts: &[(Rational, Distribution<T>)]) -> Result<Self, ModelError> {
        let total: Rational = parts.iter().map(|(p, _)| p.clone()).sum();
        if !total.is_one() {
            return Err(ModelError::Weight(format!("weights sum to {total}")));
        }
        let mut pairs = Vec::new();
        for (p, d) in parts {
            if *p < Rational::zero() {
                return Err(ModelError::Weight(format!("negative weight {p}")));
            }
            for (k, w) in d.iter() {
                pairs.push((k.clone(), p * w));
            }
        }
        Distribution::from_pairs(pairs)
    }

    /// Product distribution over pairs.
    pub fn product<U: Ord + Clone>(&self, other: &Distribution<U>) -> Distribution<(T, U)> {
        let mut weights = BTreeMap::new();
        for (x, p) in &self.weights {
            for (y, q) in &other.weights {
                weights.insert((x.clone(), y.clone()), p * q);
            }
        }
        Distribution { weights }
    }
}

impl<T: Ord + Clone> FromIterator<(T, Rational)> for Distribution<T> {
    /// Panics on invalid weights; use [`Distribution::from_pairs`] to handle errors.
    fn from_iter<I: IntoIterator<Item = (T, Rational)>>(iter: I) -> Self {
        Distribution::from_pairs(iter).expect("invalid distribution weights")
    }
}
