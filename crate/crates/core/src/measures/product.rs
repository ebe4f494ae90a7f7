//! Product measures with an eventually periodic coordinate rule.

use serde::{Deserialize, Serialize};

use super::measure1d::Measure1D;
use crate::error::{Error, Result};

/// `mu = (x)_n mu_n` where `mu_n = prefix[n-1]` for `n <= prefix.len()` and the
/// cycle repeats afterwards. Coordinates are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProduct")]
pub struct ProductMeasure {
    prefix: Vec<Measure1D>,
    cycle: Vec<Measure1D>,
}

#[derive(Deserialize)]
struct RawProduct {
    #[serde(default)]
    prefix: Vec<Measure1D>,
    cycle: Vec<Measure1D>,
}

impl TryFrom<RawProduct> for ProductMeasure {
    type Error = Error;
    fn try_from(r: RawProduct) -> Result<Self> {
        ProductMeasure::new(r.prefix, r.cycle)
    }
}

impl ProductMeasure {
    pub fn new(prefix: Vec<Measure1D>, cycle: Vec<Measure1D>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidMeasure("the repeating tail of a product measure cannot be empty".into()));
        }
        Ok(ProductMeasure { prefix, cycle })
    }

    /// Every coordinate distributed as `m`.
    pub fn iid(m: Measure1D) -> Self {
        ProductMeasure { prefix: Vec::new(), cycle: vec![m] }
    }

    pub fn standard_gaussian() -> Self {
        Self::iid(Measure1D::standard_gaussian())
    }

    pub fn prefix(&self) -> &[Measure1D] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Measure1D] {
        &self.cycle
    }

    /// Index into `prefix ++ cycle` used by coordinate `n`.
    pub fn class_of(&self, n: usize) -> usize {
        assert!(n >= 1, "coordinates are 1-based");
        if n <= self.prefix.len() {
            n - 1
        } else {
            self.prefix.len() + (n - 1 - self.prefix.len()) % self.cycle.len()
        }
    }

    pub fn class_count(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn class_measure(&self, class: usize) -> &Measure1D {
        if class < self.prefix.len() {
            &self.prefix[class]
        } else {
            &self.cycle[class - self.prefix.len()]
        }
    }

    pub fn at(&self, n: usize) -> &Measure1D {
        self.class_measure(self.class_of(n))
    }

    /// First coordinate from which the rule is periodic.
    pub fn periodic_from(&self) -> usize {
        self.prefix.len() + 1
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }
}
