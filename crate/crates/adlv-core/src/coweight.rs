//! Coweights of `GL_h` and the dominance order.
//!
//! A coweight is an integer vector `(μ_1, …, μ_h)`; it is dominant if its
//! entries are non-decreasing. `x ⪯ y` holds when `y − x` is a non-negative
//! combination of positive coroots, equivalently when every prefix sum of `y`
//! is at most the corresponding prefix sum of `x` and the totals agree.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;

/// Exact rational scalar used for Newton points `ν = (m/h, …, m/h)`.
pub type Rational = num_rational::Ratio<i64>;

/// An element of `X_*(A) ≅ ℤ^h` for the diagonal torus of `GL_h`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coweight {
    entries: Vec<i64>,
}

impl Coweight {
    pub fn new(entries: Vec<i64>) -> Self {
        Coweight { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn sum(&self) -> i64 {
        self.entries.iter().sum()
    }

    pub fn is_dominant(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] <= w[1])
    }

    /// The dominant element in the Weyl orbit: entries sorted non-decreasing.
    pub fn dominant(&self) -> Coweight {
        let mut entries = self.entries.clone();
        entries.sort_unstable();
        Coweight { entries }
    }

    /// For a dominant coweight with nonnegative entries: true iff every entry
    /// lies in `{0, 1}`.
    pub fn is_minuscule(&self) -> Result<bool, Error> {
        if !self.is_dominant() {
            return Err(Error::NotDominant(self.to_string()));
        }
        if self.entries.iter().any(|&e| e < 0) {
            return Err(Error::NegativeEntry(self.to_string()));
        }
        Ok(self.entries.iter().all(|&e| e == 0 || e == 1))
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.entries.iter().map(|&e| Rational::from(e)).collect()
    }

    /// `self ⪯ other` in the dominance order.
    pub fn preceq(&self, other: &Coweight) -> Result<bool, Error> {
        preceq_int(&self.entries, &other.entries)
    }
}

impl fmt::Display for Coweight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for Coweight {
    fn from(entries: Vec<i64>) -> Self {
        Coweight::new(entries)
    }
}

/// `x ⪯ y` for rational vectors: prefix sums of `y` bounded by those of `x`,
/// with equal totals.
pub fn preceq(x: &[Rational], y: &[Rational]) -> Result<bool, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut px = Rational::from(0);
    let mut py = Rational::from(0);
    for i in 0..x.len() {
        px += x[i];
        py += y[i];
        if i + 1 < x.len() && py > px {
            return Ok(false);
        }
    }
    Ok(px == py)
}

/// Integer fast path of [`preceq`].
pub fn preceq_int(x: &[i64], y: &[i64]) -> Result<bool, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut px = 0i64;
    let mut py = 0i64;
    for i in 0..x.len() {
        px += x[i];
        py += y[i];
        if i + 1 < x.len() && py > px {
            return Ok(false);
        }
    }
    Ok(px == py)
}
