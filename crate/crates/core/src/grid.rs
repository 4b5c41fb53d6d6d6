//! Step-function volume densities on the relative tick grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction of a one-tick translation of a relative density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    /// `result(x) = d(x + dx)`: every bin moves one tick towards the origin.
    Plus,
    /// `result(x) = d(x - dx)`: every bin moves one tick away from the origin.
    Minus,
}

/// Piecewise-constant density with height `heights[i]` on the bin
/// `[(lo + i) * dx, (lo + i + 1) * dx)`; zero everywhere else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub dx: f64,
    pub lo: i64,
    pub heights: Vec<f64>,
}

impl GridDensity {
    pub fn zero(dx: f64) -> Self {
        GridDensity {
            dx,
            lo: 0,
            heights: Vec::new(),
        }
    }

    /// Builds a density, rejecting negative or non-finite heights.
    pub fn new(dx: f64, lo: i64, heights: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Model(format!("tick size must be positive, got {dx}")));
        }
        if let Some(h) = heights.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
            return Err(Error::Model(format!("density height {h} is negative or not finite")));
        }
        Ok(GridDensity { dx, lo, heights })
    }

    /// Index one past the last allocated bin.
    pub fn hi(&self) -> i64 {
        self.lo + self.heights.len() as i64
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    /// Height of bin `j` (zero outside the allocated range).
    pub fn get(&self, j: i64) -> f64 {
        if j < self.lo || j >= self.hi() {
            0.0
        } else {
            self.heights[(j - self.lo) as usize]
        }
    }

    /// Value of the step function at relative price `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        self.get((x / self.dx).floor() as i64)
    }

    /// Mutable access to bin `j`, allocating zero bins as needed.
    pub fn get_mut(&mut self, j: i64) -> &mut f64 {
        if self.heights.is_empty() {
            self.lo = j;
            self.heights.push(0.0);
        } else if j < self.lo {
            let extra = (self.lo - j) as usize;
            self.heights.splice(0..0, std::iter::repeat_n(0.0, extra));
            self.lo = j;
        } else if j >= self.hi() {
            let new_len = (j - self.lo + 1) as usize;
            self.heights.resize(new_len, 0.0);
        }
        &mut self.heights[(j - self.lo) as usize]
    }

    /// Translates the density by one tick in place.
    pub fn shift_in_place(&mut self, direction: Shift) {
        match direction {
            Shift::Plus => self.lo -= 1,
            Shift::Minus => self.lo += 1,
        }
    }

    pub fn shift(&self, direction: Shift) -> GridDensity {
        let mut out = self.clone();
        out.shift_in_place(direction);
        out
    }

    /// `dx * sum(heights)`.
    pub fn mass(&self) -> f64 {
        self.dx * self.heights.iter().sum::<f64>()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.dx * self.heights.iter().map(|h| h * h).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Squared L² distance between two densities on the same grid, aligning
    /// bins by absolute index.
    pub fn l2_dist_sq(&self, other: &GridDensity) -> Result<f64> {
        check_dx(self.dx, other.dx)?;
        if self.is_empty() {
            return Ok(other.l2_norm_sq());
        }
        if other.is_empty() {
            return Ok(self.l2_norm_sq());
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let s: f64 = (lo..hi)
            .map(|j| {
                let d = self.get(j) - other.get(j);
                d * d
            })
            .sum();
        Ok(self.dx * s)
    }

    pub fn l2_dist(&self, other: &GridDensity) -> Result<f64> {
        Ok(self.l2_dist_sq(other)?.sqrt())
    }

    /// Aligned pointwise combination `self + scale * other`, zero padded.
    /// The result may have negative heights; use it for differences only.
    pub fn axpy(&self, scale: f64, other: &GridDensity) -> Result<GridDensity> {
        check_dx(self.dx, other.dx)?;
        if other.is_empty() {
            return Ok(self.clone());
        }
        let (lo, hi) = if self.is_empty() {
            (other.lo, other.hi())
        } else {
            (self.lo.min(other.lo), self.hi().max(other.hi()))
        };
        let heights = (lo..hi).map(|j| self.get(j) + scale * other.get(j)).collect();
        Ok(GridDensity {
            dx: self.dx,
            lo,
            heights,
        })
    }

    /// Drops leading and trailing zero bins.
    pub fn trimmed(&self) -> GridDensity {
        let first = self.heights.iter().position(|h| *h != 0.0);
        match first {
            None => GridDensity::zero(self.dx),
            Some(a) => {
                let b = self.heights.iter().rposition(|h| *h != 0.0).unwrap_or(a);
                GridDensity {
                    dx: self.dx,
                    lo: self.lo + a as i64,
                    heights: self.heights[a..=b].to_vec(),
                }
            }
        }
    }
}

pub(crate) fn check_dx(a: f64, b: f64) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::TickMismatch(a, b))
    }
}

/// `sqrt(dx * sum(heights^2))`.
pub fn l2_norm(d: &GridDensity) -> f64 {
    d.l2_norm()
}

pub fn shift(d: &GridDensity, direction: Shift) -> GridDensity {
    d.shift(direction)
}
