use std::io::Write;

use crate::csvfmt::num;
use crate::error::{Error, Result};
use crate::grid::GridDensity;
use crate::state::Side;

/// Clock in which the times of a solution are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    State,
    Wall,
}

impl Frame {
    pub fn label(self) -> &'static str {
        match self {
            Frame::State => "state",
            Frame::Wall => "wall",
        }
    }
}

/// Volume densities of both sides on a time grid and a uniform price grid.
///
/// Values are indexed `[time][x]`. When `cell_width` is set, `x` holds the
/// left edges of bins and the values are bin heights.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeSolution {
    pub frame: Frame,
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub buy: Vec<Vec<f64>>,
    pub sell: Vec<Vec<f64>>,
    pub cell_width: Option<f64>,
}

impl PdeSolution {
    pub fn side(&self, side: Side) -> &[Vec<f64>] {
        match side {
            Side::Buy => &self.buy,
            Side::Sell => &self.sell,
        }
    }

    /// Grid spacing of `x`, or 0 for fewer than two points.
    pub fn spacing(&self) -> f64 {
        match self.cell_width {
            Some(w) => w,
            None if self.x.len() > 1 => self.x[1] - self.x[0],
            None => 0.0,
        }
    }

    /// Bin heights of one side at a time index, for cell solutions.
    pub fn grid_density(&self, side: Side, time_index: usize) -> Result<GridDensity> {
        let dx = self
            .cell_width
            .ok_or_else(|| Error::Config("solution values are not bin heights".into()))?;
        let lo = self.x.first().map_or(0, |x| (x / dx).round() as i64);
        Ok(GridDensity {
            dx,
            lo,
            heights: self.side(side)[time_index].clone(),
        }
        .trimmed())
    }

    /// Largest over time of the discrete L² distance between two solutions
    /// on the same grids, with both sides combined.
    pub fn sup_l2_distance(&self, other: &PdeSolution) -> Result<f64> {
        if self.times.len() != other.times.len() || self.x.len() != other.x.len() {
            return Err(Error::Config("solutions are on different grids".into()));
        }
        let dx = self.spacing();
        let mut worst = 0.0f64;
        for i in 0..self.times.len() {
            let mut acc = 0.0;
            for side in [Side::Buy, Side::Sell] {
                for (a, b) in self.side(side)[i].iter().zip(&other.side(side)[i]) {
                    acc += (a - b) * (a - b);
                }
            }
            worst = worst.max((dx * acc).sqrt());
        }
        Ok(worst)
    }

    /// Smallest value over both sides and all times.
    pub fn min_value(&self) -> f64 {
        self.buy
            .iter()
            .chain(&self.sell)
            .flatten()
            .fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// CSV with a frame header line and columns `t,x,side,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# frame={}", self.frame.label())?;
        writeln!(w, "t,x,side,value")?;
        for (i, t) in self.times.iter().enumerate() {
            for side in [Side::Buy, Side::Sell] {
                for (x, v) in self.x.iter().zip(&self.side(side)[i]) {
                    writeln!(w, "{},{},{},{}", num(*t), num(*x), side.label(), num(*v))?;
                }
            }
        }
        Ok(())
    }
}
