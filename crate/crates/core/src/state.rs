//! Book states, event labels and the product norm used to compare them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_dx, GridDensity};

/// The eight order book events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    /// Market sell order: bid moves down one tick.
    A,
    /// Buy limit order in the spread: bid moves up one tick.
    B,
    /// Cancelation of buy volume.
    C,
    /// Buy limit order outside the spread.
    D,
    /// Market buy order: ask moves up one tick.
    E,
    /// Sell limit order in the spread: ask moves down one tick.
    F,
    /// Cancelation of sell volume.
    G,
    /// Sell limit order outside the spread.
    H,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::A,
        EventKind::B,
        EventKind::C,
        EventKind::D,
        EventKind::E,
        EventKind::F,
        EventKind::G,
        EventKind::H,
    ];

    pub fn is_active(self) -> bool {
        matches!(self, EventKind::A | EventKind::B | EventKind::E | EventKind::F)
    }

    pub fn is_passive(self) -> bool {
        !self.is_active()
    }

    /// Position in [`EventKind::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> char {
        (b'A' + self as u8) as char
    }
}

/// Side of the book.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

/// Best bid, best ask and the two relative volume densities.
///
/// Prices are integer tick counts; the inverse event pairs restore a state
/// bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookState {
    pub dx: f64,
    pub bid_tick: i64,
    pub ask_tick: i64,
    pub vb: GridDensity,
    pub vs: GridDensity,
}

impl BookState {
    pub fn new(dx: f64, bid_tick: i64, ask_tick: i64, vb: GridDensity, vs: GridDensity) -> Result<Self> {
        if bid_tick > ask_tick {
            return Err(Error::Model(format!("bid tick {bid_tick} above ask tick {ask_tick}")));
        }
        check_dx(dx, vb.dx)?;
        check_dx(dx, vs.dx)?;
        Ok(BookState {
            dx,
            bid_tick,
            ask_tick,
            vb,
            vs,
        })
    }

    pub fn bid(&self) -> f64 {
        self.bid_tick as f64 * self.dx
    }

    pub fn ask(&self) -> f64 {
        self.ask_tick as f64 * self.dx
    }

    pub fn spread_ticks(&self) -> i64 {
        self.ask_tick - self.bid_tick
    }

    pub fn density(&self, side: Side) -> &GridDensity {
        match side {
            Side::Buy => &self.vb,
            Side::Sell => &self.vs,
        }
    }

    pub fn density_mut(&mut self, side: Side) -> &mut GridDensity {
        match side {
            Side::Buy => &mut self.vb,
            Side::Sell => &mut self.vs,
        }
    }
}

/// A limit state projected onto a tick grid.
///
/// `vb` and `vs` hold exact bin averages of the limit densities and
/// `residual_b`, `residual_s` the squared L² norm of what the projection
/// discards, so distances to step functions on the same grid are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSnapshot {
    pub t: f64,
    pub bid: f64,
    pub ask: f64,
    pub vb: GridDensity,
    pub vs: GridDensity,
    pub residual_b: f64,
    pub residual_s: f64,
}

/// `|b1 - b2| + |a1 - a2| + ||vb1 - vb2|| + ||vs1 - vs2||`.
pub fn e_norm(s1: &BookState, s2: &BookState) -> Result<f64> {
    check_dx(s1.dx, s2.dx)?;
    Ok((s1.bid() - s2.bid()).abs() + (s1.ask() - s2.ask()).abs() + s1.vb.l2_dist(&s2.vb)? + s1.vs.l2_dist(&s2.vs)?)
}

/// Product-norm distance between a discrete state and a projected limit
/// state on the same tick grid.
pub fn e_norm_to_limit(s: &BookState, limit: &LimitSnapshot) -> Result<f64> {
    let db = (s.vb.l2_dist_sq(&limit.vb)? + limit.residual_b.max(0.0)).sqrt();
    let ds = (s.vs.l2_dist_sq(&limit.vs)? + limit.residual_s.max(0.0)).sqrt();
    Ok((s.bid() - limit.bid).abs() + (s.ask() - limit.ask).abs() + db + ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(bid: i64, ask: i64, vb: Vec<f64>, vs: Vec<f64>, dx: f64) -> BookState {
        BookState::new(
            dx,
            bid,
            ask,
            GridDensity::new(dx, 0, vb).unwrap(),
            GridDensity::new(dx, 0, vs).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn event_classes() {
        let active: Vec<_> = EventKind::ALL.iter().filter(|k| k.is_active()).collect();
        assert_eq!(active, vec![&EventKind::A, &EventKind::B, &EventKind::E, &EventKind::F]);
        assert_eq!(EventKind::G.label(), 'G');
        assert_eq!(EventKind::H.index(), 7);
    }

    #[test]
    fn norm_examples() {
        let s = state(0, 4, vec![1.0, 2.0], vec![0.5], 0.5);
        assert_eq!(e_norm(&s, &s).unwrap(), 0.0);
        let mut t = s.clone();
        t.bid_tick = 1;
        assert!((e_norm(&s, &t).unwrap() - 0.5).abs() < 1e-15);

        let s1 = state(0, 0, vec![0.0], vec![1.0], 1.0);
        let s2 = state(1, 2, vec![3.0], vec![1.0], 1.0);
        let components = 1.0 + 2.0 + s1.vb.l2_dist(&s2.vb).unwrap() + 0.0;
        assert!((components - 6.0).abs() < 1e-12);
        assert!((e_norm(&s1, &s2).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_ticks_rejected() {
        let s1 = state(0, 1, vec![], vec![], 1.0);
        let s2 = state(0, 1, vec![], vec![], 0.5);
        assert!(matches!(e_norm(&s1, &s2), Err(Error::TickMismatch(_, _))));
    }

    #[test]
    fn crossed_book_rejected() {
        let z = GridDensity::zero(1.0);
        assert!(BookState::new(1.0, 2, 1, z.clone(), z).is_err());
    }

    #[test]
    fn snapshot_distance_adds_residual() {
        let s = state(0, 1, vec![1.0], vec![], 1.0);
        let lim = LimitSnapshot {
            t: 0.0,
            bid: 0.0,
            ask: 1.0,
            vb: GridDensity::new(1.0, 0, vec![1.0]).unwrap(),
            vs: GridDensity::zero(1.0),
            residual_b: 0.25,
            residual_s: 0.0,
        };
        assert!((e_norm_to_limit(&s, &lim).unwrap() - 0.5).abs() < 1e-15);
    }

    fn arb_state() -> impl Strategy<Value = BookState> {
        (
            -10i64..10,
            0i64..5,
            prop::collection::vec(0.0f64..5.0, 0..8),
            prop::collection::vec(0.0f64..5.0, 0..8),
            -3i64..3,
        )
            .prop_map(|(b, s, vb, vs, lo)| BookState {
                dx: 0.5,
                bid_tick: b,
                ask_tick: b + s,
                vb: GridDensity {
                    dx: 0.5,
                    lo,
                    heights: vb,
                },
                vs: GridDensity {
                    dx: 0.5,
                    lo: -lo,
                    heights: vs,
                },
            })
    }

    proptest! {
        #[test]
        fn e_norm_is_a_metric(a in arb_state(), b in arb_state(), c in arb_state()) {
            let ab = e_norm(&a, &b).unwrap();
            prop_assert!((ab - e_norm(&b, &a).unwrap()).abs() <= 1e-12);
            prop_assert_eq!(e_norm(&a, &a).unwrap(), 0.0);
            prop_assert!(e_norm(&a, &c).unwrap() <= ab + e_norm(&b, &c).unwrap() + 1e-12);
        }
    }
}
