use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Angular channel κ of the radial reduction. Only the two j = 1/2 channels
/// are supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Channel {
    /// κ = −1 (s-like upper component).
    Minus,
    /// κ = +1 (p-like upper component).
    Plus,
}

impl Channel {
    pub fn kappa(self) -> f64 {
        match self {
            Channel::Minus => -1.0,
            Channel::Plus => 1.0,
        }
    }

    /// True when the upper component sits on the even (half-offset) nodes.
    pub fn upper_on_even(self) -> bool {
        matches!(self, Channel::Minus)
    }
}

impl TryFrom<i32> for Channel {
    type Error = String;
    fn try_from(k: i32) -> std::result::Result<Self, String> {
        match k {
            -1 => Ok(Channel::Minus),
            1 => Ok(Channel::Plus),
            _ => Err(format!("channel must be -1 or 1, got {k}")),
        }
    }
}

impl From<Channel> for i32 {
    fn from(c: Channel) -> i32 {
        c.kappa() as i32
    }
}

/// Staggered radial lattice on (0, L].
///
/// The 2N unknowns are interleaved by position: node `i` sits at
/// `r_i = (i+1)·h/2`, so even nodes are the half-offset points `(j+1/2)h` and
/// odd nodes the integer points `(j+1)h`. The component with the higher-order
/// zero at the origin goes on the integer nodes (see [`Channel`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    length: f64,
    nodes: usize,
    h: f64,
}

pub fn make_grid(length: f64, nodes: usize) -> Result<RadialGrid> {
    if !length.is_finite() || length <= 0.0 {
        return Err(invalid(format!("box length must be finite and positive, got {length}")));
    }
    if nodes < 16 {
        return Err(invalid(format!("node count must be at least 16, got {nodes}")));
    }
    let h = length / nodes as f64;
    if h > 0.1 {
        return Err(invalid(format!("spacing h = {h} exceeds 0.1")));
    }
    Ok(RadialGrid { length, nodes, h })
}

impl RadialGrid {
    /// Grid with spacing `h` covering at least `min_length`.
    pub fn with_spacing(h: f64, min_length: f64) -> Result<RadialGrid> {
        if !(h > 0.0) {
            return Err(invalid(format!("spacing must be positive, got {h}")));
        }
        let n = ((min_length / h) - 1e-9).ceil().max(16.0) as usize;
        make_grid(n as f64 * h, n)
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn nodes(&self) -> usize {
        self.nodes
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    /// Dimension of the interleaved state vector.
    pub fn dim(&self) -> usize {
        2 * self.nodes
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        node_r(self.h, i)
    }

    /// Number of interleaved nodes with r ≤ radius.
    pub fn nodes_within(&self, radius: f64) -> usize {
        let k = (2.0 * radius / self.h - 1.0 + 1e-9).floor();
        if k < 0.0 {
            0
        } else {
            ((k as usize) + 1).min(self.dim())
        }
    }

    /// Bytes held by one spinor on this grid.
    pub fn spinor_bytes(&self) -> usize {
        self.dim() * std::mem::size_of::<crate::C64>()
    }
}

#[inline]
pub(crate) fn node_r(h: f64, i: usize) -> f64 {
    (i as f64 + 1.0) * 0.5 * h
}
