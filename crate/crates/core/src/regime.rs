use std::fmt;

use serde::{Deserialize, Serialize};

/// Where a hole configuration sits relative to the droplet and to merging.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    OutsideDroplet,
    NoMerging,
    /// Exactly one close pair, by hole index (i < j).
    SingleMerging(usize, usize),
    Remainder,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::OutsideDroplet => "outside-droplet",
            Regime::NoMerging => "no-merging",
            Regime::SingleMerging(..) => "single-merging",
            Regime::Remainder => "remainder",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::SingleMerging(i, j) => write!(f, "single-merging({},{})", i + 1, j + 1),
            other => f.write_str(other.label()),
        }
    }
}
