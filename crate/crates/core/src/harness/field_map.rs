use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::harness::RegimeClassifier;
use crate::par;
use crate::partition::HoleConfig;
use crate::potentials::{asymptotic_prediction, emergent_field_derivative, MIN_SEPARATION};
use crate::regime::Regime;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMapRow {
    pub x: f64,
    pub y: f64,
    pub a_x: f64,
    pub a_y: f64,
    pub v: f64,
    pub regime: String,
    pub predicted_a_x: f64,
    pub predicted_a_y: f64,
    pub predicted_v: f64,
    /// Set when the point hits a fixed hole or the field is degenerate.
    pub flagged: bool,
}

/// A_j and V_j with hole `j` moved over `points`, the other holes fixed.
pub fn field_map(cfg: &HoleConfig, j: usize, points: &[Complex64], cl: &RegimeClassifier) -> Vec<FieldMapRow> {
    par::map(points, |&p| {
        let mut c = cfg.clone();
        c.w[j] = p;
        let regime = cl.classify(&c);
        let mut row = FieldMapRow {
            x: p.re,
            y: p.im,
            a_x: f64::NAN,
            a_y: f64::NAN,
            v: f64::NAN,
            regime: regime.to_string(),
            predicted_a_x: f64::NAN,
            predicted_a_y: f64::NAN,
            predicted_v: f64::NAN,
            flagged: false,
        };
        if c.check_separated(MIN_SEPARATION).is_err() {
            row.flagged = true;
            return row;
        }
        match emergent_field_derivative(&c, j) {
            Ok(f) => {
                row.a_x = f.a[0];
                row.a_y = f.a[1];
                row.v = f.v;
            }
            Err(_) => row.flagged = true,
        }
        if matches!(regime, Regime::NoMerging | Regime::SingleMerging(..)) {
            if let Ok(pr) = asymptotic_prediction(&c, j, &regime) {
                row.predicted_a_x = pr.a[0];
                row.predicted_a_y = pr.a[1];
                row.predicted_v = pr.v;
            }
        }
        row
    })
}
