//! Complex numbers stored as `(ln|z|, arg z)`.
//!
//! Zero is the value with `log_mag == -inf`; its phase is 0.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mag: f64,
    pub phase: f64,
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_phase(p: f64) -> f64 {
    if p > -PI && p <= PI {
        return p;
    }
    let mut q = p.rem_euclid(2.0 * PI);
    if q > PI {
        q -= 2.0 * PI;
    }
    q
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex { log_mag: f64::NEG_INFINITY, phase: 0.0 };
    pub const ONE: LogComplex = LogComplex { log_mag: 0.0, phase: 0.0 };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex { log_mag, phase: wrap_phase(phase) }
    }

    pub fn from_real_log(log_mag: f64) -> Self {
        Self::new(log_mag, 0.0)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        // hypot avoids overflow for large components
        LogComplex { log_mag: z.re.hypot(z.im).ln(), phase: z.im.atan2(z.re) }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mag.exp(), self.phase)
    }

    /// Real part, computed without forming the complex value first.
    pub fn re(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.log_mag.exp() * self.phase.cos()
        }
    }

    pub fn abs(&self) -> f64 {
        self.log_mag.exp()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.log_mag, -self.phase)
    }

    pub fn powi(&self, k: i32) -> Self {
        if self.is_zero() {
            return if k == 0 { Self::ONE } else { Self::ZERO };
        }
        Self::new(self.log_mag * k as f64, self.phase * k as f64)
    }

    /// Multiply by a real scale `e^s`.
    pub fn scale_log(&self, s: f64) -> Self {
        if self.is_zero() {
            return *self;
        }
        Self::new(self.log_mag + s, self.phase)
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, o: LogComplex) -> LogComplex {
        if self.is_zero() || o.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.log_mag + o.log_mag, self.phase + o.phase)
    }
}

impl Div for LogComplex {
    type Output = LogComplex;
    fn div(self, o: LogComplex) -> LogComplex {
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.log_mag - o.log_mag, self.phase - o.phase)
    }
}

impl Neg for LogComplex {
    type Output = LogComplex;
    fn neg(self) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex::new(self.log_mag, self.phase + PI)
    }
}

impl fmt::Display for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})∠{}", self.log_mag, self.phase)
    }
}

/// Sum of log-domain terms by shift-and-sum around the largest magnitude.
pub fn log_sum(terms: &[LogComplex]) -> Result<LogComplex> {
    if terms.is_empty() {
        return Err(Error::Usage("log_sum of an empty list".into()));
    }
    let shift = terms.iter().map(|t| t.log_mag).fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Ok(LogComplex::ZERO);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for t in terms {
        if !t.is_zero() {
            let r = (t.log_mag - shift).exp();
            acc += Complex64::from_polar(r, t.phase);
            mag += r;
        }
    }
    // a remainder at rounding level of the inputs is an exact cancellation
    if acc.norm() <= 4.0 * f64::EPSILON * mag {
        return Ok(LogComplex::ZERO);
    }
    Ok(LogComplex::from_complex(acc).scale_log(shift))
}

/// ln(e^a + e^b) for real a, b.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// ln Σ e^{x_i} over reals; -inf for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
