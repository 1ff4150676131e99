use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Area-tilt strength `a` and geometric ratio `lambda`; line `i` (0-based)
/// carries the tilt coefficient `a * lambda^i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltParams {
    a: f64,
    lambda: f64,
    diagnostic: bool,
}

impl TiltParams {
    pub fn new(a: f64, lambda: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param(format!("a must be positive, got {a}")));
        }
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::param(format!("lambda must exceed 1, got {lambda}")));
        }
        Ok(Self {
            a,
            lambda,
            diagnostic: false,
        })
    }

    /// Reference mode admitting `a = 0` and `lambda = 1` for cross-checks.
    pub fn diagnostic(a: f64, lambda: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::param(format!("a must be non-negative, got {a}")));
        }
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(Error::param(format!("lambda must be at least 1, got {lambda}")));
        }
        Ok(Self {
            a,
            lambda,
            diagnostic: true,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_diagnostic(&self) -> bool {
        self.diagnostic
    }

    /// Tilt coefficient of line `line` (0-based).
    #[inline]
    pub fn coefficient(&self, line: usize) -> f64 {
        self.a * self.lambda.powi(line as i32)
    }

    /// Same `lambda`, tilt strength multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if self.diagnostic {
            Self::diagnostic(self.a * factor, self.lambda)
        } else {
            Self::new(self.a * factor, self.lambda)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TiltParams::new(1.0, 2.0).is_ok());
        let e = TiltParams::new(1.0, 0.5).unwrap_err().to_string();
        assert!(e.contains("lambda must exceed 1"), "{e}");
        assert!(TiltParams::new(0.0, 2.0).is_err());
        assert!(TiltParams::new(1.0, 1.0).is_err());
        let d = TiltParams::diagnostic(0.0, 1.0).unwrap();
        assert!(d.is_diagnostic());
    }

    #[test]
    fn geometric_coefficients() {
        let t = TiltParams::new(0.5, 3.0).unwrap();
        assert_eq!(t.coefficient(0), 0.5);
        assert_eq!(t.coefficient(2), 4.5);
    }
}
