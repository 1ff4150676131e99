use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary data at the two ends of the time interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundarySpec {
    /// All lines pinned to zero at both ends.
    Zero,
    /// End columns integrated over the open ordered simplex.
    Free,
    /// End columns pinned to the given vectors.
    Fixed { left: Vec<f64>, right: Vec<f64> },
}

impl BoundarySpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if let BoundarySpec::Fixed { left, right } = self {
            for (side, v) in [("left", left), ("right", right)] {
                if v.len() != n {
                    return Err(Error::Dimension {
                        expected: n,
                        got: v.len(),
                    });
                }
                if !is_simplex_point(v) && !v.iter().all(|&x| x == 0.0) {
                    return Err(Error::param(format!(
                        "{side} boundary must be strictly decreasing and positive, or all zeros"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_free(&self) -> bool {
        matches!(self, BoundarySpec::Free)
    }

    /// Pinned value of line `i` at the left (`right == false`) or right end.
    pub fn pinned_value(&self, i: usize, right: bool) -> Option<f64> {
        match self {
            BoundarySpec::Zero => Some(0.0),
            BoundarySpec::Free => None,
            BoundarySpec::Fixed { left, right: r } => Some(if right { r[i] } else { left[i] }),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            BoundarySpec::Zero => "zero",
            BoundarySpec::Free => "free",
            BoundarySpec::Fixed { .. } => "fixed",
        }
    }
}

/// Strictly decreasing and strictly positive.
pub fn is_simplex_point(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
        && v.windows(2).all(|w| w[0] > w[1])
        && v.last().is_none_or(|&x| x > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_validation() {
        let ok = BoundarySpec::Fixed {
            left: vec![2.0, 1.0],
            right: vec![0.0, 0.0],
        };
        assert!(ok.validate(2).is_ok());
        let tie = BoundarySpec::Fixed {
            left: vec![1.0, 1.0],
            right: vec![2.0, 1.0],
        };
        assert!(tie.validate(2).is_err());
        let wrong_len = BoundarySpec::Fixed {
            left: vec![1.0],
            right: vec![2.0, 1.0],
        };
        assert!(matches!(wrong_len.validate(2), Err(Error::Dimension { .. })));
    }
}
