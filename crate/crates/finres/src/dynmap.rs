//! Rigorous box-image evaluators for the maps under study.
//!
//! A [`MapSpec`] carries its parameters both as exact rationals and as open
//! interval enclosures built with [`OInterval::from_rational`], mirroring how
//! the Hénon parameters `a = 14/10`, `b = 3/10` enter the computation. Box
//! images are evaluated purely with open-interval arithmetic, so the returned
//! rectangle contains the exact image of the box under every parameter value
//! inside the enclosures.
//!
//! The Hénon x-coordinate squares through [`OInterval::sqr`] (never a generic
//! self-multiplication), and the logistic map is evaluated in the completed-
//! square form `r (1/4 - (x - 1/2)^2)`, which kills the dependency blow-up of
//! the naive `r x (1-x)` product.

use crate::interval::{IntervalError, OInterval, ORect};
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("map expects dimension {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// Exact rational parameter value together with its interval enclosure.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalParam {
    num: i64,
    den: i64,
    enclosure: OInterval,
}

impl RationalParam {
    pub fn new(num: i64, den: i64) -> Result<Self, MapError> {
        Ok(RationalParam {
            num,
            den,
            enclosure: OInterval::from_rational(num, den)?,
        })
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn enclosure(&self) -> &OInterval {
        &self.enclosure
    }

    pub fn exact(&self) -> BigRational {
        BigRational::new(self.num.into(), self.den.into())
    }
}

/// A dynamical map with rigorously enclosed parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    /// `H(x, y) = (1 + y - a x^2, b x)` on the plane.
    Henon { a: RationalParam, b: RationalParam },
    /// `f(x) = r x (1 - x)` on the line.
    Logistic { r: RationalParam },
    /// `f(x) = slope x + offset` on the line.
    Linear1D {
        slope: RationalParam,
        offset: RationalParam,
    },
}

impl MapSpec {
    pub fn henon(a: (i64, i64), b: (i64, i64)) -> Result<Self, MapError> {
        Ok(MapSpec::Henon {
            a: RationalParam::new(a.0, a.1)?,
            b: RationalParam::new(b.0, b.1)?,
        })
    }

    /// The classical parameters, entered as the quotients `14/10` and `3/10`.
    pub fn henon_classic() -> Self {
        Self::henon((14, 10), (3, 10)).expect("valid parameters")
    }

    pub fn logistic(r: (i64, i64)) -> Result<Self, MapError> {
        Ok(MapSpec::Logistic {
            r: RationalParam::new(r.0, r.1)?,
        })
    }

    pub fn linear1d(slope: (i64, i64), offset: (i64, i64)) -> Result<Self, MapError> {
        Ok(MapSpec::Linear1D {
            slope: RationalParam::new(slope.0, slope.1)?,
            offset: RationalParam::new(offset.0, offset.1)?,
        })
    }

    pub fn dimension(&self) -> usize {
        match self {
            MapSpec::Henon { .. } => 2,
            MapSpec::Logistic { .. } | MapSpec::Linear1D { .. } => 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MapSpec::Henon { .. } => "henon",
            MapSpec::Logistic { .. } => "logistic",
            MapSpec::Linear1D { .. } => "linear1d",
        }
    }

    /// Rigorous enclosure of the image `f(u)`, valid for every parameter
    /// value inside the enclosures.
    pub fn eval_box(&self, u: &ORect) -> Result<ORect, MapError> {
        if u.dim() != self.dimension() {
            return Err(MapError::ArityMismatch {
                expected: self.dimension(),
                got: u.dim(),
            });
        }
        match self {
            MapSpec::Henon { a, b } => {
                let (x, y) = (u.axis(0), u.axis(1));
                let x2 = x.sqr()?;
                let ax2 = a.enclosure.mul(&x2)?;
                let one = OInterval::from_rational(1, 1)?;
                let new_x = one.add(y)?.sub(&ax2)?;
                let new_y = b.enclosure.mul(x)?;
                Ok(ORect::new(vec![new_x, new_y])?)
            }
            MapSpec::Logistic { r } => {
                let x = u.axis(0);
                let half = OInterval::from_rational(1, 2)?;
                let quarter = OInterval::from_rational(1, 4)?;
                let centered = x.sub(&half)?.sqr()?;
                let image = r.enclosure.mul(&quarter.sub(&centered)?)?;
                Ok(ORect::new(vec![image])?)
            }
            MapSpec::Linear1D { slope, offset } => {
                let image = slope.enclosure.mul(u.axis(0))?.add(&offset.enclosure)?;
                Ok(ORect::new(vec![image])?)
            }
        }
    }

    /// Image enclosure of a single point, via its one-ulp widening.
    pub fn eval_point(&self, x: &[f64]) -> Result<ORect, MapError> {
        if x.len() != self.dimension() {
            return Err(MapError::ArityMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        let axes = x
            .iter()
            .map(|&v| OInterval::around(v))
            .collect::<Result<Vec<_>, _>>()?;
        self.eval_box(&ORect::new(axes)?)
    }

    /// Exact image of a rational point under the exact-parameter map.
    pub fn eval_exact(&self, x: &[BigRational]) -> Vec<BigRational> {
        match self {
            MapSpec::Henon { a, b } => {
                let one = BigRational::from_integer(1.into());
                vec![one + &x[1] - a.exact() * &x[0] * &x[0], b.exact() * &x[0]]
            }
            MapSpec::Logistic { r } => {
                let one = BigRational::from_integer(1.into());
                vec![r.exact() * &x[0] * (one - &x[0])]
            }
            MapSpec::Linear1D { slope, offset } => {
                vec![slope.exact() * &x[0] + offset.exact()]
            }
        }
    }
}
