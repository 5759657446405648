//! Open-interval arithmetic with outward rounding.
//!
//! Every quantity here denotes an *open* interval `(lo, hi)` of reals with
//! finite, machine-representable endpoints. Arithmetic returns enclosures:
//! the result interval contains every exact real result of the operation on
//! elements of the operands. Outward rounding is realized by computing in
//! round-to-nearest and nudging each endpoint one ulp outward, which costs at
//! most one ulp of tightness per endpoint per operation.
//!
//! Squaring follows the open-interval convention: the result is the smallest
//! open interval with representable endpoints containing the exact image, so
//! an operand whose closure contains zero squares to an interval whose lower
//! endpoint is the largest representable negative number.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("empty interval: lo {lo} is not strictly below hi {hi}")]
    Empty { lo: f64, hi: f64 },
    #[error("non-finite endpoint {0}")]
    NonFinite(f64),
    #[error("arithmetic overflow to a non-finite endpoint")]
    Overflow,
    #[error("division by an interval whose closure contains zero")]
    DivisorContainsZero,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// The largest representable negative number, `-2^-1074`.
pub const NEG_TINY: f64 = -f64::from_bits(1);

/// Open interval `(lo, hi)`; invariant `lo < hi`, both endpoints finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OInterval {
    lo: f64,
    hi: f64,
}

/// Distance notion used for diameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Max,
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "max" => Ok(Metric::Max),
            other => Err(format!("unknown metric `{other}` (euclidean|max)")),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Max => "max",
        })
    }
}

impl OInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if !lo.is_finite() {
            return Err(IntervalError::NonFinite(lo));
        }
        if !hi.is_finite() {
            return Err(IntervalError::NonFinite(hi));
        }
        if !(lo < hi) {
            return Err(IntervalError::Empty { lo, hi });
        }
        Ok(OInterval { lo, hi })
    }

    /// One-ulp widening of a single point, the narrowest interval around `x`.
    pub fn around(x: f64) -> Result<Self, IntervalError> {
        if !x.is_finite() {
            return Err(IntervalError::NonFinite(x));
        }
        Self::new(x.next_down(), x.next_up())
    }

    /// Open enclosure of the rational `num/den`, at most four ulps wide.
    ///
    /// When the quotient is representable the result is the two-ulp interval
    /// straddling it.
    pub fn from_rational(num: i64, den: i64) -> Result<Self, IntervalError> {
        if den == 0 {
            return Err(IntervalError::ZeroDenominator);
        }
        let nf = num as f64;
        let df = den as f64;
        let exact_operands = nf as i128 == num as i128 && df as i128 == den as i128;
        let q = nf / df;
        if !q.is_finite() {
            return Err(IntervalError::Overflow);
        }
        if exact_operands {
            // q is within half an ulp of num/den, so one step each way
            // suffices (and straddles exactly representable quotients).
            Self::new(q.next_down(), q.next_up())
        } else {
            Self::new(q.next_down().next_down(), q.next_up().next_up())
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Strict membership: `x` lies in the open interval.
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// Open intervals intersect iff each starts before the other ends.
    pub fn intersects(&self, other: &OInterval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    /// `self ⊇ other` as open sets: endpoint comparison suffices.
    pub fn contains_interval(&self, other: &OInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &OInterval) -> OInterval {
        OInterval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Certified upper bound on the width of the closure, `hi - lo`.
    pub fn width_up(&self) -> f64 {
        round::sub_up_exactish(self.hi, self.lo)
    }

    pub fn add(&self, other: &OInterval) -> Result<Self, IntervalError> {
        checked(
            (self.lo + other.lo).next_down(),
            (self.hi + other.hi).next_up(),
        )
    }

    pub fn sub(&self, other: &OInterval) -> Result<Self, IntervalError> {
        checked(
            (self.lo - other.hi).next_down(),
            (self.hi - other.lo).next_up(),
        )
    }

    pub fn mul(&self, other: &OInterval) -> Result<Self, IntervalError> {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        checked(lo.next_down(), hi.next_up())
    }

    /// Requires `0` outside the closure of the divisor.
    pub fn div(&self, other: &OInterval) -> Result<Self, IntervalError> {
        if other.lo <= 0.0 && other.hi >= 0.0 {
            return Err(IntervalError::DivisorContainsZero);
        }
        let q = [
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        ];
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        checked(lo.next_down(), hi.next_up())
    }

    /// Smallest open interval containing `{x^2 : x in self}`.
    ///
    /// `(-1,1)^2 = (-2^-1074, 1)`: when the closure of the operand contains
    /// zero, the lower endpoint is the largest representable negative number.
    pub fn sqr(&self) -> Result<Self, IntervalError> {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            let m = self.hi.max(-self.lo);
            checked(NEG_TINY, round::sq_up(m))
        } else if self.lo > 0.0 {
            checked(round::sq_down(self.lo), round::sq_up(self.hi))
        } else {
            checked(round::sq_down(self.hi), round::sq_up(self.lo))
        }
    }
}

fn checked(lo: f64, hi: f64) -> Result<OInterval, IntervalError> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(IntervalError::Overflow);
    }
    debug_assert!(lo < hi);
    OInterval::new(lo, hi)
}

/// Directed scalar rounding helpers shared with the cover grid arithmetic.
///
/// `*_down` results never exceed the exact value, `*_up` results are never
/// below it; the `exactish` variants skip the nudge when the round-to-nearest
/// result is provably exact.
pub mod round {
    pub fn add_down(a: f64, b: f64) -> f64 {
        (a + b).next_down()
    }

    pub fn add_up(a: f64, b: f64) -> f64 {
        (a + b).next_up()
    }

    pub fn mul_down(a: f64, b: f64) -> f64 {
        (a * b).next_down()
    }

    pub fn mul_up(a: f64, b: f64) -> f64 {
        (a * b).next_up()
    }

    pub fn div_down(a: f64, b: f64) -> f64 {
        (a / b).next_down()
    }

    pub fn div_up(a: f64, b: f64) -> f64 {
        (a / b).next_up()
    }

    /// Upper bound on `a - b`, exact when the subtraction is.
    pub fn sub_up_exactish(a: f64, b: f64) -> f64 {
        let s = a - b;
        // Two-diff error term: s + err == a - b exactly.
        let bb = a - s;
        let err = (a - (s + bb)) + (bb - b);
        if err > 0.0 {
            s.next_up()
        } else {
            s
        }
    }

    /// Upper bound on `a + b`, exact when the addition is.
    pub fn add_up_exactish(a: f64, b: f64) -> f64 {
        let s = a + b;
        let bv = s - a;
        let err = (a - (s - bv)) + (b - bv);
        if err > 0.0 {
            s.next_up()
        } else {
            s
        }
    }

    /// Largest representable number not exceeding `x^2`.
    pub fn sq_down(x: f64) -> f64 {
        let p = x * x;
        let r = x.mul_add(x, -p);
        if r < 0.0 {
            p.next_down()
        } else {
            p
        }
    }

    /// Smallest representable number not below `x^2`.
    pub fn sq_up(x: f64) -> f64 {
        let p = x * x;
        let r = x.mul_add(x, -p);
        if r > 0.0 {
            p.next_up()
        } else {
            p
        }
    }

    /// Upper bound on `sqrt(x)` for `x >= 0`, exact when the root is.
    pub fn sqrt_up(x: f64) -> f64 {
        let r = x.sqrt();
        if r.mul_add(r, -x) == 0.0 {
            r
        } else {
            r.next_up()
        }
    }
}

/// Open box: a product of open intervals, one per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ORect {
    axes: Vec<OInterval>,
}

impl ORect {
    pub fn new(axes: Vec<OInterval>) -> Result<Self, IntervalError> {
        if axes.is_empty() {
            return Err(IntervalError::DimensionMismatch(0, 1));
        }
        Ok(ORect { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &OInterval {
        &self.axes[i]
    }

    pub fn axes(&self) -> &[OInterval] {
        &self.axes
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.axes.len() && self.axes.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    /// Certified upper bound on the diameter of the closure.
    pub fn diam(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Max => self
                .axes
                .iter()
                .map(OInterval::width_up)
                .fold(0.0, f64::max),
            Metric::Euclidean => {
                let mut s = 0.0;
                for a in &self.axes {
                    let w = a.width_up();
                    s = round::add_up_exactish(s, round::sq_up(w));
                }
                round::sqrt_up(s)
            }
        }
    }

    pub fn intersects(&self, other: &ORect) -> Result<bool, IntervalError> {
        self.check_dim(other)?;
        Ok(self
            .axes
            .iter()
            .zip(&other.axes)
            .all(|(a, b)| a.intersects(b)))
    }

    pub fn contains(&self, other: &ORect) -> Result<bool, IntervalError> {
        self.check_dim(other)?;
        Ok(self
            .axes
            .iter()
            .zip(&other.axes)
            .all(|(a, b)| a.contains_interval(b)))
    }

    pub fn hull(&self, other: &ORect) -> Result<ORect, IntervalError> {
        self.check_dim(other)?;
        Ok(ORect {
            axes: self
                .axes
                .iter()
                .zip(&other.axes)
                .map(|(a, b)| a.hull(b))
                .collect(),
        })
    }

    fn check_dim(&self, other: &ORect) -> Result<(), IntervalError> {
        if self.axes.len() != other.axes.len() {
            return Err(IntervalError::DimensionMismatch(
                self.axes.len(),
                other.axes.len(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn rat(x: f64) -> BigRational {
        BigRational::from_f64(x).unwrap()
    }

    fn contains_rat(iv: &OInterval, q: &BigRational) -> bool {
        &rat(iv.lo()) < q && q < &rat(iv.hi())
    }

    fn oi(lo: f64, hi: f64) -> OInterval {
        OInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn square_of_symmetric_unit_interval_is_pinned() {
        let r = oi(-1.0, 1.0).sqr().unwrap();
        assert_eq!(r.lo(), NEG_TINY);
        assert_eq!(r.hi(), 1.0);
    }

    #[test]
    fn square_with_exact_endpoints_is_exact() {
        let r = oi(1.0, 2.0).sqr().unwrap();
        assert_eq!((r.lo(), r.hi()), (1.0, 4.0));
        let r = oi(-3.0, -2.0).sqr().unwrap();
        assert_eq!((r.lo(), r.hi()), (4.0, 9.0));
    }

    #[test]
    fn square_touching_zero_has_negative_lower_endpoint() {
        for iv in [oi(0.0, 1.0), oi(-1.0, 0.0), oi(-0.25, 2.0)] {
            assert!(iv.sqr().unwrap().lo() < 0.0, "{iv:?}");
        }
    }

    #[test]
    fn addition_examples() {
        let r = oi(0.0, 0.5).add(&oi(0.0, 0.5)).unwrap();
        assert_eq!(r.lo(), 0.0f64.next_down());
        assert_eq!(r.hi(), 1.0f64.next_up());

        let a = oi(0.1, 0.2);
        let r = a.add(&a).unwrap();
        assert!(contains_rat(&r, &(rat(0.1) + rat(0.1))));
        assert!(contains_rat(&r, &(rat(0.2) + rat(0.2) - rat(1e-17))));

        // Both operands containing zero keep zero in the sum.
        let r = oi(-0.3, 0.1).add(&oi(-0.1, 0.4)).unwrap();
        assert!(r.contains(0.0));
    }

    #[test]
    fn subtraction_and_multiplication_examples() {
        let r = oi(1.0, 2.0).sub(&oi(0.0, 1.0)).unwrap();
        assert!(r.contains_interval(&oi(0.0f64.next_up(), 2.0f64.next_down())));
        let r = oi(-1.0, 1.0).mul(&oi(-1.0, 1.0)).unwrap();
        assert!(r.contains_interval(&oi(-1.0 + 1e-16, 1.0 - 1e-16)));
    }

    #[test]
    fn division_rejects_zero_straddling_divisors() {
        for bad in [oi(-1.0, 1.0), oi(0.0, 1.0), oi(-1.0, 0.0)] {
            assert_eq!(
                oi(1.0, 2.0).div(&bad),
                Err(IntervalError::DivisorContainsZero)
            );
        }
        assert!(oi(1.0, 2.0).div(&oi(0.5, 1.0)).is_ok());
    }

    #[test]
    fn from_rational_pins_the_paper_parameters() {
        let a = OInterval::from_rational(14, 10).unwrap();
        assert!(contains_rat(&a, &BigRational::new(14.into(), 10.into())));
        assert!(a.width_up() <= 4.0 * (1.4f64.next_up() - 1.4));

        let b = OInterval::from_rational(3, 10).unwrap();
        assert!(contains_rat(&b, &BigRational::new(3.into(), 10.into())));

        let h = OInterval::from_rational(1, 2).unwrap();
        assert_eq!(h.lo(), 0.5f64.next_down());
        assert_eq!(h.hi(), 0.5f64.next_up());

        assert_eq!(
            OInterval::from_rational(1, 0),
            Err(IntervalError::ZeroDenominator)
        );
    }

    #[test]
    fn quotient_of_widened_degenerates_encloses_fourteen_tenths() {
        let n = OInterval::around(14.0).unwrap();
        let d = OInterval::around(10.0).unwrap();
        let q = n.div(&d).unwrap();
        assert!(contains_rat(&q, &BigRational::new(14.into(), 10.into())));
        assert!(q.width_up() <= 4.0 * (14.0f64.next_up() - 14.0));
    }

    #[test]
    fn overflow_is_an_error() {
        let big = oi(f64::MAX / 2.0, f64::MAX);
        assert_eq!(big.add(&big), Err(IntervalError::Overflow));
        assert_eq!(big.sqr(), Err(IntervalError::Overflow));
    }

    #[test]
    fn rect_predicates_use_open_semantics() {
        let unit = ORect::new(vec![oi(0.0, 1.0), oi(0.0, 1.0)]).unwrap();
        let shifted = ORect::new(vec![oi(1.0, 2.0), oi(0.0, 1.0)]).unwrap();
        assert!(!unit.intersects(&shifted).unwrap());

        let inner = ORect::new(vec![oi(0.5, 1.5)]).unwrap();
        let outer = ORect::new(vec![oi(0.0, 2.0)]).unwrap();
        assert!(outer.contains(&inner).unwrap());

        let h = oi(0.0, 1.0).hull(&oi(2.0, 3.0));
        assert_eq!((h.lo(), h.hi()), (0.0, 3.0));

        assert_eq!(
            unit.intersects(&inner),
            Err(IntervalError::DimensionMismatch(2, 1))
        );
    }

    #[test]
    fn diameters_are_certified_and_tight() {
        let unit = ORect::new(vec![oi(0.0, 1.0), oi(0.0, 1.0)]).unwrap();
        assert_eq!(unit.diam(Metric::Max), 1.0);
        let d = unit.diam(Metric::Euclidean);
        let sqrt2 = 2.0f64.sqrt();
        assert!(d >= sqrt2 && d <= sqrt2.next_up());

        let pyth = ORect::new(vec![oi(0.0, 3.0), oi(1.0, 5.0)]).unwrap();
        assert_eq!(pyth.diam(Metric::Euclidean), 5.0);
    }

    #[test]
    fn invalid_construction_is_rejected() {
        assert!(matches!(
            OInterval::new(1.0, 1.0),
            Err(IntervalError::Empty { .. })
        ));
        assert!(matches!(
            OInterval::new(2.0, 1.0),
            Err(IntervalError::Empty { .. })
        ));
        assert!(matches!(
            OInterval::new(f64::NAN, 1.0),
            Err(IntervalError::NonFinite(_))
        ));
        assert!(matches!(
            OInterval::new(0.0, f64::INFINITY),
            Err(IntervalError::NonFinite(_))
        ));
    }

    fn arb_interval() -> impl Strategy<Value = OInterval> {
        (
            prop_oneof![-1e6f64..1e6, -1.0f64..1.0, -1e-3f64..1e-3],
            prop_oneof![1e-9f64..1e6, 1e-12f64..1.0],
        )
            .prop_map(|(lo, w)| oi(lo, lo + w.max(1e-300)))
    }

    proptest! {
        /// Exact rational results of sampled operand points stay inside.
        #[test]
        fn containment_soundness(
            a in arb_interval(),
            b in arb_interval(),
            ta in 0.001f64..0.999,
            tb in 0.001f64..0.999,
        ) {
            let xa = rat(a.lo()) + rat(ta) * (rat(a.hi()) - rat(a.lo()));
            let xb = rat(b.lo()) + rat(tb) * (rat(b.hi()) - rat(b.lo()));
            prop_assert!(contains_rat(&a.add(&b).unwrap(), &(&xa + &xb)));
            prop_assert!(contains_rat(&a.sub(&b).unwrap(), &(&xa - &xb)));
            prop_assert!(contains_rat(&a.mul(&b).unwrap(), &(&xa * &xb)));
            prop_assert!(contains_rat(&a.sqr().unwrap(), &(&xa * &xa)));
            if b.lo() > 0.0 || b.hi() < 0.0 {
                prop_assert!(contains_rat(&a.div(&b).unwrap(), &(&xa / &xb)));
            }
        }

        /// Widening an operand never shrinks the result.
        #[test]
        fn outward_monotonicity(a in arb_interval(), b in arb_interval(), k in 1u32..100) {
            let wider = oi(
                a.lo() - k as f64 * 1e-9,
                a.hi() + k as f64 * 1e-9,
            );
            prop_assert!(wider.add(&b).unwrap().contains_interval(&a.add(&b).unwrap()));
            prop_assert!(wider.sub(&b).unwrap().contains_interval(&a.sub(&b).unwrap()));
            prop_assert!(wider.mul(&b).unwrap().contains_interval(&a.mul(&b).unwrap()));
            prop_assert!(wider.sqr().unwrap().contains_interval(&a.sqr().unwrap()));
        }
    }
}
