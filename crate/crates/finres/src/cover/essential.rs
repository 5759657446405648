//! Essentialization of 1-D interval covers in exact rational arithmetic.
//!
//! A cover is *essential* when every element owns an open ball disjoint from
//! all other elements. The inductive correction walks the elements in order:
//! an element that already owns an exclusive sub-interval is kept, an element
//! contained in the union of the others is emptied, and in the remaining
//! pinch case (the element escapes the union only at isolated touching
//! points) a small closed ball around the pinch point is carved out of every
//! other element. Elements only ever shrink, so the maximum diameter never
//! grows, and carved balls stay inside the pinched element, so the covered
//! region is unchanged.
//!
//! Everything here runs on exact rationals; this is a correctness
//! demonstration at toy scale, not a performance path.

use super::CoverError;
use crate::interval::OInterval;
use num_rational::BigRational;
use num_traits::FromPrimitive;

pub type Rat = BigRational;

/// One cover element: a sorted union of disjoint open rational intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Element {
    parts: Vec<(Rat, Rat)>,
}

impl Element {
    fn interval(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo < hi);
        Element {
            parts: vec![(lo, hi)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> &[(Rat, Rat)] {
        &self.parts
    }

    /// Width of the convex hull; the diameter of the element's closure.
    pub fn diameter(&self) -> Rat {
        match (self.parts.first(), self.parts.last()) {
            (Some((lo, _)), Some((_, hi))) => hi - lo,
            _ => Rat::from_integer(0.into()),
        }
    }

    fn subtract_closed(&self, closed: &[(Rat, Rat)]) -> Element {
        let mut parts = self.parts.clone();
        for (c, d) in closed {
            let mut next = Vec::with_capacity(parts.len() + 1);
            for (a, b) in parts {
                if &b <= c || &a >= d {
                    next.push((a, b));
                    continue;
                }
                if &a < c {
                    next.push((a, c.clone()));
                }
                if &b > d {
                    next.push((d.clone(), b));
                }
            }
            parts = next;
        }
        Element { parts }
    }
}

/// Finite ordered cover of a connected 1-D region.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover1D {
    elements: Vec<Element>,
}

impl Cover1D {
    /// Validates that the open intervals cover a connected region (their
    /// union, merged across strict overlaps, is a single interval).
    pub fn from_intervals(intervals: &[OInterval]) -> Result<Self, CoverError> {
        let elements = intervals
            .iter()
            .map(|iv| {
                Element::interval(
                    Rat::from_f64(iv.lo()).expect("finite endpoint"),
                    Rat::from_f64(iv.hi()).expect("finite endpoint"),
                )
            })
            .collect();
        let cover = Cover1D { elements };
        if cover.elements.is_empty() || cover.union_open(usize::MAX).len() != 1 {
            return Err(CoverError::NotACover);
        }
        Ok(cover)
    }

    /// Test-scale constructor from exact rational endpoints.
    pub fn from_rational_intervals(intervals: Vec<(Rat, Rat)>) -> Result<Self, CoverError> {
        let cover = Cover1D {
            elements: intervals
                .into_iter()
                .map(|(lo, hi)| Element::interval(lo, hi))
                .collect(),
        };
        if cover.elements.is_empty() || cover.union_open(usize::MAX).len() != 1 {
            return Err(CoverError::NotACover);
        }
        Ok(cover)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// The covered open set, merged across strict overlaps.
    pub fn union(&self) -> Vec<(Rat, Rat)> {
        self.union_open(usize::MAX)
    }

    /// Maximum element diameter.
    pub fn outer_resolution(&self) -> Rat {
        self.elements
            .iter()
            .map(Element::diameter)
            .max()
            .unwrap_or_else(|| Rat::from_integer(0.into()))
    }

    /// Open union of all elements except `skip` (pass `usize::MAX` for all).
    fn union_open(&self, skip: usize) -> Vec<(Rat, Rat)> {
        let mut parts: Vec<(Rat, Rat)> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .flat_map(|(_, e)| e.parts.iter().cloned())
            .collect();
        parts.sort();
        merge(parts, false)
    }

    /// Closure of the union of all elements except `skip`, as closed
    /// intervals (touching pieces merge).
    fn union_closure(&self, skip: usize) -> Vec<(Rat, Rat)> {
        let mut parts: Vec<(Rat, Rat)> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .flat_map(|(_, e)| e.parts.iter().cloned())
            .collect();
        parts.sort();
        merge(parts, true)
    }

    /// True iff every element keeps nonempty interior after removing the
    /// closure of the union of all the other elements.
    pub fn is_essential(&self) -> bool {
        self.elements.iter().enumerate().all(|(k, e)| {
            !e.is_empty() && !e.subtract_closed(&self.union_closure(k)).is_empty()
        })
    }

    /// The inductive correction. The output covers the same region, passes
    /// [`Self::is_essential`], has no more elements than the input, and its
    /// maximum element diameter does not increase.
    pub fn essentialize(&self) -> Cover1D {
        let mut cover = self.clone();
        let n = cover.elements.len();
        for k in 0..n {
            if cover.elements[k].is_empty() {
                continue;
            }
            let exclusive = cover.elements[k].subtract_closed(&cover.union_closure(k));
            if !exclusive.is_empty() {
                continue; // already owns an exclusive open sub-interval
            }
            let others = cover.union_open(k);
            if covered_by(&cover.elements[k], &others) {
                cover.elements[k] = Element::default();
                continue;
            }
            // Pinch case: the element escapes the union of the others only
            // at isolated points, each of them an endpoint of another
            // element. Carve the exclusive ball out of everyone else.
            let x = cover.pinch_point(k, &others);
            let (a, b) = cover.elements[k]
                .parts
                .iter()
                .find(|(a, b)| a < &x && &x < b)
                .cloned()
                .expect("pinch point lies in the element");
            let r = (&x - a).min(b - &x);
            let quarter = r / Rat::from_integer(4.into());
            let ball = [(&x - &quarter, &x + &quarter)];
            for j in 0..n {
                if j != k {
                    cover.elements[j] = cover.elements[j].subtract_closed(&ball);
                }
            }
        }
        cover.elements.retain(|e| !e.is_empty());
        cover
    }

    /// Smallest point of element `k` outside the open union of the others;
    /// always an endpoint of one of their parts.
    fn pinch_point(&self, k: usize, others: &[(Rat, Rat)]) -> Rat {
        let mut candidates: Vec<Rat> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .flat_map(|(_, e)| e.parts.iter())
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .filter(|x| {
                self.elements[k].parts.iter().any(|(a, b)| a < x && x < b)
                    && !others.iter().any(|(c, d)| c < x && x < d)
            })
            .collect();
        candidates.sort();
        candidates
            .into_iter()
            .next()
            .expect("pinch case implies an escaping endpoint")
    }
}

/// Merges sorted intervals; `closed` merges touching pieces as well.
fn merge(parts: Vec<(Rat, Rat)>, closed: bool) -> Vec<(Rat, Rat)> {
    let mut out: Vec<(Rat, Rat)> = Vec::with_capacity(parts.len());
    for (lo, hi) in parts {
        match out.last_mut() {
            Some((_, end)) if (closed && *end >= lo) || (!closed && *end > lo) => {
                if hi > *end {
                    *end = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Open-cover test: is the open set of `elem` contained in the open union?
fn covered_by(elem: &Element, union: &[(Rat, Rat)]) -> bool {
    elem.parts.iter().all(|(a, b)| {
        let mut cur = a.clone();
        for (c, d) in union {
            if d <= &cur {
                continue;
            }
            if c > &cur || (c == &cur && cur != *a) {
                return false; // gap, or an uncovered touching point at cur
            }
            if *d > cur {
                cur = d.clone();
            }
            if &cur >= b {
                return true;
            }
        }
        &cur >= b
    })
}
