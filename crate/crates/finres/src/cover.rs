//! Overlapping open box covers of a rectangular region.
//!
//! A [`GridSpec`] describes the candidate family: the region
//! `B = (a_1, a_1+w_1) x ... x (a_n, a_n+w_n)` is cut into `p_i` parts per
//! axis and every box is extended to the right by the overlap margin `kappa`,
//! so box `k` spans `(a_i + k_i w_i/p_i, a_i + (k_i+1) w_i/p_i + kappa)` per
//! axis. Endpoints are computed with one directed rounding step per
//! operation (left endpoints down, right endpoints up), so every computed box
//! contains its exact rational counterpart.
//!
//! The requirement `kappa < w_i/p_i` leaves each box an exclusive core, which
//! makes every grid cover essential and gives the certified inner-resolution
//! bound `kappa/2` in the max metric.

pub mod essential;

use crate::interval::{round, IntervalError, Metric, OInterval, ORect};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverError {
    #[error("margin kappa {kappa} must stay below the cell width on axis {axis}")]
    MarginTooLarge { axis: usize, kappa: f64 },
    #[error("invalid grid parameter: {0}")]
    BadParameter(String),
    #[error("box index {index} out of range on axis {axis} (subdivisions: {count})")]
    IndexOutOfRange { axis: usize, index: u64, count: u64 },
    #[error("point lies outside the region on axis {axis}")]
    PointOutsideRegion { axis: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("the intervals do not cover a connected region")]
    NotACover,
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// Per-axis multi-index of one grid box, `0 <= k_i < p_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxId(pub Vec<u64>);

/// Rectangular region plus subdivision counts and overlap margin.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    a: Vec<f64>,
    w: Vec<f64>,
    p: Vec<u64>,
    kappa: f64,
}

impl GridSpec {
    /// Builds a grid over the region with corners `a`, widths `w`; the first
    /// axis is split into `p1` parts and each further `p_i` is rounded to
    /// nearest (ties to even) proportionally to `w_i`.
    pub fn new(a: Vec<f64>, w: Vec<f64>, p1: u64, kappa: f64) -> Result<Self, CoverError> {
        if a.is_empty() || a.len() != w.len() {
            return Err(CoverError::DimensionMismatch(a.len(), w.len()));
        }
        if p1 == 0 {
            return Err(CoverError::BadParameter("p1 must be at least 1".into()));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(CoverError::BadParameter(format!(
                "kappa must be positive and finite, got {kappa}"
            )));
        }
        for (i, (&ai, &wi)) in a.iter().zip(&w).enumerate() {
            if !ai.is_finite() || !wi.is_finite() || wi <= 0.0 {
                return Err(CoverError::BadParameter(format!(
                    "axis {i}: corner {ai}, width {wi}"
                )));
            }
        }

        let mut p = Vec::with_capacity(w.len());
        p.push(p1);
        for wi in &w[1..] {
            let est = (p1 as f64 * wi / w[0]).round_ties_even();
            p.push((est as u64).max(1));
        }

        let mut cells: u128 = 1;
        for (i, (&pi, &wi)) in p.iter().zip(&w).enumerate() {
            // Conservative check: kappa strictly below a lower bound on w/p.
            if kappa >= round::div_down(wi, pi as f64) {
                return Err(CoverError::MarginTooLarge { axis: i, kappa });
            }
            cells = cells
                .checked_mul(pi as u128)
                .filter(|&c| c <= u64::MAX as u128)
                .ok_or_else(|| CoverError::BadParameter("grid cell count exceeds u64".into()))?;
        }
        let _ = cells;

        Ok(GridSpec { a, w, p, kappa })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn corners(&self) -> &[f64] {
        &self.a
    }

    pub fn widths(&self) -> &[f64] {
        &self.w
    }

    pub fn subdivisions(&self) -> &[u64] {
        &self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Total number of candidate boxes.
    pub fn cell_count(&self) -> u64 {
        self.p.iter().product()
    }

    /// Row-major linearization, last axis fastest.
    pub fn linear_index(&self, id: &BoxId) -> u64 {
        debug_assert_eq!(id.0.len(), self.p.len());
        let mut lin = 0u64;
        for (k, pi) in id.0.iter().zip(&self.p) {
            debug_assert!(k < pi);
            lin = lin * pi + k;
        }
        lin
    }

    pub fn box_id(&self, mut linear: u64) -> BoxId {
        let mut k = vec![0u64; self.p.len()];
        for (ki, pi) in k.iter_mut().zip(&self.p).rev() {
            *ki = linear % pi;
            linear /= pi;
        }
        BoxId(k)
    }

    /// Row-major strides: `linear = sum k_i * stride_i`.
    pub(crate) fn strides(&self) -> Vec<u64> {
        let mut s = vec![1u64; self.p.len()];
        for i in (0..self.p.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.p[i + 1];
        }
        s
    }

    /// Outward-rounded open bounds `(a + k w/p, a + (k+1) w/p + kappa)` of
    /// one box; every endpoint operation rounds away from the box interior.
    pub fn box_bounds(&self, id: &BoxId) -> Result<ORect, CoverError> {
        if id.0.len() != self.p.len() {
            return Err(CoverError::DimensionMismatch(id.0.len(), self.p.len()));
        }
        let mut axes = Vec::with_capacity(self.p.len());
        for (i, &k) in id.0.iter().enumerate() {
            if k >= self.p[i] {
                return Err(CoverError::IndexOutOfRange {
                    axis: i,
                    index: k,
                    count: self.p[i],
                });
            }
            let (lo, hi) = self.axis_bounds(i, k);
            axes.push(OInterval::new(lo, hi)?);
        }
        Ok(ORect::new(axes)?)
    }

    /// Directed-rounded endpoints of box `k` on one axis; monotone in `k`.
    pub(crate) fn axis_bounds(&self, axis: usize, k: u64) -> (f64, f64) {
        let (a, w, p) = (self.a[axis], self.w[axis], self.p[axis] as f64);
        let lo = round::add_down(a, round::div_down(round::mul_down(k as f64, w), p));
        let hi = round::add_up(
            round::add_up(a, round::div_up(round::mul_up((k + 1) as f64, w), p)),
            self.kappa,
        );
        (lo, hi)
    }

    /// All boxes whose open bounds strictly contain `x`, sorted by linear
    /// index; between 1 and `2^dim` boxes for any interior point.
    pub fn boxes_containing_point(&self, x: &[f64]) -> Result<Vec<BoxId>, CoverError> {
        if x.len() != self.dim() {
            return Err(CoverError::DimensionMismatch(x.len(), self.dim()));
        }
        let mut per_axis: Vec<Vec<u64>> = Vec::with_capacity(self.dim());
        for (i, &xi) in x.iter().enumerate() {
            if !(self.a[i] < xi && xi < self.a[i] + self.w[i]) {
                return Err(CoverError::PointOutsideRegion { axis: i });
            }
            let p = self.p[i];
            let est = ((xi - self.a[i]) * p as f64 / self.w[i]).floor() as i128;
            let mut ks = Vec::with_capacity(2);
            for k in est.saturating_sub(2)..=est.saturating_add(2) {
                if k < 0 || k >= p as i128 {
                    continue;
                }
                let (lo, hi) = self.axis_bounds(i, k as u64);
                if lo < xi && xi < hi {
                    ks.push(k as u64);
                }
            }
            debug_assert!(!ks.is_empty(), "interior point missed by the grid");
            if ks.is_empty() {
                return Err(CoverError::PointOutsideRegion { axis: i });
            }
            per_axis.push(ks);
        }

        let mut out = Vec::new();
        let mut cursor = vec![0usize; per_axis.len()];
        loop {
            out.push(BoxId(
                cursor
                    .iter()
                    .zip(&per_axis)
                    .map(|(&c, ks)| ks[c])
                    .collect(),
            ));
            let mut axis = per_axis.len();
            loop {
                if axis == 0 {
                    return Ok(out);
                }
                axis -= 1;
                cursor[axis] += 1;
                if cursor[axis] < per_axis[axis].len() {
                    break;
                }
                cursor[axis] = 0;
            }
        }
    }

    /// Per-axis inclusive index ranges of the boxes open-intersecting `r`,
    /// and whether `r` is certifiably contained in the region.
    ///
    /// `None` on an axis means no box intersects there (only possible when
    /// `r` escapes the region, in which case `inside` is false anyway).
    pub fn ranges_intersecting_rect(
        &self,
        r: &ORect,
    ) -> Result<(Vec<Option<(u64, u64)>>, bool), CoverError> {
        if r.dim() != self.dim() {
            return Err(CoverError::DimensionMismatch(r.dim(), self.dim()));
        }
        let mut ranges = Vec::with_capacity(self.dim());
        let mut inside = true;
        for i in 0..self.dim() {
            let iv = r.axis(i);
            // Sound containment check: the region's upper edge a+w is real;
            // comparing against a rounded-down value never claims falsely.
            if !(iv.lo() >= self.a[i] && iv.hi() <= round::add_down(self.a[i], self.w[i])) {
                inside = false;
            }
            let p = self.p[i];
            // Smallest k whose upper bound exceeds r.lo.
            let k_min = partition_point(p, |k| self.axis_bounds(i, k).1 <= iv.lo());
            // One past the largest k whose lower bound stays below r.hi.
            let k_end = partition_point(p, |k| self.axis_bounds(i, k).0 < iv.hi());
            if k_min < k_end {
                ranges.push(Some((k_min, k_end - 1)));
            } else {
                ranges.push(None);
            }
        }
        Ok((ranges, inside))
    }

    /// Materialized version of [`Self::ranges_intersecting_rect`], sorted by
    /// linear index.
    pub fn boxes_intersecting_rect(&self, r: &ORect) -> Result<(Vec<BoxId>, bool), CoverError> {
        let (ranges, inside) = self.ranges_intersecting_rect(r)?;
        let mut out = Vec::new();
        if ranges.iter().any(Option::is_none) {
            return Ok((out, inside));
        }
        let spans: Vec<(u64, u64)> = ranges.into_iter().map(Option::unwrap).collect();
        let mut cursor: Vec<u64> = spans.iter().map(|&(lo, _)| lo).collect();
        loop {
            out.push(BoxId(cursor.clone()));
            let mut axis = spans.len();
            loop {
                if axis == 0 {
                    return Ok((out, inside));
                }
                axis -= 1;
                cursor[axis] += 1;
                if cursor[axis] <= spans[axis].1 {
                    break;
                }
                cursor[axis] = spans[axis].0;
            }
        }
    }

    /// Certified upper bound on the diameter of any grid box.
    ///
    /// All cells are congruent up to rounding; the bound is the cell extent
    /// `w_i/p_i + kappa` per axis padded by the worst-case rounding of the
    /// endpoint arithmetic.
    pub fn outer_resolution(&self, metric: Metric) -> f64 {
        let widths: Vec<f64> = (0..self.dim()).map(|i| self.axis_width_bound(i)).collect();
        match metric {
            Metric::Max => widths.into_iter().fold(0.0, f64::max),
            Metric::Euclidean => {
                let mut s = 0.0;
                for w in widths {
                    s = round::add_up_exactish(s, round::sq_up(w));
                }
                round::sqrt_up(s)
            }
        }
    }

    fn axis_width_bound(&self, i: usize) -> f64 {
        let pad = 16.0 * f64::EPSILON * (self.a[i].abs() + self.w[i] + 1.0);
        round::add_up(
            round::add_up(round::div_up(self.w[i], self.p[i] as f64), self.kappa),
            pad,
        )
    }

    /// Certified lower bound `kappa/2` on the inner resolution in the max
    /// metric: every max-ball of radius below the bound fits in some box.
    pub fn inner_resolution_bound(&self) -> f64 {
        half_down(self.kappa)
    }

    /// Lower bound on the thickness: half the smallest cell extent. Always
    /// at least the inner-resolution bound.
    pub fn thickness_bound(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let cell =
                    round::add_down(round::div_down(self.w[i], self.p[i] as f64), self.kappa);
                half_down(cell)
            })
            .fold(f64::INFINITY, f64::min)
            .max(self.inner_resolution_bound())
    }

    /// The open region `B` with conservatively rounded upper corners.
    pub fn region(&self) -> ORect {
        let axes = self
            .a
            .iter()
            .zip(&self.w)
            .map(|(&a, &w)| OInterval::new(a, round::add_up(a, w)).expect("valid region"))
            .collect();
        ORect::new(axes).expect("dim >= 1")
    }
}

/// First `k` in `0..p` violating `pred` (all-pred prefix length).
fn partition_point(p: u64, pred: impl Fn(u64) -> bool) -> u64 {
    let (mut lo, mut hi) = (0u64, p);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `x/2` rounded toward negative infinity when halving is inexact.
fn half_down(x: f64) -> f64 {
    let h = x * 0.5;
    if h + h == x {
        h
    } else {
        h.next_down()
    }
}
