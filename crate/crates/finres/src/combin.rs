//! Combinatorial multivalued maps over finite covers.
//!
//! A [`CombMap`] assigns every cover element a set of image elements, stored
//! as sorted duplicate-free index lists. Composition, powers, and the
//! edge-transposed inverse are straight set algebra. The finer/coarser
//! relation between covers and maps follows the inclusion definitions, with
//! the universally quantified pair condition on maps: the existential variant
//! does not survive composition.
//!
//! For 1-D maps with rational parameters the *minimal representation* of a
//! map on a cover is computable exactly: the image of each element under the
//! exact map is an interval (or a point), and membership of each cover
//! element in the image set is decided with rational endpoint arithmetic.
//! Every rigorously constructed representation of the same map on the same
//! cover must contain it image-wise.

use crate::cover::{CoverError, GridSpec};
use crate::dynmap::MapSpec;
use crate::interval::ORect;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use thiserror::Error;

type Rat = BigRational;

#[derive(Debug, Error)]
pub enum CombinError {
    #[error("element index {index} out of range (cover has {count} elements)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("cover size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("power exponent must be at least 1")]
    ZeroPower,
    #[error("minimal representations require a 1-D rational map, got {0}")]
    UnsupportedMap(&'static str),
    #[error("cover elements must be 1-D for this operation")]
    NotOneDimensional,
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// Multivalued self-map on the elements of a finite cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombMap {
    n: usize,
    images: Vec<Vec<usize>>,
}

impl CombMap {
    /// Normalizes the image lists: sorted, duplicate-free, all in range.
    pub fn new(n: usize, mut images: Vec<Vec<usize>>) -> Result<Self, CombinError> {
        if images.len() != n {
            return Err(CombinError::SizeMismatch(images.len(), n));
        }
        for list in &mut images {
            list.sort_unstable();
            list.dedup();
            if let Some(&worst) = list.last() {
                if worst >= n {
                    return Err(CombinError::IndexOutOfRange {
                        index: worst,
                        count: n,
                    });
                }
            }
        }
        Ok(CombMap { n, images })
    }

    pub fn identity(n: usize) -> Self {
        CombMap {
            n,
            images: (0..n).map(|u| vec![u]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn image(&self, u: usize) -> &[usize] {
        &self.images[u]
    }

    /// Every image nonempty.
    pub fn is_total(&self) -> bool {
        self.images.iter().all(|img| !img.is_empty())
    }

    /// Every element maps onto the full cover.
    pub fn all_images_full(&self) -> bool {
        self.images.iter().all(|img| img.len() == self.n)
    }

    /// Union of the images over an index set, sorted and duplicate-free.
    pub fn image_set(&self, s: &[usize]) -> Result<Vec<usize>, CombinError> {
        let mut seen = vec![false; self.n];
        for &u in s {
            if u >= self.n {
                return Err(CombinError::IndexOutOfRange {
                    index: u,
                    count: self.n,
                });
            }
            for &v in &self.images[u] {
                seen[v] = true;
            }
        }
        Ok(seen
            .iter()
            .enumerate()
            .filter_map(|(v, &hit)| hit.then_some(v))
            .collect())
    }

    /// Composition `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &CombMap) -> Result<CombMap, CombinError> {
        if self.n != inner.n {
            return Err(CombinError::SizeMismatch(self.n, inner.n));
        }
        let images = inner
            .images
            .iter()
            .map(|img| self.image_set(img))
            .collect::<Result<_, _>>()?;
        Ok(CombMap {
            n: self.n,
            images,
        })
    }

    /// `k`-fold composition, `k >= 1`, by iterated [`Self::compose`].
    pub fn power(&self, k: usize) -> Result<CombMap, CombinError> {
        if k == 0 {
            return Err(CombinError::ZeroPower);
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Edge transpose: `v` maps to `u` iff `u` maps to `v`.
    pub fn inverse(&self) -> CombMap {
        let mut images = vec![Vec::new(); self.n];
        for (u, img) in self.images.iter().enumerate() {
            for &v in img {
                images[v].push(u);
            }
        }
        // Transposing in index order keeps every list sorted.
        CombMap {
            n: self.n,
            images,
        }
    }
}

/// Cover elements with their open box bounds, for inclusion tests.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverHandle {
    elements: Vec<ORect>,
}

impl CoverHandle {
    pub fn new(elements: Vec<ORect>) -> Result<Self, CombinError> {
        if let Some(first) = elements.first() {
            if elements.iter().any(|e| e.dim() != first.dim()) {
                return Err(CombinError::NotOneDimensional);
            }
        }
        Ok(CoverHandle { elements })
    }

    /// The full grid cover, in linear index order. Toy scale only: the whole
    /// grid is materialized.
    pub fn from_grid(g: &GridSpec) -> Result<Self, CombinError> {
        let elements = (0..g.cell_count())
            .map(|lin| g.box_bounds(&g.box_id(lin)))
            .collect::<Result<_, _>>()?;
        Ok(CoverHandle { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &ORect {
        &self.elements[i]
    }

    /// Both clauses of the finer-cover definition: every element of `self`
    /// fits in some element of `coarser`, and every element of `coarser`
    /// contains some element of `self`.
    pub fn is_finer_than(&self, coarser: &CoverHandle) -> bool {
        let forward = self.elements.iter().all(|u1| {
            coarser
                .elements
                .iter()
                .any(|u2| u2.contains(u1).unwrap_or(false))
        });
        let backward = coarser.elements.iter().all(|u2| {
            self.elements
                .iter()
                .any(|u1| u2.contains(u1).unwrap_or(false))
        });
        forward && backward
    }
}

/// The finer relation on combinatorial maps.
///
/// `f1` on `u1` is finer than `f2` on `u2` iff `u1` is finer than `u2` and
/// for *every* pair `U1 ⊆ U2`, every element of `f1(U1)` is contained in
/// some element of `f2(U2)`.
pub fn is_finer_map(
    f1: &CombMap,
    u1: &CoverHandle,
    f2: &CombMap,
    u2: &CoverHandle,
) -> Result<bool, CombinError> {
    if f1.len() != u1.len() {
        return Err(CombinError::SizeMismatch(f1.len(), u1.len()));
    }
    if f2.len() != u2.len() {
        return Err(CombinError::SizeMismatch(f2.len(), u2.len()));
    }
    if !u1.is_finer_than(u2) {
        return Ok(false);
    }
    for (i, e1) in u1.elements.iter().enumerate() {
        for (j, e2) in u2.elements.iter().enumerate() {
            if !e2.contains(e1).unwrap_or(false) {
                continue;
            }
            for &w1 in f1.image(i) {
                let covered = f2.image(j).iter().any(|&w2| {
                    u2.element(w2).contains(u1.element(w1)).unwrap_or(false)
                });
                if !covered {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Exact image of one open interval under an exactly-known 1-D map.
enum Image1D {
    /// Convex hull of the image; openness of the ends is irrelevant for
    /// intersection tests against open intervals.
    Span(Rat, Rat),
    Point(Rat),
}

impl Image1D {
    fn intersects_open(&self, lo: &Rat, hi: &Rat) -> bool {
        match self {
            Image1D::Span(a, b) => a < hi && lo < b,
            Image1D::Point(c) => lo < c && c < hi,
        }
    }
}

/// The unique minimal representation `F(U) = {W : W ∩ f(U) != ∅}` of a 1-D
/// rational-parameter map on a cover, computed in exact rational arithmetic.
pub fn minimal_representation(m: &MapSpec, u: &CoverHandle) -> Result<CombMap, CombinError> {
    if matches!(m, MapSpec::Henon { .. }) {
        return Err(CombinError::UnsupportedMap(m.kind_name()));
    }
    let bounds: Vec<(Rat, Rat)> = u
        .elements
        .iter()
        .map(|e| {
            if e.dim() != 1 {
                return Err(CombinError::NotOneDimensional);
            }
            Ok((
                Rat::from_f64(e.axis(0).lo()).expect("finite"),
                Rat::from_f64(e.axis(0).hi()).expect("finite"),
            ))
        })
        .collect::<Result<_, _>>()?;

    let images = bounds
        .iter()
        .map(|(lo, hi)| {
            let image = exact_image_1d(m, lo, hi);
            bounds
                .iter()
                .enumerate()
                .filter_map(|(w, (wlo, whi))| image.intersects_open(wlo, whi).then_some(w))
                .collect()
        })
        .collect();
    CombMap::new(u.len(), images)
}

fn exact_image_1d(m: &MapSpec, lo: &Rat, hi: &Rat) -> Image1D {
    match m {
        MapSpec::Linear1D { slope, offset } => {
            let (s, c) = (slope.exact(), offset.exact());
            let zero = Rat::from_integer(0.into());
            if s == zero {
                return Image1D::Point(c);
            }
            let (a, b) = (&s * lo + &c, &s * hi + &c);
            if s > zero {
                Image1D::Span(a, b)
            } else {
                Image1D::Span(b, a)
            }
        }
        MapSpec::Logistic { r } => {
            let r = r.exact();
            let half = Rat::new(1.into(), 2.into());
            let f = |x: &Rat| &r * x * (Rat::from_integer(1.into()) - x);
            let (fl, fh) = (f(lo), f(hi));
            if hi <= &half {
                Image1D::Span(fl, fh)
            } else if lo >= &half {
                Image1D::Span(fh, fl)
            } else {
                // Vertex inside: the maximum r/4 is attained.
                let peak = &r / Rat::from_integer(4.into());
                Image1D::Span(fl.min(fh), peak)
            }
        }
        MapSpec::Henon { .. } => unreachable!("rejected by minimal_representation"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::OInterval;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn map(n: usize, images: &[&[usize]]) -> CombMap {
        CombMap::new(n, images.iter().map(|s| s.to_vec()).collect()).unwrap()
    }

    fn iv(lo: f64, hi: f64) -> ORect {
        ORect::new(vec![OInterval::new(lo, hi).unwrap()]).unwrap()
    }

    #[test]
    fn image_set_unions() {
        let f = map(3, &[&[1], &[2], &[0, 1]]);
        assert_eq!(f.image_set(&[]).unwrap(), Vec::<usize>::new());
        assert_eq!(f.image_set(&[0, 2]).unwrap(), vec![0, 1]);
        let id = CombMap::identity(4);
        assert_eq!(id.image_set(&[1, 3]).unwrap(), vec![1, 3]);
        assert!(f.image_set(&[7]).is_err());
    }

    #[test]
    fn composition_basics() {
        let f = map(3, &[&[1], &[2], &[0]]);
        let id = CombMap::identity(3);
        assert_eq!(f.compose(&id).unwrap(), f);
        assert_eq!(id.compose(&f).unwrap(), f);

        let f2 = f.compose(&f).unwrap();
        assert_eq!(f2, map(3, &[&[2], &[0], &[1]]));
        assert_eq!(f.power(2).unwrap(), f2);
        assert_eq!(f.power(1).unwrap(), f);
        assert!(matches!(f.power(0), Err(CombinError::ZeroPower)));

        let g = map(2, &[&[0], &[1]]);
        assert!(matches!(
            f.compose(&g),
            Err(CombinError::SizeMismatch(3, 2))
        ));
    }

    #[test]
    fn composition_matches_membership_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let rand_map = |rng: &mut ChaCha8Rng| {
                let images = (0..n)
                    .map(|_| {
                        (0..n)
                            .filter(|_| rng.gen_bool(0.4))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                CombMap::new(n, images).unwrap()
            };
            let f = rand_map(&mut rng);
            let g = rand_map(&mut rng);
            let gf = g.compose(&f).unwrap();
            for u in 0..n {
                let expect: HashSet<usize> = f
                    .image(u)
                    .iter()
                    .flat_map(|&v| g.image(v).iter().copied())
                    .collect();
                let got: HashSet<usize> = gf.image(u).iter().copied().collect();
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn associativity_on_random_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(1..=8);
            let rand_map = |rng: &mut ChaCha8Rng| {
                let images = (0..n)
                    .map(|_| (0..n).filter(|_| rng.gen_bool(0.3)).collect::<Vec<_>>())
                    .collect();
                CombMap::new(n, images).unwrap()
            };
            let (f, g, h) = (rand_map(&mut rng), rand_map(&mut rng), rand_map(&mut rng));
            let left = h.compose(&g).unwrap().compose(&f).unwrap();
            let right = h.compose(&g.compose(&f).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn powers_of_small_fixtures() {
        // 2-cycle with a self-loop at 0 saturates by the third power.
        let f = map(2, &[&[0, 1], &[0]]);
        let f3 = f.power(3).unwrap();
        assert!(f3.all_images_full());
        // Saturation persists (lemma: full stays full).
        assert!(f.compose(&f3).unwrap().all_images_full());
    }

    #[test]
    fn inverse_is_the_edge_transpose() {
        let id = CombMap::identity(3);
        assert_eq!(id.inverse(), id);

        let f = map(3, &[&[1, 2], &[], &[1]]);
        let inv = f.inverse();
        assert_eq!(inv, map(3, &[&[], &[0, 2], &[0]]));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.gen_range(1..=7);
            let images = (0..n)
                .map(|_| (0..n).filter(|_| rng.gen_bool(0.35)).collect::<Vec<_>>())
                .collect();
            let f = CombMap::new(n, images).unwrap();
            assert_eq!(f.inverse().inverse(), f);
        }
    }

    /// The discrete three-point space from the finer-relation counterexample,
    /// with points a, b, c embedded at 0, 1, 2.
    fn three_point_covers() -> (CoverHandle, CoverHandle, CoverHandle) {
        let a = iv(-0.1, 0.1);
        let b = iv(0.9, 1.1);
        let c = iv(1.9, 2.1);
        let ab = iv(-0.2, 1.2);
        let bc = iv(0.8, 2.2);
        let u1 = CoverHandle::new(vec![a, b, c.clone()]).unwrap();
        let u2 = CoverHandle::new(vec![ab.clone(), c]).unwrap();
        let u3 = CoverHandle::new(vec![ab, bc]).unwrap();
        (u1, u2, u3)
    }

    #[test]
    fn finer_cover_relation() {
        let (u1, u2, u3) = three_point_covers();
        assert!(u1.is_finer_than(&u1));
        assert!(u1.is_finer_than(&u2));
        assert!(u2.is_finer_than(&u3));
        assert!(u1.is_finer_than(&u3));
        assert!(!u2.is_finer_than(&u1));
    }

    #[test]
    fn finer_map_is_not_transitive_across_the_counterexample() {
        let (u1, u2, u3) = three_point_covers();
        let f1 = map(3, &[&[0], &[0], &[2]]);
        let f2 = map(2, &[&[0], &[1]]);
        let f3 = map(2, &[&[0], &[1]]);

        assert!(is_finer_map(&f1, &u1, &f2, &u2).unwrap());
        assert!(is_finer_map(&f2, &u2, &f3, &u3).unwrap());
        assert!(!is_finer_map(&f1, &u1, &f3, &u3).unwrap());
        assert!(is_finer_map(&f1, &u1, &f1, &u1).unwrap());
    }

    #[test]
    fn nested_grids_are_finer_and_composition_preserves_the_relation() {
        // Fine grid with tiny margin, coarse grid with a margin so large
        // that every fine box fits into a coarse one.
        let fine = GridSpec::new(vec![0.0], vec![1.0], 24, 1e-9).unwrap();
        let coarse = GridSpec::new(vec![0.0], vec![1.0], 4, 0.2).unwrap();
        let u1 = CoverHandle::from_grid(&fine).unwrap();
        let u2 = CoverHandle::from_grid(&coarse).unwrap();
        assert!(u1.is_finer_than(&u2));

        let f = MapSpec::linear1d((1, 2), (1, 4)).unwrap();
        let g = MapSpec::linear1d((-1, 3), (1, 2)).unwrap();
        let f1 = minimal_representation(&f, &u1).unwrap();
        let f2 = minimal_representation(&f, &u2).unwrap();
        let g1 = minimal_representation(&g, &u1).unwrap();
        let g2 = minimal_representation(&g, &u2).unwrap();
        assert!(is_finer_map(&f1, &u1, &f2, &u2).unwrap());
        assert!(is_finer_map(&g1, &u1, &g2, &u2).unwrap());

        let comp1 = g1.compose(&f1).unwrap();
        let comp2 = g2.compose(&f2).unwrap();
        assert!(is_finer_map(&comp1, &u1, &comp2, &u2).unwrap());
    }

    #[test]
    fn minimal_representation_of_the_identity_is_the_overlap_map() {
        let grid = GridSpec::new(vec![0.0], vec![1.0], 6, 0.05).unwrap();
        let u = CoverHandle::from_grid(&grid).unwrap();
        let id_map = MapSpec::linear1d((1, 1), (0, 1)).unwrap();
        let f = minimal_representation(&id_map, &u).unwrap();
        for i in 0..u.len() {
            let expect: Vec<usize> = (0..u.len())
                .filter(|&w| u.element(w).intersects(u.element(i)).unwrap())
                .collect();
            assert_eq!(f.image(i), &expect[..], "element {i}");
        }
    }

    #[test]
    fn minimal_representation_of_a_doubling_map() {
        // Four overlapping elements on (0,1); slope-2 map, exact endpoints.
        let u = CoverHandle::new(vec![
            iv(0.0, 0.3),
            iv(0.25, 0.55),
            iv(0.5, 0.8),
            iv(0.75, 1.0),
        ])
        .unwrap();
        let m = MapSpec::linear1d((2, 1), (0, 1)).unwrap();
        let f = minimal_representation(&m, &u).unwrap();
        // f((0, 0.3)) = (0, 0.6): meets all but the last element.
        assert_eq!(f.image(0), &[0, 1, 2]);
        // f((0.25, 0.55)) = (0.5, 1.1): meets (0.25,0.55) on (0.5,0.55) too.
        assert_eq!(f.image(1), &[1, 2, 3]);
        // f((0.5, 0.8)) = (1.0, 1.6): meets nothing (open endpoints!).
        assert_eq!(f.image(2), &[] as &[usize]);
        assert_eq!(f.image(3), &[] as &[usize]);
    }

    #[test]
    fn minimal_representation_rejects_the_henon_map() {
        let grid = GridSpec::new(vec![0.0], vec![1.0], 4, 0.01).unwrap();
        let u = CoverHandle::from_grid(&grid).unwrap();
        assert!(matches!(
            minimal_representation(&MapSpec::henon_classic(), &u),
            Err(CombinError::UnsupportedMap("henon"))
        ));
    }

    #[test]
    fn logistic_minimal_representation_peak_membership() {
        // Elements straddling the vertex must reach the top element because
        // the maximum r/4 = 1 is attained inside.
        let u = CoverHandle::new(vec![
            iv(0.0, 0.3),
            iv(0.25, 0.55),
            iv(0.5, 0.8),
            iv(0.75, 1.0001),
        ])
        .unwrap();
        let m = MapSpec::logistic((4, 1)).unwrap();
        let f = minimal_representation(&m, &u).unwrap();
        // f((0.25, 0.55)) = (0.75, 1]: 1 lies inside (0.75, 1.0001), and the
        // span also clips (0.5, 0.8) on (0.75, 0.8).
        assert_eq!(f.image(1), &[2, 3]);
        // f((0, 0.3)) = (0, 0.84): meets everything up to (0.75, ...).
        assert_eq!(f.image(0), &[0, 1, 2, 3]);
    }

    /// The second clause of the finer-cover definition is redundant for
    /// essential covers such as grid covers.
    #[test]
    fn second_clause_redundancy_on_grid_covers() {
        let fine = GridSpec::new(vec![0.0], vec![1.0], 18, 1e-6).unwrap();
        let coarse = GridSpec::new(vec![0.0], vec![1.0], 3, 0.25).unwrap();
        let u1 = CoverHandle::from_grid(&fine).unwrap();
        let u2 = CoverHandle::from_grid(&coarse).unwrap();
        let forward = (0..u1.len()).all(|i| {
            (0..u2.len()).any(|j| u2.element(j).contains(u1.element(i)).unwrap())
        });
        assert!(forward);
        // Clause one alone already implies the full relation here.
        assert!(u1.is_finer_than(&u2));
    }
}
