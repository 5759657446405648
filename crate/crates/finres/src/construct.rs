//! Iterative cover-and-representation construction.
//!
//! Starting from the grid boxes containing a seed point, the worklist grows
//! the cover in FIFO order: for each box `U` the rigorous image enclosure
//! `f^(U)` is computed, the construction fails if the enclosure escapes the
//! region, and otherwise every grid box meeting the enclosure becomes an
//! image of `U` and is appended to the list if unseen. The loop terminates
//! when the list is exhausted, at which point the cover is closed under the
//! combinatorial image and the adjacency lists over cover indices form the
//! representation's graph.
//!
//! Image evaluation of a chunk of pending boxes may be fanned out to worker
//! threads — evaluation depends only on the grid and the map — but results
//! are committed strictly in discovery order, so cover contents, adjacency,
//! the outer-resolution bound, and the first reported failure are
//! bit-identical across runs and worker counts.
//!
//! The outer resolution `r_plus` accumulates, for every processed box, the
//! larger of the box diameter and the diameter of the hull of the grid boxes
//! covering its image enclosure, each rounded upward.

use crate::cover::{BoxId, CoverError, GridSpec};
use crate::dynmap::{MapError, MapSpec};
use crate::graph::{DiGraph, GraphBuilder, GraphError, IndexType};
use crate::hexfloat;
use crate::interval::{Metric, OInterval, ORect};
use std::collections::HashMap;
use std::io::{BufWriter, Write};
use std::time::{Duration, Instant};
use thiserror::Error;

const CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(
        "construction failed: image of box {box_id:?} escapes the region \
         ({image_lo:?} .. {image_hi:?})"
    )]
    Escape {
        box_linear: u64,
        box_id: BoxId,
        image_lo: Vec<f64>,
        image_hi: Vec<f64>,
    },
    #[error("memory budget of {budget} bytes exceeded (estimated {estimated})")]
    Budget { budget: usize, estimated: usize },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How the seen-set over linear grid indices is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeenIndexKind {
    /// Dense index array when the grid fits the budget, hash map otherwise.
    #[default]
    Auto,
    Dense,
    Hash,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub metric: Metric,
    /// Worker threads for image evaluation; 0 picks the available
    /// parallelism. Results are identical for any value.
    pub workers: usize,
    /// Rough cap on working memory in bytes.
    pub memory_budget: usize,
    pub seen_index: SeenIndexKind,
    /// Emit a progress line to stderr every this many boxes (0 = silent).
    pub progress_every: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            metric: Metric::Euclidean,
            workers: 0,
            memory_budget: 2 << 30,
            seen_index: SeenIndexKind::Auto,
            progress_every: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildStats {
    pub boxes: usize,
    pub edges: usize,
    pub build_time: Duration,
    pub peak_memory_bytes: usize,
}

/// A constructed combinatorial representation: the cover (in discovery
/// order), the graph over cover indices, and the certified outer resolution.
#[derive(Debug, Clone)]
pub struct Representation<Ix: IndexType = u32> {
    grid: GridSpec,
    metric: Metric,
    cover: Vec<u64>,
    graph: DiGraph<Ix>,
    r_plus: f64,
    stats: BuildStats,
}

impl<Ix: IndexType> Representation<Ix> {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Cover elements as linear grid indices, discovery order.
    pub fn cover_linear(&self) -> &[u64] {
        &self.cover
    }

    pub fn len(&self) -> usize {
        self.cover.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cover.is_empty()
    }

    pub fn box_id(&self, element: usize) -> BoxId {
        self.grid.box_id(self.cover[element])
    }

    pub fn bounds(&self, element: usize) -> ORect {
        self.grid
            .box_bounds(&self.box_id(element))
            .expect("cover indices are valid")
    }

    pub fn graph(&self) -> &DiGraph<Ix> {
        &self.graph
    }

    /// Certified upper bound on the outer resolution of the representation.
    pub fn r_plus(&self) -> f64 {
        self.r_plus
    }

    pub fn stats(&self) -> &BuildStats {
        &self.stats
    }

    /// The headline certificate: the representation witnesses its property
    /// at every resolution coarser than `eps` iff `r_plus <= eps`.
    pub fn certifies(&self, eps: f64) -> bool {
        self.r_plus <= eps
    }

    /// Cover file: `dim n p1 .. pn kappa metric` header, then per element
    /// the linear index, the per-axis indices, and hex-float bounds.
    pub fn write_cover_file<W: Write>(&self, w: W) -> Result<(), std::io::Error> {
        let mut w = BufWriter::new(w);
        write!(w, "dim {}", self.grid.dim())?;
        for p in self.grid.subdivisions() {
            write!(w, " {p}")?;
        }
        writeln!(
            w,
            " {} {}",
            hexfloat::format(self.grid.kappa()),
            self.metric
        )?;
        for (i, &lin) in self.cover.iter().enumerate() {
            let id = self.grid.box_id(lin);
            let bounds = self.bounds(i);
            write!(w, "{lin}")?;
            for k in &id.0 {
                write!(w, " {k}")?;
            }
            for axis in bounds.axes() {
                write!(
                    w,
                    " {} {}",
                    hexfloat::format(axis.lo()),
                    hexfloat::format(axis.hi())
                )?;
            }
            writeln!(w)?;
        }
        w.flush()
    }
}

enum SeenIndex<Ix> {
    Dense(Vec<Ix>),
    Hash(HashMap<u64, Ix>),
}

impl<Ix: IndexType> SeenIndex<Ix> {
    fn choose(kind: SeenIndexKind, cells: u64, budget: usize) -> Self {
        let dense_bytes = cells as u128 * std::mem::size_of::<Ix>() as u128;
        match kind {
            SeenIndexKind::Dense => SeenIndex::new_dense(cells as usize),
            SeenIndexKind::Hash => SeenIndex::Hash(HashMap::new()),
            SeenIndexKind::Auto => {
                if dense_bytes <= budget as u128 / 4 {
                    SeenIndex::new_dense(cells as usize)
                } else {
                    SeenIndex::Hash(HashMap::new())
                }
            }
        }
    }

    fn new_dense(cells: usize) -> Self {
        SeenIndex::Dense(vec![Ix::max_sentinel(); cells])
    }

    fn get(&self, linear: u64) -> Option<Ix> {
        match self {
            SeenIndex::Dense(v) => {
                let ix = v[linear as usize];
                (ix != Ix::max_sentinel()).then_some(ix)
            }
            SeenIndex::Hash(m) => m.get(&linear).copied(),
        }
    }

    fn insert(&mut self, linear: u64, index: Ix) {
        match self {
            SeenIndex::Dense(v) => v[linear as usize] = index,
            SeenIndex::Hash(m) => {
                m.insert(linear, index);
            }
        }
    }

    fn memory_bytes(&self) -> usize {
        match self {
            SeenIndex::Dense(v) => v.capacity() * std::mem::size_of::<Ix>(),
            // Rough: key + value + bucket overhead.
            SeenIndex::Hash(m) => m.capacity() * (std::mem::size_of::<(u64, Ix)>() + 8),
        }
    }
}

/// Per-box evaluation output, computed independently of the seen-state.
struct Eval {
    linear: u64,
    diam: f64,
    spans: Vec<(u64, u64)>,
    hull_diam: f64,
}

/// Grows the cover from `x0` until the combinatorial image closes up.
pub fn build<Ix: IndexType>(
    grid: &GridSpec,
    map: &MapSpec,
    x0: &[f64],
    opts: &BuildOptions,
) -> Result<Representation<Ix>, BuildError> {
    if grid.dim() != map.dimension() {
        return Err(MapError::ArityMismatch {
            expected: map.dimension(),
            got: grid.dim(),
        }
        .into());
    }
    let start = Instant::now();
    let workers = match opts.workers {
        0 => std::thread::available_parallelism().map_or(1, |p| p.get()),
        w => w,
    };
    let pool = (workers > 1)
        .then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .ok()
        })
        .flatten();

    let mut seen = SeenIndex::<Ix>::choose(opts.seen_index, grid.cell_count(), opts.memory_budget);
    let mut cover: Vec<u64> = Vec::new();
    let mut builder = GraphBuilder::<Ix>::new();
    let mut r_plus = 0.0f64;
    let mut peak_memory = 0usize;

    for id in grid.boxes_containing_point(x0)? {
        let linear = grid.linear_index(&id);
        let index = Ix::from_usize(cover.len()).ok_or(GraphError::IndexOverflow(Ix::BITS))?;
        seen.insert(linear, index);
        cover.push(linear);
    }

    let strides = grid.strides();
    let evaluate = |linear: u64| -> Result<Eval, BuildError> {
        let id = grid.box_id(linear);
        let bounds = grid.box_bounds(&id)?;
        let image = map.eval_box(&bounds)?;
        let (ranges, inside) = grid.ranges_intersecting_rect(&image)?;
        if !inside || ranges.iter().any(Option::is_none) {
            return Err(BuildError::Escape {
                box_linear: linear,
                box_id: id,
                image_lo: image.axes().iter().map(OInterval::lo).collect(),
                image_hi: image.axes().iter().map(OInterval::hi).collect(),
            });
        }
        let spans: Vec<(u64, u64)> = ranges.into_iter().map(Option::unwrap).collect();
        // Hull of the covering boxes: per-axis bounds of the index range.
        let hull = ORect::new(
            spans
                .iter()
                .enumerate()
                .map(|(axis, &(klo, khi))| {
                    let lo = grid.axis_bounds(axis, klo).0;
                    let hi = grid.axis_bounds(axis, khi).1;
                    OInterval::new(lo, hi).map_err(CoverError::from)
                })
                .collect::<Result<_, _>>()?,
        )
        .map_err(CoverError::from)?;
        Ok(Eval {
            linear,
            diam: bounds.diam(opts.metric),
            spans,
            hull_diam: hull.diam(opts.metric),
        })
    };

    let mut head = 0usize;
    let mut next_progress = opts.progress_every;
    while head < cover.len() {
        let chunk_end = cover.len().min(head + CHUNK);
        let pending = &cover[head..chunk_end];
        let results: Vec<Result<Eval, BuildError>> = match &pool {
            Some(pool) => pool.install(|| {
                use rayon::prelude::*;
                pending.par_iter().map(|&lin| evaluate(lin)).collect()
            }),
            None => pending.iter().map(|&lin| evaluate(lin)).collect(),
        };

        // Commit strictly in discovery order.
        for result in results {
            let eval = result?;
            r_plus = r_plus.max(eval.diam).max(eval.hull_diam);

            // Row-major walk over the covering index ranges.
            let mut k: Vec<u64> = eval.spans.iter().map(|&(lo, _)| lo).collect();
            let mut linear: u64 = k
                .iter()
                .zip(&strides)
                .map(|(&ki, &s)| ki * s)
                .sum();
            'walk: loop {
                let target = match seen.get(linear) {
                    Some(ix) => ix,
                    None => {
                        let ix = Ix::from_usize(cover.len())
                            .ok_or(GraphError::IndexOverflow(Ix::BITS))?;
                        seen.insert(linear, ix);
                        cover.push(linear);
                        ix
                    }
                };
                builder.push_edge(target);

                let mut axis = eval.spans.len();
                loop {
                    if axis == 0 {
                        break 'walk;
                    }
                    axis -= 1;
                    k[axis] += 1;
                    linear += strides[axis];
                    if k[axis] <= eval.spans[axis].1 {
                        break;
                    }
                    linear -= (k[axis] - eval.spans[axis].0) * strides[axis];
                    k[axis] = eval.spans[axis].0;
                }
            }
            builder.finish_vertex()?;
            let _ = eval.linear;
        }

        head = chunk_end;
        let estimated =
            cover.capacity() * 8 + builder.memory_bytes() + seen.memory_bytes();
        peak_memory = peak_memory.max(estimated);
        if estimated > opts.memory_budget {
            return Err(BuildError::Budget {
                budget: opts.memory_budget,
                estimated,
            });
        }
        if opts.progress_every > 0 && head as u64 >= next_progress {
            eprintln!(
                "processed {head} boxes, discovered {}, edges {}",
                cover.len(),
                builder.edge_count()
            );
            next_progress += opts.progress_every;
        }
    }

    let graph = builder.build();
    let stats = BuildStats {
        boxes: cover.len(),
        edges: graph.edge_count(),
        build_time: start.elapsed(),
        peak_memory_bytes: peak_memory.max(cover.capacity() * 8 + graph.memory_bytes()),
    };
    Ok(Representation {
        grid: grid.clone(),
        metric: opts.metric,
        cover,
        graph,
        r_plus,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> BuildOptions {
        BuildOptions {
            workers: 1,
            ..BuildOptions::default()
        }
    }

    /// Constant map: the cover closes after one step.
    #[test]
    fn constant_map_closes_in_one_step() {
        let grid = GridSpec::new(vec![0.0], vec![1.0], 16, 1e-6).unwrap();
        let m = MapSpec::linear1d((0, 1), (1, 3)).unwrap();
        let rep = build::<u32>(&grid, &m, &[0.9], &opts()).unwrap();

        // Cover = seed boxes plus the boxes containing 1/3.
        let seeds = grid.boxes_containing_point(&[0.9]).unwrap();
        let c_boxes = grid.boxes_containing_point(&[1.0 / 3.0]).unwrap();
        let mut expect: Vec<u64> = seeds
            .iter()
            .chain(&c_boxes)
            .map(|id| grid.linear_index(id))
            .collect();
        expect.dedup();
        assert_eq!(rep.cover_linear(), &expect[..]);

        // Every image set consists of the boxes containing the constant.
        let target: Vec<u64> = c_boxes.iter().map(|id| grid.linear_index(id)).collect();
        for u in 0..rep.len() {
            let imgs: Vec<u64> = rep
                .graph()
                .neighbors(u)
                .iter()
                .map(|ix| rep.cover_linear()[ix.to_usize()])
                .collect();
            assert_eq!(imgs, target);
        }
    }

    #[test]
    fn contracting_map_absorbs_and_closes() {
        let grid = GridSpec::new(vec![0.0], vec![1.0], 64, 1e-9).unwrap();
        let m = MapSpec::linear1d((1, 2), (1, 4)).unwrap(); // fixed point 1/2
        let rep = build::<u32>(&grid, &m, &[0.5001], &opts()).unwrap();
        assert!(rep.len() >= 1);
        assert!(rep.graph().vertex_count() == rep.len());

        // Closure invariant, re-verified by a full second pass.
        for u in 0..rep.len() {
            let image = m.eval_box(&rep.bounds(u)).unwrap();
            let (ids, inside) = grid.boxes_intersecting_rect(&image).unwrap();
            assert!(inside);
            let expect: Vec<u64> = ids.iter().map(|id| grid.linear_index(id)).collect();
            let got: Vec<u64> = rep
                .graph()
                .neighbors(u)
                .iter()
                .map(|ix| rep.cover_linear()[ix.to_usize()])
                .collect();
            assert_eq!(got, expect);
        }

        // r_plus dominates every cover box diameter.
        for u in 0..rep.len() {
            assert!(rep.r_plus() >= rep.bounds(u).diam(Metric::Euclidean));
        }
    }

    #[test]
    fn escaping_map_fails_deterministically() {
        let grid = GridSpec::new(vec![0.0], vec![1.0], 16, 1e-6).unwrap();
        let m = MapSpec::linear1d((3, 1), (0, 1)).unwrap(); // 3x escapes quickly
        let err = build::<u32>(&grid, &m, &[0.5], &opts()).unwrap_err();
        match err {
            BuildError::Escape { box_id, .. } => {
                // The seed box containing 0.5 maps to (1.5-ish, ...): escape.
                assert!(box_id.0[0] == 7 || box_id.0[0] == 8);
            }
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let grid = GridSpec::new(vec![-1.4, -0.5], vec![2.8, 1.0], 446, f64::MIN_POSITIVE)
            .unwrap();
        let m = MapSpec::henon_classic();
        let tiny = BuildOptions {
            memory_budget: 1024,
            seen_index: SeenIndexKind::Hash,
            workers: 1,
            ..BuildOptions::default()
        };
        let err = build::<u32>(&grid, &m, &[0.61989426930989, 0.17586130934794], &tiny)
            .unwrap_err();
        assert!(matches!(err, BuildError::Budget { .. }));
    }

    #[test]
    fn deterministic_across_workers_and_seen_index() {
        let grid = GridSpec::new(vec![-1.4, -0.5], vec![2.8, 1.0], 150, 1e-4).unwrap();
        let m = MapSpec::henon_classic();
        let x0 = [0.61989426930989, 0.17586130934794];

        // p1 = 150 is below the minimal working refinement; expect a
        // deterministic escape. Compare the failing box across settings.
        let runs: Vec<_> = [
            BuildOptions {
                workers: 1,
                ..BuildOptions::default()
            },
            BuildOptions {
                workers: 4,
                ..BuildOptions::default()
            },
            BuildOptions {
                workers: 2,
                seen_index: SeenIndexKind::Hash,
                ..BuildOptions::default()
            },
        ]
        .iter()
        .map(|o| build::<u32>(&grid, &m, &x0, o))
        .collect();

        let describe = |r: &Result<Representation<u32>, BuildError>| match r {
            Ok(rep) => format!(
                "ok boxes={} edges={} r={}",
                rep.len(),
                rep.graph().edge_count(),
                hexfloat::format(rep.r_plus())
            ),
            Err(BuildError::Escape {
                box_linear,
                image_lo,
                image_hi,
                ..
            }) => format!("escape {box_linear} {image_lo:?} {image_hi:?}"),
            Err(other) => format!("{other:?}"),
        };
        let first = describe(&runs[0]);
        for run in &runs[1..] {
            assert_eq!(describe(run), first);
        }
    }

    #[test]
    fn henon_minimal_grid_builds_and_certifies() {
        let grid = GridSpec::new(vec![-1.4, -0.5], vec![2.8, 1.0], 446, f64::MIN_POSITIVE)
            .unwrap();
        let m = MapSpec::henon_classic();
        let rep = build::<u32>(&grid, &m, &[0.61989426930989, 0.17586130934794], &opts())
            .unwrap();
        assert!(rep.len() > 1000, "{}", rep.len());
        assert!(rep.r_plus() < 0.05, "{}", rep.r_plus());
        assert!(rep.certifies(0.05));
        assert!(!rep.certifies(rep.r_plus() / 2.0));
        assert!(rep.graph().strongly_connected());
    }

    #[test]
    fn cover_file_has_header_and_hex_bounds() {
        let grid = GridSpec::new(vec![0.0], vec![1.0], 8, 1e-6).unwrap();
        let m = MapSpec::linear1d((1, 2), (1, 4)).unwrap();
        let rep = build::<u32>(&grid, &m, &[0.5001], &opts()).unwrap();
        let mut buf = Vec::new();
        rep.write_cover_file(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("dim 1 8 0x"), "{header}");
        assert!(header.ends_with("euclidean"));
        let first = lines.next().unwrap();
        let fields: Vec<&str> = first.split_whitespace().collect();
        assert_eq!(fields.len(), 4); // linear, k, lo, hi
        assert!(fields[2].starts_with("0x") || fields[2].starts_with("-0x"));
        assert_eq!(
            crate::hexfloat::parse(fields[2]).unwrap(),
            rep.bounds(0).axis(0).lo()
        );
    }
}
