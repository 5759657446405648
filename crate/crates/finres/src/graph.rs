//! Linear-time graph decision procedures for combinatorial maps.
//!
//! A combinatorial map on `n` cover elements becomes a directed graph on
//! vertices `0..n` with an edge `(u, v)` whenever `v` lies in the image of
//! `u`. The map is transitive iff the graph is strongly connected and mixing
//! iff it is additionally aperiodic (the GCD of all cycle lengths is 1).
//!
//! Both decision procedures run a depth-first search with an explicit stack:
//! huge covers produce graphs whose DFS trees are far deeper than any call
//! stack allows. Strongly connected components use Tarjan's single-pass
//! algorithm — the transpose-based two-pass variant would double peak memory
//! on graphs that barely fit. The period computation accumulates
//! `gcd(p, |depth(v) - depth(u) - 1|)` over every edge whose target is
//! already visited.
//!
//! Adjacency is compressed sparse row with a configurable index width: `u32`
//! by default, `u64` when vertex or edge counts demand it.

use crate::combin::CombMap;
use std::fmt::Debug;
use std::hash::Hash;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex or edge count exceeds the {0}-bit index width")]
    IndexOverflow(u32),
    #[error("graph is not strongly connected; the period is undefined")]
    NotStronglyConnected,
    #[error("oracle limited to {limit} vertices, got {got}")]
    OracleScale { limit: usize, got: usize },
    #[error("edge list parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Unsigned index stored in the compressed adjacency arrays.
pub trait IndexType:
    Copy + Eq + Ord + Hash + Debug + Send + Sync + Default + 'static
{
    const BITS: u32;
    fn from_usize(i: usize) -> Option<Self>;
    fn to_usize(self) -> usize;
    fn max_sentinel() -> Self;
}

impl IndexType for u32 {
    const BITS: u32 = 32;
    fn from_usize(i: usize) -> Option<Self> {
        u32::try_from(i).ok().filter(|&v| v != u32::MAX)
    }
    fn to_usize(self) -> usize {
        self as usize
    }
    fn max_sentinel() -> Self {
        u32::MAX
    }
}

impl IndexType for u64 {
    const BITS: u32 = 64;
    fn from_usize(i: usize) -> Option<Self> {
        u64::try_from(i).ok().filter(|&v| v != u64::MAX)
    }
    fn to_usize(self) -> usize {
        self as usize
    }
    fn max_sentinel() -> Self {
        u64::MAX
    }
}

/// Directed graph in compressed sparse row form; adjacency keeps
/// construction order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph<Ix: IndexType = u32> {
    offsets: Vec<Ix>,
    targets: Vec<Ix>,
}

/// Incremental CSR builder: vertices are finalized in index order.
#[derive(Debug, Clone)]
pub struct GraphBuilder<Ix: IndexType = u32> {
    offsets: Vec<Ix>,
    targets: Vec<Ix>,
}

impl<Ix: IndexType> Default for GraphBuilder<Ix> {
    fn default() -> Self {
        Self::new()
    }
}

impl<Ix: IndexType> GraphBuilder<Ix> {
    pub fn new() -> Self {
        GraphBuilder {
            offsets: vec![Ix::from_usize(0).unwrap()],
            targets: Vec::new(),
        }
    }

    pub fn push_edge(&mut self, target: Ix) {
        self.targets.push(target);
    }

    /// Closes the adjacency list of the current vertex.
    pub fn finish_vertex(&mut self) -> Result<(), GraphError> {
        let off = Ix::from_usize(self.targets.len()).ok_or(GraphError::IndexOverflow(Ix::BITS))?;
        self.offsets.push(off);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn memory_bytes(&self) -> usize {
        (self.offsets.capacity() + self.targets.capacity()) * std::mem::size_of::<Ix>()
    }

    pub fn build(self) -> DiGraph<Ix> {
        DiGraph {
            offsets: self.offsets,
            targets: self.targets,
        }
    }
}

impl<Ix: IndexType> DiGraph<Ix> {
    /// Builds from explicit edges; adjacency order follows the input order
    /// per source vertex (counting sort, stable).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let overflow = || GraphError::IndexOverflow(Ix::BITS);
        Ix::from_usize(n).ok_or_else(overflow)?;
        Ix::from_usize(edges.len()).ok_or_else(overflow)?;
        let mut counts = vec![0usize; n + 1];
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u},{v}) out of range");
            counts[u + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets: Vec<Ix> = counts
            .iter()
            .map(|&c| Ix::from_usize(c).ok_or_else(overflow))
            .collect::<Result<_, _>>()?;
        let mut cursor = counts;
        let zero = Ix::from_usize(0).unwrap();
        let mut targets = vec![zero; edges.len()];
        for &(u, v) in edges {
            targets[cursor[u]] = Ix::from_usize(v).ok_or_else(overflow)?;
            cursor[u] += 1;
        }
        Ok(DiGraph { offsets, targets })
    }

    /// The graph associated with a combinatorial map.
    pub fn from_comb(f: &CombMap) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new();
        for u in 0..f.len() {
            for &v in f.image(u) {
                b.push_edge(Ix::from_usize(v).ok_or(GraphError::IndexOverflow(Ix::BITS))?);
            }
            b.finish_vertex()?;
        }
        Ok(b.build())
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn neighbors(&self, u: usize) -> &[Ix] {
        &self.targets[self.offsets[u].to_usize()..self.offsets[u + 1].to_usize()]
    }

    pub fn memory_bytes(&self) -> usize {
        (self.offsets.capacity() + self.targets.capacity()) * std::mem::size_of::<Ix>()
    }

    /// Tarjan's strongly connected components, iterative.
    ///
    /// Component ids are assigned in completion order; identical graphs give
    /// identical ids.
    pub fn tarjan_scc(&self) -> SccResult<Ix> {
        let n = self.vertex_count();
        let undef = Ix::max_sentinel();
        let mut index = vec![undef; n]; // discovery time
        let mut lowlink = vec![undef; n];
        let mut comp = vec![undef; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<Ix> = Vec::new();
        // Explicit DFS frames: (vertex, absolute cursor into targets).
        let mut frames: Vec<(Ix, usize)> = Vec::new();
        let mut time = 0usize;
        let mut components = 0usize;

        for root in 0..n {
            if index[root] != undef {
                continue;
            }
            frames.push((Ix::from_usize(root).unwrap(), self.offsets[root].to_usize()));
            index[root] = Ix::from_usize(time).unwrap();
            lowlink[root] = index[root];
            time += 1;
            stack.push(Ix::from_usize(root).unwrap());
            on_stack[root] = true;

            while let Some(&mut (u, ref mut cursor)) = frames.last_mut() {
                let ui = u.to_usize();
                if *cursor < self.offsets[ui + 1].to_usize() {
                    let v = self.targets[*cursor];
                    *cursor += 1;
                    let vi = v.to_usize();
                    if index[vi] == undef {
                        index[vi] = Ix::from_usize(time).unwrap();
                        lowlink[vi] = index[vi];
                        time += 1;
                        stack.push(v);
                        on_stack[vi] = true;
                        frames.push((v, self.offsets[vi].to_usize()));
                    } else if on_stack[vi] && index[vi] < lowlink[ui] {
                        lowlink[ui] = index[vi];
                    }
                } else {
                    // All edges of u processed: close its component or
                    // propagate the lowlink to the parent.
                    if lowlink[ui] == index[ui] {
                        let c = Ix::from_usize(components).unwrap();
                        components += 1;
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w.to_usize()] = false;
                            comp[w.to_usize()] = c;
                            if w == u {
                                break;
                            }
                        }
                    }
                    frames.pop();
                    if let Some(&mut (parent, _)) = frames.last_mut() {
                        let pi = parent.to_usize();
                        if lowlink[ui] < lowlink[pi] {
                            lowlink[pi] = lowlink[ui];
                        }
                    }
                }
            }
        }

        SccResult {
            component: comp,
            count: components,
        }
    }

    /// True iff the whole graph is one strongly connected component.
    pub fn strongly_connected(&self) -> bool {
        self.vertex_count() > 0 && self.tarjan_scc().count == 1
    }

    /// GCD of all cycle lengths of a strongly connected graph, 0 when the
    /// graph has no cycle (single vertex without a self-loop).
    ///
    /// DFS from vertex 0 with an explicit stack; every edge to an
    /// already-visited target contributes `|d_v - d_u - 1|` to the running
    /// GCD. Callers must ensure strong connectivity; an unreachable vertex
    /// is reported as a contract violation.
    pub fn graph_period(&self) -> Result<u64, GraphError> {
        let n = self.vertex_count();
        if n == 0 {
            return Err(GraphError::NotStronglyConnected);
        }
        const UNDEF: i64 = -1;
        let mut depth = vec![UNDEF; n];
        let mut frames: Vec<(Ix, usize)> = Vec::new();
        let mut visited = 1usize;
        let mut p: u64 = 0;

        depth[0] = 0;
        frames.push((Ix::from_usize(0).unwrap(), self.offsets[0].to_usize()));
        while let Some(&mut (u, ref mut cursor)) = frames.last_mut() {
            let ui = u.to_usize();
            if *cursor == self.offsets[ui + 1].to_usize() {
                frames.pop();
                continue;
            }
            let v = self.targets[*cursor];
            *cursor += 1;
            let vi = v.to_usize();
            if depth[vi] == UNDEF {
                depth[vi] = depth[ui] + 1;
                visited += 1;
                frames.push((v, self.offsets[vi].to_usize()));
            } else {
                p = gcd(p, (depth[vi] - depth[ui] - 1).unsigned_abs());
            }
        }

        if visited != n {
            return Err(GraphError::NotStronglyConnected);
        }
        Ok(p)
    }

    /// Transitivity of the represented dynamics: strong connectivity.
    pub fn is_transitive(&self) -> bool {
        self.strongly_connected()
    }

    /// Mixing: strong connectivity plus aperiodicity.
    pub fn is_mixing(&self) -> bool {
        self.strongly_connected() && matches!(self.graph_period(), Ok(1))
    }

    /// Writes the edge list: `vertices n edges m`, then one `u v` per line
    /// in construction order.
    pub fn write_edge_list<W: Write>(&self, w: W) -> Result<(), GraphError> {
        let mut w = BufWriter::new(w);
        writeln!(
            w,
            "vertices {} edges {}",
            self.vertex_count(),
            self.edge_count()
        )?;
        for u in 0..self.vertex_count() {
            for v in self.neighbors(u) {
                writeln!(w, "{} {}", u, v.to_usize())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the edge list format; errors carry the offending line number.
    pub fn read_edge_list<R: Read>(r: R) -> Result<Self, GraphError> {
        let parse = |line: usize, message: &str| GraphError::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or_else(|| parse(1, "missing header"))?
            .map_err(GraphError::Io)?;
        let mut it = header.split_whitespace();
        let (n, m) = match (
            it.next(),
            it.next().map(str::parse::<usize>),
            it.next(),
            it.next().map(str::parse::<usize>),
            it.next(),
        ) {
            (Some("vertices"), Some(Ok(n)), Some("edges"), Some(Ok(m)), None) => (n, m),
            _ => return Err(parse(1, "expected `vertices <n> edges <m>`")),
        };

        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(GraphError::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (u, v) = match (
                it.next().map(str::parse::<usize>),
                it.next().map(str::parse::<usize>),
                it.next(),
            ) {
                (Some(Ok(u)), Some(Ok(v)), None) => (u, v),
                _ => return Err(parse(lineno, "expected `u v`")),
            };
            if u >= n || v >= n {
                return Err(parse(lineno, "vertex index out of range"));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(parse(
                1,
                &format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        Self::from_edges(n, &edges)
    }
}

/// Strongly connected components: a component id per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccResult<Ix: IndexType = u32> {
    pub component: Vec<Ix>,
    pub count: usize,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Maximum vertex count of the bitset-based oracles.
pub const ORACLE_LIMIT: usize = 64;

/// Boolean adjacency rows as 64-bit masks, for the brute-force oracles.
fn bitset_rows<Ix: IndexType>(g: &DiGraph<Ix>) -> Result<Vec<u64>, GraphError> {
    let n = g.vertex_count();
    if n > ORACLE_LIMIT {
        return Err(GraphError::OracleScale {
            limit: ORACLE_LIMIT,
            got: n,
        });
    }
    let mut rows = vec![0u64; n];
    for (u, row) in rows.iter_mut().enumerate() {
        for v in g.neighbors(u) {
            *row |= 1 << v.to_usize();
        }
    }
    Ok(rows)
}

fn bool_mat_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter()
        .map(|&row| {
            let mut out = 0u64;
            let mut bits = row;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                out |= b[j];
            }
            out
        })
        .collect()
}

/// Pairwise-reachability closure oracle for SCC equivalence checks:
/// vertices share a component iff they reach each other.
pub fn oracle_scc_partition<Ix: IndexType>(g: &DiGraph<Ix>) -> Result<Vec<Vec<bool>>, GraphError> {
    let n = g.vertex_count();
    let mut reach = bitset_rows(g)?;
    // Warshall closure on bitset rows.
    for k in 0..n {
        for i in 0..n {
            if reach[i] >> k & 1 == 1 {
                reach[i] |= reach[k];
            }
        }
    }
    let same = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i == j || (reach[i] >> j & 1 == 1 && reach[j] >> i & 1 == 1))
                .collect()
        })
        .collect();
    Ok(same)
}

/// Period oracle: GCD of the closed-walk lengths `l <= n` with a nonzero
/// boolean-trace power. Requires strong connectivity to mean anything.
pub fn oracle_period<Ix: IndexType>(g: &DiGraph<Ix>) -> Result<u64, GraphError> {
    let n = g.vertex_count();
    let rows = bitset_rows(g)?;
    let mut power = rows.clone();
    let mut p = 0u64;
    for _len in 1..=n {
        let trace = (0..n).any(|i| power[i] >> i & 1 == 1);
        if trace {
            p = gcd(p, _len as u64);
        }
        power = bool_mat_mul(&power, &rows);
    }
    Ok(p)
}

/// Mixing oracle over the combinatorial map: some power `k` bounded by the
/// Wielandt exponent `(n-1)^2 + 1` sends every element to the full cover.
pub fn oracle_mixing(f: &CombMap) -> Result<bool, GraphError> {
    let n = f.len();
    if n == 0 {
        return Ok(false);
    }
    if n > ORACLE_LIMIT {
        return Err(GraphError::OracleScale {
            limit: ORACLE_LIMIT,
            got: n,
        });
    }
    let mut rows = vec![0u64; n];
    for (u, row) in rows.iter_mut().enumerate() {
        for &v in f.image(u) {
            *row |= 1 << v;
        }
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let bound = (n - 1) * (n - 1) + 1;
    let mut power = rows.clone();
    for _k in 1..=bound {
        if power.iter().all(|&row| row == full) {
            return Ok(true);
        }
        power = bool_mat_mul(&power, &rows);
    }
    Ok(false)
}
