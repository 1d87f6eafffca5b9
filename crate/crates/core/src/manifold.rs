//! One-dimensional Isomap: k-nearest-neighbor graph, graph geodesics and
//! classical MDS onto the top eigenvector.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::BivariateDataset;
use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DisconnectedPolicy {
    /// Double k until the graph is connected (capped at n - 1).
    #[default]
    GrowK,
    /// Embed only the largest connected component.
    LargestComponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Neighborhood size; `None` scales with the sample count
    /// (see [`EmbeddingConfig::neighbors_for`]).
    pub k_neighbors: Option<usize>,
    pub target_dim: usize,
    pub disconnected_policy: DisconnectedPolicy,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig { k_neighbors: None, target_dim: 1, disconnected_policy: DisconnectedPolicy::GrowK }
    }
}

impl EmbeddingConfig {
    pub fn with_k(k: usize) -> Self {
        EmbeddingConfig { k_neighbors: Some(k), ..Default::default() }
    }

    /// `k` used for `n` points: the fixed value, or `max(10, ceil(0.04 n))`.
    pub fn neighbors_for(&self, n: usize) -> usize {
        self.k_neighbors
            .unwrap_or_else(|| 10.max((0.04 * n as f64).ceil() as usize))
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_dim != 1 {
            return Err(Error::InvalidArgument(format!(
                "only 1-D embeddings are supported, got target_dim={}",
                self.target_dim
            )));
        }
        if let Some(k) = self.k_neighbors {
            if k < 2 {
                return Err(Error::InvalidArgument(format!("k_neighbors must be >= 2, got {k}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// Latent coordinate per kept sample, standardized to mean 0 and unit variance.
    pub t: Vec<f64>,
    /// Rows of the input dataset that `t` refers to, in the same order.
    pub kept_indices: Vec<usize>,
    /// Neighborhood size actually used.
    pub k_used: usize,
}

/// Weighted undirected graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl NeighborGraph {
    pub fn new(n: usize) -> Self {
        NeighborGraph { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut g = NeighborGraph::new(n);
        for &(i, j, w) in edges {
            g.add_edge(i, j, w);
        }
        g
    }

    /// Insert or keep an undirected edge; an existing edge keeps its weight.
    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) {
        if i == j {
            return;
        }
        for (a, b) in [(i, j), (j, i)] {
            if let Err(pos) = self.adj[a].binary_search_by(|&(v, _)| v.cmp(&b)) {
                self.adj[a].insert(pos, (b, w));
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.adj[i]
            .binary_search_by(|&(v, _)| v.cmp(&j))
            .ok()
            .map(|p| self.adj[i][p].1)
    }

    /// Connected components, each listed in increasing node order; components
    /// are ordered by their smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn induced(&self, nodes: &[usize]) -> NeighborGraph {
        let mut map = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            map[old] = new;
        }
        let mut g = NeighborGraph::new(nodes.len());
        for (new, &old) in nodes.iter().enumerate() {
            for &(v, w) in &self.adj[old] {
                if map[v] != usize::MAX {
                    g.add_edge(new, map[v], w);
                }
            }
        }
        g
    }
}

fn euclid(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).hypot(p.1 - q.1)
}

/// Symmetrized k-nearest-neighbor graph with Euclidean edge weights.
/// Equal distances are broken toward the lower index.
pub fn knn_graph(points: &[(f64, f64)], k: usize) -> Result<NeighborGraph> {
    let n = points.len();
    if k == 0 || n < k + 1 {
        return Err(Error::TooFewPoints { n, k });
    }
    let mut g = NeighborGraph::new(n);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        cand.clear();
        cand.extend((0..n).filter(|&j| j != i).map(|j| (euclid(points[i], points[j]), j)));
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        cand.select_nth_unstable_by(k - 1, by_dist);
        for &(d, j) in &cand[..k] {
            g.add_edge(i, j, d);
        }
    }
    Ok(g)
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All-pairs shortest paths (Dijkstra from every node). Unreachable pairs are
/// `f64::INFINITY`.
pub fn geodesic_distances(g: &NeighborGraph) -> DMatrix<f64> {
    let n = g.node_count();
    // flatten the adjacency lists for the n inner searches
    let mut offsets = Vec::with_capacity(n + 1);
    let mut edges: Vec<(usize, f64)> = Vec::with_capacity(2 * g.edge_count());
    offsets.push(0);
    for u in 0..n {
        edges.extend_from_slice(g.neighbors(u));
        offsets.push(edges.len());
    }
    let mut out = DMatrix::from_element(n, n, f64::INFINITY);
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        dist[s] = 0.0;
        heap.push(Frontier(0.0, s));
        while let Some(Frontier(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &edges[offsets[u]..offsets[u + 1]] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Frontier(nd, v));
                }
            }
        }
        out.column_mut(s).copy_from_slice(&dist);
    }
    // average the two directions so the result is exactly symmetric
    for i in 0..n {
        for j in (i + 1)..n {
            let d = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}

/// Double-centered squared distances, `-1/2 J D^2 J`.
pub fn double_center(dist: &DMatrix<f64>) -> DMatrix<f64> {
    let n = dist.nrows();
    let mut b = dist.map(|d| -0.5 * d * d);
    let row_means: Vec<f64> = (0..n).map(|i| b.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] += grand - row_means[i] - row_means[j];
        }
    }
    b
}

/// Classical MDS onto one dimension.
///
/// Returns the top eigenvector of the double-centered matrix scaled by the
/// square root of its eigenvalue, centered, with the sign chosen so the first
/// point's coordinate is non-negative.
pub fn classical_mds_1d(dist: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = dist.nrows();
    if n != dist.ncols() || n == 0 {
        return Err(Error::InvalidArgument("distance matrix must be square and non-empty".into()));
    }
    for i in 0..n {
        for j in 0..n {
            let d = dist[(i, j)];
            if !d.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite distance at ({i}, {j})")));
            }
            if (d - dist[(j, i)]).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("distance matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    let b = double_center(dist);
    let (lambda, vec) = top_eigenpair(&b);
    if !(lambda > 1e-12) {
        return Err(Error::DegenerateSpectrum(lambda));
    }
    let scale = lambda.sqrt();
    let mut t: Vec<f64> = vec.iter().map(|v| v * scale).collect();
    let m = stats::mean(&t);
    t.iter_mut().for_each(|v| *v -= m);
    if t[0] < 0.0 {
        t.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(t)
}

const POWER_MAX_ITER: usize = 300;
const POWER_TOL: f64 = 1e-12;

fn power_iteration(b: &DMatrix<f64>, shift: f64, start: DVector<f64>) -> Option<(f64, DVector<f64>)> {
    let mut v = start.normalize();
    let mut w = DVector::zeros(v.len());
    for _ in 0..POWER_MAX_ITER {
        w.gemv(1.0, b, &v, 0.0);
        w.axpy(-shift, &v, 1.0);
        let mu = v.dot(&w);
        let norm = w.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return None;
        }
        let r = (&w - &v * mu).norm();
        v.copy_from(&w);
        v /= norm;
        if r <= POWER_TOL * mu.abs().max(f64::MIN_POSITIVE) {
            return Some((mu + shift, v));
        }
    }
    None
}

/// Largest algebraic eigenvalue of a symmetric matrix and its unit eigenvector.
/// Power iteration first (the top eigenvalue of an Isomap kernel is usually
/// well separated); a full decomposition if it does not converge.
fn top_eigenpair(b: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let n = b.nrows();
    // start from the column of the point farthest from the centroid
    let j = (0..n).max_by(|&x, &y| b[(x, x)].total_cmp(&b[(y, y)])).unwrap_or(0);
    let mut start = b.column(j).into_owned();
    if start.norm() == 0.0 {
        start = DVector::from_fn(n, |i, _| ((i + 1) as f64).sin());
    }
    if let Some((mu, v)) = power_iteration(b, 0.0, start.clone()) {
        if mu >= 0.0 {
            return (mu, v);
        }
        // dominant eigenvalue is negative: shift it to zero and retry
        if let Some(p) = power_iteration(b, mu, start) {
            return p;
        }
    }
    let eig = SymmetricEigen::new(b.clone());
    let (top, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    (lambda, eig.eigenvectors.column(top).into_owned())
}

/// Recover a one-dimensional latent coordinate for the point cloud `(a_i, b_i)`.
pub fn isomap_embed(d: &BivariateDataset, cfg: &EmbeddingConfig) -> Result<Embedding> {
    cfg.validate()?;
    let points: Vec<(f64, f64)> = d.rows().collect();
    let n = points.len();
    let mut k = cfg.neighbors_for(n);
    if n < k + 1 {
        return Err(Error::TooFewPoints { n, k });
    }
    let mut g = knn_graph(&points, k)?;
    let mut kept: Vec<usize> = (0..n).collect();
    match cfg.disconnected_policy {
        DisconnectedPolicy::GrowK => {
            while !g.is_connected() && k < n - 1 {
                k = (2 * k).min(n - 1);
                g = knn_graph(&points, k)?;
            }
        }
        DisconnectedPolicy::LargestComponent => {
            let comps = g.components();
            if comps.len() > 1 {
                let largest = comps
                    .into_iter()
                    .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
                    .expect("at least one component");
                g = g.induced(&largest);
                kept = largest;
            }
        }
    }
    if kept.len() < 3 {
        return Err(Error::TooFewPoints { n: kept.len(), k });
    }
    let geo = geodesic_distances(&g);
    let raw = classical_mds_1d(&geo)?;
    let t = stats::standardize(&raw).ok_or(Error::DegenerateSpectrum(0.0))?;
    Ok(Embedding { t, kept_indices: kept, k_used: k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_k1_is_path() {
        let g = knn_graph(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], 1).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.weight(0, 1), Some(1.0));
        assert_eq!(g.weight(1, 2), Some(1.0));
        assert_eq!(g.weight(0, 2), None);
    }

    #[test]
    fn k_n_minus_1_is_complete() {
        let pts = [(0.0, 0.0), (1.0, 0.3), (2.0, -1.0), (0.5, 4.0), (3.0, 3.0)];
        let g = knn_graph(&pts, 4).unwrap();
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(knn_graph(&[(0.0, 0.0), (1.0, 1.0)], 2), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn path_geodesics() {
        let g = NeighborGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let d = geodesic_distances(&g);
        assert_eq!(d[(0, 2)], 2.0);
        assert_eq!(d[(2, 0)], 2.0);
        assert_eq!(d[(1, 1)], 0.0);
    }

    #[test]
    fn disconnected_is_infinite() {
        let g = NeighborGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let d = geodesic_distances(&g);
        assert!(d[(0, 3)].is_infinite());
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn mds_two_points() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]);
        let t = classical_mds_1d(&d).unwrap();
        assert!((t[0] - 1.5).abs() < 1e-12 && (t[1] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn mds_zero_matrix_degenerate() {
        let d = DMatrix::zeros(3, 3);
        assert!(matches!(classical_mds_1d(&d), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn mds_rejects_asymmetric() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(classical_mds_1d(&d).is_err());
    }

    #[test]
    fn isomap_k_too_large() {
        let d = BivariateDataset::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 4.0, 9.0]).unwrap();
        assert!(matches!(isomap_embed(&d, &EmbeddingConfig::with_k(4)), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn largest_component_policy() {
        // two clusters far apart; k=2 cannot bridge them
        let mut a = vec![0.0, 0.1, 0.2, 0.3, 0.4];
        let mut b = vec![0.0; 5];
        a.extend([100.0, 100.1, 100.2]);
        b.extend([0.0, 0.0, 0.0]);
        let d = BivariateDataset::new(a, b).unwrap();
        let cfg = EmbeddingConfig {
            k_neighbors: Some(2),
            disconnected_policy: DisconnectedPolicy::LargestComponent,
            ..Default::default()
        };
        let e = isomap_embed(&d, &cfg).unwrap();
        assert_eq!(e.kept_indices, vec![0, 1, 2, 3, 4]);
        assert_eq!(e.t.len(), 5);

        let grow = isomap_embed(&d, &EmbeddingConfig::with_k(2)).unwrap();
        assert_eq!(grow.kept_indices.len(), 8);
        assert!(grow.k_used > 2);
    }
}
