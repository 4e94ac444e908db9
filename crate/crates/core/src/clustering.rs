//! Density-based clustering of windowed event positions.
//!
//! Classic DBSCAN: a point is core when at least `min_pts` points
//! (counting itself) lie within `eps`; clusters are the connected
//! components of core points under eps-reachability, border points attach
//! to a reachable core's cluster, everything else is noise. Labels are
//! canonical: points are ordered lexicographically before expansion, so
//! the partition and the ids are independent of input order, and a border
//! point reachable from several clusters takes the lowest id.

use crate::geometry::Point2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusteringError {
    #[error("eps must be a positive, finite distance")]
    BadEps,
    #[error("min_pts must be at least 1")]
    BadMinPts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    eps: f64,
    min_pts: usize,
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self, ClusteringError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(ClusteringError::BadEps);
        }
        if min_pts < 1 {
            return Err(ClusteringError::BadMinPts);
        }
        Ok(DbscanParams { eps, min_pts })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn min_pts(&self) -> usize {
        self.min_pts
    }
}

/// Per-point label in input order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterLabel {
    Cluster(usize),
    Noise,
}

/// Result of a clustering run. `labels[i]` belongs to the i-th input
/// point; cluster ids are contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<ClusterLabel>,
    pub cluster_count: usize,
}

impl ClusterAssignment {
    /// Input indices per cluster id.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (i, label) in self.labels.iter().enumerate() {
            if let ClusterLabel::Cluster(c) = label {
                out[*c].push(i);
            }
        }
        out
    }

    pub fn noise_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| matches!(l, ClusterLabel::Noise))
            .count()
    }
}

/// Cluster a point set. Empty input yields an empty assignment. The
/// neighborhood radius is inclusive (distance exactly `eps` counts).
pub fn dbscan(points: &[Point2], params: &DbscanParams) -> ClusterAssignment {
    let n = points.len();
    if n == 0 {
        return ClusterAssignment {
            labels: Vec::new(),
            cluster_count: 0,
        };
    }

    let eps2 = params.eps * params.eps;
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if points[i].dist2(&points[j]) <= eps2 {
                neighbors[i].push(j);
            }
        }
    }
    let is_core: Vec<bool> = neighbors.iter().map(|ns| ns.len() >= params.min_pts).collect();

    // Canonical processing order: lexicographic by position, then by
    // original index for exact duplicates.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].lex_cmp(&points[b]).then(a.cmp(&b)));

    // Pass 1: label core points by flooding the core graph in canonical
    // order; the component seen first gets id 0, and so on.
    const UNSET: usize = usize::MAX;
    let mut core_cluster = vec![UNSET; n];
    let mut cluster_count = 0;
    for &seed in &order {
        if !is_core[seed] || core_cluster[seed] != UNSET {
            continue;
        }
        let id = cluster_count;
        cluster_count += 1;
        let mut stack = vec![seed];
        core_cluster[seed] = id;
        while let Some(p) = stack.pop() {
            for &q in &neighbors[p] {
                if is_core[q] && core_cluster[q] == UNSET {
                    core_cluster[q] = id;
                    stack.push(q);
                }
            }
        }
    }

    // Pass 2: border points join the lowest-id cluster among their core
    // neighbors; points with none are noise.
    let mut labels = vec![ClusterLabel::Noise; n];
    for i in 0..n {
        if is_core[i] {
            labels[i] = ClusterLabel::Cluster(core_cluster[i]);
            continue;
        }
        let best = neighbors[i]
            .iter()
            .filter(|&&q| is_core[q])
            .map(|&q| core_cluster[q])
            .min();
        if let Some(id) = best {
            labels[i] = ClusterLabel::Cluster(id);
        }
    }

    ClusterAssignment {
        labels,
        cluster_count,
    }
}
