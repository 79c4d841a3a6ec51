use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tag of a boundary curve of the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// Γ0, the impedance curve bounding the inclusion D0.
    Inner,
    /// Γ1, the outer curve carrying the flux.
    Outer,
}

impl BoundaryTag {
    pub fn label(self) -> &'static str {
        match self {
            BoundaryTag::Inner => "G0",
            BoundaryTag::Outer => "G1",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G0" | "gamma0" | "inner" => Ok(BoundaryTag::Inner),
            "G1" | "gamma1" | "outer" => Ok(BoundaryTag::Outer),
            other => Err(Error::InvalidArgument(format!("unknown boundary tag '{other}'"))),
        }
    }
}

/// A boundary edge `nodes[0] → nodes[1]` following the counterclockwise
/// orientation of its curve, with arc-length coordinates of both ends. On the
/// closing edge `sigma[1]` equals the curve length.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub tag: BoundaryTag,
    pub nodes: [usize; 2],
    pub sigma: [f64; 2],
}

impl BoundaryEdge {
    pub fn length(&self, vertices: &[[f64; 2]]) -> f64 {
        let a = vertices[self.nodes[0]];
        let b = vertices[self.nodes[1]];
        (b[0] - a[0]).hypot(b[1] - a[1])
    }
}

/// Nodes of one boundary curve in arc-length order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCycle {
    pub tag: BoundaryTag,
    pub nodes: Vec<usize>,
    pub sigma: Vec<f64>,
    /// Curve length ℓ (the period of σ).
    pub length: f64,
    /// Indices into `Mesh::boundary_edges`, in the same order as `nodes`.
    pub edges: Vec<usize>,
}

/// Triangulation of the annulus D1 with tagged boundary cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    inner: BoundaryCycle,
    outer: BoundaryCycle,
    h: f64,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

impl Mesh {
    /// Builds a mesh from raw parts and checks every structural invariant:
    /// positive triangles, boundary edges exactly covering the topological
    /// boundary, one closed cycle per tag, increasing arc length along each
    /// cycle, and D1 lying to the left of Γ1 and to the right of Γ0.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let n = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        // Directed edge -> owning triangle count.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut h: f64 = 0.0;
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} is not positively oriented (area {area:e})"
                )));
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *directed.entry((a, b)).or_insert(0) += 1;
                h = h.max(distance(vertices[a], vertices[b]));
            }
        }
        if directed.values().any(|&c| c > 1) {
            return Err(Error::InvalidMesh("an edge is shared by two triangles with the same orientation".into()));
        }
        let mut topological: Vec<(usize, usize)> = directed
            .keys()
            .filter(|(a, b)| !directed.contains_key(&(*b, *a)))
            .copied()
            .collect();
        topological.sort_unstable();

        let mut claimed: Vec<(usize, usize)> = Vec::with_capacity(boundary_edges.len());
        for (e, edge) in boundary_edges.iter().enumerate() {
            let [a, b] = edge.nodes;
            if a >= n || b >= n {
                return Err(Error::InvalidMesh(format!("boundary edge {e} references a missing vertex")));
            }
            if !(edge.sigma[1] > edge.sigma[0]) {
                return Err(Error::InvalidMesh(format!("boundary edge {e} has non-increasing arc length")));
            }
            // D1 is on the left of Γ1 and on the right of Γ0.
            let owned = match edge.tag {
                BoundaryTag::Outer => (a, b),
                BoundaryTag::Inner => (b, a),
            };
            claimed.push(owned);
        }
        let mut sorted_claims = claimed.clone();
        sorted_claims.sort_unstable();
        if sorted_claims.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMesh("boundary edge tagged more than once".into()));
        }
        if sorted_claims != topological {
            return Err(Error::InvalidMesh(
                "tagged boundary edges do not match the triangulation boundary (or have the wrong orientation)".into(),
            ));
        }

        let inner = Self::cycle(&boundary_edges, BoundaryTag::Inner)?;
        let outer = Self::cycle(&boundary_edges, BoundaryTag::Outer)?;
        Ok(Mesh { vertices, triangles, boundary_edges, inner, outer, h })
    }

    fn cycle(edges: &[BoundaryEdge], tag: BoundaryTag) -> Result<BoundaryCycle> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (i, e) in edges.iter().enumerate().filter(|(_, e)| e.tag == tag) {
            if next.insert(e.nodes[0], i).is_some() {
                return Err(Error::InvalidMesh(format!("{tag} boundary branches at node {}", e.nodes[0])));
            }
        }
        if next.is_empty() {
            return Err(Error::InvalidMesh(format!("missing {tag} boundary")));
        }
        // Start from the edge whose arc length begins at the smallest value.
        let start = next
            .values()
            .copied()
            .min_by(|&a, &b| edges[a].sigma[0].total_cmp(&edges[b].sigma[0]))
            .unwrap();
        let mut order = Vec::with_capacity(next.len());
        let mut current = start;
        loop {
            order.push(current);
            let head = edges[current].nodes[1];
            current = *next
                .get(&head)
                .ok_or_else(|| Error::InvalidMesh(format!("{tag} boundary is not closed at node {head}")))?;
            if current == start {
                break;
            }
            if order.len() > next.len() {
                return Err(Error::InvalidMesh(format!("{tag} boundary is not a single cycle")));
            }
        }
        if order.len() != next.len() {
            return Err(Error::InvalidMesh(format!("{tag} boundary has more than one cycle")));
        }
        for w in order.windows(2) {
            let (a, b) = (&edges[w[0]], &edges[w[1]]);
            if (a.sigma[1] - b.sigma[0]).abs() > 1e-12 * a.sigma[1].abs().max(1.0) {
                return Err(Error::InvalidMesh(format!("{tag} arc length is discontinuous")));
            }
        }
        let length = edges[*order.last().unwrap()].sigma[1];
        if edges[start].sigma[0].abs() > 1e-12 * length {
            return Err(Error::InvalidMesh(format!("{tag} arc length must start at 0")));
        }
        Ok(BoundaryCycle {
            tag,
            nodes: order.iter().map(|&e| edges[e].nodes[0]).collect(),
            sigma: order.iter().map(|&e| edges[e].sigma[0]).collect(),
            length,
            edges: order,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn boundary(&self, tag: BoundaryTag) -> &BoundaryCycle {
        match tag {
            BoundaryTag::Inner => &self.inner,
            BoundaryTag::Outer => &self.outer,
        }
    }

    pub fn edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> + '_ {
        self.boundary(tag).edges.iter().map(move |&e| &self.boundary_edges[e])
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Maximum edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Polygonal area |D1|.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| signed_area(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]))
            .sum()
    }

    /// Polygonal length of a boundary cycle.
    pub fn boundary_length(&self, tag: BoundaryTag) -> f64 {
        self.edges_with_tag(tag).map(|e| e.length(&self.vertices)).sum()
    }

    /// Lumped boundary mass: half the adjacent edge lengths at each node of
    /// the cycle, in cycle order.
    pub fn boundary_node_weights(&self, tag: BoundaryTag) -> Vec<f64> {
        let cycle = self.boundary(tag);
        let local: std::collections::HashMap<usize, usize> =
            cycle.nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
        let mut w = vec![0.0; cycle.nodes.len()];
        for &e in &cycle.edges {
            let edge = &self.boundary_edges[e];
            let half = 0.5 * edge.length(&self.vertices);
            for n in edge.nodes {
                w[local[&n]] += half;
            }
        }
        w
    }

    /// Minimum distance between Γ1 and Γ0 vertices.
    pub fn separation(&self) -> f64 {
        let mut inner: Vec<[f64; 2]> = self.inner.nodes.iter().map(|&i| self.vertices[i]).collect();
        inner.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut best = f64::INFINITY;
        for &o in &self.outer.nodes {
            let p = self.vertices[o];
            let start = inner.partition_point(|q| q[0] < p[0]);
            // Sweep outward in x from the insertion point, pruning once the
            // x-gap alone exceeds the best distance found.
            for q in inner[start..].iter() {
                if q[0] - p[0] >= best {
                    break;
                }
                best = best.min(distance(p, *q));
            }
            for q in inner[..start].iter().rev() {
                if p[0] - q[0] >= best {
                    break;
                }
                best = best.min(distance(p, *q));
            }
        }
        best
    }
}
