use std::collections::HashMap;
use std::f64::consts::TAU;

use super::curve::Curve;
use super::mesh::{signed_area, BoundaryEdge, BoundaryTag, Mesh};
use crate::error::{Error, Result};

const SEPARATION_SAMPLES: usize = 2048;
const RING_SAMPLES: usize = 2048;
const MIN_INNER_EDGES: usize = 8;
const INITIAL_SPACING: f64 = 0.7;

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Sampled distance between the two curves; also checks containment.
fn curve_separation(outer: &Curve, inner: &Curve) -> Result<f64> {
    let angles: Vec<f64> =
        (0..SEPARATION_SAMPLES).map(|i| TAU * i as f64 / SEPARATION_SAMPLES as f64).collect();
    let inner_pts: Vec<[f64; 2]> = angles.iter().map(|&t| inner.point(t)).collect();
    let outer_pts: Vec<[f64; 2]> = angles.iter().map(|&t| outer.point(t)).collect();
    if inner_pts.iter().any(|&p| !outer.contains(p)) || outer_pts.iter().any(|&p| inner.contains(p)) {
        return Err(Error::InvalidMesh("inner curve is not strictly inside the outer curve".into()));
    }
    let mut d = f64::INFINITY;
    for &p in &outer_pts {
        for &q in &inner_pts {
            d = d.min(distance(p, q));
        }
    }
    if !(d > 0.0) {
        return Err(Error::InvalidMesh("curves touch (separation is zero)".into()));
    }
    Ok(d)
}

/// Minimum distance between the curves, estimated by dense sampling.
pub fn curve_distance(outer: &Curve, inner: &Curve) -> Result<f64> {
    curve_separation(outer, inner)
}

struct Ring {
    angles: Vec<f64>,
    first: usize,
}

fn blended(outer: &Curve, inner: &Curve, rho: f64, theta: f64) -> [f64; 2] {
    let a = inner.point(theta);
    let b = outer.point(theta);
    [a[0] + rho * (b[0] - a[0]), a[1] + rho * (b[1] - a[1])]
}

/// Angles of `n` points evenly spaced in arc length along an interior ring.
fn interior_ring_angles(outer: &Curve, inner: &Curve, rho: f64, n: usize) -> (Vec<f64>, f64) {
    let mut cumulative = Vec::with_capacity(RING_SAMPLES + 1);
    cumulative.push(0.0);
    let mut prev = blended(outer, inner, rho, 0.0);
    for i in 1..=RING_SAMPLES {
        let p = blended(outer, inner, rho, TAU * i as f64 / RING_SAMPLES as f64);
        cumulative.push(cumulative[i - 1] + distance(prev, p));
        prev = p;
    }
    let total = cumulative[RING_SAMPLES];
    let angles = (0..n)
        .map(|j| {
            let target = total * j as f64 / n as f64;
            let k = cumulative.partition_point(|&c| c <= target).clamp(1, RING_SAMPLES);
            let frac = (target - cumulative[k - 1]) / (cumulative[k] - cumulative[k - 1]);
            TAU * ((k - 1) as f64 + frac) / RING_SAMPLES as f64
        })
        .collect();
    (angles, total)
}

fn boundary_ring_angles(curve: &Curve, n: usize) -> Vec<f64> {
    (0..n).map(|j| curve.angle_at_arc_length(curve.length() * j as f64 / n as f64)).collect()
}

/// Triangulates the band between two rings by merging their nodes in angle.
fn zip_rings(a: &Ring, b: &Ring, triangles: &mut Vec<[usize; 3]>) {
    let (na, nb) = (a.angles.len(), b.angles.len());
    let next_angle = |r: &Ring, i: usize| if i + 1 < r.angles.len() { r.angles[i + 1] } else { TAU };
    let (mut p, mut q) = (0, 0);
    while p < na || q < nb {
        let advance_a = if p == na {
            false
        } else if q == nb {
            true
        } else {
            next_angle(a, p) < next_angle(b, q)
        };
        let ap = a.first + p % na;
        let bq = b.first + q % nb;
        if advance_a {
            triangles.push([ap, bq, a.first + (p + 1) % na]);
            p += 1;
        } else {
            triangles.push([ap, bq, b.first + (q + 1) % nb]);
            q += 1;
        }
    }
}

fn in_circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    let scale = (adx * adx + ady * ady) * (bdx * bdx + bdy * bdy).sqrt() * (cdx * cdx + cdy * cdy).sqrt();
    det > 1e-12 * scale
}

/// Lawson edge flips toward a Delaunay triangulation; boundary edges are
/// never touched.
fn delaunay_flips(vertices: &[[f64; 2]], triangles: &mut [[usize; 3]]) {
    for _pass in 0..200 {
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                owner.insert((tri[k], tri[(k + 1) % 3]), (t, k));
            }
        }
        let mut keys: Vec<(usize, usize)> = owner.keys().copied().filter(|(a, b)| a < b).collect();
        keys.sort_unstable();
        let mut touched = vec![false; triangles.len()];
        let mut flips = 0;
        for (a, b) in keys {
            let (Some(&(t1, k1)), Some(&(t2, k2))) = (owner.get(&(a, b)), owner.get(&(b, a))) else {
                continue;
            };
            if touched[t1] || touched[t2] {
                continue;
            }
            let c = triangles[t1][(k1 + 2) % 3];
            let d = triangles[t2][(k2 + 2) % 3];
            let (pa, pb, pc, pd) = (vertices[a], vertices[b], vertices[c], vertices[d]);
            if !in_circumcircle(pa, pb, pc, pd) {
                continue;
            }
            // Flip a-b to c-d only when both new triangles stay positive.
            if signed_area(pa, pd, pc) <= 0.0 || signed_area(pd, pb, pc) <= 0.0 {
                continue;
            }
            triangles[t1] = [a, d, c];
            triangles[t2] = [d, b, c];
            touched[t1] = true;
            touched[t2] = true;
            flips += 1;
        }
        if flips == 0 {
            return;
        }
    }
}

fn build_with_spacing(outer: &Curve, inner: &Curve, spacing: f64, max_gap: f64) -> Result<Mesh> {
    let layers = ((max_gap / spacing).ceil() as usize).max(1);
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut rings: Vec<Ring> = Vec::with_capacity(layers + 1);
    for k in 0..=layers {
        let rho = k as f64 / layers as f64;
        let first = vertices.len();
        let angles = if k == 0 || k == layers {
            let curve = if k == 0 { inner } else { outer };
            let n = ((curve.length() / spacing).ceil() as usize).max(MIN_INNER_EDGES);
            let angles = boundary_ring_angles(curve, n);
            vertices.extend(angles.iter().map(|&t| curve.point(t)));
            angles
        } else {
            let (_, perimeter) = interior_ring_angles(outer, inner, rho, 1);
            let n = ((perimeter / spacing).ceil() as usize).max(3);
            let (angles, _) = interior_ring_angles(outer, inner, rho, n);
            for &t in &angles {
                let p = blended(outer, inner, rho, t);
                if inner.contains(p) || !outer.contains(p) {
                    return Err(Error::InvalidMesh(
                        "polar-mapped ring leaves the annulus; geometry is not suited to the structured mesher".into(),
                    ));
                }
                vertices.push(p);
            }
            angles
        };
        rings.push(Ring { angles, first });
    }

    let mut triangles = Vec::new();
    for w in rings.windows(2) {
        zip_rings(&w[0], &w[1], &mut triangles);
    }
    if triangles
        .iter()
        .any(|t| signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= 0.0)
    {
        return Err(Error::InvalidMesh("polar mapping produced inverted triangles".into()));
    }
    delaunay_flips(&vertices, &mut triangles);

    let mut edges = Vec::new();
    for (ring, curve, tag) in [
        (&rings[0], inner, BoundaryTag::Inner),
        (&rings[layers], outer, BoundaryTag::Outer),
    ] {
        let n = ring.angles.len();
        let ell = curve.length();
        for j in 0..n {
            edges.push(BoundaryEdge {
                tag,
                nodes: [ring.first + j, ring.first + (j + 1) % n],
                sigma: [ell * j as f64 / n as f64, ell * (j + 1) as f64 / n as f64],
            });
        }
    }
    Mesh::from_parts(vertices, triangles, edges)
}

/// Structured polar-mapped triangulation of the region between `inner` and
/// `outer` with maximum edge length at most `h`.
pub fn build_annulus_mesh(outer: &Curve, inner: &Curve, h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("target edge length must be positive, got {h}")));
    }
    curve_separation(outer, inner)?;
    if ((inner.length() / (INITIAL_SPACING * h)).ceil() as usize) < MIN_INNER_EDGES {
        return Err(Error::InvalidMesh(format!(
            "h = {h} is too coarse to resolve the inner curve (fewer than {MIN_INNER_EDGES} edges)"
        )));
    }
    let max_gap = (0..SEPARATION_SAMPLES)
        .map(|i| {
            let t = TAU * i as f64 / SEPARATION_SAMPLES as f64;
            distance(inner.point(t), outer.point(t))
        })
        .fold(0.0, f64::max);

    let mut spacing = INITIAL_SPACING * h;
    for _ in 0..12 {
        let mesh = build_with_spacing(outer, inner, spacing, max_gap)?;
        if mesh.h() <= h {
            return Ok(mesh);
        }
        spacing *= 0.9;
    }
    Err(Error::InvalidMesh(format!("could not reach maximum edge length {h}")))
}
