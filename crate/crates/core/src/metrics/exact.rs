//! Exact `P_Σ` for three objects: clip the demand triangle by the capacity
//! region and compare areas.

use serde::Serialize;

use crate::allocation::{node_expansion, Allocation};
use crate::error::{Error, Result};

type Point = [f64; 3];

const VERTEX_TOL: f64 = 1e-12;

/// The capacity region as halfspaces `normal · ρ <= offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactRegionK3 {
    pub halfspaces: Vec<(Point, f64)>,
    pub simplex_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactK3 {
    pub p_sigma: f64,
    /// Vertices of the stable part of the demand triangle, in boundary order.
    pub vertices: Vec<Point>,
    pub region: ExactRegionK3,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn clip(poly: &[Point], normal: Point, offset: f64) -> Vec<Point> {
    let mut out = Vec::new();
    let inside = |p: Point| dot(normal, p) <= offset + VERTEX_TOL;
    for (i, &cur) in poly.iter().enumerate() {
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (cin, pin) = (inside(cur), inside(prev));
        if cin != pin {
            let (fp, fc) = (dot(normal, prev) - offset, dot(normal, cur) - offset);
            let s = fp / (fp - fc);
            out.push([
                prev[0] + s * (cur[0] - prev[0]),
                prev[1] + s * (cur[1] - prev[1]),
                prev[2] + s * (cur[2] - prev[2]),
            ]);
        }
        if cin {
            out.push(cur);
        }
    }
    out
}

fn dedup(poly: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for p in poly {
        let close = |q: &Point| (0..3).all(|i| (p[i] - q[i]).abs() <= 1e-9);
        if !out.iter().any(close) {
            out.push(p);
        }
    }
    out
}

/// Exact `P_Σ` of a three-object, three-node replica allocation.
///
/// The region is `{ρ >= 0 : ρ(S) <= |N(S)| for every object set S}`, which by
/// Hall's theorem is exactly the set of demands servable with unit node
/// capacity.
pub fn exact_p_sigma_k3(alloc: &Allocation, sigma: f64) -> Result<ExactK3> {
    if alloc.k() != 3 || alloc.n() != 3 {
        return Err(Error::unsupported("exact geometry is implemented for k = n = 3"));
    }
    if !alloc.is_replica() {
        return Err(Error::unsupported("exact geometry needs a replica allocation"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let mut halfspaces = Vec::new();
    for mask in 1u8..8 {
        let objects: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
        let normal = [0, 1, 2].map(|i| f64::from(mask >> i & 1));
        halfspaces.push((normal, node_expansion(alloc, &objects)? as f64));
    }
    for i in 0..3 {
        let mut normal = [0.0; 3];
        normal[i] = -1.0;
        halfspaces.push((normal, 0.0));
    }

    let corners = [[sigma, 0.0, 0.0], [0.0, sigma, 0.0], [0.0, 0.0, sigma]];
    let mut poly = corners.to_vec();
    for &(normal, offset) in &halfspaces {
        if poly.is_empty() {
            break;
        }
        poly = clip(&poly, normal, offset);
    }
    let vertices = dedup(poly);
    let area = if vertices.len() < 3 {
        0.0
    } else {
        let mut acc = [0.0; 3];
        for i in 1..vertices.len() - 1 {
            let c = cross(sub(vertices[i], vertices[0]), sub(vertices[i + 1], vertices[0]));
            acc = [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]];
        }
        0.5 * dot(acc, acc).sqrt()
    };
    let simplex_area = 3f64.sqrt() / 2.0 * sigma * sigma;
    Ok(ExactK3 {
        p_sigma: (area / simplex_area).min(1.0),
        vertices,
        region: ExactRegionK3 {
            halfspaces,
            simplex_sigma: sigma,
        },
    })
}
