//! Fixed-rule 2D quadrature: composite Gauss–Legendre on squares and
//! polar grids centred on a point.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite GL rule on [a, b] split into equal panels.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            xs.push(lo + 0.5 * h * (xi + 1.0));
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    CartesianTensor { center: Complex64, half_width: f64 },
    PolarCentered { center: Complex64, ring_radii: Vec<f64>, angular: usize },
}

#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub scheme: Scheme,
}

impl QuadratureGrid {
    /// Tensor rule on the square `center + [-h, h]^2`.
    pub fn cartesian(center: Complex64, half_width: f64, panels: usize, order: usize) -> Self {
        let (x, w) = composite_gl(-half_width, half_width, panels, order);
        let mut nodes = Vec::with_capacity(x.len() * x.len());
        let mut weights = Vec::with_capacity(x.len() * x.len());
        for (xi, wi) in x.iter().zip(&w) {
            for (yj, wj) in x.iter().zip(&w) {
                nodes.push(center + Complex64::new(*xi, *yj));
                weights.push(wi * wj);
            }
        }
        QuadratureGrid { nodes, weights, scheme: Scheme::CartesianTensor { center, half_width } }
    }

    /// Square covering the disk of radius `1 + 8/sqrt(b)` with node spacing
    /// about `spacing / sqrt(b)`.
    pub fn cartesian_for_field(b: f64, spacing: f64) -> Self {
        let hw = 1.0 + 8.0 / b.sqrt();
        let order = 10;
        let nodes_per_axis = (2.0 * hw * b.sqrt() / spacing).ceil() as usize;
        let panels = nodes_per_axis.div_ceil(order).max(1);
        Self::cartesian(Complex64::new(0.0, 0.0), hw, panels, order)
    }

    /// Polar rule with explicit ring edges `edges[0] = 0 < edges[1] < ...`;
    /// each ring gets `radial` GL nodes (weight factor r) and `angular`
    /// equally spaced angles, staggered by half a step on alternate rings.
    pub fn polar_rings(center: Complex64, edges: &[f64], radial: usize, angular: usize) -> Self {
        let (x, w) = gauss_legendre(radial);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let dt = 2.0 * PI / angular as f64;
        for (ring, e) in edges.windows(2).enumerate() {
            let (a, b) = (e[0], e[1]);
            let off = if ring % 2 == 1 { 0.5 * dt } else { 0.0 };
            for (xi, wi) in x.iter().zip(&w) {
                let r = a + 0.5 * (b - a) * (xi + 1.0);
                let wr = 0.5 * (b - a) * wi * r * dt;
                for k in 0..angular {
                    let t = off + k as f64 * dt;
                    nodes.push(center + Complex64::from_polar(r, t));
                    weights.push(wr);
                }
            }
        }
        QuadratureGrid {
            nodes,
            weights,
            scheme: Scheme::PolarCentered { center, ring_radii: edges.to_vec(), angular },
        }
    }

    /// Geometric ring spacing from `r_min` to `r_max` (plus the inner disk
    /// `[0, r_min]` as one ring).
    pub fn polar(center: Complex64, r_min: f64, r_max: f64, rings: usize, radial: usize, angular: usize) -> Self {
        let mut edges = vec![0.0];
        let q = (r_max / r_min).powf(1.0 / rings as f64);
        for k in 0..=rings {
            edges.push(r_min * q.powi(k as i32));
        }
        *edges.last_mut().unwrap() = r_max;
        Self::polar_rings(center, &edges, radial, angular)
    }

    /// Geometric rings up to `r_switch`, then uniform rings of width at most
    /// `max_width` out to `r_max`.
    pub fn polar_hybrid(
        center: Complex64,
        r_min: f64,
        r_switch: f64,
        r_max: f64,
        geo_rings: usize,
        max_width: f64,
        radial: usize,
        angular: usize,
    ) -> Self {
        let mut edges = vec![0.0];
        let q = (r_switch / r_min).powf(1.0 / geo_rings as f64);
        for k in 0..geo_rings {
            edges.push(r_min * q.powi(k as i32));
        }
        edges.push(r_switch);
        let m = ((r_max - r_switch) / max_width).ceil().max(1.0) as usize;
        for k in 1..=m {
            edges.push(r_switch + (r_max - r_switch) * k as f64 / m as f64);
        }
        Self::polar_rings(center, &edges, radial, angular)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Σ weight·f(node); evaluation is parallel, the sum is in node order.
pub fn integrate2d<F>(grid: &QuadratureGrid, f: F) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    let vals = par::map(&grid.nodes, |z| f(*z));
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (v, w)) in vals.iter().zip(&grid.weights).enumerate() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            let z = grid.nodes[i];
            return Err(Error::Integration { index: i, re: z.re, im: z.im });
        }
        acc += v * *w;
    }
    Ok(acc)
}

/// Real-valued convenience wrapper around [`integrate2d`].
pub fn integrate2d_real<F>(grid: &QuadratureGrid, f: F) -> Result<f64>
where
    F: Fn(Complex64) -> f64 + Sync + Send,
{
    integrate2d(grid, |z| Complex64::new(f(z), 0.0)).map(|c| c.re)
}
