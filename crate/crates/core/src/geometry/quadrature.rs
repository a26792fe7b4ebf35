use std::f64::consts::PI;

use super::{det2, from_fractional, gauss_legendre, AmbientGeometry, BasisSpec, Point};
use crate::error::{Error, Result};

/// Tensor quadrature on a host chart. Weights carry the volume form, so
/// `sum_q w_q f(x_q)` approximates `integral_S f dvol`.
///
/// Node `q = i * resolution.1 + j` pairs the i-th node of the first chart
/// coordinate with the j-th node of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    geometry: AmbientGeometry,
    resolution: (usize, usize),
    nodes: Vec<Point>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn geometry(&self) -> &AmbientGeometry {
        &self.geometry
    }

    pub fn resolution(&self) -> (usize, usize) {
        self.resolution
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_q w_q f(x_q)`.
    pub fn integrate(&self, mut f: impl FnMut(Point) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Builds a tensor grid: midpoint rule on rectangles and in torus fractional
/// coordinates; Gauss-Legendre in `cos theta` times the periodic trapezoid
/// rule in `phi` on the sphere, its nodes offset by half a step so that
/// patch edges at multiples of the step fall between nodes.
pub fn quadrature(geometry: &AmbientGeometry, resolution: (usize, usize)) -> Result<QuadratureGrid> {
    geometry.validate()?;
    let (n1, n2) = resolution;
    if n1 < 2 || n2 < 2 {
        return Err(Error::DegenerateResolution(n1, n2));
    }
    let mut nodes = Vec::with_capacity(n1 * n2);
    let mut weights = Vec::with_capacity(n1 * n2);
    match *geometry {
        AmbientGeometry::Rectangle { a1, a2 } => {
            let (h1, h2) = (a1 / n1 as f64, a2 / n2 as f64);
            for i in 0..n1 {
                for j in 0..n2 {
                    nodes.push([(i as f64 + 0.5) * h1, (j as f64 + 0.5) * h2]);
                    weights.push(h1 * h2);
                }
            }
        }
        AmbientGeometry::UnitSphere => {
            let (x, w) = gauss_legendre(n1);
            let dphi = 2.0 * PI / n2 as f64;
            // theta ascending means cos theta descending
            for i in (0..n1).rev() {
                let theta = x[i].clamp(-1.0, 1.0).acos();
                for j in 0..n2 {
                    nodes.push([theta, (j as f64 + 0.5) * dphi]);
                    weights.push(w[i] * dphi);
                }
            }
        }
        AmbientGeometry::FlatTorus { lattice } => {
            let cell = det2(lattice).abs() / (n1 * n2) as f64;
            for i in 0..n1 {
                for j in 0..n2 {
                    let f = [(i as f64 + 0.5) / n1 as f64, (j as f64 + 0.5) / n2 as f64];
                    nodes.push(from_fractional(lattice, f));
                    weights.push(cell);
                }
            }
        }
    }
    Ok(QuadratureGrid { geometry: geometry.clone(), resolution, nodes, weights })
}

/// Nodes per half-wavelength used by [`default_resolution`].
pub const DEFAULT_NODES_PER_HALF_WAVE: f64 = 6.0;

/// [`resolution_for`] at [`DEFAULT_NODES_PER_HALF_WAVE`].
pub fn default_resolution(spec: &BasisSpec) -> (usize, usize) {
    resolution_for(spec, DEFAULT_NODES_PER_HALF_WAVE)
}

/// Resolution giving `density` nodes per half-wavelength of the highest
/// retained mode in each chart coordinate, with a floor of 16 and rounded up
/// to an even count.
pub fn resolution_for(spec: &BasisSpec, density: f64) -> (usize, usize) {
    let (e1, e2) = spec.max_mode();
    let even = |half_waves: usize| ((density * half_waves as f64).ceil() as usize).max(16).next_multiple_of(2);
    match spec.geometry() {
        AmbientGeometry::Rectangle { .. } => (even(e1), even(e2)),
        // theta: lmax half-waves over [0, pi]; phi: 2 lmax half-waves over [0, 2 pi)
        AmbientGeometry::UnitSphere => (even(e1 + 1), even(2 * (e2 + 1))),
        // cos(2 pi k f) has 2k half-waves over the unit fractional period
        AmbientGeometry::FlatTorus { .. } => (even(2 * e1), even(2 * e2)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{basis_eval, enumerate_basis, BasisIndex, Parity};

    #[test]
    fn sphere_weights_sum_to_four_pi() {
        let g = quadrature(&AmbientGeometry::UnitSphere, (32, 64)).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 4.0 * PI).abs() < 1e-10 * 4.0 * PI);
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert!(g.nodes().windows(2).all(|p| p[0][0] <= p[1][0]));
    }

    #[test]
    fn weights_sum_to_volume() {
        for geom in [
            AmbientGeometry::rectangle(2.0, 0.5).unwrap(),
            AmbientGeometry::flat_torus([[1.0, 0.0], [0.5, 2.0]]).unwrap(),
        ] {
            let g = quadrature(&geom, (7, 9)).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - geom.volume()).abs() < 1e-10 * geom.volume());
        }
    }

    #[test]
    fn rectangle_mode_normalization() {
        let geom = AmbientGeometry::rectangle(2.0, 2.0).unwrap();
        let spec = enumerate_basis(&geom, 1).unwrap();
        let g = quadrature(&geom, (100, 100)).unwrap();
        let norm = g.integrate(|p| basis_eval(&spec, 0, p).unwrap().powi(2));
        assert!((norm - 1.0).abs() < 1e-4);
    }

    #[test]
    fn torus_cos_and_sin_modes_are_orthogonal() {
        let geom = AmbientGeometry::unit_torus();
        let spec = crate::geometry::BasisSpec::from_indices(
            geom.clone(),
            vec![
                BasisIndex::Torus { k1: 1, k2: 0, parity: Parity::Cosine },
                BasisIndex::Torus { k1: 1, k2: 0, parity: Parity::Sine },
            ],
        )
        .unwrap();
        let g = quadrature(&geom, (64, 64)).unwrap();
        let ip = g.integrate(|p| basis_eval(&spec, 0, p).unwrap() * basis_eval(&spec, 1, p).unwrap());
        assert!(ip.abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_resolution() {
        assert_eq!(quadrature(&AmbientGeometry::UnitSphere, (1, 8)), Err(Error::DegenerateResolution(1, 8)));
    }
}
