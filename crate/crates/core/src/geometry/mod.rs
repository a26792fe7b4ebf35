//! Host spaces with analytically known Laplace-Beltrami eigenbases.
//!
//! Three solvable hosts are supported: an axis-aligned rectangle with
//! Dirichlet sine modes, the unit sphere with real spherical harmonics and a
//! two-dimensional flat torus with real plane waves over its dual lattice.
//!
//! Chart conventions: rectangle points are `(x1, x2)` in `[0, a1] x [0, a2]`;
//! sphere points are `(theta, phi)` with colatitude `theta` in `[0, pi]` and
//! azimuth `phi` in `[0, 2 pi)`; torus points are Cartesian `x = f B` with
//! fractional coordinates `f` in the unit cell `[0, 1)^2` and lattice vectors
//! given by the rows of `B`.

mod legendre;
mod quadrature;

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use legendre::{gauss_legendre, normalized_legendre_table, tri_index};
pub use quadrature::{default_resolution, quadrature, resolution_for, QuadratureGrid, DEFAULT_NODES_PER_HALF_WAVE};

/// A point in chart coordinates of a host space.
pub type Point = [f64; 2];

const CHART_EPS: f64 = 1e-12;

/// The solvable host space `S` containing the domain of interest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbientGeometry {
    /// `(0, a1) x (0, a2)` with Dirichlet walls.
    Rectangle { a1: f64, a2: f64 },
    /// The unit 2-sphere with the round metric `diag(1, sin^2 theta)`.
    UnitSphere,
    /// `R^2 / Z^2 B`; `lattice[i]` is the i-th lattice vector.
    FlatTorus { lattice: [[f64; 2]; 2] },
}

/// Which family of chart coordinates a geometry (or region) lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Planar,
    Spherical,
}

impl AmbientGeometry {
    pub fn rectangle(a1: f64, a2: f64) -> Result<Self> {
        let g = AmbientGeometry::Rectangle { a1, a2 };
        g.validate()?;
        Ok(g)
    }

    pub fn unit_sphere() -> Self {
        AmbientGeometry::UnitSphere
    }

    pub fn flat_torus(lattice: [[f64; 2]; 2]) -> Result<Self> {
        let g = AmbientGeometry::FlatTorus { lattice };
        g.validate()?;
        Ok(g)
    }

    /// The square torus `R^2 / Z^2`.
    pub fn unit_torus() -> Self {
        AmbientGeometry::FlatTorus { lattice: [[1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AmbientGeometry::Rectangle { a1, a2 } => {
                if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
                    return Err(Error::InvalidGeometry(format!("rectangle sides must be positive, got ({a1}, {a2})")));
                }
            }
            AmbientGeometry::UnitSphere => {}
            AmbientGeometry::FlatTorus { lattice } => {
                let det = det2(lattice);
                let scale = lattice.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                if !det.is_finite() || det.abs() <= 1e-12 * scale * scale || scale == 0.0 {
                    return Err(Error::InvalidGeometry(format!("torus lattice must be invertible, det = {det}")));
                }
            }
        }
        Ok(())
    }

    /// Total measure `|S|`.
    pub fn volume(&self) -> f64 {
        match *self {
            AmbientGeometry::Rectangle { a1, a2 } => a1 * a2,
            AmbientGeometry::UnitSphere => 4.0 * PI,
            AmbientGeometry::FlatTorus { lattice } => det2(lattice).abs(),
        }
    }

    /// Short tag used in file headers and metadata.
    pub fn tag(&self) -> &'static str {
        match self {
            AmbientGeometry::Rectangle { .. } => "rectangle",
            AmbientGeometry::UnitSphere => "sphere",
            AmbientGeometry::FlatTorus { .. } => "torus",
        }
    }

    pub fn chart_kind(&self) -> ChartKind {
        match self {
            AmbientGeometry::UnitSphere => ChartKind::Spherical,
            _ => ChartKind::Planar,
        }
    }

    /// `sqrt(det g)` at a chart point.
    pub fn metric_weight(&self, p: Point) -> f64 {
        match self {
            AmbientGeometry::UnitSphere => p[0].sin(),
            _ => 1.0,
        }
    }

    pub fn in_chart(&self, p: Point) -> bool {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return false;
        }
        match *self {
            AmbientGeometry::Rectangle { a1, a2 } => {
                (-CHART_EPS..=a1 + CHART_EPS).contains(&p[0]) && (-CHART_EPS..=a2 + CHART_EPS).contains(&p[1])
            }
            AmbientGeometry::UnitSphere => {
                (-CHART_EPS..=PI + CHART_EPS).contains(&p[0]) && (-CHART_EPS..2.0 * PI + CHART_EPS).contains(&p[1])
            }
            AmbientGeometry::FlatTorus { lattice } => {
                let f = to_fractional(lattice, p);
                f.iter().all(|v| (-CHART_EPS..1.0 + CHART_EPS).contains(v))
            }
        }
    }

    /// Embeds a chart point in R^3 for output (planar charts get `z = 0`).
    pub fn embed(&self, p: Point) -> [f64; 3] {
        match self {
            AmbientGeometry::UnitSphere => sphere_to_cartesian(p),
            _ => [p[0], p[1], 0.0],
        }
    }
}

impl fmt::Display for AmbientGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientGeometry::Rectangle { a1, a2 } => write!(f, "rectangle({a1}x{a2})"),
            AmbientGeometry::UnitSphere => write!(f, "sphere"),
            AmbientGeometry::FlatTorus { lattice: b } => {
                write!(f, "torus([{}, {}; {}, {}])", b[0][0], b[0][1], b[1][0], b[1][1])
            }
        }
    }
}

pub(crate) fn det2(b: [[f64; 2]; 2]) -> f64 {
    b[0][0] * b[1][1] - b[0][1] * b[1][0]
}

pub(crate) fn inverse2(b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let d = det2(b);
    [[b[1][1] / d, -b[0][1] / d], [-b[1][0] / d, b[0][0] / d]]
}

/// Fractional coordinates `f = x B^{-1}` of a Cartesian point.
pub fn to_fractional(lattice: [[f64; 2]; 2], x: Point) -> Point {
    let inv = inverse2(lattice);
    [x[0] * inv[0][0] + x[1] * inv[1][0], x[0] * inv[0][1] + x[1] * inv[1][1]]
}

/// Cartesian point `x = f B`.
pub fn from_fractional(lattice: [[f64; 2]; 2], f: Point) -> Point {
    [f[0] * lattice[0][0] + f[1] * lattice[1][0], f[0] * lattice[0][1] + f[1] * lattice[1][1]]
}

pub fn sphere_to_cartesian(p: Point) -> [f64; 3] {
    let (st, ct) = p[0].sin_cos();
    let (sp, cp) = p[1].sin_cos();
    [st * cp, st * sp, ct]
}

/// Parity of a real plane wave on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Constant,
    Cosine,
    Sine,
}

/// Label of one basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisIndex {
    /// `sin(pi n1 x1 / a1) sin(pi n2 x2 / a2)`, `n1, n2 >= 1`.
    Rect { n1: u32, n2: u32 },
    /// Real spherical harmonic `Y_{l m}`, `|m| <= l`.
    Sphere { l: u32, m: i32 },
    /// Plane wave over the dual-lattice vector `(k1, k2) B^{-T}`.
    Torus { k1: i32, k2: i32, parity: Parity },
}

impl BasisIndex {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BasisIndex::Rect { n1, n2 } => n1 >= 1 && n2 >= 1,
            BasisIndex::Sphere { l, m } => m.unsigned_abs() <= l,
            BasisIndex::Torus { k1, k2, parity } => match parity {
                Parity::Constant => k1 == 0 && k2 == 0,
                _ => k1 > 0 || (k1 == 0 && k2 > 0),
            },
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid basis index {self:?}")))
        }
    }
}

/// Analytic eigenvalue of a basis label on a geometry.
pub fn analytic_eigenvalue(geometry: &AmbientGeometry, index: &BasisIndex) -> Result<f64> {
    index.validate()?;
    match (geometry, *index) {
        (AmbientGeometry::Rectangle { a1, a2 }, BasisIndex::Rect { n1, n2 }) => {
            let (q1, q2) = (n1 as f64 / a1, n2 as f64 / a2);
            Ok(PI * PI * (q1 * q1 + q2 * q2))
        }
        (AmbientGeometry::UnitSphere, BasisIndex::Sphere { l, .. }) => {
            let l = l as f64;
            Ok(l * (l + 1.0))
        }
        (AmbientGeometry::FlatTorus { lattice }, BasisIndex::Torus { k1, k2, .. }) => {
            Ok(torus_eigenvalue(inverse2(*lattice), k1, k2))
        }
        _ => Err(Error::GeometryMismatch { basis: format!("{index:?}"), grid: geometry.to_string() }),
    }
}

/// `4 pi^2 |k B^{-T}|^2` given `B^{-1}`.
fn torus_eigenvalue(inv: [[f64; 2]; 2], k1: i32, k2: i32) -> f64 {
    // w_j = sum_i k_i (B^{-T})_{ij} = sum_i k_i inv[j][i]
    let (k1, k2) = (k1 as f64, k2 as f64);
    let w0 = k1 * inv[0][0] + k2 * inv[0][1];
    let w1 = k1 * inv[1][0] + k2 * inv[1][1];
    4.0 * PI * PI * (w0 * w0 + w1 * w1)
}

/// A truncated orthonormal eigenbasis of a host space, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    geometry: AmbientGeometry,
    indices: Vec<BasisIndex>,
    eigenvalues: Vec<f64>,
    plan: EvalPlan,
}

/// Table extents needed to evaluate every function of a basis at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EvalPlan {
    // rectangle: max n1, n2; sphere: lmax in .0; torus: max |k1|, |k2|
    ext1: usize,
    ext2: usize,
}

/// The `n` basis functions of smallest analytic eigenvalue.
///
/// Ties are broken lexicographically on the index label: `(n1, n2)` for the
/// rectangle, `(l, m)` for the sphere and `(k1, k2, parity)` for the torus.
pub fn enumerate_basis(geometry: &AmbientGeometry, n: usize) -> Result<BasisSpec> {
    geometry.validate()?;
    if n == 0 {
        return Err(Error::EmptyBasis);
    }
    // Weyl: count(lambda <= L) ~ |S| L / (4 pi)
    let mut cutoff = (4.0 * PI * n as f64 / geometry.volume()).max(1.0) * 1.25;
    let mut cands = loop {
        let c = candidates(geometry, cutoff);
        if c.len() >= n {
            break c;
        }
        cutoff *= 2.0;
    };
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    cands.truncate(n);
    let (eigenvalues, indices): (Vec<f64>, Vec<BasisIndex>) = cands.into_iter().unzip();
    BasisSpec::from_parts(geometry.clone(), indices, eigenvalues)
}

fn candidates(geometry: &AmbientGeometry, cutoff: f64) -> Vec<(f64, BasisIndex)> {
    let mut out = Vec::new();
    match *geometry {
        AmbientGeometry::Rectangle { a1, a2 } => {
            let m1 = (a1 * cutoff.sqrt() / PI).floor() as u32;
            let m2 = (a2 * cutoff.sqrt() / PI).floor() as u32;
            for n1 in 1..=m1 {
                for n2 in 1..=m2 {
                    let idx = BasisIndex::Rect { n1, n2 };
                    let lam = analytic_eigenvalue(geometry, &idx).expect("valid rect index");
                    if lam <= cutoff {
                        out.push((lam, idx));
                    }
                }
            }
        }
        AmbientGeometry::UnitSphere => {
            let mut l = 0u32;
            while (l as f64) * (l as f64 + 1.0) <= cutoff {
                for m in -(l as i32)..=(l as i32) {
                    out.push(((l * (l + 1)) as f64, BasisIndex::Sphere { l, m }));
                }
                l += 1;
            }
        }
        AmbientGeometry::FlatTorus { lattice } => {
            let inv = inverse2(lattice);
            // |k_i| <= |w| |row_i(B)|
            let wmax = cutoff.sqrt() / (2.0 * PI);
            let r0 = lattice[0][0].hypot(lattice[0][1]);
            let r1 = lattice[1][0].hypot(lattice[1][1]);
            let k1max = (wmax * r0).ceil() as i32 + 1;
            let k2max = (wmax * r1).ceil() as i32 + 1;
            out.push((0.0, BasisIndex::Torus { k1: 0, k2: 0, parity: Parity::Constant }));
            for k1 in 0..=k1max {
                for k2 in -k2max..=k2max {
                    if !(k1 > 0 || k2 > 0) {
                        continue;
                    }
                    let lam = torus_eigenvalue(inv, k1, k2);
                    if lam <= cutoff {
                        out.push((lam, BasisIndex::Torus { k1, k2, parity: Parity::Cosine }));
                        out.push((lam, BasisIndex::Torus { k1, k2, parity: Parity::Sine }));
                    }
                }
            }
        }
    }
    out
}

impl BasisSpec {
    /// Builds a basis from explicit labels; eigenvalues must be the analytic
    /// ones and ascending.
    pub fn from_indices(geometry: AmbientGeometry, indices: Vec<BasisIndex>) -> Result<Self> {
        geometry.validate()?;
        let eigenvalues = indices.iter().map(|i| analytic_eigenvalue(&geometry, i)).collect::<Result<Vec<_>>>()?;
        Self::from_parts(geometry, indices, eigenvalues)
    }

    fn from_parts(geometry: AmbientGeometry, indices: Vec<BasisIndex>, eigenvalues: Vec<f64>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyBasis);
        }
        if let Some(i) = eigenvalues.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Unsorted(i + 1));
        }
        let mut sorted = indices.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate basis index".into()));
        }
        let mut plan = EvalPlan { ext1: 0, ext2: 0 };
        for idx in &indices {
            match *idx {
                BasisIndex::Rect { n1, n2 } => {
                    plan.ext1 = plan.ext1.max(n1 as usize);
                    plan.ext2 = plan.ext2.max(n2 as usize);
                }
                BasisIndex::Sphere { l, .. } => plan.ext1 = plan.ext1.max(l as usize),
                BasisIndex::Torus { k1, k2, .. } => {
                    plan.ext1 = plan.ext1.max(k1.unsigned_abs() as usize);
                    plan.ext2 = plan.ext2.max(k2.unsigned_abs() as usize);
                }
            }
        }
        Ok(BasisSpec { geometry, indices, eigenvalues, plan })
    }

    pub fn geometry(&self) -> &AmbientGeometry {
        &self.geometry
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[BasisIndex] {
        &self.indices
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Largest mode number per chart coordinate: `(max n1, max n2)` for the
    /// rectangle, `(lmax, lmax)` for the sphere, `(max |k1|, max |k2|)` for
    /// the torus.
    pub fn max_mode(&self) -> (usize, usize) {
        match self.geometry {
            AmbientGeometry::UnitSphere => (self.plan.ext1, self.plan.ext1),
            _ => (self.plan.ext1, self.plan.ext2),
        }
    }

    /// True when the truncation cuts through a degenerate eigenvalue shell,
    /// i.e. the next basis function would share the last eigenvalue.
    pub fn splits_shell(&self) -> bool {
        let last = *self.eigenvalues.last().expect("nonempty basis");
        let more = enumerate_basis(&self.geometry, self.len() + 1).expect("valid basis");
        more.eigenvalues[self.len()] == last
    }

    /// Values of every basis function at `p` (chart is not checked).
    pub(crate) fn fill_values(&self, p: Point, scratch: &mut EvalScratch, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        match self.geometry {
            AmbientGeometry::Rectangle { a1, a2 } => {
                let norm = 2.0 / (a1 * a2).sqrt();
                let (s1, s2) = scratch.split(self.plan.ext1 + 1, self.plan.ext2 + 1);
                for (n, v) in s1.iter_mut().enumerate() {
                    *v = (PI * n as f64 * p[0] / a1).sin();
                }
                for (n, v) in s2.iter_mut().enumerate() {
                    *v = (PI * n as f64 * p[1] / a2).sin();
                }
                for (o, idx) in out.iter_mut().zip(&self.indices) {
                    if let BasisIndex::Rect { n1, n2 } = *idx {
                        *o = norm * s1[n1 as usize] * s2[n2 as usize];
                    }
                }
            }
            AmbientGeometry::UnitSphere => {
                let lmax = self.plan.ext1;
                let (st, ct) = p[0].sin_cos();
                let (tab, trig) = scratch.split(tri_index(lmax, lmax) + 1, 2 * (lmax + 1));
                normalized_legendre_table(lmax, ct, st, tab);
                for m in 0..=lmax {
                    let (s, c) = (m as f64 * p[1]).sin_cos();
                    trig[2 * m] = c;
                    trig[2 * m + 1] = s;
                }
                for (o, idx) in out.iter_mut().zip(&self.indices) {
                    if let BasisIndex::Sphere { l, m } = *idx {
                        let am = m.unsigned_abs() as usize;
                        let plm = tab[tri_index(l as usize, am)];
                        *o = match m.cmp(&0) {
                            Ordering::Equal => plm,
                            Ordering::Greater => cs_sign(am) * std::f64::consts::SQRT_2 * plm * trig[2 * am],
                            Ordering::Less => cs_sign(am) * std::f64::consts::SQRT_2 * plm * trig[2 * am + 1],
                        };
                    }
                }
            }
            AmbientGeometry::FlatTorus { lattice } => {
                let area = det2(lattice).abs();
                let c0 = 1.0 / area.sqrt();
                let c1 = (2.0 / area).sqrt();
                let f = to_fractional(lattice, p);
                let (k1m, k2m) = (self.plan.ext1, self.plan.ext2);
                // e^{2 pi i k1 f1} for k1 in 0..=k1m, e^{2 pi i k2 f2} for k2 in -k2m..=k2m
                let (t1, t2) = scratch.split(2 * (k1m + 1), 2 * (2 * k2m + 1));
                for k in 0..=k1m {
                    let (s, c) = (2.0 * PI * k as f64 * f[0]).sin_cos();
                    t1[2 * k] = c;
                    t1[2 * k + 1] = s;
                }
                for j in 0..=(2 * k2m) {
                    let k = j as f64 - k2m as f64;
                    let (s, c) = (2.0 * PI * k * f[1]).sin_cos();
                    t2[2 * j] = c;
                    t2[2 * j + 1] = s;
                }
                for (o, idx) in out.iter_mut().zip(&self.indices) {
                    if let BasisIndex::Torus { k1, k2, parity } = *idx {
                        let a = 2 * k1 as usize;
                        let b = 2 * (k2 + k2m as i32) as usize;
                        let (c1_, s1_) = (t1[a], t1[a + 1]);
                        let (c2_, s2_) = (t2[b], t2[b + 1]);
                        *o = match parity {
                            Parity::Constant => c0,
                            Parity::Cosine => c1 * (c1_ * c2_ - s1_ * s2_),
                            Parity::Sine => c1 * (s1_ * c2_ + c1_ * s2_),
                        };
                    }
                }
            }
        }
    }

    pub(crate) fn scratch(&self) -> EvalScratch {
        EvalScratch::default()
    }

    /// All basis values at `p`, in index order.
    pub fn values_at(&self, p: Point) -> Result<Vec<f64>> {
        if !self.geometry.in_chart(p) {
            return Err(Error::OutOfChart(p[0], p[1]));
        }
        let mut out = vec![0.0; self.len()];
        self.fill_values(p, &mut self.scratch(), &mut out);
        Ok(out)
    }
}

/// `(-1)^m` prefactor of the real spherical harmonics.
#[inline]
fn cs_sign(m: usize) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Reusable buffers for [`BasisSpec::fill_values`].
#[derive(Debug, Default)]
pub(crate) struct EvalScratch {
    buf: Vec<f64>,
}

impl EvalScratch {
    fn split(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        if self.buf.len() < a + b {
            self.buf.resize(a + b, 0.0);
        }
        let (x, y) = self.buf.split_at_mut(a);
        (x, &mut y[..b])
    }
}

/// Value of the `i`-th basis function at a chart point.
pub fn basis_eval(spec: &BasisSpec, i: usize, p: Point) -> Result<f64> {
    let index = *spec.indices.get(i).ok_or(Error::IndexOutOfRange { index: i, len: spec.len() })?;
    if !spec.geometry.in_chart(p) {
        return Err(Error::OutOfChart(p[0], p[1]));
    }
    let single = BasisSpec {
        geometry: spec.geometry.clone(),
        indices: vec![index],
        eigenvalues: vec![spec.eigenvalues[i]],
        plan: spec.plan,
    };
    let mut out = [0.0];
    single.fill_values(p, &mut EvalScratch::default(), &mut out);
    Ok(out[0])
}

/// Analytic Laplace-Beltrami eigenvalue of the `i`-th basis function.
pub fn basis_eigenvalue(spec: &BasisSpec, i: usize) -> Result<f64> {
    spec.eigenvalues.get(i).copied().ok_or(Error::IndexOutOfRange { index: i, len: spec.len() })
}
