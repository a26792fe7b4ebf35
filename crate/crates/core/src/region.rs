//! Domains `Omega` inside a host space, described as a boolean shape tree.
//!
//! Boundary convention: half-planes, disks, polygons and caps are closed;
//! axis boxes and spherical patches contain their lower bounds and exclude
//! their upper bounds. Quadrature nodes almost never land on a boundary, so
//! the convention only pins down determinism.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, AmbientGeometry, ChartKind, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    /// The whole host space.
    Full,
    /// `{ p : normal . p >= offset }`.
    HalfPlane {
        normal: [f64; 2],
        offset: f64,
    },
    /// Closed disk.
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    /// `[min0, max0) x [min1, max1)`.
    AxisBox {
        min: [f64; 2],
        max: [f64; 2],
    },
    /// Closed convex polygon; either orientation.
    ConvexPolygon {
        vertices: Vec<[f64; 2]>,
    },
    /// Points within geodesic distance `radius` of the direction `center`.
    SphericalCap {
        center: [f64; 3],
        radius: f64,
    },
    /// `theta in [theta0, theta1)`, `phi in [phi0, phi1)` modulo `2 pi`
    /// (lunes, octants).
    SphericalPatch {
        theta: [f64; 2],
        phi: [f64; 2],
    },
    /// A planar shape repeated over every cell of the lattice.
    TorusHole {
        lattice: [[f64; 2]; 2],
        shape: Box<Region>,
    },
    Union {
        parts: Vec<Region>,
    },
    Intersection {
        parts: Vec<Region>,
    },
    Complement {
        inner: Box<Region>,
    },
}

impl Region {
    pub fn complement(self) -> Region {
        Region::Complement { inner: Box::new(self) }
    }

    pub fn union(parts: Vec<Region>) -> Region {
        Region::Union { parts }
    }

    pub fn intersection(parts: Vec<Region>) -> Region {
        Region::Intersection { parts }
    }

    /// Membership test. Total and deterministic on the chart.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Full => true,
            Region::HalfPlane { normal, offset } => normal[0] * p[0] + normal[1] * p[1] >= *offset,
            Region::Disk { center, radius } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                dx * dx + dy * dy <= radius * radius
            }
            Region::AxisBox { min, max } => min[0] <= p[0] && p[0] < max[0] && min[1] <= p[1] && p[1] < max[1],
            Region::ConvexPolygon { vertices } => polygon_contains(vertices, p),
            Region::SphericalCap { center, radius } => {
                let u = geometry::sphere_to_cartesian(p);
                let norm = (center[0] * center[0] + center[1] * center[1] + center[2] * center[2]).sqrt();
                let dot = (u[0] * center[0] + u[1] * center[1] + u[2] * center[2]) / norm;
                dot >= radius.cos()
            }
            Region::SphericalPatch { theta, phi } => {
                let dphi = (p[1] - phi[0]).rem_euclid(2.0 * PI);
                theta[0] <= p[0] && p[0] < theta[1] && dphi < phi[1] - phi[0]
            }
            Region::TorusHole { lattice, shape } => {
                let f = geometry::to_fractional(*lattice, p);
                let base = [f[0] - f[0].floor(), f[1] - f[1].floor()];
                (-1..=1).any(|i| {
                    (-1..=1).any(|j| {
                        let q = geometry::from_fractional(*lattice, [base[0] + i as f64, base[1] + j as f64]);
                        shape.contains(q)
                    })
                })
            }
            Region::Union { parts } => parts.iter().any(|r| r.contains(p)),
            Region::Intersection { parts } => parts.iter().all(|r| r.contains(p)),
            Region::Complement { inner } => !inner.contains(p),
        }
    }

    /// Chart family the primitives live in; `None` if no primitive pins it.
    pub fn chart_kind(&self) -> Result<Option<ChartKind>> {
        match self {
            Region::Full => Ok(None),
            Region::HalfPlane { .. }
            | Region::Disk { .. }
            | Region::AxisBox { .. }
            | Region::ConvexPolygon { .. }
            | Region::TorusHole { .. } => Ok(Some(ChartKind::Planar)),
            Region::SphericalCap { .. } | Region::SphericalPatch { .. } => Ok(Some(ChartKind::Spherical)),
            Region::Complement { inner } => inner.chart_kind(),
            Region::Union { parts } | Region::Intersection { parts } => {
                let mut kind = None;
                for p in parts {
                    match (kind, p.chart_kind()?) {
                        (_, None) => {}
                        (None, k) => kind = k,
                        (Some(a), Some(b)) if a != b => {
                            return Err(Error::InvalidRegion("mixes planar and spherical primitives".into()))
                        }
                        _ => {}
                    }
                }
                Ok(kind)
            }
        }
    }

    /// Checks primitive parameters.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRegion(m));
        match self {
            Region::Full => {}
            Region::HalfPlane { normal, offset } => {
                if !(normal[0].is_finite() && normal[1].is_finite() && offset.is_finite())
                    || normal[0] == 0.0 && normal[1] == 0.0
                {
                    return bad("half-plane normal must be nonzero and finite".into());
                }
            }
            Region::Disk { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite())) {
                    return bad(format!("disk radius must be positive, got {radius}"));
                }
            }
            Region::AxisBox { min, max } => {
                if !(min[0] < max[0] && min[1] < max[1]) {
                    return bad(format!("box bounds {min:?} .. {max:?} are empty"));
                }
            }
            Region::ConvexPolygon { vertices } => validate_polygon(vertices)?,
            Region::SphericalCap { center, radius } => {
                let n = (center[0] * center[0] + center[1] * center[1] + center[2] * center[2]).sqrt();
                if !(n > 0.0 && n.is_finite()) {
                    return bad("cap center must be a nonzero direction".into());
                }
                if !(*radius > 0.0 && *radius < PI) {
                    return bad(format!("cap radius must lie in (0, pi), got {radius}"));
                }
            }
            Region::SphericalPatch { theta, phi } => {
                if !(0.0 <= theta[0] && theta[0] < theta[1] && theta[1] <= PI) {
                    return bad(format!("patch theta range {theta:?} invalid"));
                }
                if !(phi[0] < phi[1] && phi[1] - phi[0] <= 2.0 * PI) {
                    return bad(format!("patch phi range {phi:?} invalid"));
                }
            }
            Region::TorusHole { lattice, shape } => {
                AmbientGeometry::flat_torus(*lattice)?;
                if !matches!(**shape, Region::Disk { .. } | Region::ConvexPolygon { .. } | Region::AxisBox { .. }) {
                    return bad("torus hole shape must be a disk, box or convex polygon".into());
                }
                shape.validate()?;
            }
            Region::Union { parts } | Region::Intersection { parts } => {
                if parts.is_empty() {
                    return bad("set combinator needs at least one part".into());
                }
                for p in parts {
                    p.validate()?;
                }
            }
            Region::Complement { inner } => inner.validate()?,
        }
        self.chart_kind()?;
        Ok(())
    }

    /// Validates the region and checks it can live in `geometry`.
    pub fn check_compatible(&self, geometry: &AmbientGeometry) -> Result<()> {
        self.validate()?;
        if let Some(kind) = self.chart_kind()? {
            if kind != geometry.chart_kind() {
                return Err(Error::InvalidRegion(format!(
                    "region primitives do not match the {} chart",
                    geometry.tag()
                )));
            }
        }
        self.check_lattices(geometry)
    }

    fn check_lattices(&self, geometry: &AmbientGeometry) -> Result<()> {
        match self {
            Region::TorusHole { lattice, .. } => match geometry {
                AmbientGeometry::FlatTorus { lattice: b } if b == lattice => Ok(()),
                _ => {
                    Err(Error::InvalidRegion(format!("torus hole lattice does not match the {} host", geometry.tag())))
                }
            },
            Region::Union { parts } | Region::Intersection { parts } => {
                parts.iter().try_for_each(|p| p.check_lattices(geometry))
            }
            Region::Complement { inner } => inner.check_lattices(geometry),
            _ => Ok(()),
        }
    }
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        * 0.5
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn polygon_contains(v: &[[f64; 2]], p: Point) -> bool {
    let s = signed_area(v).signum();
    let n = v.len();
    (0..n).all(|i| s * cross(v[i], v[(i + 1) % n], p) >= 0.0)
}

fn validate_polygon(v: &[[f64; 2]]) -> Result<()> {
    if v.len() < 3 {
        return Err(Error::InvalidRegion("polygon needs at least 3 vertices".into()));
    }
    let area = signed_area(v);
    let scale = v.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    if area.abs() <= 1e-12 * scale * scale {
        return Err(Error::InvalidRegion("polygon vertices are collinear".into()));
    }
    let n = v.len();
    let s = area.signum();
    if (0..n).any(|i| s * cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) < 0.0) {
        return Err(Error::InvalidRegion("polygon is not convex".into()));
    }
    Ok(())
}

/// Potential profile `chi_{S \ Omega}`: 1 outside the domain, 0 inside.
pub fn complement_indicator(region: &Region, p: Point) -> f64 {
    if region.contains(p) {
        0.0
    } else {
        1.0
    }
}

/// Monte-Carlo estimate of `|Omega|` with uniform samples on the host.
pub fn area_estimate(geometry: &AmbientGeometry, region: &Region, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| {
            let p = match *geometry {
                AmbientGeometry::Rectangle { a1, a2 } => [rng.random::<f64>() * a1, rng.random::<f64>() * a2],
                AmbientGeometry::UnitSphere => {
                    let z: f64 = rng.random_range(-1.0..1.0);
                    [z.acos(), rng.random::<f64>() * 2.0 * PI]
                }
                AmbientGeometry::FlatTorus { lattice } => {
                    geometry::from_fractional(lattice, [rng.random(), rng.random()])
                }
            };
            region.contains(p)
        })
        .count();
    geometry.volume() * hits as f64 / samples as f64
}

/// Tunable sizes for the catalog domains whose hole geometry is not pinned
/// by any closed-form reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogOptions {
    /// Side length of the equilateral triangle.
    pub triangle_side: f64,
    /// Sinai scatterer radius, full table being the square of side 2.
    pub sinai_radius: f64,
    /// Angular radius of the cap removed from the spherical octant.
    pub octant_hole_radius: f64,
    /// Radius of the disk removed from each torus cell.
    pub torus_hole_radius: f64,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        CatalogOptions { triangle_side: 1.0, sinai_radius: 0.5, octant_hole_radius: 0.3, torus_hole_radius: 0.25 }
    }
}

/// A named domain together with the host it is meant to be embedded in.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDomain {
    pub name: &'static str,
    pub geometry: AmbientGeometry,
    pub region: Region,
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Great-circle half-space `{ u : n . u >= 0 }`.
fn hemisphere_towards(n: [f64; 3]) -> Region {
    Region::SphericalCap { center: n, radius: FRAC_PI_2 }
}

fn octant() -> Region {
    Region::SphericalPatch { theta: [0.0, FRAC_PI_2], phi: [0.0, FRAC_PI_2] }
}

/// The catalog with default sizes.
pub fn builtin_domains() -> Vec<NamedDomain> {
    builtin_domains_with(&CatalogOptions::default())
}

pub fn builtin_domains_with(opts: &CatalogOptions) -> Vec<NamedDomain> {
    let rect = |a1, a2| AmbientGeometry::Rectangle { a1, a2 };
    let a = opts.triangle_side;
    let h = a * 3f64.sqrt() / 2.0;
    let c = 1.0 / 3f64.sqrt();
    let octant_hole = Region::SphericalCap { center: [c, c, c], radius: opts.octant_hole_radius };
    let unit = [[1.0, 0.0], [0.0, 1.0]];
    vec![
        NamedDomain {
            name: "l_shape",
            geometry: rect(2.0, 2.0),
            region: Region::AxisBox { min: [1.0, 1.0], max: [2.0, 2.0] }.complement(),
        },
        NamedDomain {
            name: "equilateral_triangle",
            geometry: rect(a, h),
            region: Region::ConvexPolygon { vertices: vec![[0.0, 0.0], [a, 0.0], [a / 2.0, h]] },
        },
        NamedDomain {
            // one eighth of the Sinai table (-1,1)^2 minus a centered disk,
            // cut along y = 0 and y = x
            name: "desymmetrized_sinai",
            geometry: rect(1.0, 1.0),
            region: Region::intersection(vec![
                Region::HalfPlane { normal: [1.0, -1.0], offset: 0.0 },
                Region::Disk { center: [0.0, 0.0], radius: opts.sinai_radius }.complement(),
            ]),
        },
        NamedDomain {
            name: "half_square",
            geometry: rect(1.0, 1.0),
            region: Region::HalfPlane { normal: [1.0, -1.0], offset: 0.0 },
        },
        NamedDomain {
            // (0,1) x (0,1) inside (0,2) x (0,1); separable analog of the
            // relaxed interval problem
            name: "interval_analog",
            geometry: rect(2.0, 1.0),
            region: Region::AxisBox { min: [0.0, 0.0], max: [1.0, 1.0] },
        },
        NamedDomain {
            name: "hemisphere",
            geometry: AmbientGeometry::UnitSphere,
            region: hemisphere_towards([0.0, 0.0, 1.0]),
        },
        NamedDomain { name: "spherical_octant", geometry: AmbientGeometry::UnitSphere, region: octant() },
        NamedDomain {
            // cube face z >= |x|, z >= |y| projected onto the sphere
            name: "spherical_square",
            geometry: AmbientGeometry::UnitSphere,
            region: Region::intersection(vec![
                hemisphere_towards([-SQRT_HALF, 0.0, SQRT_HALF]),
                hemisphere_towards([SQRT_HALF, 0.0, SQRT_HALF]),
                hemisphere_towards([0.0, -SQRT_HALF, SQRT_HALF]),
                hemisphere_towards([0.0, SQRT_HALF, SQRT_HALF]),
            ]),
        },
        NamedDomain {
            name: "octant_with_hole",
            geometry: AmbientGeometry::UnitSphere,
            region: Region::intersection(vec![octant(), octant_hole.clone().complement()]),
        },
        NamedDomain {
            // sector x >= y >= z of the octant
            name: "desymmetrized_octant_with_hole",
            geometry: AmbientGeometry::UnitSphere,
            region: Region::intersection(vec![
                octant(),
                octant_hole.complement(),
                hemisphere_towards([SQRT_HALF, -SQRT_HALF, 0.0]),
                hemisphere_towards([0.0, SQRT_HALF, -SQRT_HALF]),
            ]),
        },
        NamedDomain {
            name: "torus_with_hole",
            geometry: AmbientGeometry::FlatTorus { lattice: unit },
            region: Region::TorusHole {
                lattice: unit,
                shape: Box::new(Region::Disk { center: [0.5, 0.5], radius: opts.torus_hole_radius }),
            }
            .complement(),
        },
        NamedDomain {
            name: "torus_asymmetric_holes",
            geometry: AmbientGeometry::FlatTorus { lattice: unit },
            region: Region::union(vec![
                Region::TorusHole {
                    lattice: unit,
                    shape: Box::new(Region::Disk { center: [0.3, 0.3], radius: 0.72 * opts.torus_hole_radius }),
                },
                Region::TorusHole {
                    lattice: unit,
                    shape: Box::new(Region::ConvexPolygon { vertices: vec![[0.55, 0.6], [0.88, 0.66], [0.64, 0.93]] }),
                },
            ])
            .complement(),
        },
    ]
}

/// Looks up a catalog domain by name.
pub fn builtin_domain(name: &str, opts: &CatalogOptions) -> Option<NamedDomain> {
    builtin_domains_with(opts).into_iter().find(|d| d.name == name)
}
