#![allow(dead_code)]

use lbexp::assembly::{assemble, HamiltonianMatrix};
use lbexp::eigensolve::{eigendecompose, EigenSolution};
use lbexp::geometry::{default_resolution, enumerate_basis, quadrature, AmbientGeometry, QuadratureGrid};
use lbexp::region::{builtin_domain, CatalogOptions, Region};

pub struct Solved {
    pub h: HamiltonianMatrix,
    pub grid: QuadratureGrid,
    pub sol: EigenSolution,
}

pub fn solve(
    geometry: &AmbientGeometry,
    region: &Region,
    n: usize,
    v0: f64,
    res: Option<(usize, usize)>,
    k: usize,
) -> Solved {
    let spec = enumerate_basis(geometry, n).unwrap();
    let grid = quadrature(geometry, res.unwrap_or_else(|| default_resolution(&spec))).unwrap();
    let h = assemble(&spec, region, v0, &grid).unwrap();
    let sol = eigendecompose(&h, k).unwrap();
    Solved { h, grid, sol }
}

pub fn solve_named(name: &str, n: usize, v0: f64, res: Option<(usize, usize)>, k: usize) -> Solved {
    let d = builtin_domain(name, &CatalogOptions::default()).unwrap();
    solve(&d.geometry, &d.region, n, v0, res, k)
}

/// Max entry of `|C^T C - I|`.
pub fn orthonormality_error(sol: &EigenSolution) -> f64 {
    let k = sol.len();
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in 0..=a {
            let d: f64 = sol.coefficients(a).iter().zip(sol.coefficients(b)).map(|(x, y)| x * y).sum();
            let e = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((d - e).abs());
        }
    }
    worst
}

/// Max over modes of `||H c - lambda c||_2 / (|lambda| + ||H||_max)`.
pub fn relative_residual(h: &HamiltonianMatrix, sol: &EigenSolution) -> f64 {
    let n = h.dim();
    let scale = h.max_abs();
    (0..sol.len())
        .map(|j| {
            let c = sol.coefficients(j);
            let lam = sol.eigenvalues()[j];
            let r: f64 = (0..n)
                .map(|i| {
                    let hc: f64 = (0..n).map(|m| h.get(i, m) * c[m]).sum();
                    (hc - lam * c[i]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            r / (lam.abs() + scale)
        })
        .fold(0.0, f64::max)
}

pub fn assert_solution_invariants(s: &Solved) {
    let e = s.sol.eigenvalues();
    assert!(e.windows(2).all(|w| w[0] <= w[1]));
    assert!(s.sol.len() <= s.sol.basis_len());
    let o = orthonormality_error(&s.sol);
    assert!(o < 1e-8, "orthonormality {o}");
    let r = relative_residual(&s.h, &s.sol);
    assert!(r < 1e-8, "residual {r}");
}
