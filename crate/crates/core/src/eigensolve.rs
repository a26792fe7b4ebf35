//! Dense symmetric eigendecomposition of `H_N` and reconstruction of the
//! eigenmodes `psi_j = sum_n c_nj phi_n` on the host.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use crate::assembly::HamiltonianMatrix;
use crate::error::{Error, Result};
use crate::geometry::{BasisSpec, Point, QuadratureGrid};
use crate::par::{self, Execution};
use crate::region::Region;

/// Number of eigenpairs kept when none is requested.
pub const DEFAULT_MODES: usize = 120;

/// Default mode count `min(N, 120)`.
pub fn default_mode_count(n: usize) -> usize {
    n.min(DEFAULT_MODES)
}

/// The lowest `K` eigenpairs of `H_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    eigenvalues: Vec<f64>,
    // N x K, column-major; column j holds the basis coefficients of mode j
    coefficients: Vec<f64>,
    spec: BasisSpec,
    v0: f64,
}

impl EigenSolution {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn basis_len(&self) -> usize {
        self.spec.len()
    }

    /// Basis coefficients of mode `j`.
    pub fn coefficients(&self, j: usize) -> &[f64] {
        let n = self.basis_len();
        &self.coefficients[j * n..(j + 1) * n]
    }

    pub fn coefficient_matrix(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.coefficients, self.basis_len(), self.len())
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Wraps externally computed eigenpairs (e.g. a unit vector for tests).
    pub fn from_parts(spec: BasisSpec, v0: f64, eigenvalues: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != spec.len() * eigenvalues.len() || eigenvalues.len() > spec.len() {
            return Err(Error::InvalidModeCount { requested: eigenvalues.len(), dim: spec.len() });
        }
        Ok(EigenSolution { eigenvalues, coefficients, spec, v0 })
    }
}

/// Eigenvalues ascending and eigenvectors (column-major `n x k`) of a dense
/// symmetric matrix given column-major. Eigenvector signs are fixed so the
/// first clearly nonzero entry is positive.
pub fn symmetric_eigen(matrix: &[f64], n: usize, k: usize, exec: Execution) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 || k > n {
        return Err(Error::InvalidModeCount { requested: k, dim: n });
    }
    let a = MatRef::from_column_major_slice(matrix, n, n);
    let par = exec.faer_par();
    let mut u = Mat::<f64>::zeros(n, n);
    let mut s = Diag::<f64>::zeros(n);
    let mut mem =
        MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(n, ComputeEigenvectors::Yes, par, Default::default()));
    evd::self_adjoint_evd(a, s.as_mut(), Some(u.as_mut()), par, MemStack::new(&mut mem), Default::default())
        .map_err(|_| Error::NoConvergence { dim: n })?;

    let vals: Vec<f64> = s.column_vector().iter().copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(n * k);
    for &c in order.iter().take(k) {
        eigenvalues.push(vals[c]);
        let col: Vec<f64> = u.col(c).iter().copied().collect();
        let peak = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let first = col.iter().find(|v| v.abs() > 1e-8 * peak).copied().unwrap_or(1.0);
        let sign = if first < 0.0 { -1.0 } else { 1.0 };
        vectors.extend(col.iter().map(|v| sign * v));
    }
    Ok((eigenvalues, vectors))
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize, exec: Execution) -> Result<Vec<f64>> {
    let a = MatRef::from_column_major_slice(matrix, n, n);
    let par = exec.faer_par();
    let mut s = Diag::<f64>::zeros(n);
    let mut mem =
        MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(n, ComputeEigenvectors::No, par, Default::default()));
    evd::self_adjoint_evd(a, s.as_mut(), None, par, MemStack::new(&mut mem), Default::default())
        .map_err(|_| Error::NoConvergence { dim: n })?;
    let mut vals: Vec<f64> = s.column_vector().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Lowest `k` eigenpairs of `H`, ascending.
pub fn eigendecompose(h: &HamiltonianMatrix, k: usize) -> Result<EigenSolution> {
    eigendecompose_with(h, k, Execution::default())
}

pub fn eigendecompose_with(h: &HamiltonianMatrix, k: usize, exec: Execution) -> Result<EigenSolution> {
    let (eigenvalues, coefficients) = symmetric_eigen(h.entries(), h.dim(), k, exec)?;
    Ok(EigenSolution { eigenvalues, coefficients, spec: h.spec().clone(), v0: h.v0() })
}

/// Lowest `k` eigenvalues of `H` without eigenvectors.
pub fn eigenvalues_with(h: &HamiltonianMatrix, k: usize, exec: Execution) -> Result<Vec<f64>> {
    if k == 0 || k > h.dim() {
        return Err(Error::InvalidModeCount { requested: k, dim: h.dim() });
    }
    let mut vals = symmetric_eigenvalues(h.entries(), h.dim(), exec)?;
    vals.truncate(k);
    Ok(vals)
}

/// `psi_j` evaluated at each point.
pub fn sample_mode(sol: &EigenSolution, j: usize, points: &[Point]) -> Result<Vec<f64>> {
    if j >= sol.len() {
        return Err(Error::IndexOutOfRange { index: j, len: sol.len() });
    }
    let geom = sol.spec.geometry();
    if let Some(p) = points.iter().find(|&&p| !geom.in_chart(p)) {
        return Err(Error::OutOfChart(p[0], p[1]));
    }
    let coef = sol.coefficients(j);
    let mut scratch = sol.spec.scratch();
    let mut vals = vec![0.0; sol.basis_len()];
    Ok(points
        .iter()
        .map(|&p| {
            sol.spec.fill_values(p, &mut scratch, &mut vals);
            coef.iter().zip(&vals).map(|(c, v)| c * v).sum()
        })
        .collect())
}

/// `L^2` mass of a mode split by domain membership.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMass {
    pub inside: f64,
    pub outside: f64,
}

/// Quadrature of `|psi_j|^2` inside and outside the domain.
pub fn mode_mass(sol: &EigenSolution, j: usize, grid: &QuadratureGrid, region: &Region) -> Result<(f64, f64)> {
    if j >= sol.len() {
        return Err(Error::IndexOutOfRange { index: j, len: sol.len() });
    }
    let m = masses(sol, j..j + 1, grid, region, Execution::default())?;
    Ok((m[0].inside, m[0].outside))
}

/// [`mode_mass`] for every computed mode at once.
pub fn mode_masses(
    sol: &EigenSolution,
    grid: &QuadratureGrid,
    region: &Region,
    exec: Execution,
) -> Result<Vec<ModeMass>> {
    masses(sol, 0..sol.len(), grid, region, exec)
}

fn masses(
    sol: &EigenSolution,
    modes: std::ops::Range<usize>,
    grid: &QuadratureGrid,
    region: &Region,
    exec: Execution,
) -> Result<Vec<ModeMass>> {
    if grid.geometry() != sol.spec.geometry() {
        return Err(Error::GeometryMismatch {
            basis: sol.spec.geometry().to_string(),
            grid: grid.geometry().to_string(),
        });
    }
    const CHUNK: usize = 256;
    let n = sol.basis_len();
    let k = modes.len();
    let coef = sol.coefficient_matrix().subcols(modes.start, k);
    let nodes = grid.nodes();
    let weights = grid.weights();
    let chunks = nodes.len().div_ceil(CHUNK);
    let partial = par::map_range(exec, chunks, |b| {
        let lo = b * CHUNK;
        let hi = (lo + CHUNK).min(nodes.len());
        let c = hi - lo;
        let mut scratch = sol.spec.scratch();
        let mut phi = vec![0.0; n * c];
        for (q, col) in (lo..hi).zip(phi.chunks_mut(n)) {
            sol.spec.fill_values(nodes[q], &mut scratch, col);
        }
        let phi = MatRef::from_column_major_slice(&phi, n, c);
        let mut psi = Mat::<f64>::zeros(k, c);
        matmul(psi.as_mut(), Accum::Replace, coef.transpose(), phi, 1.0, Par::Seq);
        let mut acc = vec![ModeMass { inside: 0.0, outside: 0.0 }; k];
        for (col, q) in (lo..hi).enumerate() {
            let w = weights[q];
            let inside = region.contains(nodes[q]);
            for (j, m) in acc.iter_mut().enumerate() {
                let v = psi[(j, col)];
                if inside {
                    m.inside += w * v * v;
                } else {
                    m.outside += w * v * v;
                }
            }
        }
        acc
    });
    let mut total = vec![ModeMass { inside: 0.0, outside: 0.0 }; k];
    for acc in partial {
        for (t, a) in total.iter_mut().zip(acc) {
            t.inside += a.inside;
            t.outside += a.outside;
        }
    }
    Ok(total)
}
