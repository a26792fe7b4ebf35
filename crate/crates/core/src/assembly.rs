//! Projection of the relaxed Schrodinger operator onto a truncated basis.
//!
//! `H_nm = lambda_n delta_nm + V0 sum_q w_q chi(x_q) phi_n(x_q) phi_m(x_q)`,
//! where `chi` is the indicator of the complement of the domain and the sum
//! runs over a host quadrature grid.

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};

use crate::error::{Error, Result};
use crate::geometry::{BasisSpec, QuadratureGrid};
use crate::par::{self, Execution};
use crate::region::{complement_indicator, Region};

/// Penalty height used when none is specified. Accuracy improves with `V0`
/// up to roughly `2.6e6`, beyond which round-off in the penalty block wins.
pub const DEFAULT_V0: f64 = 2.1e5;

// Quadrature nodes processed per Gram update, and Gram columns per task.
const NODE_CHUNK: usize = 1024;
const COL_BLOCK: usize = 96;
const EVAL_BATCH: usize = 32;

/// The discretized operator `H_N`, real symmetric, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    entries: Vec<f64>,
    spec: BasisSpec,
    region: Region,
    v0: f64,
    resolution: (usize, usize),
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.spec.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[j * self.dim() + i]
    }

    /// Column-major entries (equal to row-major, the matrix is symmetric).
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.entries, self.dim(), self.dim())
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Resolution of the quadrature grid the penalty was integrated on.
    pub fn grid_resolution(&self) -> (usize, usize) {
        self.resolution
    }

    /// `(H - diag(lambda)) / V0`, the Gram matrix of the basis restricted to
    /// the complement.
    pub fn penalty(&self, i: usize, j: usize) -> f64 {
        let d = if i == j { self.spec.eigenvalues()[i] } else { 0.0 };
        (self.get(i, j) - d) / self.v0
    }

    /// `max |H_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `H + alpha I`.
    pub fn shifted(&self, alpha: f64) -> HamiltonianMatrix {
        let mut out = self.clone();
        let n = self.dim();
        for i in 0..n {
            out.entries[i * n + i] += alpha;
        }
        out
    }

    /// Builds a matrix from raw symmetric entries; used for tests and for
    /// feeding externally assembled operators to the eigensolver.
    pub fn from_dense(spec: BasisSpec, region: Region, v0: f64, entries: Vec<f64>) -> Result<Self> {
        let n = spec.len();
        if entries.len() != n * n {
            return Err(Error::InvalidArgument(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        for j in 0..n {
            for i in 0..j {
                if entries[j * n + i] != entries[i * n + j] {
                    return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(HamiltonianMatrix { entries, spec, region, v0, resolution: (0, 0) })
    }
}

fn check_inputs(spec: &BasisSpec, region: &Region, grid: &QuadratureGrid) -> Result<()> {
    if spec.geometry() != grid.geometry() {
        return Err(Error::GeometryMismatch { basis: spec.geometry().to_string(), grid: grid.geometry().to_string() });
    }
    region.check_compatible(spec.geometry())
}

/// Assembles `H_N` using the default execution policy.
pub fn assemble(spec: &BasisSpec, region: &Region, v0: f64, grid: &QuadratureGrid) -> Result<HamiltonianMatrix> {
    assemble_with(spec, region, v0, grid, Execution::default())
}

pub fn assemble_with(
    spec: &BasisSpec,
    region: &Region,
    v0: f64,
    grid: &QuadratureGrid,
    exec: Execution,
) -> Result<HamiltonianMatrix> {
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(Error::InvalidPotential(v0));
    }
    check_inputs(spec, region, grid)?;
    let n = spec.len();
    let mut entries = complement_gram(spec, region, grid, exec);
    for v in entries.iter_mut() {
        *v *= v0;
    }
    for (i, &lam) in spec.eigenvalues().iter().enumerate() {
        entries[i * n + i] += lam;
    }
    Ok(HamiltonianMatrix { entries, spec: spec.clone(), region: region.clone(), v0, resolution: grid.resolution() })
}

/// `G_nm = sum_{q outside Omega} w_q phi_n(x_q) phi_m(x_q)`, column-major.
///
/// Only block-upper columns are computed and the strict lower triangle is a
/// copy of the upper one, so `G` is bit-exactly symmetric. The node chunks
/// are reduced in a fixed order and each Gram block is owned by one task, so
/// the result does not depend on the execution policy or thread count.
fn complement_gram(spec: &BasisSpec, region: &Region, grid: &QuadratureGrid, exec: Execution) -> Vec<f64> {
    let n = spec.len();
    let outside: Vec<usize> =
        (0..grid.len()).filter(|&q| complement_indicator(region, grid.nodes()[q]) != 0.0).collect();
    let mut gram = vec![0.0; n * n];
    let mut values = Vec::new();
    for chunk in outside.chunks(NODE_CHUNK) {
        let c = chunk.len();
        values.clear();
        values.resize(n * c, 0.0);
        par::for_each_chunk_mut(exec, &mut values, n * EVAL_BATCH, |b, cols| {
            let mut scratch = spec.scratch();
            for (k, col) in cols.chunks_mut(n).enumerate() {
                let q = chunk[b * EVAL_BATCH + k];
                spec.fill_values(grid.nodes()[q], &mut scratch, col);
                let s = grid.weights()[q].sqrt();
                col.iter_mut().for_each(|v| *v *= s);
            }
        });
        let a = MatRef::from_column_major_slice(&values, n, c);
        par::for_each_chunk_mut(exec, &mut gram, n * COL_BLOCK, |jb, gcols| {
            let j0 = jb * COL_BLOCK;
            let w = gcols.len() / n;
            let j1 = j0 + w;
            let dst = MatMut::from_column_major_slice_mut(gcols, n, w).subrows_mut(0, j1);
            matmul(dst, Accum::Add, a.subrows(0, j1), a.subrows(j0, w).transpose(), 1.0, Par::Seq);
        });
    }
    for j in 0..n {
        for i in (j + 1)..n {
            gram[j * n + i] = gram[i * n + j];
        }
    }
    gram
}

/// Domain-fit score `tau`: the sup over nodes inside the domain of the
/// `L^2`-projection of `chi_{S \ Omega}` onto the basis. Independent of `V0`.
pub fn fit_score(spec: &BasisSpec, region: &Region, grid: &QuadratureGrid) -> Result<f64> {
    fit_score_with(spec, region, grid, Execution::default())
}

pub fn fit_score_with(spec: &BasisSpec, region: &Region, grid: &QuadratureGrid, exec: Execution) -> Result<f64> {
    check_inputs(spec, region, grid)?;
    let n = spec.len();
    let nodes = grid.nodes();
    let weights = grid.weights();
    let inside: Vec<bool> = nodes.iter().map(|&p| region.contains(p)).collect();

    // c_j = sum_q w_q chi(x_q) phi_j(x_q), accumulated in node order per batch
    let batches = nodes.len().div_ceil(EVAL_BATCH);
    let partial = par::map_range(exec, batches, |b| {
        let mut scratch = spec.scratch();
        let mut vals = vec![0.0; n];
        let mut acc = vec![0.0; n];
        for q in (b * EVAL_BATCH)..((b + 1) * EVAL_BATCH).min(nodes.len()) {
            if inside[q] {
                continue;
            }
            spec.fill_values(nodes[q], &mut scratch, &mut vals);
            for (a, v) in acc.iter_mut().zip(&vals) {
                *a += weights[q] * v;
            }
        }
        acc
    });
    let mut coef = vec![0.0; n];
    for acc in &partial {
        for (c, a) in coef.iter_mut().zip(acc) {
            *c += a;
        }
    }

    let maxima = par::map_range(exec, batches, |b| {
        let mut scratch = spec.scratch();
        let mut vals = vec![0.0; n];
        let mut m = 0.0f64;
        for q in (b * EVAL_BATCH)..((b + 1) * EVAL_BATCH).min(nodes.len()) {
            if !inside[q] {
                continue;
            }
            spec.fill_values(nodes[q], &mut scratch, &mut vals);
            let proj: f64 = coef.iter().zip(&vals).map(|(c, v)| c * v).sum();
            m = m.max(proj.abs());
        }
        m
    });
    Ok(maxima.into_iter().fold(0.0, f64::max))
}
