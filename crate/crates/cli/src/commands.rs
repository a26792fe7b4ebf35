//! The five pipelines behind the command words.

use std::f64::consts::PI;
use std::path::PathBuf;

use lbexp::assembly::{assemble_with, fit_score_with, HamiltonianMatrix};
use lbexp::eigensolve::{eigendecompose_with, eigenvalues_with, mode_masses, sample_mode};
use lbexp::geometry::{
    enumerate_basis, from_fractional, quadrature, AmbientGeometry, BasisSpec, Point, QuadratureGrid,
};
use lbexp::reference::{
    box_spectrum, expand_levels, fd_assemble, fd_eigenvalues, hemisphere_spectrum, octant_spectrum, triangle_spectrum,
    L_SHAPE_REFERENCE,
};
use lbexp::region::{builtin_domain, Region};
use lbexp::stats::{classify, histogram, spacings_with};
use lbexp::Execution;
use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;
use serde_json::json;

use crate::config::{Command, ConfigError, Domain, MatrixFormat, RunConfig, SpectrumSource};
use crate::output::{matrix_binary, matrix_csv, num, opt_num, region_hash, text, Csv, Sink};
use crate::CliError;

/// Everything a command needs besides its options table.
#[derive(Debug)]
pub struct Context {
    pub config: RunConfig,
    pub domain: Domain,
    pub exec: Execution,
}

impl Context {
    pub fn new(config: RunConfig, command: Command, exec: Execution) -> Result<Self, CliError> {
        config.validate_for(command)?;
        let domain = config.domain()?;
        Ok(Context { config, domain, exec })
    }

    /// Basis, quadrature and assembled matrix for `n` and `v0`.
    fn assemble(&self, n: usize, v0: f64) -> Result<(BasisSpec, QuadratureGrid, HamiltonianMatrix), CliError> {
        let spec = enumerate_basis(&self.domain.geometry, n)?;
        if spec.splits_shell() {
            warn!("N = {n} cuts through a degenerate shell of the host spectrum; the top eigenvalues lose symmetry");
        }
        let grid = quadrature(&self.domain.geometry, self.config.resolution_for(&spec))?;
        let h = assemble_with(&spec, &self.domain.region, v0, &grid, self.exec)?;
        Ok((spec, grid, h))
    }

    fn eigenvalues(&self, n: usize, v0: f64, k: usize) -> Result<Vec<f64>, CliError> {
        let (_, grid, h) = self.assemble(n, v0)?;
        info!("N = {n}, V0 = {v0:e}, quadrature {:?}", grid.resolution());
        Ok(eigenvalues_with(&h, k, self.exec)?)
    }
}

pub fn run(command: Command, ctx: &Context, sink: &mut Sink) -> Result<(), CliError> {
    match command {
        Command::Solve => solve(ctx, sink),
        Command::Stats => stats(ctx, sink),
        Command::Convergence => convergence(ctx, sink),
        Command::FdCompare => fd_compare(ctx, sink),
        Command::FitScore => fit_score(ctx, sink),
    }
}

/// Closed-form eigenvalues of the configured domain, one entry per index;
/// `None` where the reference is not known at that index.
pub fn oracle(domain: &Domain, count: usize) -> Option<Vec<Option<f64>>> {
    let dense = |v: Vec<f64>| Some(v.into_iter().take(count).map(Some).collect());
    if domain.region == Region::Full {
        return enumerate_basis(&domain.geometry, count)
            .ok()
            .map(|s| s.eigenvalues().iter().copied().map(Some).collect());
    }
    let name = domain.name.as_deref()?;
    let d = builtin_domain(name, &domain.options)?;
    // the triangle is the only catalog region that does not depend on its host
    if d.geometry != domain.geometry && name != "equilateral_triangle" {
        return None;
    }
    match name {
        "equilateral_triangle" => {
            let a2 = domain.options.triangle_side.powi(2);
            dense(expand_levels(&triangle_spectrum(count)).iter().map(|v| v / a2).collect())
        }
        "hemisphere" => dense(expand_levels(&hemisphere_spectrum(count))),
        "spherical_octant" => dense(expand_levels(&octant_spectrum(count))),
        "interval_analog" => dense(box_spectrum(1.0, 1.0, count)),
        "half_square" => {
            // antisymmetric square modes: pi^2 (m^2 + n^2) with m > n >= 1
            let top = (count as f64).sqrt() as usize * 2 + 4;
            let mut v: Vec<f64> =
                (1..=top).flat_map(|m| (1..m).map(move |n| PI * PI * (m * m + n * n) as f64)).collect();
            v.sort_by(f64::total_cmp);
            dense(v)
        }
        "l_shape" => {
            Some((1..=count).map(|i| L_SHAPE_REFERENCE.iter().find(|(j, _)| *j == i).map(|&(_, v)| v)).collect())
        }
        _ => None,
    }
}

#[derive(Serialize)]
struct RunMeta<'a> {
    n: usize,
    v0: f64,
    geometry: &'a AmbientGeometry,
    domain: Option<&'a str>,
    region_hash: String,
    resolution: [usize; 2],
    modes: usize,
    splits_shell: bool,
}

/// Cell-centred sample points: chart coordinates, output coordinates and
/// the two axis coordinate lists.
fn sample_grid(g: &AmbientGeometry, [n1, n2]: [usize; 2]) -> (Vec<Point>, Vec<Vec<f64>>, [Vec<f64>; 2]) {
    let mid = |i: usize, n: usize, len: f64| (i as f64 + 0.5) * len / n as f64;
    let (l1, l2) = match *g {
        AmbientGeometry::Rectangle { a1, a2 } => (a1, a2),
        AmbientGeometry::UnitSphere => (PI, 2.0 * PI),
        AmbientGeometry::FlatTorus { .. } => (1.0, 1.0),
    };
    let axes = [(0..n1).map(|i| mid(i, n1, l1)).collect::<Vec<_>>(), (0..n2).map(|j| mid(j, n2, l2)).collect()];
    let mut chart = Vec::with_capacity(n1 * n2);
    let mut coords = Vec::with_capacity(n1 * n2);
    for &u in &axes[0] {
        for &v in &axes[1] {
            let p = match *g {
                AmbientGeometry::FlatTorus { lattice } => from_fractional(lattice, [u, v]),
                _ => [u, v],
            };
            chart.push(p);
            coords.push(match g {
                AmbientGeometry::UnitSphere => g.embed(p).to_vec(),
                _ => p.to_vec(),
            });
        }
    }
    (chart, coords, axes)
}

fn solve(ctx: &Context, sink: &mut Sink) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let (spec, grid, h) = ctx.assemble(cfg.n, cfg.v0)?;
    let k = cfg.mode_count();
    let sol = eigendecompose_with(&h, k, ctx.exec)?;
    let masses = mode_masses(&sol, &grid, &ctx.domain.region, ctx.exec)?;
    info!("lowest eigenvalue {}", sol.eigenvalues()[0]);

    let mut csv = Csv::new(&["index", "eigenvalue", "leakage"]);
    for (j, (lam, m)) in sol.eigenvalues().iter().zip(&masses).enumerate() {
        csv.row(vec![(j + 1).to_string(), num(*lam), num(m.outside)]);
    }
    sink.csv("spectrum.csv", &csv)?;
    let (r1, r2) = grid.resolution();
    let hash = region_hash(&ctx.domain.region);
    sink.json(
        "spectrum.json",
        &RunMeta {
            n: cfg.n,
            v0: cfg.v0,
            geometry: &ctx.domain.geometry,
            domain: ctx.domain.name.as_deref(),
            region_hash: hash.clone(),
            resolution: [r1, r2],
            modes: k,
            splits_shell: spec.splits_shell(),
        },
    )?;

    let g = &ctx.domain.geometry;
    let (chart, coords, axes) = sample_grid(g, cfg.sample_grid);
    let (header, axis_names): (&[&str], [&str; 2]) = match g {
        AmbientGeometry::Rectangle { .. } => (&["x", "y", "value"], ["x", "y"]),
        AmbientGeometry::UnitSphere => (&["x", "y", "z", "value"], ["theta", "phi"]),
        AmbientGeometry::FlatTorus { .. } => (&["x", "y", "value"], ["u", "v"]),
    };
    for (j, mass) in masses.iter().enumerate().take(cfg.solve.mode_grids) {
        let values = sample_mode(&sol, j, &chart)?;
        let mut csv = Csv::new(header);
        for (c, v) in coords.iter().zip(&values) {
            let mut row: Vec<String> = c.iter().map(|&x| num(x)).collect();
            row.push(num(*v));
            csv.row(row);
        }
        let stem = format!("mode_{:03}", j + 1);
        sink.csv(&format!("{stem}.csv"), &csv)?;
        let rows: Vec<&[f64]> = values.chunks(cfg.sample_grid[1]).collect();
        sink.json(
            &format!("{stem}.json"),
            &json!({
                "mode": j + 1,
                "eigenvalue": sol.eigenvalues()[j],
                "leakage": mass.outside,
                "n": cfg.n,
                "v0": cfg.v0,
                "geometry": g,
                "domain": ctx.domain.name,
                "region_hash": hash,
                "grid": {
                    "axes": axis_names,
                    "shape": cfg.sample_grid,
                    "coordinates": axes,
                    "values": rows,
                },
            }),
        )?;
    }

    match cfg.solve.matrix_dump {
        Some(MatrixFormat::Binary) => sink.bytes("hamiltonian.bin", &matrix_binary(&h))?,
        Some(MatrixFormat::Csv) => sink.bytes("hamiltonian.csv", matrix_csv(&h).as_bytes())?,
        None => {}
    }
    Ok(())
}

fn synthetic_levels(count: usize, seed: u64, goe: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels = Vec::with_capacity(count + 1);
    let mut e = 0.0;
    levels.push(e);
    for _ in 0..count {
        e += if goe {
            // inverse CDF of the Wigner surmise
            let u: f64 = 1.0 - rng.random::<f64>();
            (-(4.0 / PI) * u.ln()).sqrt()
        } else {
            Exp1.sample(&mut rng)
        };
        levels.push(e);
    }
    levels
}

fn stats(ctx: &Context, sink: &mut Sink) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let opts = &cfg.stats;
    let levels = match opts.source {
        SpectrumSource::Expansion => ctx.eigenvalues(cfg.n, cfg.v0, opts.count + 1)?,
        SpectrumSource::Oracle => oracle(&ctx.domain, opts.count + 1)
            .and_then(|v| v.into_iter().collect::<Option<Vec<f64>>>())
            .filter(|v| v.len() > opts.count)
            .ok_or_else(|| ConfigError::new("stats.source", "the domain has no closed-form spectrum of that length"))?,
        SpectrumSource::SyntheticPoisson => synthetic_levels(opts.count, cfg.seed, false),
        SpectrumSource::SyntheticGoe => synthetic_levels(opts.count, cfg.seed, true),
    };
    let sample = spacings_with(&levels, opts.count, opts.spacing)?;
    let mut csv = Csv::new(&["index", "spacing"]);
    for (i, s) in sample.spacings().iter().enumerate() {
        csv.row(vec![(i + 1).to_string(), num(*s)]);
    }
    sink.csv("spacings.csv", &csv)?;

    let bins = histogram(&sample, opts.bin_width, opts.max_s)?;
    let mut csv = Csv::new(&["bin_left", "bin_right", "density", "reference_poisson", "reference_goe"]);
    for b in &bins {
        csv.row(vec![
            num(b.bin_left),
            num(b.bin_right),
            num(b.density),
            num(b.reference_poisson),
            num(b.reference_goe),
        ]);
    }
    sink.csv("histogram.csv", &csv)?;

    let c = classify(&sample)?;
    info!("verdict {} (KS {:.4} vs Poisson, {:.4} vs GOE)", c.verdict, c.ks_poisson, c.ks_goe);
    sink.json(
        "classification.json",
        &json!({
            "source": opts.source,
            "domain": ctx.domain.name,
            "region_hash": region_hash(&ctx.domain.region),
            "spacings": sample.len(),
            "levels": sample.source_count(),
            "seed": cfg.seed,
            "classification": c,
        }),
    )
}

fn convergence(ctx: &Context, sink: &mut Sink) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let opts = &cfg.convergence;
    let count = opts.count;
    let (label, rows): (&str, Vec<(String, Vec<f64>)>) = if opts.v0_values.is_empty() {
        let rows = opts
            .basis_sizes
            .iter()
            .map(|&n| Ok((n.to_string(), ctx.eigenvalues(n, cfg.v0, count)?)))
            .collect::<Result<_, CliError>>()?;
        ("n", rows)
    } else {
        // one basis and grid, reassembled per penalty height
        let spec = enumerate_basis(&ctx.domain.geometry, cfg.n)?;
        let grid = quadrature(&ctx.domain.geometry, cfg.resolution_for(&spec))?;
        let rows = opts
            .v0_values
            .iter()
            .map(|&v0| {
                let h = assemble_with(&spec, &ctx.domain.region, v0, &grid, ctx.exec)?;
                Ok((num(v0), eigenvalues_with(&h, count, ctx.exec)?))
            })
            .collect::<Result<_, CliError>>()?;
        ("v0", rows)
    };

    let lambdas: Vec<String> = (1..=count).map(|i| format!("lambda_{i}")).collect();
    let mut csv = Csv::new(&[&[label.to_string()][..], &lambdas].concat());
    for (p, e) in &rows {
        csv.row(std::iter::once(p.clone()).chain(e.iter().map(|&x| num(x))).collect());
    }
    sink.csv("convergence.csv", &csv)?;

    let Some(exact) = oracle(&ctx.domain, count) else {
        info!("no closed-form spectrum for this domain; relative errors skipped");
        return Ok(());
    };
    let errs: Vec<String> = (1..=count).map(|i| format!("rel_err_{i}")).collect();
    let mut csv = Csv::new(&[&[label.to_string()][..], &errs, &["mean_rel_err".to_string()]].concat());
    for (p, e) in &rows {
        let rel: Vec<Option<f64>> = e.iter().zip(&exact).map(|(x, o)| o.map(|o| ((x - o) / o).abs())).collect();
        let known: Vec<f64> = rel.iter().flatten().copied().collect();
        let mean = (!known.is_empty()).then(|| known.iter().sum::<f64>() / known.len() as f64);
        let mut row = vec![p.clone()];
        row.extend(rel.iter().map(|&r| opt_num(r)));
        row.push(opt_num(mean));
        csv.row(row);
    }
    sink.csv("convergence_errors.csv", &csv)
}

fn fd_compare(ctx: &Context, sink: &mut Sink) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let opts = &cfg.fd_compare;
    let count = opts.count;
    let expansion = ctx.eigenvalues(cfg.n, cfg.v0, count)?;
    let op = fd_assemble(&ctx.domain.geometry, &ctx.domain.region, cfg.v0, (opts.nodes[0], opts.nodes[1]))?;
    let fd = fd_eigenvalues(&op, count, ctx.exec)?;
    let shifted = match opts.shift {
        Some(c) => {
            Some(fd_eigenvalues(&op.clone().with_shift(c), count, ctx.exec)?.iter().map(|v| v - c).collect::<Vec<_>>())
        }
        None => None,
    };
    let exact = oracle(&ctx.domain, count).unwrap_or_else(|| vec![None; count]);

    let mut header = vec!["index", "expansion", "fd", "oracle"];
    if shifted.is_some() {
        header.push("fd_shifted_minus_shift");
    }
    let mut csv = Csv::new(&header);
    for i in 0..count {
        let mut row = vec![(i + 1).to_string(), num(expansion[i]), num(fd[i]), opt_num(exact[i])];
        if let Some(s) = &shifted {
            row.push(num(s[i]));
        }
        csv.row(row);
    }
    sink.csv("fd_compare.csv", &csv)
}

fn fit_score(ctx: &Context, sink: &mut Sink) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let base = &ctx.domain.geometry;
    let mut csv = Csv::new(&["geometry", "tau"]);
    let hosts =
        std::iter::once((None, base)).chain(cfg.fit_score.candidates.iter().enumerate().map(|(i, g)| (Some(i), g)));
    for (i, host) in hosts {
        // keep the domain inside the original box when moving to another one
        let region = match *base {
            AmbientGeometry::Rectangle { a1, a2 } if host != base => Region::intersection(vec![
                Region::AxisBox { min: [0.0, 0.0], max: [a1, a2] },
                ctx.domain.region.clone(),
            ]),
            _ => ctx.domain.region.clone(),
        };
        if let Some(i) = i {
            region
                .check_compatible(host)
                .map_err(|e| ConfigError::new(format!("fit_score.candidates[{i}]"), e.to_string()))?;
        }
        let spec = enumerate_basis(host, cfg.n)?;
        let grid = quadrature(host, cfg.resolution_for(&spec))?;
        let tau = fit_score_with(&spec, &region, &grid, ctx.exec)?;
        info!("{host}: tau = {tau}");
        csv.row(vec![text(&host.to_string()), num(tau)]);
    }
    sink.csv("fit_score.csv", &csv)
}

/// Output directory precedence: flag, then config, then `lbexp-out`.
pub fn output_dir(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    flag.or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("lbexp-out"))
}
