//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use lbexp::assembly::{assemble, DEFAULT_V0};
use lbexp::eigensolve::{eigendecompose, eigenvalues_with, mode_masses};
use lbexp::geometry::{default_resolution, enumerate_basis, quadrature, resolution_for, AmbientGeometry};
use lbexp::reference::{
    box_spectrum, expand_levels, fd_assemble, fd_eigenvalues, interval_relaxed_eigenvalue, triangle_spectrum,
    L_SHAPE_REFERENCE,
};
use lbexp::region::{builtin_domain, CatalogOptions, Region};
use lbexp::stats::{classify, ks_distance, spacings, Reference, SpacingSample, Verdict};
use lbexp::Execution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const L_EXPANSION_2500: [f64; 6] = [9.63359, 15.1964, 19.7385, 29.5209, 31.8982, 41.4629];
const L_EXPANSION_225_FIRST: f64 = 10.1213;
const L_FD_50_FIRST: f64 = 9.33328;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lowest(name: &str, n: usize, v0: f64, density: Option<f64>, k: usize) -> Vec<f64> {
    let d = builtin_domain(name, &CatalogOptions::default()).unwrap();
    let spec = enumerate_basis(&d.geometry, n).unwrap();
    let res = density.map_or_else(|| default_resolution(&spec), |f| resolution_for(&spec, f));
    let grid = quadrature(&d.geometry, res).unwrap();
    let h = assemble(&spec, &d.region, v0, &grid).unwrap();
    eigenvalues_with(&h, k, Execution::default()).unwrap()
}

/// Groups ascending values into clusters whose neighbours differ by less
/// than `tol` relative.
fn clusters(vals: &[f64], tol: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        if i > 0 && rel(*v, vals[i - 1]) < tol {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}

// The quadrature behind the published expansion column is not stated. It is
// reproduced by a coarse grid of about two nodes per half-wavelength of the
// highest mode; the default grid gives the quadrature-converged Galerkin
// values, which sit about 0.6% higher at N = 2500.
fn l_shape_2500() -> Outcome {
    let e = lowest("l_shape", 2500, DEFAULT_V0, Some(2.0), 6);
    let golden = e.iter().zip(L_EXPANSION_2500).map(|(a, b)| rel(*a, b)).fold(0.0, f64::max);
    let known = e.iter().zip(L_SHAPE_REFERENCE).map(|(a, (_, b))| rel(*a, b)).fold(0.0, f64::max);
    check(
        golden < 3e-3 && known < 1e-2,
        format!(
            "lambda_1..6 = {e:.5?}; max rel. dev. {:.3}% vs expansion column, {:.3}% vs known",
            100.0 * golden,
            100.0 * known
        ),
    )
}

fn l_shape_225() -> Outcome {
    let e = lowest("l_shape", 225, DEFAULT_V0, Some(2.5), 1)[0];
    let d = rel(e, L_EXPANSION_225_FIRST);
    check(d < 1e-2, format!("lambda_1 = {e:.5} ({:.3}% from {L_EXPANSION_225_FIRST})", 100.0 * d))
}

fn triangle() -> Outcome {
    let opts = CatalogOptions::default();
    let e = lowest("equilateral_triangle", 1600, DEFAULT_V0, None, 10);
    let levels = triangle_spectrum(6);
    let scale = opts.triangle_side.powi(-2);
    let exact: Vec<f64> = expand_levels(&levels).iter().map(|v| v * scale).collect();
    let worst = e.iter().zip(&exact).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    let got = clusters(&e, 2e-3);
    let want: Vec<usize> = levels.iter().map(|l| l.multiplicity).collect();
    check(
        worst < 1e-2 && got == want,
        format!("max rel. dev. {:.3}%, clusters {got:?} vs {want:?}, lambda_1 = {:.4}", 100.0 * worst, e[0]),
    )
}

fn relaxation_rate() -> Outcome {
    let pts: Vec<(f64, f64)> = [1e4f64, 1e5, 1e6, 1e7, 1e8]
        .iter()
        .map(|&v| (v.ln(), (PI * PI - interval_relaxed_eigenvalue(v, 1).unwrap()).abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    check((slope + 0.5).abs() <= 0.05, format!("slope {slope:.4}"))
}

fn monotone_in_v0() -> Outcome {
    let e: Vec<Vec<f64>> = [1e3, 1e4, 1e5].iter().map(|&v| lowest("l_shape", 225, v, None, 10)).collect();
    let ok = (0..10).all(|k| e[0][k] <= e[1][k] && e[1][k] <= e[2][k]);
    check(ok, format!("lambda_1 = {:.4} / {:.4} / {:.4}", e[0][0], e[1][0], e[2][0]))
}

fn empty_complement() -> Outcome {
    let mut worst = 0.0f64;
    for g in [
        AmbientGeometry::rectangle(2.0, 1.5).unwrap(),
        AmbientGeometry::UnitSphere,
        AmbientGeometry::flat_torus([[1.0, 0.0], [0.3, 1.2]]).unwrap(),
    ] {
        let spec = enumerate_basis(&g, 100).unwrap();
        let grid = quadrature(&g, default_resolution(&spec)).unwrap();
        let h = assemble(&spec, &Region::Full, DEFAULT_V0, &grid).unwrap();
        let e = eigenvalues_with(&h, 100, Execution::default()).unwrap();
        for (a, b) in e.iter().zip(spec.eigenvalues()) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    check(worst < 1e-9, format!("max rel. dev. {worst:.2e} over rectangle, sphere, torus"))
}

// Dirichlet hemisphere modes have a kink in their Galerkin target across the
// equator, so the first levels converge slowly in N; 76 complete shells are
// needed for 2%.
fn hemisphere() -> Outcome {
    let e = lowest("hemisphere", 76 * 76, 1e6, Some(4.0), 6);
    let c = clusters(&e, 1e-6);
    let ok = rel(e[0], 2.0) < 0.02
        && c.len() >= 2
        && c[0] == 1
        && c[1] == 2
        && rel(e[1], 6.0) < 0.02
        && rel(e[2], 6.0) < 0.02;
    check(ok, format!("N = 5776: levels {:.4} x{}, {:.4} x{}", e[0], c[0], e[1], c.get(1).copied().unwrap_or(0)))
}

fn torus_sanity() -> Outcome {
    let g = AmbientGeometry::unit_torus();
    let spec = enumerate_basis(&g, 5).unwrap();
    let grid = quadrature(&g, default_resolution(&spec)).unwrap();
    let h = assemble(&spec, &Region::Full, DEFAULT_V0, &grid).unwrap();
    let e = eigenvalues_with(&h, 5, Execution::default()).unwrap();
    let l = 4.0 * PI * PI;
    let ok = e[0].abs() < 1e-9 && e[1..].iter().all(|v| rel(*v, l) < 1e-9);
    check(ok, format!("{e:.12?}"))
}

fn leakage() -> Outcome {
    let opts = CatalogOptions::default();
    let mut worst = f64::NEG_INFINITY;
    let mut modes = 0;
    for (name, n) in [("l_shape", 900), ("hemisphere", 400), ("octant_with_hole", 400), ("torus_asymmetric_holes", 400)]
    {
        let d = builtin_domain(name, &opts).unwrap();
        let spec = enumerate_basis(&d.geometry, n).unwrap();
        let grid = quadrature(&d.geometry, default_resolution(&spec)).unwrap();
        let h = assemble(&spec, &d.region, DEFAULT_V0, &grid).unwrap();
        let sol = eigendecompose(&h, 120).unwrap();
        let m = mode_masses(&sol, &grid, &d.region, Execution::default()).unwrap();
        for (mm, lam) in m.iter().zip(sol.eigenvalues()) {
            worst = worst.max(mm.outside - (lam / DEFAULT_V0 + 1e-4));
            modes += 1;
        }
    }
    check(worst <= 0.0, format!("{modes} modes, max(outside - lambda/V0 - 1e-4) = {worst:.3e}"))
}

fn billiards() -> Outcome {
    let tri = classify(&spacings(&expand_levels(&triangle_spectrum(200)), 150).unwrap()).unwrap();
    let e = lowest("desymmetrized_sinai", 1600, DEFAULT_V0, None, 151);
    let sinai = classify(&spacings(&e, 150).unwrap()).unwrap();
    check(
        tri.verdict == Verdict::PoissonLike && sinai.verdict == Verdict::GoeLike,
        format!(
            "triangle {} (KS {:.3}/{:.3}, CvM {:.4}/{:.4}); Sinai {} (KS {:.3}/{:.3})",
            tri.verdict,
            tri.ks_poisson,
            tri.ks_goe,
            tri.cvm_poisson,
            tri.cvm_goe,
            sinai.verdict,
            sinai.ks_poisson,
            sinai.ks_goe
        ),
    )
}

fn fd_baseline() -> Outcome {
    let unit = AmbientGeometry::rectangle(1.0, 1.0).unwrap();
    let exact = box_spectrum(1.0, 1.0, 1)[0];
    let err = |n: usize| {
        let op = fd_assemble(&unit, &Region::Full, 0.0, (n, n)).unwrap();
        (fd_eigenvalues(&op, 1, Execution::default()).unwrap()[0] - exact).abs()
    };
    let order = (err(15) / err(31)).log2();
    let l = builtin_domain("l_shape", &CatalogOptions::default()).unwrap();
    let op = fd_assemble(&l.geometry, &l.region, DEFAULT_V0, (50, 50)).unwrap();
    let l1 = fd_eigenvalues(&op, 1, Execution::default()).unwrap()[0];
    let d = rel(l1, L_FD_50_FIRST);
    check(
        (order - 2.0).abs() <= 0.2 && d < 0.05,
        format!("observed order {order:.3}; L-shape 50x50 lambda_1 = {l1:.5} ({:.2}% from {L_FD_50_FIRST})", 100.0 * d),
    )
}

fn ks_machinery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let raw: Vec<f64> = (0..2000).map(|_| Exp1.sample(&mut rng)).collect();
    let s = SpacingSample::new(raw).unwrap();
    let p = ks_distance(&s, Reference::Poisson).unwrap();
    let g = ks_distance(&s, Reference::Goe).unwrap();
    check(p < 0.04 && g > 0.1, format!("KS vs Poisson {p:.4}, vs GOE {g:.4}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("L-shape N=2500 golden values", l_shape_2500),
        ("L-shape N=225 first eigenvalue", l_shape_225),
        ("equilateral triangle spectrum", triangle),
        ("relaxed interval rate", relaxation_rate),
        ("monotonicity in V0", monotone_in_v0),
        ("empty complement identity", empty_complement),
        ("hemisphere levels", hemisphere),
        ("torus sanity", torus_sanity),
        ("leakage bound", leakage),
        ("billiard classification", billiards),
        ("finite-difference baseline", fd_baseline),
        ("KS machinery", ks_machinery),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &id.to_string() || name.contains(a.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id:>2} {tag}: {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
