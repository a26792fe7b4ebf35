use std::f64::consts::PI;

use lbexp::geometry::AmbientGeometry;
use lbexp::reference::{
    box_spectrum, expand_levels, fd_assemble, fd_eigenvalues, hemisphere_spectrum, interval_matching_residual,
    interval_relaxed_eigenvalue, octant_spectrum, torus_spectrum, triangle_spectrum,
};
use lbexp::region::Region;
use lbexp::stats::{
    classify, goe_cdf, goe_pdf, histogram, ks_distance, poisson_cdf, spacings, Reference, SpacingSample, Verdict,
};
use lbexp::Execution;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

#[test]
fn triangle_levels_match_brute_force_enumeration() {
    let levels = triangle_spectrum(40);
    let cutoff = (levels.last().unwrap().value * 9.0 / (16.0 * PI * PI)).round() as i64;
    // all (p, q) with 0 < q < p, p^2 + q^2 - p q over the half-sector q <= p / 2
    let mut counts = std::collections::BTreeMap::new();
    for p in 1..200i64 {
        for q in 1..p {
            let v = p * p + q * q - p * q;
            if 2 * q <= p && v <= cutoff {
                *counts.entry(v).or_insert(0usize) += if 2 * q == p { 1 } else { 2 };
            }
        }
    }
    assert_eq!(counts.len(), levels.len());
    for (l, (v, m)) in levels.iter().zip(counts) {
        assert!((l.value - 16.0 * PI * PI / 9.0 * v as f64).abs() < 1e-9 * l.value);
        assert_eq!(l.multiplicity, m);
    }
    assert!(levels.windows(2).all(|w| w[0].value < w[1].value));
}

#[test]
fn box_spectrum_matches_brute_force_enumeration() {
    let (a1, a2) = (1.0, 1.7);
    let vals = box_spectrum(a1, a2, 300);
    let mut all: Vec<f64> = (1..100)
        .flat_map(|n1| (1..100).map(move |n2| PI * PI * ((n1 * n1) as f64 / (a1 * a1) + (n2 * n2) as f64 / (a2 * a2))))
        .collect();
    all.sort_by(f64::total_cmp);
    assert_eq!(&all[..300], &vals[..]);
}

#[test]
fn torus_and_sphere_levels() {
    let t = torus_spectrum([[1.0, 0.3], [0.2, 1.4]], 6).unwrap();
    assert_eq!(t[0].value, 0.0);
    assert!(t[1..].iter().all(|l| l.multiplicity % 2 == 0));
    let o = octant_spectrum(3);
    assert_eq!((o[0].value, o[0].multiplicity), (12.0, 1));
    assert_eq!((o[1].value, o[1].multiplicity), (30.0, 2));
    assert_eq!(expand_levels(&hemisphere_spectrum(3)), vec![2.0, 6.0, 6.0, 12.0, 12.0, 12.0]);
}

#[test]
fn relaxed_interval_roots() {
    let mut prev = 0.0;
    for v0 in [1e4, 1e5, 1e6, 1e7, 1e8] {
        let l = interval_relaxed_eigenvalue(v0, 1).unwrap();
        assert!(l > prev && l < PI * PI);
        assert!(interval_matching_residual(v0, l) < 1e-10);
        prev = l;
    }
    assert!((prev - PI * PI).abs() < 1e-2);
    for k in 1..5 {
        let l = interval_relaxed_eigenvalue(1e6, k).unwrap();
        assert!(interval_matching_residual(1e6, l) < 1e-10, "k={k}");
    }
}

#[test]
fn fd_box_converges_at_second_order() {
    let g = AmbientGeometry::rectangle(1.0, 1.0).unwrap();
    let exact = box_spectrum(1.0, 1.0, 1)[0];
    let err = |n: usize| {
        let op = fd_assemble(&g, &Region::Full, 0.0, (n, n)).unwrap();
        (fd_eigenvalues(&op, 1, Execution::default()).unwrap()[0] - exact).abs()
    };
    // h = 1/(n+1) halves from 1/8 to 1/16 to 1/32
    let (e1, e2, e3) = (err(7), err(15), err(31));
    for order in [(e1 / e2).log2(), (e2 / e3).log2()] {
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }
}

#[test]
fn wigner_surmise_is_normalized_with_unit_mean() {
    // composite Simpson on [0, 12]; the tail beyond is below 1e-40
    let n = 24_000;
    let h = 12.0 / n as f64;
    let (mut z, mut m) = (0.0, 0.0);
    for i in 0..=n {
        let s = i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let p = goe_pdf(s).unwrap();
        z += w * p;
        m += w * s * p;
    }
    assert!((z * h / 3.0 - 1.0).abs() < 1e-6);
    assert!((m * h / 3.0 - 1.0).abs() < 1e-6);
}

#[test]
fn ks_of_reference_quantiles_is_half_a_step() {
    let n = 200;
    let qs: Vec<f64> = (1..=n).map(|i| -(1.0 - (i as f64 - 0.5) / n as f64).ln()).collect();
    // the sample is renormalized to unit mean, so rescale the bound check
    let raw_mean = qs.iter().sum::<f64>() / n as f64;
    let s = SpacingSample::new(qs).unwrap();
    let d: f64 = s
        .spacings()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = poisson_cdf(x * raw_mean).unwrap();
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    assert!(d <= 0.5 / n as f64 + 1e-15);
}

fn exponential(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Exp1.sample(&mut rng)).collect()
}

fn wigner(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>();
            (-(4.0 / PI) * u.ln()).sqrt()
        })
        .collect()
}

#[test]
fn classify_synthetic_samples() {
    let p = SpacingSample::new(exponential(1000, 1)).unwrap();
    assert_eq!(classify(&p).unwrap().verdict, Verdict::PoissonLike);
    let g = SpacingSample::new(wigner(1000, 2)).unwrap();
    assert_eq!(classify(&g).unwrap().verdict, Verdict::GoeLike);
    assert!(ks_distance(&g, Reference::Goe).unwrap() < 0.05);
}

#[test]
fn poisson_histogram_first_bin() {
    let s = SpacingSample::new(exponential(20_000, 3)).unwrap();
    let w = 0.25;
    let h = histogram(&s, w, 4.0).unwrap();
    let expect = (1.0 - (-w).exp()) / w;
    assert!((h[0].density - expect).abs() < 0.05 * expect);
    assert!((h[0].reference_poisson - expect).abs() < 1e-12);
    let below = s.spacings().iter().filter(|&&x| x < 4.0).count() as f64 / s.len() as f64;
    let area: f64 = h.iter().map(|b| b.density * (b.bin_right - b.bin_left)).sum();
    assert!((area - below).abs() < 1e-12);
    assert!((h[3].reference_goe - (goe_cdf(1.0).unwrap() - goe_cdf(0.75).unwrap()) / w).abs() < 1e-12);
}

#[test]
fn integrable_box_spacings_look_poissonian() {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let vals = box_spectrum(1.0, golden, 500);
    let s = spacings(&vals, 499).unwrap();
    let c = classify(&s).unwrap();
    assert_eq!(c.verdict, Verdict::PoissonLike, "{c:?}");
    assert!(c.ks_poisson < 0.1, "{c:?}");
}

#[test]
fn triangle_spectrum_is_poisson_like() {
    let vals = expand_levels(&triangle_spectrum(200));
    let c = classify(&spacings(&vals, 150).unwrap()).unwrap();
    assert_eq!(c.verdict, Verdict::PoissonLike, "{c:?}");
}

proptest! {
    #[test]
    fn spacings_are_scale_invariant(raw in prop::collection::vec(0.01..10.0f64, 3..60), alpha in 1e-3..1e3f64) {
        let mut eigs = vec![0.0];
        for g in &raw {
            let last = *eigs.last().unwrap();
            eigs.push(last + g);
        }
        let n = raw.len();
        let a = spacings(&eigs, n).unwrap();
        let scaled: Vec<f64> = eigs.iter().map(|x| alpha * x).collect();
        let b = spacings(&scaled, n).unwrap();
        for (x, y) in a.spacings().iter().zip(b.spacings()) {
            prop_assert!((x - y).abs() < 1e-10 * x.max(1.0));
        }
        let mean = a.spacings().iter().sum::<f64>() / n as f64;
        prop_assert!((mean - 1.0).abs() < 1e-10);
        prop_assert!(a.spacings().iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn ks_is_permutation_invariant(raw in prop::collection::vec(0.0..5.0f64, 2..80), seed in any::<u64>()) {
        prop_assume!(raw.iter().sum::<f64>() > 0.0);
        let mut shuffled = raw.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let a = SpacingSample::new(raw).unwrap();
        let b = SpacingSample::new(shuffled).unwrap();
        for r in [Reference::Poisson, Reference::Goe] {
            let (x, y) = (ks_distance(&a, r).unwrap(), ks_distance(&b, r).unwrap());
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }
}
