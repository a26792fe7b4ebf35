//! Nearest-neighbour spacing statistics against the Poisson and GOE
//! (Wigner surmise) laws.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spacings normalized to unit mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingSample {
    spacings: Vec<f64>,
    source_count: usize,
}

impl SpacingSample {
    /// Normalizes raw nonnegative gaps to unit mean.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(&s) = raw.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::NegativeSpacing(s));
        }
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        if mean <= 0.0 {
            return Err(Error::InvalidArgument("all spacings are zero".into()));
        }
        let source_count = raw.len() + 1;
        Ok(SpacingSample { spacings: raw.into_iter().map(|s| s / mean).collect(), source_count })
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn len(&self) -> usize {
        self.spacings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spacings.is_empty()
    }

    /// Number of eigenvalues the gaps were taken from.
    pub fn source_count(&self) -> usize {
        self.source_count
    }

    fn sorted(&self) -> Vec<f64> {
        let mut s = self.spacings.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpacingOptions {
    /// Drop gaps below `1e-8` of the mean gap, merging degenerate levels.
    pub drop_degenerate: bool,
    /// Divide each gap by the mean of the gaps within this many neighbours
    /// on each side before the global normalization.
    pub unfold_window: Option<usize>,
}

/// The first `n` gaps of an ascending list, normalized to unit mean.
pub fn spacings(eigenvalues: &[f64], n: usize) -> Result<SpacingSample> {
    spacings_with(eigenvalues, n, SpacingOptions::default())
}

pub fn spacings_with(eigenvalues: &[f64], n: usize, options: SpacingOptions) -> Result<SpacingSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if let Some(i) =
        eigenvalues.windows(2).position(|w| matches!(w[1].partial_cmp(&w[0]), None | Some(std::cmp::Ordering::Less)))
    {
        return Err(Error::Unsorted(i + 1));
    }
    let mut gaps: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    if options.drop_degenerate {
        let mean = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
        gaps.retain(|&g| g >= 1e-8 * mean);
    }
    if gaps.len() < n {
        let dropped = eigenvalues.len().saturating_sub(1) - gaps.len();
        return Err(Error::TooFewEigenvalues { needed: n + 1 + dropped, got: eigenvalues.len() });
    }
    gaps.truncate(n);
    if let Some(w) = options.unfold_window.filter(|&w| w > 0) {
        let local: Vec<f64> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(w);
                let hi = (i + w + 1).min(n);
                gaps[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect();
        for (g, m) in gaps.iter_mut().zip(local) {
            if m > 0.0 {
                *g /= m;
            }
        }
    }
    let mut sample = SpacingSample::new(gaps)?;
    sample.source_count = n + 1;
    Ok(sample)
}

fn check_s(s: f64) -> Result<f64> {
    if s >= 0.0 {
        Ok(s)
    } else {
        Err(Error::NegativeSpacing(s))
    }
}

/// `e^{-s}`.
pub fn poisson_pdf(s: f64) -> Result<f64> {
    Ok((-check_s(s)?).exp())
}

/// `pi s / 2 e^{-pi s^2 / 4}`.
pub fn goe_pdf(s: f64) -> Result<f64> {
    let s = check_s(s)?;
    Ok(0.5 * PI * s * (-PI * s * s / 4.0).exp())
}

pub fn poisson_cdf(s: f64) -> Result<f64> {
    Ok(-(-check_s(s)?).exp_m1())
}

pub fn goe_cdf(s: f64) -> Result<f64> {
    let s = check_s(s)?;
    Ok(-(-PI * s * s / 4.0).exp_m1())
}

/// Reference spacing law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Poisson,
    Goe,
}

impl Reference {
    pub fn pdf(self, s: f64) -> Result<f64> {
        match self {
            Reference::Poisson => poisson_pdf(s),
            Reference::Goe => goe_pdf(s),
        }
    }

    pub fn cdf(self, s: f64) -> Result<f64> {
        match self {
            Reference::Poisson => poisson_cdf(s),
            Reference::Goe => goe_cdf(s),
        }
    }
}

/// Kolmogorov-Smirnov distance `sup |F_n - F|`.
pub fn ks_distance(sample: &SpacingSample, reference: Reference) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let s = sample.sorted();
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = reference.cdf(x)?;
        d = d.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    Ok(d.min(1.0))
}

/// Cramer-von Mises statistic `omega^2 = 1/(12 n^2) + (1/n) sum (F(x_i) - (2i-1)/(2n))^2`.
pub fn cvm_distance(sample: &SpacingSample, reference: Reference) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let s = sample.sorted();
    let n = s.len() as f64;
    let mut acc = 1.0 / (12.0 * n * n);
    for (i, &x) in s.iter().enumerate() {
        let t = reference.cdf(x)? - (2 * i + 1) as f64 / (2.0 * n);
        acc += t * t / n;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub density: f64,
    /// Mean of the reference density over the bin.
    pub reference_poisson: f64,
    pub reference_goe: f64,
}

/// Area-normalized histogram on `[0, max_s)`. Samples at or beyond `max_s`
/// are counted in the normalization but not binned.
pub fn histogram(sample: &SpacingSample, bin_width: f64, max_s: f64) -> Result<Vec<HistogramBin>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) || !(max_s >= 0.0 && max_s.is_finite()) {
        return Err(Error::InvalidArgument(format!("bin width {bin_width}, max {max_s}")));
    }
    let bins = (max_s / bin_width).ceil() as usize;
    let mut counts = vec![0usize; bins];
    for &s in sample.spacings() {
        if s < max_s {
            counts[((s / bin_width) as usize).min(bins - 1)] += 1;
        }
    }
    let n = sample.len() as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| {
            let l = b as f64 * bin_width;
            let r = l + bin_width;
            Ok(HistogramBin {
                bin_left: l,
                bin_right: r,
                density: c as f64 / (n * bin_width),
                reference_poisson: (poisson_cdf(r)? - poisson_cdf(l)?) / bin_width,
                reference_goe: (goe_cdf(r)? - goe_cdf(l)?) / bin_width,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PoissonLike,
    GoeLike,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::PoissonLike => "poisson_like",
            Verdict::GoeLike => "goe_like",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// KS gap below which the Cramer-von Mises statistic decides.
pub const KS_MARGIN: f64 = 0.02;
/// Cramer-von Mises gap below which the verdict is inconclusive.
pub const CVM_MARGIN: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub ks_poisson: f64,
    pub ks_goe: f64,
    pub cvm_poisson: f64,
    pub cvm_goe: f64,
}

/// Labels a sample by the closer reference law in KS distance. When the
/// KS distances are within [`KS_MARGIN`] (typical of spectra with many
/// exactly degenerate gaps, where both distances equal the fraction of zero
/// gaps) the Cramer-von Mises statistic decides, and the result is
/// inconclusive if that too is within [`CVM_MARGIN`].
pub fn classify(sample: &SpacingSample) -> Result<Classification> {
    let ks_poisson = ks_distance(sample, Reference::Poisson)?;
    let ks_goe = ks_distance(sample, Reference::Goe)?;
    let cvm_poisson = cvm_distance(sample, Reference::Poisson)?;
    let cvm_goe = cvm_distance(sample, Reference::Goe)?;
    let pick = |p: f64, g: f64, margin: f64| {
        if (p - g).abs() < margin {
            None
        } else if p < g {
            Some(Verdict::PoissonLike)
        } else {
            Some(Verdict::GoeLike)
        }
    };
    let verdict = pick(ks_poisson, ks_goe, KS_MARGIN)
        .or_else(|| pick(cvm_poisson, cvm_goe, CVM_MARGIN))
        .unwrap_or(Verdict::Inconclusive);
    Ok(Classification { verdict, ks_poisson, ks_goe, cvm_poisson, cvm_goe })
}
