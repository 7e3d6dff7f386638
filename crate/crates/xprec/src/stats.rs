//! Verification suite: an exhaustive small-grid oracle that checks
//! exact equiprobability by enumeration, plus chi-square,
//! Kolmogorov-Smirnov and low-bits tests for large streams, and
//! rejection-cost measurement.

mod special;

use crate::combine::{is_accepted, normalize_discrete};
use crate::error::{Error, Result};
use crate::generate::{ExtendedGenerator, ExtendedSample};
use crate::grid::{GridRange, Resolution, MIN_GRID_POINTS};
use crate::sources::UniformSource;
use special::{kolmogorov_survival, reg_gamma_upper};
use std::fmt;

/// Largest modulus the exhaustive oracle will enumerate (m² pairs).
pub const ORACLE_MAX_M: u64 = 4096;

/// Two-sided acceptance band for p-values. A test passes when its
/// p-value lies inside the closed band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PValueBand {
    lo: f64,
    hi: f64,
}

impl PValueBand {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && (0.0..1.0).contains(&lo) && lo < hi && hi <= 1.0)
        {
            return Err(Error::InvalidBand { lo, hi });
        }
        Ok(PValueBand { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }
}

impl Default for PValueBand {
    /// `[0.001, 0.999]`: wide enough that a sound generator rarely
    /// trips it, tight enough to flag gross defects on both tails.
    fn default() -> Self {
        PValueBand { lo: 0.001, hi: 0.999 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Outcome of one statistical test.
#[derive(Clone, Debug, PartialEq)]
pub struct TestReport {
    pub test_name: &'static str,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub verdict: Verdict,
}

impl TestReport {
    fn new(test_name: &'static str, statistic: f64, p_value: f64, n: usize, band: PValueBand) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        let verdict = if band.contains(p_value) { Verdict::Pass } else { Verdict::Fail };
        TestReport { test_name, statistic, p_value, n, verdict }
    }
}

fn pearson(counts: &[u64], name: &'static str, band: PValueBand) -> TestReport {
    let n: u64 = counts.iter().sum();
    let bins = counts.len();
    let expected = n as f64 / bins as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let p = reg_gamma_upper((bins as f64 - 1.0) / 2.0, statistic / 2.0);
    TestReport::new(name, statistic, p, n as usize, band)
}

/// Chi-square goodness of fit of pre-binned counts against equal
/// expected counts. No minimum-count guard is applied; the caller
/// vouches for the binning.
pub fn chi_square_from_counts(counts: &[u64], band: PValueBand) -> Result<TestReport> {
    if counts.len() < 2 {
        return Err(Error::InvalidBins(counts.len()));
    }
    if counts.iter().sum::<u64>() == 0 {
        return Err(Error::InsufficientData { got: 0, needed: 1 });
    }
    Ok(pearson(counts, "chi2", band))
}

fn bin_samples(samples: &[f64], bins: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; bins];
    for &v in samples {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::InvalidRange(format!("sample {v} is outside [0, 1)")));
        }
        let bin = ((v * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    Ok(counts)
}

/// Chi-square uniformity test of raw samples in `[0, 1)` over equal
/// bins. Requires at least 10 samples per bin on average so the
/// chi-square approximation holds.
pub fn chi_square_uniformity(samples: &[f64], bins: usize, band: PValueBand) -> Result<TestReport> {
    if bins < 2 {
        return Err(Error::InvalidBins(bins));
    }
    if samples.len() < 10 * bins {
        return Err(Error::InsufficientData { got: samples.len(), needed: 10 * bins });
    }
    Ok(pearson(&bin_samples(samples, bins)?, "chi2", band))
}

/// One-sample Kolmogorov-Smirnov test of samples in `[0, 1]` against
/// the uniform distribution, with the asymptotic p-value (hence the
/// minimum sample count).
pub fn ks_uniformity(samples: &[f64], band: PValueBand) -> Result<TestReport> {
    if samples.len() < 100 {
        return Err(Error::InsufficientData { got: samples.len(), needed: 100 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    if sorted[0] < 0.0 || *sorted.last().unwrap() > 1.0 {
        let v = if sorted[0] < 0.0 { sorted[0] } else { *sorted.last().unwrap() };
        return Err(Error::InvalidRange(format!("sample {v} is outside [0, 1]")));
    }
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        d = d.max(x - i as f64 / n).max((i as f64 + 1.0) / n - x);
    }
    let p = kolmogorov_survival(n.sqrt() * d);
    Ok(TestReport::new("ks", d, p, samples.len(), band))
}

/// Chi-square test on the low half of each composed draw: the low `w`
/// bits of the lattice index, downshifted into `bins` classes. The
/// samples must come from a `2^w`-point source, where those bits are
/// exactly the second draw and an honest stream spreads them evenly.
///
/// `bins` must be a power of two no larger than `2^w`. A full
/// exhaustive lattice is accepted whole, so the only floor on sample
/// count is one per bin on average.
pub fn low_bits_uniformity(
    samples: &[ExtendedSample],
    res: Resolution,
    bins: usize,
    band: PValueBand,
) -> Result<TestReport> {
    if bins < 2 || !bins.is_power_of_two() || bins.trailing_zeros() > res.word_bits() {
        return Err(Error::InvalidBins(bins));
    }
    if samples.len() < bins {
        return Err(Error::InsufficientData { got: samples.len(), needed: bins });
    }
    let w = res.word_bits();
    let shift = w - bins.trailing_zeros();
    let mut counts = vec![0u64; bins];
    for s in samples {
        let low = s.j & ((1u64 << w) - 1);
        counts[(low >> shift) as usize] += 1;
    }
    let mut report = pearson(&counts, "lowbits", band);
    report.n = samples.len();
    Ok(report)
}

/// Fraction of first draws rejected at the band edges while producing
/// `n` composed outputs. Under an ideal uniform source the expected
/// fraction is exactly `2/m`.
pub fn rejection_rate<S: UniformSource>(src: S, res: Resolution, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InsufficientData { got: 0, needed: 1 });
    }
    let mut gen = ExtendedGenerator::new(src, res)?;
    for _ in 0..n {
        gen.next_sample()?;
    }
    Ok(gen.rejected_draws() as f64 / gen.first_draws() as f64)
}

/// Summary of an exhaustive enumeration of all m² input pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub m: u64,
    pub word_bits: u32,
    pub distinct_count: u64,
    pub min_value: f64,
    pub max_value: f64,
    pub max_multiplicity: u64,
    /// True iff every accepted pair produced its own distinct value:
    /// `(m-2)*m` outputs, each attained exactly once, hence exactly
    /// equiprobable under uniform inputs.
    pub uniform: bool,
}

impl fmt::Display for OracleResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={} w={} distinct={} min={} max={} uniform={}",
            self.m, self.word_bits, self.distinct_count, self.min_value, self.max_value, self.uniform
        )
    }
}

/// Enumerates every input pair on an `m`-point grid with step `2^-w`,
/// applies the acceptance rule and the discrete rescaling, and reports
/// whether the outputs are exactly equiprobable.
///
/// This is a certificate, not a sample: for the given `(m, w)` it
/// checks the uniformity claim on all inputs there are.
pub fn exhaustive_oracle(m: u64, res: Resolution) -> Result<OracleResult> {
    if m < MIN_GRID_POINTS {
        return Err(Error::InvalidRange(format!(
            "modulus {m} leaves no interior acceptance band"
        )));
    }
    if m > ORACLE_MAX_M {
        return Err(Error::EnumerationTooLarge { m, limit: ORACLE_MAX_M });
    }
    if m > res.points() {
        return Err(Error::InvalidRange(format!(
            "modulus {m} exceeds the 2^{} base grid",
            res.word_bits()
        )));
    }
    let range = GridRange::from_origin(m, res)?;
    let mut values = Vec::with_capacity(((m - 2) * m) as usize);
    for i1 in 0..m {
        let x1 = range.value_at(i1);
        if !is_accepted(x1, &range) {
            continue;
        }
        for i2 in 0..m {
            values.push(normalize_discrete(x1, range.value_at(i2), &range, &range, res)?);
        }
    }
    // Non-negative finite values: bit order is value order.
    values.sort_unstable_by_key(|v| v.to_bits());
    let mut distinct_count = 0u64;
    let mut max_multiplicity = 0u64;
    let mut run = 0u64;
    let mut prev = f64::NAN;
    for &v in &values {
        if v == prev {
            run += 1;
        } else {
            distinct_count += 1;
            run = 1;
            prev = v;
        }
        max_multiplicity = max_multiplicity.max(run);
    }
    Ok(OracleResult {
        m,
        word_bits: res.word_bits(),
        distinct_count,
        min_value: values[0],
        max_value: *values.last().unwrap(),
        max_multiplicity,
        uniform: distinct_count == (m - 2) * m && max_multiplicity == 1,
    })
}
