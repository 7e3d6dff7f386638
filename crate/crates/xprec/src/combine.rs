//! The combining step: merging two base draws into one value on a finer
//! grid, the acceptance rule that keeps the merged value exactly
//! uniform, and the rescaling maps onto the unit interval.
//!
//! With grid step `k = 2^-w`, the merge `z = x1 + k * x2` has a density
//! that is constant only on `[a0 + k*b, a + k*b0]`, where `[a0, a]` and
//! `[b0, b]` are the draw ranges. Dropping first draws equal to `a0` or
//! `a` restricts the pairs to exactly that region, and over the
//! remaining pairs every attainable output occurs exactly once, so the
//! rescaled result is exactly equiprobable on its lattice.

use crate::error::{Error, Result};
use crate::grid::{GridRange, Resolution, MIN_GRID_POINTS};

/// Merges two base draws into one value with squared resolution. The
/// second draw fills the grid gaps of the first.
pub fn combine(x1: f64, x2: f64, res: Resolution) -> f64 {
    x1 + res.step() * x2
}

/// Bounds of the region where the merged value is uniformly dense,
/// from raw range bounds. Degenerate bounds are allowed here; this is
/// pure interval arithmetic.
pub fn uniform_interval_bounds(a0: f64, a: f64, b0: f64, b: f64, step: f64) -> (f64, f64) {
    (a0 + step * b, a + step * b0)
}

/// Bounds of the uniformly dense region for a pair of draw ranges.
pub fn uniform_interval(r1: &GridRange, r2: &GridRange, res: Resolution) -> (f64, f64) {
    uniform_interval_bounds(r1.lo(), r1.hi(), r2.lo(), r2.hi(), res.step())
}

/// Acceptance rule for the first draw: the two edge values of its
/// range would stick out of the uniform region and are rejected.
pub fn is_accepted(x1: f64, r1: &GridRange) -> bool {
    x1 != r1.lo() && x1 != r1.hi()
}

/// Rescales a merged pair onto `[0, 1]`, treating both draws as points
/// of a continuum: `((x1 + k*x2) - (a0 + k*b)) / ((a - a0) - k*(b - b0))`.
///
/// The start of the uniform region maps to 0 and its end to 1.
pub fn normalize_continuous(
    x1: f64,
    x2: f64,
    r1: &GridRange,
    r2: &GridRange,
    res: Resolution,
) -> Result<f64> {
    let k = res.step();
    let den = (r1.hi() - r1.lo()) - k * (r2.hi() - r2.lo());
    if !(den > 0.0) {
        return Err(Error::InvalidRange(format!(
            "uniform region has non-positive width {den}"
        )));
    }
    Ok(((x1 + k * x2) - (r1.lo() + k * r2.hi())) / den)
}

/// Rescales an accepted pair onto the discrete output lattice
/// `[0, 1 - 2^-2w]`.
///
/// The first draw is reduced to its interior grid offset, the second
/// fills in the fine fraction, and the ratio is scaled so the largest
/// accepted pair lands exactly on `1 - 2^-2w`:
///
/// `trunc((x1 - a0 - k)/k) + x2 - b0` over
/// `trunc((a - a0 - 2k)/k) + b - b0`, times `1 - 2^-2w`.
///
/// Truncation is toward zero; the arguments are never negative for
/// accepted grid-aligned draws. The numerator is fully summed, then
/// divided, then scaled, so results are reproducible bit for bit
/// wherever binary64 rounds to nearest even.
pub fn normalize_discrete(
    x1: f64,
    x2: f64,
    r1: &GridRange,
    r2: &GridRange,
    res: Resolution,
) -> Result<f64> {
    if !is_accepted(x1, r1) {
        return Err(Error::RejectedBoundary(x1));
    }
    let k = res.step();
    let num = ((x1 - r1.lo() - k) / k).trunc() + x2 - r2.lo();
    let den = ((r1.hi() - r1.lo() - 2.0 * k) / k).trunc() + r2.hi() - r2.lo();
    Ok(num / den * (1.0 - res.output_step()))
}

/// Unit-interval special case of [`normalize_discrete`], with both
/// draws on `[0, 1 - k]`, written out with fewer terms:
/// `(1 - k^2) * (trunc(x1/k) + x2 - 1) / (trunc(1/k) - 2 - k)`.
///
/// Kept in its short form as a second route to the same lattice; it
/// agrees with the general form within 2 units in the last place.
pub fn normalize_unit(x1: f64, x2: f64, res: Resolution) -> Result<f64> {
    let k = res.step();
    if x1 == 0.0 || x1 == 1.0 - k {
        return Err(Error::RejectedBoundary(x1));
    }
    let num = (x1 / k).trunc() + x2 - 1.0;
    let den = (1.0 / k).trunc() - 2.0 - k;
    Ok((1.0 - res.output_step()) * num / den)
}

/// Packs an accepted pair of grid indices into a single lattice index.
///
/// First indices `1..=m-2` and second indices `0..=m-1` map
/// bijectively onto `0..=(m-2)*m - 1`, ordered the same way as the
/// output values.
pub fn compose_index(i1: u64, i2: u64, m: u64) -> Result<u64> {
    if i1 == 0 || i1 + 1 >= m {
        return Err(Error::IndexOutOfBand { index: i1, m });
    }
    if i2 >= m {
        return Err(Error::IndexOutOfBand { index: i2, m });
    }
    Ok((i1 - 1) * m + i2)
}

fn check_lattice(m: u64, res: Resolution) -> Result<()> {
    if m < MIN_GRID_POINTS {
        return Err(Error::InvalidRange(format!(
            "modulus {m} leaves no interior acceptance band"
        )));
    }
    if m > res.points() {
        return Err(Error::InvalidRange(format!(
            "modulus {m} exceeds the 2^{} base grid",
            res.word_bits()
        )));
    }
    Ok(())
}

/// Composed output value for lattice index `j` over modulus `m`.
///
/// Decodes `i1 = j/m + 1`, `i2 = j mod m` and evaluates the discrete
/// rescaling on integers with a single division:
/// `num / den * (1 - 2^-2w)` with `num = (i1-1)*2^w + i2` and
/// `den = (m-3)*2^w + (m-1)`. Strictly increasing in `j`; the smallest
/// index gives exactly 0 and the largest exactly `1 - 2^-2w`.
pub fn index_to_unit(j: u64, m: u64, res: Resolution) -> Result<f64> {
    check_lattice(m, res)?;
    if j >= (m - 2) * m {
        return Err(Error::IndexOutOfRange { j, m });
    }
    let i1 = j / m + 1;
    let i2 = j % m;
    let w = res.word_bits();
    let num = ((i1 - 1) << w) + i2;
    let den = ((m - 3) << w) + (m - 1);
    Ok(num as f64 / den as f64 * (1.0 - res.output_step()))
}

/// Recovers the lattice index behind a composed output value, or
/// `None` when the value is not on the lattice for this `m` and
/// resolution. Exact inverse of [`index_to_unit`] over attained values.
pub fn index_from_value(value: f64, m: u64, res: Resolution) -> Option<u64> {
    if check_lattice(m, res).is_err() {
        return None;
    }
    if !(value >= 0.0 && value <= res.max_output()) {
        return None;
    }
    let w = res.word_bits();
    let den = ((m - 3) << w) + (m - 1);
    let num = (value / (1.0 - res.output_step()) * den as f64).round();
    if !(num >= 0.0 && num <= den as f64) {
        return None;
    }
    let num = num as u64;
    let i1_offset = num >> w;
    let i2 = num & ((1u64 << w) - 1);
    if i2 >= m || i1_offset > m - 3 {
        return None;
    }
    let j = i1_offset * m + i2;
    (index_to_unit(j, m, res) == Ok(value)).then_some(j)
}

/// Reflects a closed-lattice value onto the top of the unit interval:
/// `[0, 1 - 2^-2w]` becomes `[2^-2w, 1]`. The result is never zero,
/// which makes it safe under logarithms.
pub fn open_unit(z: f64, res: Resolution) -> f64 {
    debug_assert!((0.0..=res.max_output()).contains(&z));
    1.0 - z
}
