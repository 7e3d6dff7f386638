//! Grid geometry: the word-size parameter shared by both draws and the
//! aligned value ranges they are drawn from.

use crate::error::{Error, Result};

/// Smallest supported word size. Anything narrower leaves no interior
/// points once the two range edges are rejected.
pub const MIN_WORD_BITS: u32 = 2;

/// Largest supported word size. The composed output carries `2w`
/// fraction bits, and `2 * 26 = 52` is exactly what a binary64
/// significand holds; wider words would force rounding and break exact
/// uniformity.
pub const MAX_WORD_BITS: u32 = 26;

/// Fewest points a usable range can carry: the two edges are always
/// rejected and the acceptance band needs at least two interior points.
pub const MIN_GRID_POINTS: u64 = 4;

/// Grid resolution of the base draws and of the composed output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    w: u32,
    step: f64,
    output_step: f64,
}

impl Resolution {
    /// Resolution of a `w`-bit word: base grid step `2^-w`, composed
    /// output step `2^-2w`. Both are exact in binary64 for the
    /// supported `w`.
    pub fn new(w: u32) -> Result<Self> {
        if !(MIN_WORD_BITS..=MAX_WORD_BITS).contains(&w) {
            return Err(Error::WordSize(w));
        }
        let step = 1.0 / (1u64 << w) as f64;
        Ok(Resolution { w, step, output_step: step * step })
    }

    pub fn word_bits(&self) -> u32 {
        self.w
    }

    /// Base grid step `2^-w`.
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Composed output step `2^-2w`.
    pub fn output_step(&self) -> f64 {
        self.output_step
    }

    /// Number of points on the unit base grid, `2^w`.
    pub fn points(&self) -> u64 {
        1u64 << self.w
    }

    /// Largest composed output, `1 - 2^-2w`. Exact in binary64.
    pub fn max_output(&self) -> f64 {
        1.0 - self.output_step
    }
}

/// An inclusive range `[lo, hi]` of `count` equally spaced values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    lo: f64,
    hi: f64,
    step: f64,
    count: u64,
}

impl GridRange {
    /// Validates that `hi - lo` is a whole number of steps and that the
    /// range carries at least [`MIN_GRID_POINTS`] points. Misaligned
    /// bounds are refused here rather than silently shifting every grid
    /// comparison downstream.
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidRange(format!("non-finite bounds [{lo}, {hi}]")));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidRange(format!("step {step} must be positive and finite")));
        }
        if hi <= lo {
            return Err(Error::InvalidRange(format!("bounds [{lo}, {hi}] are not increasing")));
        }
        let span = (hi - lo) / step;
        if span.fract() != 0.0 || lo + span * step != hi {
            return Err(Error::InvalidRange(format!(
                "bounds [{lo}, {hi}] are not aligned to step {step}"
            )));
        }
        if span > (1u64 << 52) as f64 {
            return Err(Error::InvalidRange(format!("range [{lo}, {hi}] has too many points")));
        }
        let count = span as u64 + 1;
        if count < MIN_GRID_POINTS {
            return Err(Error::InvalidRange(format!(
                "range [{lo}, {hi}] carries {count} points, need at least {MIN_GRID_POINTS}"
            )));
        }
        Ok(GridRange { lo, hi, step, count })
    }

    /// The unit base grid `[0, 1 - 2^-w]` with step `2^-w`.
    pub fn unit(res: Resolution) -> Self {
        GridRange {
            lo: 0.0,
            hi: 1.0 - res.step(),
            step: res.step(),
            count: res.points(),
        }
    }

    /// Grid of `count` points with step `res.step()` starting at zero.
    /// `count` may not exceed `2^w`, which keeps the top point inside
    /// the unit interval.
    pub fn from_origin(count: u64, res: Resolution) -> Result<Self> {
        if count < MIN_GRID_POINTS || count > res.points() {
            return Err(Error::InvalidRange(format!(
                "point count {count} outside 4..=2^{}",
                res.word_bits()
            )));
        }
        Ok(GridRange {
            lo: 0.0,
            hi: (count - 1) as f64 * res.step(),
            step: res.step(),
            count,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Value at grid index `i`.
    pub fn value_at(&self, i: u64) -> f64 {
        self.lo + i as f64 * self.step
    }

    /// Grid index of `x`, or `None` when `x` is off the grid.
    pub fn index_of(&self, x: f64) -> Option<u64> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let q = (x - self.lo) / self.step;
        (q.fract() == 0.0).then_some(q as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_accepts_supported_word_sizes() {
        for w in MIN_WORD_BITS..=MAX_WORD_BITS {
            let res = Resolution::new(w).unwrap();
            assert_eq!(res.word_bits(), w);
            assert_eq!(res.step(), 1.0 / (1u64 << w) as f64);
            assert_eq!(res.output_step(), res.step() * res.step());
            assert_eq!(res.points(), 1u64 << w);
        }
    }

    #[test]
    fn resolution_rejects_out_of_range_word_sizes() {
        assert_eq!(Resolution::new(0), Err(Error::WordSize(0)));
        assert_eq!(Resolution::new(1), Err(Error::WordSize(1)));
        assert_eq!(Resolution::new(27), Err(Error::WordSize(27)));
    }

    #[test]
    fn resolution_steps_are_exact() {
        let res = Resolution::new(26).unwrap();
        assert_eq!(res.step(), 2f64.powi(-26));
        assert_eq!(res.output_step(), 2f64.powi(-52));
        assert_eq!(res.max_output(), 1.0 - 2f64.powi(-52));
        let res3 = Resolution::new(3).unwrap();
        assert_eq!(res3.max_output(), 63.0 / 64.0);
    }

    #[test]
    fn unit_range_spans_the_word_grid() {
        let res = Resolution::new(3).unwrap();
        let r = GridRange::unit(res);
        assert_eq!(r.lo(), 0.0);
        assert_eq!(r.hi(), 7.0 / 8.0);
        assert_eq!(r.count(), 8);
        assert_eq!(r.value_at(5), 5.0 / 8.0);
    }

    #[test]
    fn new_rejects_misaligned_bounds() {
        assert!(GridRange::new(0.0, 1.0, 0.3).is_err());
        assert!(GridRange::new(0.0, 0.0, 0.125).is_err());
        assert!(GridRange::new(1.0, 0.0, 0.125).is_err());
        assert!(GridRange::new(0.0, 1.0, -0.125).is_err());
        assert!(GridRange::new(0.0, f64::INFINITY, 0.125).is_err());
    }

    #[test]
    fn new_rejects_too_few_points() {
        // Two or three points leave no usable acceptance band.
        assert!(GridRange::new(0.0, 0.125, 0.125).is_err());
        assert!(GridRange::new(0.0, 0.25, 0.125).is_err());
        assert!(GridRange::new(0.0, 0.375, 0.125).is_ok());
    }

    #[test]
    fn from_origin_enforces_unit_interval() {
        let res = Resolution::new(3).unwrap();
        let r = GridRange::from_origin(6, res).unwrap();
        assert_eq!(r.hi(), 5.0 / 8.0);
        assert_eq!(r.count(), 6);
        assert!(GridRange::from_origin(9, res).is_err());
        assert!(GridRange::from_origin(3, res).is_err());
    }

    #[test]
    fn index_of_round_trips_grid_points() {
        let r = GridRange::new(0.25, 0.75, 0.0625).unwrap();
        assert_eq!(r.count(), 9);
        for i in 0..r.count() {
            assert_eq!(r.index_of(r.value_at(i)), Some(i));
        }
        assert_eq!(r.index_of(0.26), None);
        assert_eq!(r.index_of(1.0), None);
    }
}
