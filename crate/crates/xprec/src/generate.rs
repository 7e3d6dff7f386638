//! Generation pipelines built on the combining step: the canonical
//! integer-lattice generator over a [`UniformSource`], and the
//! accept-reject loop over real-valued draws on an arbitrary range.

use crate::combine::{compose_index, index_to_unit, open_unit};
use crate::error::{Error, Result};
use crate::grid::{Resolution, MIN_GRID_POINTS};
use crate::sources::{RealSource, UniformSource};

/// One composed draw: the lattice index identifying the accepted input
/// pair, and its value on the output lattice `[0, 1 - 2^-2w]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedSample {
    pub j: u64,
    pub value: f64,
}

/// An accepted real draw pair from the continuous accept-reject loop,
/// with its rescaled value on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealSample {
    pub r1: f64,
    pub r2: f64,
    pub value: f64,
}

/// Canonical generator: composes pairs of integer draws into
/// extended-precision uniform values via the lattice index, keeping
/// rejection counters for cost accounting.
///
/// Per composed output it draws a first index, redrawing while the
/// draw is 0 or `m - 1` (only those two values are ever rejected),
/// then one second index.
#[derive(Clone, Debug)]
pub struct ExtendedGenerator<S> {
    src: S,
    m: u64,
    res: Resolution,
    first_draws: u64,
    rejected_draws: u64,
}

impl<S: UniformSource> ExtendedGenerator<S> {
    /// Wraps a source whose modulus fits the resolution: at least 4
    /// values (so an interior acceptance band exists) and at most
    /// `2^w` (so composed fractions stay on the `2w`-bit grid).
    pub fn new(src: S, res: Resolution) -> Result<Self> {
        let m = src.modulus();
        if m < MIN_GRID_POINTS {
            return Err(Error::InvalidRange(format!(
                "source modulus {m} leaves no interior acceptance band"
            )));
        }
        if m > res.points() {
            return Err(Error::InvalidRange(format!(
                "source modulus {m} exceeds the 2^{} base grid",
                res.word_bits()
            )));
        }
        Ok(ExtendedGenerator { src, m, res, first_draws: 0, rejected_draws: 0 })
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    /// First-draw attempts so far, accepted and rejected together.
    pub fn first_draws(&self) -> u64 {
        self.first_draws
    }

    /// First-draw attempts rejected at the band edges so far.
    pub fn rejected_draws(&self) -> u64 {
        self.rejected_draws
    }

    pub fn into_inner(self) -> S {
        self.src
    }

    /// Next composed draw with its lattice index.
    pub fn next_sample(&mut self) -> Result<ExtendedSample> {
        let i1 = loop {
            let i1 = self.src.next_value().ok_or(Error::SourceExhausted)?;
            self.first_draws += 1;
            if i1 == 0 || i1 == self.m - 1 {
                self.rejected_draws += 1;
                continue;
            }
            break i1;
        };
        let i2 = self.src.next_value().ok_or(Error::SourceExhausted)?;
        let j = compose_index(i1, i2, self.m)?;
        Ok(ExtendedSample { j, value: index_to_unit(j, self.m, self.res)? })
    }

    /// Next composed value on the closed lattice `[0, 1 - 2^-2w]`.
    pub fn next_value(&mut self) -> Result<f64> {
        self.next_sample().map(|s| s.value)
    }

    /// Next composed value reflected onto `(0, 1]`; never zero.
    pub fn next_open(&mut self) -> Result<f64> {
        self.next_sample().map(|s| open_unit(s.value, self.res))
    }
}

/// One-shot composed draw from a source; see [`ExtendedGenerator`].
pub fn next_extended<S: UniformSource>(src: &mut S, res: Resolution) -> Result<ExtendedSample> {
    ExtendedGenerator::new(src, res)?.next_sample()
}

/// Accept-reject extension over real draws on `[min, max]`.
///
/// First draws are redrawn while they fall outside
/// `[min + k*(max - min), max - k*(max - min)]` (the bounds themselves
/// are accepted); one second draw then fills in the fine fraction, and
/// the pair is rescaled onto `[0, 1]`:
/// `((r1 + k*r2) - (min + k*max)) / ((max - min) * (1 - k))`.
///
/// The redraw bounds, the offset and the denominator are folded once
/// at construction; the per-draw work is two comparisons, a multiply
/// add, a subtraction and a division.
#[derive(Clone, Copy, Debug)]
pub struct RangeExtender {
    step: f64,
    r_min: f64,
    r_max: f64,
    offset: f64,
    denom: f64,
}

impl RangeExtender {
    pub fn new(min: f64, max: f64, res: Resolution) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || !(max > min) {
            return Err(Error::InvalidRange(format!(
                "draw range [{min}, {max}] must be finite and increasing"
            )));
        }
        let k = res.step();
        let span = max - min;
        let denom = span * (1.0 - k);
        if !denom.is_finite() || denom <= 0.0 {
            return Err(Error::InvalidRange(format!(
                "draw range [{min}, {max}] is too wide or too narrow to rescale"
            )));
        }
        Ok(RangeExtender {
            step: k,
            r_min: min + k * span,
            r_max: max - k * span,
            offset: min + k * max,
            denom,
        })
    }

    /// Acceptance bounds for the first draw, inclusive on both sides.
    pub fn bounds(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    /// Next accepted pair and its rescaled value. The second draw is
    /// only consumed after a first draw has been accepted.
    pub fn next_sample<R: RealSource>(&self, src: &mut R) -> Result<RealSample> {
        let r1 = loop {
            let r1 = src.next_real().ok_or(Error::SourceExhausted)?;
            if r1 < self.r_min || r1 > self.r_max {
                continue;
            }
            break r1;
        };
        let r2 = src.next_real().ok_or(Error::SourceExhausted)?;
        let value = ((r1 + self.step * r2) - self.offset) / self.denom;
        Ok(RealSample { r1, r2, value })
    }

    /// Next rescaled value on `[0, 1]`.
    pub fn next<R: RealSource>(&self, src: &mut R) -> Result<f64> {
        self.next_sample(src).map(|s| s.value)
    }
}

/// One-shot accept-reject extension over real draws; see
/// [`RangeExtender`].
pub fn extend_real_draws<R: RealSource>(
    src: &mut R,
    min: f64,
    max: f64,
    res: Resolution,
) -> Result<f64> {
    RangeExtender::new(min, max, res)?.next(src)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{Counter, RealSequence, SequenceSource};

    fn res(w: u32) -> Resolution {
        Resolution::new(w).unwrap()
    }

    #[test]
    fn next_extended_walks_the_lattice() {
        let r = res(3);
        let mut s = SequenceSource::new(vec![0, 1, 0], 8).unwrap();
        let sample = next_extended(&mut s, r).unwrap();
        assert_eq!((sample.j, sample.value), (0, 0.0));

        let mut s = SequenceSource::new(vec![7, 6, 7], 8).unwrap();
        let sample = next_extended(&mut s, r).unwrap();
        assert_eq!((sample.j, sample.value), (47, 63.0 / 64.0));

        let mut s = SequenceSource::new(vec![3, 5], 8).unwrap();
        let sample = next_extended(&mut s, r).unwrap();
        assert_eq!(sample.j, 21);
        assert_eq!(sample.value, crate::combine::index_to_unit(21, 8, r).unwrap());
    }

    #[test]
    fn generator_counts_rejections() {
        let r = res(3);
        let mut g = ExtendedGenerator::new(Counter::new(8).unwrap(), r).unwrap();
        // Counter feed 0,1,2,3,4,5,6,7,...: 0 is rejected, then pairs
        // (1,2), (3,4), (5,6) are accepted in order.
        let samples: Vec<ExtendedSample> = (0..3).map(|_| g.next_sample().unwrap()).collect();
        assert_eq!(samples.iter().map(|s| s.j).collect::<Vec<_>>(), vec![2, 20, 38]);
        assert_eq!(
            samples.iter().map(|s| s.value.to_bits()).collect::<Vec<_>>(),
            vec![0x3fa572620ae4c416, 0x3fdacefa8d9df51b, 0x3fe977d46cefa8d9]
        );
        assert_eq!(g.first_draws(), 4);
        assert_eq!(g.rejected_draws(), 1);
    }

    #[test]
    fn generator_rejects_unusable_moduli() {
        let r = res(3);
        assert!(ExtendedGenerator::new(Counter::new(3).unwrap(), r).is_err());
        assert!(ExtendedGenerator::new(Counter::new(16).unwrap(), r).is_err());
        assert!(ExtendedGenerator::new(Counter::new(8).unwrap(), r).is_ok());
        assert!(ExtendedGenerator::new(Counter::new(6).unwrap(), r).is_ok());
    }

    #[test]
    fn generator_reports_exhaustion() {
        let r = res(3);
        // Rejected first draw, then nothing left for a retry.
        let mut g =
            ExtendedGenerator::new(SequenceSource::new(vec![0], 8).unwrap(), r).unwrap();
        assert_eq!(g.next_sample(), Err(Error::SourceExhausted));
        // Accepted first draw, but no second draw available.
        let mut g =
            ExtendedGenerator::new(SequenceSource::new(vec![1], 8).unwrap(), r).unwrap();
        assert_eq!(g.next_sample(), Err(Error::SourceExhausted));
    }

    #[test]
    fn open_values_avoid_zero() {
        let r = res(3);
        let mut g = ExtendedGenerator::new(
            SequenceSource::new(vec![1, 0, 6, 7], 8).unwrap(),
            r,
        )
        .unwrap();
        assert_eq!(g.next_open().unwrap(), 1.0);
        assert_eq!(g.next_open().unwrap(), 1.0 / 64.0);
    }

    #[test]
    fn extender_matches_worked_trace() {
        let r = res(3);
        let ext = RangeExtender::new(0.0, 0.875, r).unwrap();
        assert_eq!(ext.bounds(), (7.0 / 64.0, 49.0 / 64.0));
        // 0.0 falls below the lower bound and is redrawn.
        let mut src = RealSequence::new(vec![0.0, 0.25, 0.5]);
        let s = ext.next_sample(&mut src).unwrap();
        assert_eq!((s.r1, s.r2), (0.25, 0.5));
        assert_eq!(s.value, 13.0 / 49.0);
        // 7/8 exceeds the upper bound twice before 0.5 is accepted.
        let mut src = RealSequence::new(vec![0.875, 0.875, 0.5, 0.25]);
        assert_eq!(ext.next(&mut src).unwrap(), 27.0 / 49.0);
    }

    #[test]
    fn extender_accepts_its_own_bounds() {
        let r = res(3);
        let ext = RangeExtender::new(0.0, 0.875, r).unwrap();
        let (lo, hi) = ext.bounds();
        let mut src = RealSequence::new(vec![lo, 0.0]);
        assert_eq!(ext.next(&mut src).unwrap(), 0.0);
        let mut src = RealSequence::new(vec![hi, 0.875]);
        assert_eq!(ext.next(&mut src).unwrap(), 1.0);
    }

    #[test]
    fn extender_rejects_bad_ranges() {
        let r = res(3);
        assert!(RangeExtender::new(0.5, 0.5, r).is_err());
        assert!(RangeExtender::new(1.0, 0.0, r).is_err());
        assert!(RangeExtender::new(0.0, f64::INFINITY, r).is_err());
        assert!(RangeExtender::new(f64::NAN, 1.0, r).is_err());
    }

    #[test]
    fn extender_reports_exhaustion() {
        let r = res(3);
        let ext = RangeExtender::new(0.0, 0.875, r).unwrap();
        let mut src = RealSequence::new(vec![0.0]);
        assert_eq!(ext.next(&mut src), Err(Error::SourceExhausted));
    }

    #[test]
    fn one_shot_helpers_delegate() {
        let r = res(3);
        let mut src = RealSequence::new(vec![0.0, 0.25, 0.5]);
        assert_eq!(extend_real_draws(&mut src, 0.0, 0.875, r).unwrap(), 13.0 / 49.0);
    }
}
