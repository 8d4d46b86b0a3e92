use std::ops::{Range, RangeInclusive};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Finite index window `[lo, hi]` standing in for ℤ, with an interior margin excluded from
/// certification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexWindow {
    pub lo: i64,
    pub hi: i64,
    pub margin: usize,
}

impl IndexWindow {
    pub fn new(lo: i64, hi: i64, margin: usize) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidWindow(format!(
                "need lo < hi, got [{lo}, {hi}]"
            )));
        }
        if lo + margin as i64 > hi - margin as i64 {
            return Err(Error::InvalidWindow(format!(
                "margin {margin} leaves no interior in [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi, margin })
    }

    /// Number of indices in the window.
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.lo..=self.hi).contains(&n)
    }

    pub fn check(&self, n: i64) -> Result<usize> {
        if self.contains(n) {
            Ok((n - self.lo) as usize)
        } else {
            Err(Error::WindowBounds {
                index: n,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn index(&self, pos: usize) -> i64 {
        self.lo + pos as i64
    }

    pub fn indices(&self) -> RangeInclusive<i64> {
        self.lo..=self.hi
    }

    pub fn interior(&self) -> RangeInclusive<i64> {
        (self.lo + self.margin as i64)..=(self.hi - self.margin as i64)
    }

    /// Column positions of the interior.
    pub fn interior_cols(&self) -> Range<usize> {
        self.margin..(self.len() - self.margin)
    }
}

/// Finite time window `[lo, hi]` sampled with step `step`; the boundary layer of width
/// `margin` at each end is excluded from certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub margin: f64,
}

impl TimeWindow {
    pub fn new(lo: f64, hi: f64, step: f64, margin: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidWindow(format!(
                "need lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidWindow(format!(
                "grid step must be > 0, got {step}"
            )));
        }
        if !(margin >= 0.0) || lo + margin > hi - margin {
            return Err(Error::InvalidWindow(format!(
                "margin {margin} leaves no interior in [{lo}, {hi}]"
            )));
        }
        let cells = (hi - lo) / step;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::InvalidWindow(format!(
                "step {step} does not divide the window length {}",
                hi - lo
            )));
        }
        Ok(Self {
            lo,
            hi,
            step,
            margin,
        })
    }

    pub fn cells(&self) -> usize {
        ((self.hi - self.lo) / self.step).round() as usize
    }

    pub fn len(&self) -> usize {
        self.cells() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    /// Grid positions whose times lie in `[lo + margin, hi − margin]`.
    pub fn interior_cols(&self) -> Range<usize> {
        let skip = (self.margin / self.step - 1e-9).ceil().max(0.0) as usize;
        skip..(self.len() - skip)
    }
}
