//! Floating-point operation accounting.
//!
//! Counts are analytic per kernel call using one fixed convention: a complex
//! multiply-add is 8 real flops, a complex multiply 6, a complex add 2, a
//! real-by-complex multiply 2 and a real multiply or add 1.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::Serialize;

pub const CMAC: u64 = 8;
pub const CMUL: u64 = 6;
pub const CADD: u64 = 2;
pub const RCMUL: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Work shared by all rows and done once per measurement set.
    Precompute,
    Gradient,
    LineSearch,
    Projection,
    Momentum,
    CUpdate,
    DUpdate,
    EUpdate,
    /// Objective evaluations made only to record the trace.
    Monitor,
}

impl Phase {
    pub const ALL: [Phase; 9] = [
        Phase::Precompute,
        Phase::Gradient,
        Phase::LineSearch,
        Phase::Projection,
        Phase::Momentum,
        Phase::CUpdate,
        Phase::DUpdate,
        Phase::EUpdate,
        Phase::Monitor,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Precompute => "precompute",
            Phase::Gradient => "gradient",
            Phase::LineSearch => "line-search",
            Phase::Projection => "projection",
            Phase::Momentum => "momentum",
            Phase::CUpdate => "c-update",
            Phase::DUpdate => "d-update",
            Phase::EUpdate => "e-update",
            Phase::Monitor => "monitor",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlopCounter {
    counts: [u64; Phase::ALL.len()],
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, phase: Phase, flops: u64) {
        self.counts[phase.index()] += flops;
    }

    pub fn get(&self, phase: Phase) -> u64 {
        self.counts[phase.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Total without [`Phase::Monitor`].
    pub fn algorithmic(&self) -> u64 {
        self.total() - self.get(Phase::Monitor)
    }

    pub fn phases(&self) -> impl Iterator<Item = (Phase, u64)> + '_ {
        Phase::ALL.iter().map(|&p| (p, self.get(p)))
    }
}

impl AddAssign for FlopCounter {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.counts.iter_mut().zip(rhs.counts) {
            *a += b;
        }
    }
}

impl Add for FlopCounter {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl std::iter::Sum for FlopCounter {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

impl Serialize for FlopCounter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(Phase::ALL.len() + 1))?;
        for (p, v) in self.phases() {
            map.serialize_entry(p.name(), &v)?;
        }
        map.serialize_entry("total", &self.total())?;
        map.end()
    }
}
