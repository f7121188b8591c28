//! Contracting Lorenz maps of the interval.
//!
//! A contracting Lorenz map is an increasing map of `[0,1] \ {c}` with one
//! discontinuity at the critical point `c`, where both one-sided derivatives
//! vanish, and with `0` and `1` fixed. This crate represents the standard
//! non-flat family
//!
//! ```text
//!   f(x) = v1 * (1 - ((c - x) / c)^alpha)               for x < c
//!   f(x) = v0 + (1 - v0) * ((x - c) / (1 - c))^beta      for x > c
//! ```
//!
//! and computes the structures used to describe its attractor: orbits with
//! one-sided critical semantics, periodic orbits by itinerary, first return
//! maps to nice intervals, renormalization towers, rotation numbers of gap
//! maps and a classifier that labels the topological attractor as periodic,
//! solenoidal, Cherry, a chaotic cycle of intervals or Cantor-with-wandering
//! evidence.
//!
//! Everything is pure computation on `f64` and runs without `std` (only
//! `alloc` is needed). File formats, reports and the command line live in the
//! companion `lorenz-tools` crate.
//!
//! ```
//! use lorenz_core::{MapParams, StandardLorenzMap, SignedPoint, IntervalMap};
//!
//! let f = StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 1.0, 0.0)).unwrap();
//! assert_eq!(f.evaluate(SignedPoint::new(0.25)), 0.75);
//! assert_eq!(f.evaluate(SignedPoint::left(0.5)), 1.0);
//! ```

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod cherry;
pub mod classify;
mod error;
mod float;
pub mod interval;
pub mod map;
pub mod orbits;
pub mod renorm;
pub mod return_map;
pub mod scan;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalCover};
pub use map::{
    validate, IntervalMap, MapParams, Side, SignedPoint, StandardLorenzMap, Tolerances,
    ValidationReport, Violation,
};
