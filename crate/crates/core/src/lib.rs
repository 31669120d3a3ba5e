//! Road-geometry diversity measures for lane-keeping test suites: pairwise
//! road distances, suite-level aggregations, direct measures, behavioral
//! diversity and the experiment harnesses built on them.

pub mod aggregation;
pub mod behavior;
pub mod direct_measures;
pub mod distances;
pub mod geometry;
pub mod io;
pub mod seeds;
pub mod study;
