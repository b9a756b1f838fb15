//! Command-line front ends: `phd-run` hosts a program with an embedded
//! controller, `phd-direct` directs it from a terminal and optionally over
//! HTTP.

pub mod bridge;
