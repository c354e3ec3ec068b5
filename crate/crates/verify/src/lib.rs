//! Holds the acceptance target in `tests/acceptance.rs`.
//!
//! It lives in its own package so that it runs after the unit and
//! integration suites of the other crates.
