//! Holds no code. The acceptance checks live in `tests/acceptance.rs` and run
//! as their own test target, after the unit and integration tests of the
//! other crates.
