//! Test-only package. The checks live in `tests/acceptance.rs`:
//!
//! ```text
//! cargo test -p skfb-acceptance -- --nocapture --test-threads 1
//! ```
