//! Scenario-driven front end for `sofr-core`.

pub mod commands;
pub mod report;
pub mod scenario;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const CHECK_FAILED: i32 = 3;
}
