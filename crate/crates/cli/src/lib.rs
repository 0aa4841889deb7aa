//! Command-line plumbing for btlab: descriptor files, the ball cache and the
//! experiment runner.

pub mod analysis;
pub mod cache;
pub mod config;
pub mod experiment;

use btlab_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

/// Exit code for an error that ended a command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
        Some(Error::Verification(_)) | Some(Error::NoExtension { .. }) | Some(Error::NotUnique { .. }) => {
            EXIT_VIOLATION
        }
        _ => EXIT_INVALID,
    }
}
