use serde::{Deserialize, Serialize};

/// Size limits for the brute-force parts of the library.
///
/// Every enumeration checks its limit before allocating and fails with
/// `Error::BudgetExceeded` instead of running away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Largest residue ring `|O_R|` that may be constructed.
    pub max_ring: u64,
    /// Largest ring handed to the isomorphism search.
    pub max_iso: u64,
    /// Largest number of candidate module matrices / ball vertices.
    pub max_vertices: u64,
    /// Node limit for backtracking searches (germs, canonical forms).
    pub max_search: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_ring: 1 << 20,
            max_iso: 1024,
            max_vertices: 2_000_000,
            max_search: 20_000_000,
        }
    }
}
