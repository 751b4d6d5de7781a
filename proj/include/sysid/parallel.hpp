#pragma once

namespace sysid {

/// Execution policy for the loops that fan out over independent work items
/// (Monte Carlo replications, optimizer restarts). `Serial` is the reference
/// path; `Parallel` uses OpenMP and must produce bit-identical results.
enum class Exec { Serial, Parallel };

}  // namespace sysid
