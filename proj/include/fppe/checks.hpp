#pragma once

/*
 * Property verification suite at the reference configuration
 * (N = 64, s = 0.25, p = 3, L = 1): spectral and functional identities,
 * inequality spot checks, two-route constant cross-checks, ground-state
 * certification, discrete energy-identity behaviour, decay envelopes,
 * the blow-up sandwich, and estimator consistency.  Shared by the
 * acceptance test binary and the `verify` subcommand.
 */

#include <cstdint>
#include <string>
#include <vector>

namespace fppe {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double runtime_sec = 0.0;
};

inline constexpr int kNumAcceptanceChecks = 11;

/// Runs check `criterion` (1-based); 0 runs the whole suite in order.
std::vector<CheckResult> run_acceptance_checks(std::uint64_t seed, int criterion = 0);

}  // namespace fppe
