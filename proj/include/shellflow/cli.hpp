#pragma once

#include "shellflow/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace shellflow {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,      ///< usage, config or I/O problem
    exit_blow_up = 3,    ///< numerical blow-up
    exit_violation = 4,  ///< an invariant or inequality check failed
};

struct InvariantResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Bilinear and noise invariant checks at N = 16 for the model parameters of rc
/// (nu, k0, delta, sigma shape). The Sabra checks honour rc.tamper_sabra_conjugation.
std::vector<InvariantResult> run_invariant_suite(const RunConfig& rc);

/// Entry point of `shellflow`. Writes human-readable output to out/err and
/// returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shellflow
