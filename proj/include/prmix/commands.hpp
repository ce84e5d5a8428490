#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "prmix/bench.hpp"
#include "prmix/config.hpp"

namespace prmix::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumerical = 4 };

/// Maps the library's exception types onto process exit codes.
int exit_code_for(const std::exception_ptr& error) noexcept;

/// Validates `cfg`, takes the output directory lock, runs the command and
/// writes its artifacts plus manifest.json. Progress lines go to `log`.
/// Returns the artifact file names written (manifest last).
std::vector<std::string> run(const RunConfig& cfg, std::ostream& log);

/// Diagnostics for one scenario: oracle f*, equilibrium residual, gradient
/// identity, Jacobian spectrum, Markov-chain checks and the assumption suite
/// for `gamma` on an n-point simulated PR path.
nlohmann::json scenario_diagnostics(const bench::Scenario& scenario, double gamma, std::size_t n,
                                    std::uint64_t seed);

}  // namespace prmix::cli
