#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rbll::cli {

// Batch front end. Subcommands: certify, phi, kernels, flow, dist, spectrum,
// deficit, report. Exit code 0 on success, 1 on argument errors, 2 on
// computation errors, 3 when a certified property is violated (signals a
// bug, e.g. the symmetrization inequality failing beyond error bars).
int run(const std::vector<std::string>& args, std::ostream& out);

}  // namespace rbll::cli
