#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oscsum::cli {

// Exit codes: 0 success, 1 unexpected failure, 2 bad input, 3 a numerical
// certificate could not be established.
inline constexpr int kOk = 0, kInternal = 1, kInvalid = 2, kCertificate = 3;

// Runs one command line. Results go to --output (or `out` when no path is
// given); diagnostics go to `err`. No output file is created on failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oscsum::cli
