#pragma once

#include <iosfwd>

namespace sentsel::cli {

// Runs one command and returns the process exit code: 0 on success, 1 for
// usage errors, 2 for data or schema errors, 3 for backend or client errors.
// Errors are reported as one JSON line on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sentsel::cli
