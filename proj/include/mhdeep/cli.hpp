#pragma once

namespace mhdeep::cli {

// Parses argv, runs one pipeline command and reports the outcome.
// Exit codes: 0 success, 1 usage, 2 config, 3 data, 4 numeric failure.
int run(int argc, const char* const* argv);

}  // namespace mhdeep::cli
