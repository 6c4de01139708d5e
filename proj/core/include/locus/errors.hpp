#pragma once

#include <stdexcept>
#include <string>

namespace locus {

// Input bytes that could not be decoded: malformed XML/JSON/CSV, bad magic,
// truncated binary payloads.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a precondition or semantic constraint
// (k out of range, empty class, unknown query, missing file).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A broken internal invariant: a bug, not a caller mistake.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace locus
