#pragma once

#include <stdexcept>
#include <string>

namespace dss {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape/extent mismatches between containers that must agree.
struct ShapeError : Error { using Error::Error; };
// Argument outside its documented domain (bad enum, bad range).
struct DomainError : Error { using Error::Error; };
// A checked 32-bit accumulator left the representable range.
struct OverflowError : Error { using Error::Error; };
// Operation on an empty container that requires contents.
struct EmptyError : Error { using Error::Error; };
// Internal contract violation (a "can't happen" path).
struct LogicError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
// Training diverged (non-finite loss).
struct TrainingError : Error { using Error::Error; };
// Parallelism budget cannot be met.
struct BudgetError : Error { using Error::Error; };
struct CompileError : Error { using Error::Error; };
// Malformed or wrong-version model/spike files.
struct FormatError : Error { using Error::Error; };

}  // namespace dss
