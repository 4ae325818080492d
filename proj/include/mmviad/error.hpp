#pragma once

#include <stdexcept>
#include <string>

namespace mmviad {

// Input data violates a schema or invariant (exit status 2 at the CLI).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class TaxonomyError : public DataError {
 public:
  using DataError::DataError;
};

// Marked and unmarked rasters disagree in size, or frames drift mid-clip.
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

// Missing or undecodable frame image.
class FrameError : public DataError {
 public:
  using DataError::DataError;
};

// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mmviad
