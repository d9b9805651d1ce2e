#ifndef CAUSAL_ERROR_HPP
#define CAUSAL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace causal {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid graph construction or graph query (unknown node, cycle, ...).
class GraphError : public Error {
 public:
  using Error::Error;
};

// Path enumeration exceeded the configured cap.
class PathLimitError : public GraphError {
 public:
  using GraphError::GraphError;
};

// Invalid model definition (missing coefficient, CPT row sum, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

// A structurally valid request that cannot be answered (overlapping sets,
// zero-probability conditioning event, state-space cap, ...).
class QueryError : public Error {
 public:
  using Error::Error;
};

// Requests outside the supported model families, reported distinctly so
// callers can tell "not supported" from "malformed".
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Document or CSV ingestion failure; the message carries the field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A broken internal invariant. Maps to exit code 2 in the CLI.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace causal

#endif  // CAUSAL_ERROR_HPP
