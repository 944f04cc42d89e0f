#pragma once

#include <stdexcept>
#include <string>

namespace pdvoice {

// Base class so callers can catch everything pdvoice throws in one place.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad arguments or violated preconditions (maps to CLI exit code 1).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(what) {}
};

// Malformed config files, unknown feature sets, missing seeds (exit code 1).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Unreadable or malformed input data: files, manifests, CSVs (exit code 2).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
};

// WAV container/codec problems; carries the offending format tag.
class DecodeError : public DataError {
 public:
  DecodeError(const std::string& what, int format_tag)
      : DataError(what), format_tag(format_tag) {}
  int format_tag;
};

// A perturbation measure was asked for on a track with too few cycles.
class InsufficientCyclesError : public Error {
 public:
  InsufficientCyclesError(const std::string& measure, std::size_t have,
                          std::size_t need)
      : Error(measure + ": needs at least " + std::to_string(need) +
              " cycles, track has " + std::to_string(have)),
        measure(measure),
        have(have),
        need(need) {}

  // Degenerate track content (e.g. non-positive amplitudes) is reported
  // through the same class so callers skip the segment the same way.
  InsufficientCyclesError(const std::string& measure, const std::string& what)
      : Error(measure + ": " + what), measure(measure), have(0), need(0) {}
  std::string measure;
  std::size_t have;
  std::size_t need;
};

// A segment could not produce a feature vector (unvoiced, too short, ...).
class FeatureExtractionError : public Error {
 public:
  explicit FeatureExtractionError(const std::string& what) : Error(what) {}
};

}  // namespace pdvoice
