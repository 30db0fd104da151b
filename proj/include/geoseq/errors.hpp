#pragma once

#include <stdexcept>
#include <string>

namespace geoseq {

// Bad caller input: out-of-range coordinates, empty groups, length mismatches.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument("invalid-argument: " + what) {}
};

// A string that is not an acceptable geohash. The evaluation harness counts
// each of these as one unit of error count (EC).
class InvalidGeohash : public std::runtime_error {
 public:
  explicit InvalidGeohash(const std::string& what) : std::runtime_error("invalid-geohash: " + what) {}
};

// Malformed file content (JSONL lines, model files).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error("format-error: " + what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error("io-error: " + what) {}
};

}  // namespace geoseq
