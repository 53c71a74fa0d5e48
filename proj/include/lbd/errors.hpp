#pragma once

#include <stdexcept>
#include <string>

namespace lbd {

// Parameter outside its admissible range (sigma, tau, alpha ordering, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input too large for an exact enumeration or tensor quadrature; the message
// carries the offending size or the estimated cost.
struct SizeError : std::runtime_error {
    explicit SizeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Model fails a validity requirement (e.g. competition kernel vanishing at 0).
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

// Run configuration violates the schema; `path` is the offending field.
struct ConfigError : std::runtime_error {
    std::string path;
    ConfigError(std::string field_path, const std::string& msg)
        : std::runtime_error(field_path + ": " + msg), path(std::move(field_path)) {}
};

// A pipeline stage needs an artifact that an earlier stage has not produced.
struct MissingArtifactError : std::runtime_error {
    explicit MissingArtifactError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lbd
