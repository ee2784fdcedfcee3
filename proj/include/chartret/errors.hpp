#pragma once

#include <stdexcept>
#include <string>

namespace chartret {

/// A vector whose norm is zero was passed to a cosine-based score.
class ZeroNormError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// F1 has an empty denominator (no retrieved and no relevant items).
class UndefinedF1Error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The embedding/classification provider failed or broke its contract.
class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A provider failure raised inside a named pipeline stage.
class StageError : public ProviderError {
public:
    StageError(std::string stage, const std::string& what)
        : ProviderError(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class DuplicateIdError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Corrupt, truncated or version-mismatched snapshot on disk.
class SnapshotFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Image bytes could not be decoded.
class ImageDecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace chartret
