#pragma once

#include <stdexcept>
#include <string>

namespace igd {

/// Raised when a structured input document is malformed or fails validation.
/// Carries the dotted path of the offending field so callers can report it.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace igd
