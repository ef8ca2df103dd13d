#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sdrq {

enum class ErrorCode {
    MalformedFile,
    UnknownVariable,
    BadValueCode,
    DuplicateRespondentKey,
    ParseError,
    UnknownField,
    TypeMismatch,
    UnknownCountry,
    DimensionMismatch,
    ServiceUnreachable,
    UnknownQuestionId,
    UnseenText,
    SingleClassCorpus,
    EmptyCorpus,
    UntrainedHead,
    NoProjection,
    PerplexityTooLarge,
    TooFewPoints,
    KTooLarge,
    LengthMismatch,
    EmptyInput,
    UnknownTarget,
    InconsistentSpec,
    InvalidArgument,
    NotFound,
};

// Stable snake_case identifier used in API error bodies.
std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Condition grammar rejection; offset is the byte position inside the expression.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : Error(ErrorCode::ParseError, message + " at offset " + std::to_string(offset)),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace sdrq
