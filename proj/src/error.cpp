#include "sdrq/error.hpp"

namespace sdrq {

std::string_view code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedFile: return "malformed_file";
        case ErrorCode::UnknownVariable: return "unknown_variable";
        case ErrorCode::BadValueCode: return "bad_value_code";
        case ErrorCode::DuplicateRespondentKey: return "duplicate_respondent_key";
        case ErrorCode::ParseError: return "parse_error";
        case ErrorCode::UnknownField: return "unknown_field";
        case ErrorCode::TypeMismatch: return "type_mismatch";
        case ErrorCode::UnknownCountry: return "unknown_country";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::ServiceUnreachable: return "service_unreachable";
        case ErrorCode::UnknownQuestionId: return "unknown_question_id";
        case ErrorCode::UnseenText: return "unseen_text";
        case ErrorCode::SingleClassCorpus: return "single_class_corpus";
        case ErrorCode::EmptyCorpus: return "empty_corpus";
        case ErrorCode::UntrainedHead: return "untrained_head";
        case ErrorCode::NoProjection: return "no_projection";
        case ErrorCode::PerplexityTooLarge: return "perplexity_too_large";
        case ErrorCode::TooFewPoints: return "too_few_points";
        case ErrorCode::KTooLarge: return "k_too_large";
        case ErrorCode::LengthMismatch: return "length_mismatch";
        case ErrorCode::EmptyInput: return "empty_input";
        case ErrorCode::UnknownTarget: return "unknown_target";
        case ErrorCode::InconsistentSpec: return "inconsistent_spec";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::NotFound: return "not_found";
    }
    return "error";
}

}  // namespace sdrq
