#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdrq/dataset.hpp"

namespace sdrq {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CompareOp op) noexcept;

using Literal = std::variant<std::int64_t, std::string>;

// One syntactically valid `field op value` term, not yet bound to a dataset.
struct ConditionTerm {
    std::string field;
    CompareOp op = CompareOp::Eq;
    Literal literal;

    bool operator==(const ConditionTerm&) const = default;
};

// Grammar: expr := ident ws? op ws? value
//          op   := "=" | "!=" | "<" | "<=" | ">" | ">="
//          value:= integer | "quoted string" | bare string
// Leading and trailing whitespace is ignored. Throws ParseError with the byte
// offset of the first offending character.
ConditionTerm parse_condition_term(std::string_view expr);

enum class FieldKind { RespondentId, Survey, Wave, Year, Country, Value };

struct Conjunct {
    std::string field;
    CompareOp op = CompareOp::Eq;
    Literal literal;  // country literals are canonical alpha-3 codes
    FieldKind kind = FieldKind::Value;
    std::size_t column = 0;  // value column index when kind == Value

    bool operator==(const Conjunct&) const = default;
};

struct ConditionSet {
    std::vector<Conjunct> conjuncts;

    bool empty() const noexcept { return conjuncts.empty(); }
    bool operator==(const ConditionSet&) const = default;
};

// Parses and binds each expression against the dataset's columns.
// Errors: ParseError, UnknownField, TypeMismatch (ordering operator or
// integer comparison against a string column), UnknownCountry.
ConditionSet parse_conditions(std::span<const std::string> exprs, const HarmonizedDataset& dataset);

// Evaluates a single conjunct on one row. Missing cells fail every comparison.
bool matches(const HarmonizedDataset& dataset, const Conjunct& conjunct, std::size_t row);
bool matches(const HarmonizedDataset& dataset, const ConditionSet& conditions, std::size_t row);

using RowSet = std::vector<std::size_t>;

// Ascending indices of the rows satisfying every conjunct.
RowSet filter_rows(const HarmonizedDataset& dataset, const ConditionSet& conditions);

}  // namespace sdrq
