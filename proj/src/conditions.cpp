#include "sdrq/conditions.hpp"

#include <cctype>
#include <charconv>

#include "sdrq/countries.hpp"
#include "sdrq/error.hpp"

namespace sdrq {

std::string_view to_string(CompareOp op) noexcept {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "=";
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_op_char(char c) { return c == '=' || c == '!' || c == '<' || c == '>'; }

template <typename T>
bool compare(const T& lhs, CompareOp op, const T& rhs) {
    switch (op) {
        case CompareOp::Eq: return lhs == rhs;
        case CompareOp::Ne: return lhs != rhs;
        case CompareOp::Lt: return lhs < rhs;
        case CompareOp::Le: return lhs <= rhs;
        case CompareOp::Gt: return lhs > rhs;
        case CompareOp::Ge: return lhs >= rhs;
    }
    return false;
}

bool is_ordering(CompareOp op) { return op != CompareOp::Eq && op != CompareOp::Ne; }

}  // namespace

ConditionTerm parse_condition_term(std::string_view expr) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < expr.size() && is_space(expr[pos])) ++pos;
    };

    skip_ws();
    if (pos >= expr.size()) throw ParseError(pos, "empty condition");
    if (!is_ident_start(expr[pos])) throw ParseError(pos, "expected field name");
    std::size_t ident_begin = pos;
    while (pos < expr.size() && is_ident_char(expr[pos])) ++pos;
    ConditionTerm term;
    term.field = std::string(expr.substr(ident_begin, pos - ident_begin));

    skip_ws();
    std::size_t op_begin = pos;
    std::size_t op_end = pos;
    while (op_end < expr.size() && is_op_char(expr[op_end])) ++op_end;
    auto op_text = expr.substr(op_begin, op_end - op_begin);
    if (op_text.empty()) throw ParseError(op_begin, "expected comparison operator");
    // Only "==" is tolerated as a synonym; every other multi-char run must be
    // a listed operator.
    if (op_text == "=" || op_text == "==") term.op = CompareOp::Eq;
    else if (op_text == "!=") term.op = CompareOp::Ne;
    else if (op_text == "<") term.op = CompareOp::Lt;
    else if (op_text == "<=") term.op = CompareOp::Le;
    else if (op_text == ">") term.op = CompareOp::Gt;
    else if (op_text == ">=") term.op = CompareOp::Ge;
    else throw ParseError(op_begin, "invalid operator '" + std::string(op_text) + "'");
    pos = op_end;

    skip_ws();
    if (pos >= expr.size()) throw ParseError(pos, "expected value");
    std::size_t value_begin = pos;
    if (expr[pos] == '"') {
        ++pos;
        std::string text;
        bool closed = false;
        while (pos < expr.size()) {
            char c = expr[pos++];
            if (c == '\\' && pos < expr.size()) {
                text.push_back(expr[pos++]);
            } else if (c == '"') {
                closed = true;
                break;
            } else {
                text.push_back(c);
            }
        }
        if (!closed) throw ParseError(value_begin, "unterminated quoted value");
        skip_ws();
        if (pos != expr.size()) throw ParseError(pos, "unexpected text after quoted value");
        term.literal = std::move(text);
        return term;
    }

    std::size_t end = expr.size();
    while (end > pos && is_space(expr[end - 1])) --end;
    auto raw = expr.substr(pos, end - pos);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (is_op_char(raw[i]) || raw[i] == '"') {
            throw ParseError(pos + i, "unexpected character '" + std::string(1, raw[i]) + "' in value");
        }
    }
    std::int64_t number = 0;
    auto digits = raw;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
    if (!digits.empty() && ec == std::errc() && ptr == digits.data() + digits.size()) {
        term.literal = number;
    } else {
        term.literal = std::string(raw);
    }
    return term;
}

ConditionSet parse_conditions(std::span<const std::string> exprs, const HarmonizedDataset& dataset) {
    ConditionSet set;
    for (const auto& expr : exprs) {
        ConditionTerm term = parse_condition_term(expr);
        Conjunct c;
        c.field = term.field;
        c.op = term.op;
        c.literal = term.literal;

        if (term.field == "respondent_id") c.kind = FieldKind::RespondentId;
        else if (term.field == "survey") c.kind = FieldKind::Survey;
        else if (term.field == "wave") c.kind = FieldKind::Wave;
        else if (term.field == "year") c.kind = FieldKind::Year;
        else if (term.field == "country") c.kind = FieldKind::Country;
        else {
            auto idx = dataset.value_column_index(term.field);
            if (!idx) {
                throw Error(ErrorCode::UnknownField,
                            "unknown field '" + term.field + "' in condition '" + expr + "'");
            }
            c.kind = FieldKind::Value;
            c.column = *idx;
        }

        const bool integer_field = c.kind == FieldKind::Year || c.kind == FieldKind::Value;
        if (integer_field) {
            if (!std::holds_alternative<std::int64_t>(c.literal)) {
                throw Error(ErrorCode::TypeMismatch, "field '" + c.field +
                                                         "' is integer-coded but literal is not an integer");
            }
        } else {
            if (is_ordering(c.op)) {
                throw Error(ErrorCode::TypeMismatch, "ordering operator '" +
                                                         std::string(to_string(c.op)) +
                                                         "' on non-integer field '" + c.field + "'");
            }
            if (auto* n = std::get_if<std::int64_t>(&c.literal)) c.literal = std::to_string(*n);
            if (c.kind == FieldKind::Country) {
                const auto& name = std::get<std::string>(c.literal);
                auto code = normalize_country(name);
                if (!code) {
                    throw Error(ErrorCode::UnknownCountry, "unknown country '" + name + "'");
                }
                c.literal = *code;
            }
        }
        set.conjuncts.push_back(std::move(c));
    }
    return set;
}

bool matches(const HarmonizedDataset& ds, const Conjunct& c, std::size_t row) {
    switch (c.kind) {
        case FieldKind::RespondentId:
            return compare(ds.respondent_ids()[row], c.op, std::get<std::string>(c.literal));
        case FieldKind::Survey:
            return compare(ds.surveys()[row], c.op, std::get<std::string>(c.literal));
        case FieldKind::Wave:
            return compare(ds.waves()[row], c.op, std::get<std::string>(c.literal));
        case FieldKind::Country:
            return compare(ds.countries()[row], c.op, std::get<std::string>(c.literal));
        case FieldKind::Year:
            return compare(static_cast<std::int64_t>(ds.years()[row]), c.op,
                           std::get<std::int64_t>(c.literal));
        case FieldKind::Value: {
            const auto& cell = ds.column(c.column)[row];
            if (!cell) return false;
            return compare(static_cast<std::int64_t>(*cell), c.op, std::get<std::int64_t>(c.literal));
        }
    }
    return false;
}

bool matches(const HarmonizedDataset& ds, const ConditionSet& conditions, std::size_t row) {
    for (const auto& c : conditions.conjuncts) {
        if (!matches(ds, c, row)) return false;
    }
    return true;
}

RowSet filter_rows(const HarmonizedDataset& ds, const ConditionSet& conditions) {
    RowSet rows;
    if (conditions.empty()) {
        rows.resize(ds.rows());
        for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
        return rows;
    }
    // Column-at-a-time narrowing: start from the first conjunct's full scan,
    // then retain survivors of each subsequent conjunct.
    const auto& first = conditions.conjuncts.front();
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        if (matches(ds, first, r)) rows.push_back(r);
    }
    for (std::size_t i = 1; i < conditions.conjuncts.size() && !rows.empty(); ++i) {
        const auto& c = conditions.conjuncts[i];
        std::erase_if(rows, [&](std::size_t r) { return !matches(ds, c, r); });
    }
    return rows;
}

}  // namespace sdrq
