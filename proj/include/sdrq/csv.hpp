#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sdrq::csv {

struct Record {
    std::size_t line = 0;  // 1-based line where the record starts
    std::vector<std::string> fields;
};

// RFC 4180 reader: comma separated, double-quote quoting with "" escapes,
// LF or CRLF record ends. Blank lines are skipped. Throws MalformedFile on an
// unterminated quote.
std::vector<Record> parse(std::string_view text);

// Quotes a field only when it contains a comma, quote or line break.
std::string escape(std::string_view field);

}  // namespace sdrq::csv
