#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sdrq {

// Maps a country name, common alias, or ISO 3166-1 alpha-3 code (any case) to
// the canonical alpha-3 code. Returns nullopt for names not in the bundled table.
std::optional<std::string> normalize_country(std::string_view name);

// True for three ASCII uppercase letters.
bool is_alpha3(std::string_view code) noexcept;

}  // namespace sdrq
