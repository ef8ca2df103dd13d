#include "sdrq/countries.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <initializer_list>
#include <unordered_map>

namespace sdrq {
namespace {

struct CountryEntry {
    const char* code;
    std::initializer_list<const char*> names;
};

// Names are stored lowercase; lookup lowercases and collapses whitespace.
const std::array kCountries = {
    CountryEntry{"ALB", {"albania"}},
    CountryEntry{"ARG", {"argentina"}},
    CountryEntry{"ARM", {"armenia"}},
    CountryEntry{"AUS", {"australia"}},
    CountryEntry{"AUT", {"austria"}},
    CountryEntry{"AZE", {"azerbaijan"}},
    CountryEntry{"BEL", {"belgium"}},
    CountryEntry{"BGR", {"bulgaria"}},
    CountryEntry{"BIH", {"bosnia and herzegovina", "bosnia"}},
    CountryEntry{"BLR", {"belarus"}},
    CountryEntry{"BOL", {"bolivia"}},
    CountryEntry{"BRA", {"brazil"}},
    CountryEntry{"CAN", {"canada"}},
    CountryEntry{"CHE", {"switzerland"}},
    CountryEntry{"CHL", {"chile"}},
    CountryEntry{"CHN", {"china"}},
    CountryEntry{"COL", {"colombia"}},
    CountryEntry{"CRI", {"costa rica"}},
    CountryEntry{"CYP", {"cyprus"}},
    CountryEntry{"CZE", {"czech republic", "czechia"}},
    CountryEntry{"DEU", {"germany"}},
    CountryEntry{"DNK", {"denmark"}},
    CountryEntry{"DOM", {"dominican republic"}},
    CountryEntry{"ECU", {"ecuador"}},
    CountryEntry{"EGY", {"egypt"}},
    CountryEntry{"ESP", {"spain"}},
    CountryEntry{"EST", {"estonia"}},
    CountryEntry{"FIN", {"finland"}},
    CountryEntry{"FRA", {"france"}},
    CountryEntry{"GBR", {"united kingdom", "great britain", "uk", "britain"}},
    CountryEntry{"GEO", {"georgia"}},
    CountryEntry{"GHA", {"ghana"}},
    CountryEntry{"GRC", {"greece"}},
    CountryEntry{"GTM", {"guatemala"}},
    CountryEntry{"HND", {"honduras"}},
    CountryEntry{"HRV", {"croatia"}},
    CountryEntry{"HUN", {"hungary"}},
    CountryEntry{"IDN", {"indonesia"}},
    CountryEntry{"IND", {"india"}},
    CountryEntry{"IRL", {"ireland"}},
    CountryEntry{"IRN", {"iran"}},
    CountryEntry{"ISL", {"iceland"}},
    CountryEntry{"ISR", {"israel"}},
    CountryEntry{"ITA", {"italy"}},
    CountryEntry{"JPN", {"japan"}},
    CountryEntry{"KAZ", {"kazakhstan"}},
    CountryEntry{"KGZ", {"kyrgyzstan"}},
    CountryEntry{"KOR", {"south korea", "korea"}},
    CountryEntry{"LTU", {"lithuania"}},
    CountryEntry{"LUX", {"luxembourg"}},
    CountryEntry{"LVA", {"latvia"}},
    CountryEntry{"MDA", {"moldova"}},
    CountryEntry{"MEX", {"mexico"}},
    CountryEntry{"MKD", {"north macedonia", "macedonia"}},
    CountryEntry{"MNE", {"montenegro"}},
    CountryEntry{"MNG", {"mongolia"}},
    CountryEntry{"MYS", {"malaysia"}},
    CountryEntry{"NGA", {"nigeria"}},
    CountryEntry{"NIC", {"nicaragua"}},
    CountryEntry{"NLD", {"netherlands", "the netherlands", "holland"}},
    CountryEntry{"NOR", {"norway"}},
    CountryEntry{"NZL", {"new zealand"}},
    CountryEntry{"PAK", {"pakistan"}},
    CountryEntry{"PAN", {"panama"}},
    CountryEntry{"PER", {"peru"}},
    CountryEntry{"PHL", {"philippines"}},
    CountryEntry{"POL", {"poland"}},
    CountryEntry{"PRT", {"portugal"}},
    CountryEntry{"PRY", {"paraguay"}},
    CountryEntry{"ROU", {"romania"}},
    CountryEntry{"RUS", {"russia", "russian federation", "russian"}},
    CountryEntry{"SLV", {"el salvador"}},
    CountryEntry{"SRB", {"serbia"}},
    CountryEntry{"SVK", {"slovakia", "slovak republic"}},
    CountryEntry{"SVN", {"slovenia"}},
    CountryEntry{"SWE", {"sweden"}},
    CountryEntry{"THA", {"thailand"}},
    CountryEntry{"TUR", {"turkey", "turkiye"}},
    CountryEntry{"TWN", {"taiwan"}},
    CountryEntry{"UKR", {"ukraine"}},
    CountryEntry{"URY", {"uruguay"}},
    CountryEntry{"USA", {"united states", "united states of america", "us", "america"}},
    CountryEntry{"UZB", {"uzbekistan"}},
    CountryEntry{"VEN", {"venezuela"}},
    CountryEntry{"VNM", {"vietnam", "viet nam"}},
    CountryEntry{"ZAF", {"south africa"}},
};

std::string fold(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

const std::unordered_map<std::string, std::string>& lookup_table() {
    static const auto table = [] {
        std::unordered_map<std::string, std::string> t;
        for (const auto& entry : kCountries) {
            t.emplace(fold(entry.code), entry.code);
            for (const char* name : entry.names) t.emplace(name, entry.code);
        }
        return t;
    }();
    return table;
}

}  // namespace

bool is_alpha3(std::string_view code) noexcept {
    return code.size() == 3 && std::all_of(code.begin(), code.end(), [](char c) {
               return c >= 'A' && c <= 'Z';
           });
}

std::optional<std::string> normalize_country(std::string_view name) {
    const auto& table = lookup_table();
    auto it = table.find(fold(name));
    if (it == table.end()) return std::nullopt;
    return it->second;
}

}  // namespace sdrq
