#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sdrq/classifier.hpp"
#include "sdrq/dataset.hpp"
#include "sdrq/fixtures.hpp"
#include "sdrq/workspace.hpp"

namespace sdrq::test {

inline std::filesystem::path source_dir() { return SDRQ_SOURCE_DIR; }

// Default fixture with a head trained at the default options; built once.
inline const Workspace& trained_fixture() {
    static const Workspace ws = [] {
        const auto files = fixtures::generate({});
        auto base = assemble_workspace(load_dataset_from_strings(files.data_csv, files.metadata_json));
        auto head = std::make_shared<const ClassifierHead>(train_workspace_head(base));
        return assemble_workspace(*base.dataset, {}, head);
    }();
    return ws;
}

inline const HarmonizedDataset& fixture_dataset() { return *trained_fixture().dataset; }

inline Metadata small_metadata() {
    std::vector<VariableDescriptor> vars;
    for (const char* q : {"Q1", "Q2"}) vars.push_back({q, VariableKind::QualityControl, q, "quality", {}, {}, {}});
    vars.push_back({"C1", VariableKind::HarmonizationControl, "C1", "control", {}, {}, {}});
    for (const char* t : {"T1", "T2", "T3", "T4"}) {
        vars.push_back({t, VariableKind::Target, t, "topic", {}, {"C1"}, {"Q1", "Q2"}});
    }
    Metadata m;
    m.variables = VariableRegistry(std::move(vars));
    return m;
}

// Random table over small_metadata(): surveys S0..S3, years 2000..2009,
// countries from a fixed pool, each value cell missing with probability 0.3.
inline HarmonizedDataset random_dataset(std::uint64_t seed, int rows = 1000) {
    static const std::vector<std::string> countries = {"DEU", "FRA", "RUS", "USA", "JPN", "BRA"};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> survey(0, 3), year(2000, 2009), country(0, 5), code(0, 4), flag(0, 1);
    std::bernoulli_distribution missing(0.3);
    const std::vector<std::string> columns = {"Q1", "Q2", "C1", "T1", "T2", "T3", "T4"};
    HarmonizedDataset::Builder b(small_metadata(), columns);
    for (int r = 0; r < rows; ++r) {
        const int s = survey(rng), y = year(rng);
        std::vector<Cell> cells;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (missing(rng)) {
                cells.push_back(std::nullopt);
            } else {
                cells.push_back(c < 2 ? flag(rng) : code(rng));
            }
        }
        b.add_row({"r" + std::to_string(r), "S" + std::to_string(s), "W" + std::to_string(y), y,
                   countries[static_cast<std::size_t>(country(rng))]},
                  std::move(cells));
    }
    return std::move(b).build();
}

}  // namespace sdrq::test
