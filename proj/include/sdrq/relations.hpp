#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdrq/conditions.hpp"

namespace sdrq {

enum class Significance { P001, P01, P05, NS, Undefined };

// "***", "**", "*", "ns", "undef".
std::string_view to_string(Significance level) noexcept;

struct Thresholds {
    double p001 = 0.001;
    double p01 = 0.01;
    double p05 = 0.05;
};

struct PairStats {
    std::optional<double> r;  // absent when a column has zero variance or n < 2
    long n = 0;
    std::optional<double> t;
    std::optional<double> p;
    std::optional<double> se;
    Significance level = Significance::Undefined;

    bool defined() const noexcept { return level != Significance::Undefined; }
};

Significance significance(double p, const Thresholds& thresholds = {});

// Pearson statistics over paired observations. Undefined when n < 3, either
// side has zero variance, or |r| = 1 (r is still reported in the last case).
PairStats pearson(std::span<const double> x, std::span<const double> y, const Thresholds& thresholds = {});

// Listwise deletion over condition-passing rows. Errors: UnknownVariable,
// InvalidArgument (a == b).
PairStats pair_stats(const HarmonizedDataset& dataset, const ConditionSet& conditions, std::string_view a,
                     std::string_view b, const Thresholds& thresholds = {});

struct MatrixCell {
    std::string a;  // row variable, later in target order
    std::string b;  // column variable
    PairStats stats;
};

struct CorrelationMatrix {
    std::vector<std::string> variables;
    std::vector<MatrixCell> cells;  // lower triangle, row-major
};

// Errors: InvalidArgument (fewer than two variables), UnknownVariable.
CorrelationMatrix correlation_matrix(const HarmonizedDataset& dataset, const ConditionSet& conditions,
                                     const std::vector<std::string>& variables,
                                     const Thresholds& thresholds = {});

struct NetworkNode {
    std::string name;
    VariableKind kind = VariableKind::Target;
};

struct NetworkEdge {
    std::string a, b;
    PairStats stats;
    bool undefined = false;
};

struct RelationNetwork {
    std::vector<NetworkNode> nodes;
    std::vector<NetworkEdge> edges;
};

// Nodes: both targets, their harmonization controls and quality flags.
// Edges: node pairs with at least three jointly non-missing condition-passing
// rows, each scored with pairwise deletion. Errors: UnknownVariable.
RelationNetwork relation_network(const HarmonizedDataset& dataset, const ConditionSet& conditions,
                                 std::string_view a, std::string_view b, const Thresholds& thresholds = {});

}  // namespace sdrq
