#include "sdrq/relations.hpp"

#include <algorithm>
#include <cmath>

#include "sdrq/error.hpp"
#include "sdrq/statistics.hpp"

namespace sdrq {
namespace {

std::size_t column_of(const HarmonizedDataset& dataset, std::string_view name) {
    auto col = dataset.value_column_index(name);
    if (!col) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
    return *col;
}

void paired_values(const HarmonizedDataset& dataset, const RowSet& rows, std::size_t ca, std::size_t cb,
                   std::vector<double>& x, std::vector<double>& y) {
    x.clear();
    y.clear();
    const auto& va = dataset.column(ca);
    const auto& vb = dataset.column(cb);
    for (std::size_t row : rows) {
        if (va[row] && vb[row]) {
            x.push_back(*va[row]);
            y.push_back(*vb[row]);
        }
    }
}

}  // namespace

std::string_view to_string(Significance level) noexcept {
    switch (level) {
        case Significance::P001: return "***";
        case Significance::P01: return "**";
        case Significance::P05: return "*";
        case Significance::NS: return "ns";
        case Significance::Undefined: return "undef";
    }
    return "undef";
}

Significance significance(double p, const Thresholds& thresholds) {
    if (p < thresholds.p001) return Significance::P001;
    if (p < thresholds.p01) return Significance::P01;
    if (p < thresholds.p05) return Significance::P05;
    return Significance::NS;
}

PairStats pearson(std::span<const double> x, std::span<const double> y, const Thresholds& thresholds) {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "pearson: inputs differ in length");
    PairStats s;
    s.n = static_cast<long>(x.size());
    if (s.n < 2) return s;

    const double n = static_cast<double>(s.n);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0 || syy <= 0) return s;
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    s.r = r;
    if (s.n < 3 || std::abs(r) >= 1.0) return s;

    const double df = n - 2;
    const double one_minus = 1.0 - r * r;
    s.t = r * std::sqrt(df / one_minus);
    s.p = student_t_two_sided_p(*s.t, df);
    s.se = std::sqrt(one_minus / df);
    s.level = significance(*s.p, thresholds);
    return s;
}

PairStats pair_stats(const HarmonizedDataset& dataset, const ConditionSet& conditions, std::string_view a,
                     std::string_view b, const Thresholds& thresholds) {
    if (a == b) throw Error(ErrorCode::InvalidArgument, "pair_stats needs two distinct variables");
    const auto ca = column_of(dataset, a);
    const auto cb = column_of(dataset, b);
    std::vector<double> x, y;
    paired_values(dataset, filter_rows(dataset, conditions), ca, cb, x, y);
    return pearson(x, y, thresholds);
}

CorrelationMatrix correlation_matrix(const HarmonizedDataset& dataset, const ConditionSet& conditions,
                                     const std::vector<std::string>& variables, const Thresholds& thresholds) {
    if (variables.size() < 2) throw Error(ErrorCode::InvalidArgument, "a correlation matrix needs two variables");
    std::vector<std::size_t> cols;
    for (const auto& v : variables) cols.push_back(column_of(dataset, v));
    for (std::size_t i = 0; i < variables.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (variables[i] == variables[j]) {
                throw Error(ErrorCode::InvalidArgument, "duplicate variable '" + variables[i] + "'");
            }
        }
    }
    const RowSet rows = filter_rows(dataset, conditions);
    CorrelationMatrix m;
    m.variables = variables;
    std::vector<double> x, y;
    for (std::size_t i = 1; i < variables.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            paired_values(dataset, rows, cols[i], cols[j], x, y);
            m.cells.push_back({variables[i], variables[j], pearson(x, y, thresholds)});
        }
    }
    return m;
}

RelationNetwork relation_network(const HarmonizedDataset& dataset, const ConditionSet& conditions,
                                 std::string_view a, std::string_view b, const Thresholds& thresholds) {
    const auto& registry = dataset.variables();
    RelationNetwork net;
    auto add = [&](const std::string& name) {
        const auto& var = registry.at(name);
        column_of(dataset, name);
        for (const auto& n : net.nodes) {
            if (n.name == name) return;
        }
        net.nodes.push_back({name, var.kind});
    };
    for (std::string_view t : {a, b}) add(std::string(t));
    for (std::string_view t : {a, b}) {
        const auto& var = registry.at(t);
        for (const auto& c : var.controls) add(c);
    }
    for (std::string_view t : {a, b}) {
        const auto& var = registry.at(t);
        for (const auto& q : var.quality_flags) add(q);
    }

    const RowSet rows = filter_rows(dataset, conditions);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < net.nodes.size(); ++j) {
            paired_values(dataset, rows, column_of(dataset, net.nodes[i].name), column_of(dataset, net.nodes[j].name),
                          x, y);
            if (x.size() < 3) continue;
            PairStats s = pearson(x, y, thresholds);
            net.edges.push_back({net.nodes[i].name, net.nodes[j].name, s, !s.defined()});
        }
    }
    return net;
}

}  // namespace sdrq
