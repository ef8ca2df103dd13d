#include "sdrq/ami.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "sdrq/error.hpp"

namespace sdrq {
namespace {

bool same_partition(std::span<const int> u, std::span<const int> v) {
    std::map<int, int> forward, backward;
    for (std::size_t i = 0; i < u.size(); ++i) {
        auto f = forward.emplace(u[i], v[i]).first;
        auto b = backward.emplace(v[i], u[i]).first;
        if (f->second != v[i] || b->second != u[i]) return false;
    }
    return true;
}

// Sum in ascending order of the terms.
double ordered_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0;
    for (double t : terms) s += t;
    return s;
}

std::vector<double> sorted(const VectorX<double>& x) {
    std::vector<double> out(x.data(), x.data() + x.size());
    std::sort(out.begin(), out.end());
    return out;
}

double entropy_of_counts(const VectorX<double>& counts, double n) {
    std::vector<double> terms;
    for (Eigen::Index i = 0; i < counts.size(); ++i) {
        if (counts(i) > 0) terms.push_back(-(counts(i) / n) * std::log(counts(i) / n));
    }
    return ordered_sum(std::move(terms));
}

double expected_mutual_information(const VectorX<double>& a_counts, const VectorX<double>& b_counts, double n) {
    const double lg_n = std::lgamma(n + 1);
    const auto a = sorted(a_counts), b = sorted(b_counts);
    std::vector<double> terms;
    for (double ai : a) {
        for (double bj : b) {
            const double fixed = std::lgamma(ai + 1) + std::lgamma(bj + 1) + std::lgamma(n - ai + 1) +
                                 std::lgamma(n - bj + 1) - lg_n;
            const double lo = std::max(1.0, ai + bj - n);
            const double hi = std::min(ai, bj);
            double cell = 0;
            for (double nij = lo; nij <= hi; nij += 1) {
                const double log_p = fixed - std::lgamma(nij + 1) - std::lgamma(ai - nij + 1) -
                                     std::lgamma(bj - nij + 1) - std::lgamma(n - ai - bj + nij + 1);
                cell += (nij / n) * std::log(n * nij / (ai * bj)) * std::exp(log_p);
            }
            terms.push_back(cell);
        }
    }
    return ordered_sum(std::move(terms));
}

}  // namespace

std::vector<int> contiguous_labels(std::span<const int> labels) {
    std::vector<int> distinct(labels.begin(), labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        out.push_back(static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), l) - distinct.begin()));
    }
    return out;
}

double entropy(std::span<const int> labels) {
    if (labels.empty()) return 0;
    auto l = contiguous_labels(labels);
    VectorX<double> counts = VectorX<double>::Zero(*std::max_element(l.begin(), l.end()) + 1);
    for (int x : l) counts(x) += 1;
    return entropy_of_counts(counts, static_cast<double>(labels.size()));
}

PartitionComparison ami(std::span<const int> u, std::span<const int> v) {
    if (u.size() != v.size()) {
        throw Error(ErrorCode::LengthMismatch, "partitions have lengths " + std::to_string(u.size()) + " and " +
                                                   std::to_string(v.size()));
    }
    if (u.empty()) throw Error(ErrorCode::EmptyInput, "partitions are empty");

    PartitionComparison out;
    out.u = contiguous_labels(u);
    out.v = contiguous_labels(v);
    const int ku = *std::max_element(out.u.begin(), out.u.end()) + 1;
    const int kv = *std::max_element(out.v.begin(), out.v.end()) + 1;
    const double n = static_cast<double>(u.size());

    out.contingency = MatrixX<double>::Zero(ku, kv);
    for (std::size_t i = 0; i < u.size(); ++i) out.contingency(out.u[i], out.v[i]) += 1;
    const VectorX<double> a = out.contingency.rowwise().sum();
    const VectorX<double> b = out.contingency.colwise().sum().transpose();

    std::vector<double> terms;
    for (int i = 0; i < ku; ++i) {
        for (int j = 0; j < kv; ++j) {
            const double nij = out.contingency(i, j);
            if (nij > 0) terms.push_back((nij / n) * std::log(n * nij / (a(i) * b(j))));
        }
    }
    out.mi = ordered_sum(std::move(terms));
    out.h_u = entropy_of_counts(a, n);
    out.h_v = entropy_of_counts(b, n);
    out.expected_mi = expected_mutual_information(a, b, n);

    const double denominator = std::max(out.h_u, out.h_v) - out.expected_mi;
    if (std::abs(denominator) < 1e-12) {
        out.ami = same_partition(out.u, out.v) ? 1.0 : 0.0;
    } else {
        out.ami = (out.mi - out.expected_mi) / denominator;
    }
    return out;
}

}  // namespace sdrq
