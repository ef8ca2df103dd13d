#pragma once

#include <span>
#include <vector>

#include "sdrq/linalg.hpp"

namespace sdrq {

struct PartitionComparison {
    std::vector<int> u, v;            // relabelled to 0..k-1 by sorted original label
    MatrixX<double> contingency;      // |U classes| x |V classes|
    double mi = 0;                    // natural log
    double h_u = 0, h_v = 0;
    double expected_mi = 0;           // hypergeometric model
    double ami = 0;
};

// Relabels values to 0..k-1 in ascending order of the original label.
std::vector<int> contiguous_labels(std::span<const int> labels);

double entropy(std::span<const int> labels);

// Adjusted mutual information with max-entropy normalization. A zero
// denominator yields 1 for partitions identical up to relabelling, else 0.
// Errors: LengthMismatch, EmptyInput.
PartitionComparison ami(std::span<const int> u, std::span<const int> v);

}  // namespace sdrq
