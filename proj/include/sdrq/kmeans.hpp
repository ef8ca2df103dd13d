#pragma once

#include <cstdint>
#include <vector>

#include "sdrq/linalg.hpp"

namespace sdrq {

struct KMeansResult {
    std::vector<int> labels;
    MatrixX<double> centers;  // K x dim
    double inertia = 0;
    int iterations = 0;
};

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 300;
    double tolerance = 1e-8;  // largest center movement
    std::uint64_t seed = 0;
};

// k-means++ seeding then Lloyd iterations; the lowest-inertia restart wins.
// Errors: KTooLarge, InvalidArgument.
KMeansResult kmeans(const MatrixX<double>& points, int k, const KMeansOptions& options = {});

}  // namespace sdrq
