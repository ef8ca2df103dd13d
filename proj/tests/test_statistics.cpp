#include <gtest/gtest.h>

#include <cmath>

#include "sdrq/statistics.hpp"

using namespace sdrq;

TEST(IncompleteBeta, ClosedForms) {
    for (double x : {0.0, 0.05, 0.3, 0.5, 0.77, 1.0}) {
        EXPECT_NEAR(regularized_incomplete_beta(1, 1, x), x, 1e-14);
        EXPECT_NEAR(regularized_incomplete_beta(3.5, 1, x), std::pow(x, 3.5), 1e-13);
        EXPECT_NEAR(regularized_incomplete_beta(1, 2.5, x), 1 - std::pow(1 - x, 2.5), 1e-13);
        EXPECT_NEAR(regularized_incomplete_beta(0.5, 0.5, x), 2 / M_PI * std::asin(std::sqrt(x)), 1e-12);
    }
    for (double a : {0.5, 2.0, 7.5, 40.0}) EXPECT_NEAR(regularized_incomplete_beta(a, a, 0.5), 0.5, 1e-13);
}

TEST(IncompleteBeta, Reflection) {
    for (double a : {0.5, 1.5, 9.0}) {
        for (double b : {0.5, 3.0, 20.0}) {
            for (double x : {0.1, 0.4, 0.9}) {
                EXPECT_NEAR(regularized_incomplete_beta(a, b, x), 1 - regularized_incomplete_beta(b, a, 1 - x), 1e-13);
            }
        }
    }
}

TEST(StudentT, ClosedForms) {
    for (double t : {0.0, 0.3, 1.0, 2.5, 12.0}) {
        EXPECT_NEAR(student_t_two_sided_p(t, 1), 1 - 2 / M_PI * std::atan(t), 1e-13);
        EXPECT_NEAR(student_t_two_sided_p(-t, 2), 1 - t / std::sqrt(2 + t * t), 1e-13);
    }
    // Large df approaches the normal tail.
    EXPECT_NEAR(student_t_two_sided_p(1.959963984540054, 1e7), 0.05, 1e-6);
}
