#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "sdrq/ami.hpp"
#include "sdrq/error.hpp"
#include "sdrq/evaluate.hpp"
#include "sdrq/kmeans.hpp"
#include "sdrq/recommend.hpp"
#include "sdrq/tsne.hpp"
#include "support.hpp"

using namespace sdrq;

namespace {

MatrixX<double> random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> n(0.0, sd);
    MatrixX<double> m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

// Class centroids far apart plus small noise.
MatrixX<double> clustered(const std::vector<int>& labels, int dim, std::mt19937_64& rng) {
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    const auto centers = random_matrix(k, dim, rng, 10.0);
    MatrixX<double> x = random_matrix(static_cast<Eigen::Index>(labels.size()), dim, rng);
    for (std::size_t i = 0; i < labels.size(); ++i) x.row(static_cast<Eigen::Index>(i)) += centers.row(labels[i]);
    return x;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::NotFound;
}

double plain_mi(const std::vector<int>& u, const std::vector<int>& v) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> a, b;
    const double n = static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        joint[{u[i], v[i]}] += 1;
        a[u[i]] += 1;
        b[v[i]] += 1;
    }
    double mi = 0;
    for (const auto& [key, c] : joint) mi += c / n * std::log(n * c / (a[key.first] * b[key.second]));
    return mi;
}

double plain_entropy(const std::vector<int>& u) {
    std::map<int, double> a;
    for (int x : u) a[x] += 1;
    double h = 0;
    for (const auto& [k, c] : a) h -= c / static_cast<double>(u.size()) * std::log(c / static_cast<double>(u.size()));
    return h;
}

// Expected MI under random pairing, by enumerating every permutation of v.
double enumerated_ami(const std::vector<int>& u, std::vector<int> v) {
    std::sort(v.begin(), v.end());
    double total = 0;
    long count = 0;
    std::vector<int> perm = v;
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    do {
        for (std::size_t i = 0; i < idx.size(); ++i) perm[i] = v[idx[i]];
        total += plain_mi(u, perm);
        ++count;
    } while (std::next_permutation(idx.begin(), idx.end()));
    const double emi = total / static_cast<double>(count);
    return emi;
}

const ProjectionState& fixture_projection() {
    static const ProjectionState state = [] {
        const auto& ws = test::trained_fixture();
        const auto provider = ws.projection_provider();
        std::vector<std::string> ids;
        for (const auto& q : ws.dataset->questions()) ids.push_back(std::to_string(q.id));
        return tsne(corpus_embeddings(*provider, ws.dataset->questions()), TsneParams{}, ids);
    }();
    return state;
}

std::vector<int> fixture_labels() {
    const auto& ws = test::trained_fixture();
    std::vector<int> y;
    for (const auto& q : ws.dataset->questions()) y.push_back(*ws.head->class_index(q.target));
    return y;
}

}  // namespace

TEST(Tsne, BisectionHitsPerplexity) {
    std::mt19937_64 rng(1);
    const auto x = random_matrix(60, 5, rng);
    for (double perplexity : {5.0, 15.0, 30.0}) {
        const auto cond = conditional_affinities(squared_distances(x), perplexity);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            EXPECT_NEAR(cond.p.row(i).sum(), 1.0, 1e-12);
            EXPECT_EQ(cond.p(i, i), 0.0);
            double h = 0;
            for (Eigen::Index j = 0; j < x.rows(); ++j) {
                if (cond.p(i, j) > 0) h -= cond.p(i, j) * std::log(cond.p(i, j));
            }
            EXPECT_NEAR(std::exp(h), perplexity, 1e-3);
        }
    }
}

TEST(Tsne, JointProbabilitiesAreSymmetric) {
    std::mt19937_64 rng(2);
    const auto x = random_matrix(40, 3, rng);
    const auto p = joint_probabilities(conditional_affinities(squared_distances(x), 10).p);
    EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(Tsne, GradientMatchesCentralDifferences) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const auto x = random_matrix(10, 4, rng);
        const auto p = joint_probabilities(conditional_affinities(squared_distances(x), 3).p);
        const auto y = random_matrix(10, 2, rng);
        const auto g = kl_gradient(p, y);
        MatrixX<double> num(10, 2);
        const double h = 1e-5;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            MatrixX<double> yp = y, ym = y;
            yp.data()[i] += h;
            ym.data()[i] -= h;
            num.data()[i] = (kl_divergence(p, yp) - kl_divergence(p, ym)) / (2 * h);
        }
        EXPECT_LE((g - num).cwiseAbs().maxCoeff() / num.cwiseAbs().maxCoeff(), 1e-4) << "seed " << seed;
    }
}

TEST(Tsne, IterationSweep) {
    std::mt19937_64 rng(3);
    const auto x = random_matrix(50, 6, rng);
    for (int it : {20, 40, 60, 80, 100}) {
        TsneParams params;
        params.perplexity = 10;
        params.iterations = it;
        const auto s = tsne(x, params);
        EXPECT_EQ(s.kl_history.size(), static_cast<std::size_t>(it));
        EXPECT_EQ(s.coords.rows(), 50);
        EXPECT_TRUE(s.coords.allFinite());
        EXPECT_EQ(s.ids.front(), "0");
    }
}

TEST(Tsne, KlDecreasesWithoutExaggeration) {
    std::mt19937_64 rng(4);
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) labels.push_back(i % 3);
    const auto x = clustered(labels, 8, rng);
    TsneParams params;
    params.perplexity = 10;
    params.iterations = 200;
    params.exaggeration = 1.0;
    const auto s = tsne(x, params);
    EXPECT_LE(s.kl_history.back(), s.kl_history.front());
}

TEST(Tsne, RotatedWarmStartPreservesDistances) {
    std::mt19937_64 rng(5);
    const auto x = random_matrix(30, 5, rng);
    const auto init = random_matrix(30, 2, rng);
    const double a = 0.7;
    Eigen::Matrix2d rot;
    rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    const MatrixX<double> rotated = init * rot.transpose();
    TsneParams params;
    params.perplexity = 8;
    params.iterations = 100;
    const auto s1 = tsne(x, params, {}, init);
    const auto s2 = tsne(x, params, {}, rotated);
    EXPECT_LT((squared_distances(s1.coords).cwiseSqrt() - squared_distances(s2.coords).cwiseSqrt()).cwiseAbs().maxCoeff(),
              1e-3);
}

TEST(Tsne, Errors) {
    std::mt19937_64 rng(6);
    TsneParams params;
    params.perplexity = 1.5;
    EXPECT_EQ(code_of([&] { tsne(random_matrix(2, 3, rng), params); }), ErrorCode::TooFewPoints);
    params.perplexity = 30;
    EXPECT_EQ(code_of([&] { tsne(random_matrix(20, 3, rng), params); }), ErrorCode::PerplexityTooLarge);
    params.perplexity = 19;
    params.iterations = 5;
    EXPECT_NO_THROW(tsne(random_matrix(20, 3, rng), params));
    EXPECT_EQ(code_of([&] { tsne(random_matrix(20, 3, rng), params, {}, MatrixX<double>::Zero(19, 2)); }),
              ErrorCode::DimensionMismatch);
}

TEST(IterativeUpdate, AppendsOnePoint) {
    std::mt19937_64 rng(7);
    TsneParams params;
    params.perplexity = 10;
    params.iterations = 50;
    const auto base = tsne(random_matrix(40, 4, rng), params);
    const VectorX<double> e = random_matrix(4, 1, rng);
    const auto next = iterative_update(base, e, "input-1");
    EXPECT_EQ(next.coords.rows(), base.coords.rows() + 1);
    EXPECT_EQ(next.ids.back(), "input-1");
    EXPECT_EQ(next.timestamp, base.timestamp + 1);
    EXPECT_EQ(next.params.iterations, base.params.iterations);
    EXPECT_EQ(iterative_update(next, e, "input-2", 10).coords.rows(), base.coords.rows() + 2);
    EXPECT_EQ(code_of([&] { iterative_update(base, VectorX<double>::Zero(3), "x"); }), ErrorCode::DimensionMismatch);
}

TEST(IterativeUpdate, TextInputUsesProvider) {
    const auto& ws = test::trained_fixture();
    const auto provider = ws.projection_provider();
    const auto& base = fixture_projection();
    const auto next = iterative_update(base, "trust in parliament", *provider, 20);
    EXPECT_EQ(next.ids.back(), "input-1");
    EXPECT_EQ(next.coords.rows(), base.coords.rows() + 1);
}

TEST(IterativeUpdate, NewQueryLandsInItsHardClassCluster) {
    const auto& ws = test::trained_fixture();
    const auto& base = fixture_projection();
    const auto next = iterative_update(base, "trust in parliament", *ws.projection_provider(), 100);
    const auto labels = fixture_labels();
    const int k = ws.head->num_classes();
    MatrixX<double> centroids = MatrixX<double>::Zero(k, 2);
    VectorX<double> counts = VectorX<double>::Zero(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        centroids.row(labels[i]) += next.coords.row(static_cast<Eigen::Index>(i));
        counts(labels[i]) += 1;
    }
    centroids.array().colwise() /= counts.array();
    centroids.rowwise() -= next.coords.row(next.coords.rows() - 1);
    Eigen::Index nearest = 0;
    centroids.rowwise().squaredNorm().minCoeff(&nearest);
    EXPECT_EQ(ws.head->classes()[static_cast<std::size_t>(nearest)], ws.recommender->hard("trust in parliament").target);
}

TEST(IterativeUpdate, BrushAroundQueryIsDominatedByOneTopic) {
    const auto& ws = test::trained_fixture();
    const auto next = iterative_update(fixture_projection(), "trust in parliament", *ws.projection_provider(), 100);
    const Eigen::RowVector2d p = next.coords.bottomRows(1).row(0);
    std::vector<double> d;
    for (Eigen::Index i = 0; i + 1 < next.coords.rows(); ++i) d.push_back((next.coords.row(i) - p).norm());
    std::nth_element(d.begin(), d.begin() + 20, d.end());
    const double r = d[20];
    const Box box{p.x() - r, p.x() + r, p.y() - r, p.y() + r};
    const auto rows = brush_select(&next, box, ws.dataset->questions(), ws.dataset->variables());
    ASSERT_FALSE(rows.empty());
    std::map<std::string, int> topics;
    for (const auto& row : rows) ++topics[ws.dataset->variables().at(row.target).topic];
    int best = 0;
    for (const auto& [t, c] : topics) best = std::max(best, c);
    EXPECT_GT(static_cast<double>(best) / static_cast<double>(rows.size()), 0.5);
}

TEST(Stability, WarmStartIsSteadierThanRandomInit) {
    const auto& ws = test::trained_fixture();
    const auto report =
        stability_study(fixture_projection(), ws.projection_provider()->encode("trust in parliament"), fixture_labels());
    ASSERT_EQ(report.runs.size(), 10u);
    EXPECT_LT(report.mean_warm_displacement, report.mean_random_displacement);
    EXPECT_LE(report.warm_ami_variance, report.random_ami_variance);
}

TEST(KMeans, RecoversBlobs) {
    std::mt19937_64 rng(8);
    MatrixX<double> x = random_matrix(40, 2, rng, 0.3);
    x.topRows(20).rowwise() += Eigen::RowVector2d(10, 10);
    const auto r = kmeans(x, 2);
    for (int i = 0; i < 40; ++i) EXPECT_EQ(r.labels[static_cast<std::size_t>(i)], r.labels[i < 20 ? 0 : 20]);
    EXPECT_NE(r.labels[0], r.labels[20]);
}

TEST(KMeans, OneClusterPerPoint) {
    std::mt19937_64 rng(9);
    const auto x = random_matrix(12, 2, rng);
    const auto r = kmeans(x, 12);
    EXPECT_NEAR(r.inertia, 0.0, 1e-18);
    EXPECT_EQ(std::set<int>(r.labels.begin(), r.labels.end()).size(), 12u);
}

TEST(KMeans, MoreRestartsNeverWorse) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        const auto x = random_matrix(80, 2, rng);
        KMeansOptions one, ten;
        one.restarts = 1;
        one.seed = ten.seed = seed;
        EXPECT_LE(kmeans(x, 5, ten).inertia, kmeans(x, 5, one).inertia + 1e-12);
    }
}

TEST(KMeans, DeterministicAndErrors) {
    std::mt19937_64 rng(10);
    const auto x = random_matrix(30, 2, rng);
    EXPECT_EQ(kmeans(x, 4).labels, kmeans(x, 4).labels);
    EXPECT_EQ(code_of([&] { kmeans(x, 31); }), ErrorCode::KTooLarge);
    EXPECT_EQ(code_of([&] { kmeans(x, 0); }), ErrorCode::InvalidArgument);
}

TEST(Ami, IdenticalPartitions) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        std::vector<int> u(50);
        for (auto& x : u) x = static_cast<int>(rng() % 5);
        EXPECT_NEAR(ami(u, u).ami, 1.0, 1e-9);
    }
}

TEST(Ami, RelabelingIsExactlyInvariant) {
    std::mt19937_64 rng(12);
    std::vector<int> u(80), v(80);
    for (auto& x : u) x = static_cast<int>(rng() % 4);
    for (auto& x : v) x = static_cast<int>(rng() % 3);
    const std::vector<int> perm = {7, -2, 40};
    std::vector<int> relabeled;
    for (int x : v) relabeled.push_back(perm[static_cast<std::size_t>(x)]);
    EXPECT_EQ(ami(u, v).ami, ami(u, relabeled).ami);
    EXPECT_NEAR(ami(u, v).ami, ami(v, u).ami, 1e-12);
}

TEST(Ami, IndependentPartitionsNearZero) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<int> u(300), v(300);
        for (auto& x : u) x = static_cast<int>(rng() % 3);
        for (auto& x : v) x = static_cast<int>(rng() % 3);
        const double a = ami(u, v).ami;
        EXPECT_LT(std::abs(a), 0.05);
        EXPECT_LE(a, 1.0);
    }
}

TEST(Ami, MatchesReferenceValues) {
    // Reference values from an independent AMI implementation (max normalization).
    EXPECT_NEAR(ami(std::vector<int>{0, 0, 0, 1, 1, 1}, std::vector<int>{0, 0, 1, 1, 2, 2}).ami,
                0.22504228319830885, 1e-9);
    EXPECT_NEAR(ami(std::vector<int>{1, 1, 0, 0, 2, 2, 2, 0}, std::vector<int>{0, 0, 1, 1, 1, 2, 2, 2}).ami,
                0.3196726505696469, 1e-9);
    EXPECT_NEAR(ami(std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1, 2, 0}, std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2, 2}).ami,
                -0.35118577459781486, 1e-9);
}

TEST(Ami, ExpectedMiMatchesPermutationEnumeration) {
    const std::vector<std::vector<int>> us = {{0, 0, 1, 1, 2, 2, 2}, {0, 1, 1, 1, 0, 2, 2}};
    const std::vector<std::vector<int>> vs = {{0, 1, 0, 1, 1, 0, 1}, {0, 0, 0, 1, 1, 2, 3}};
    for (const auto& u : us) {
        for (const auto& v : vs) {
            const auto c = ami(u, v);
            EXPECT_NEAR(c.expected_mi, enumerated_ami(u, v), 1e-12);
            EXPECT_NEAR(c.mi, plain_mi(u, v), 1e-12);
            EXPECT_NEAR(c.h_u, plain_entropy(u), 1e-12);
            EXPECT_NEAR(c.ami, (c.mi - c.expected_mi) / (std::max(c.h_u, c.h_v) - c.expected_mi), 1e-12);
        }
    }
}

TEST(Ami, ContingencyAndDegenerateCases) {
    const auto c = ami(std::vector<int>{5, 5, 9, 9, 9}, std::vector<int>{1, 2, 1, 2, 2});
    EXPECT_EQ(c.u, (std::vector<int>{0, 0, 1, 1, 1}));
    EXPECT_EQ(c.contingency.rows(), 2);
    EXPECT_EQ(c.contingency.sum(), 5);
    EXPECT_EQ(c.contingency.rowwise().sum()(1), 3);
    EXPECT_EQ(ami(std::vector<int>{3, 3, 3}, std::vector<int>{1, 1, 1}).ami, 1.0);
    EXPECT_EQ(ami(std::vector<int>{3, 3, 3}, std::vector<int>{0, 1, 2}).ami, 0.0);
    EXPECT_EQ(ami(std::vector<int>{4}, std::vector<int>{4}).ami, 1.0);
    EXPECT_EQ(code_of([] { ami(std::vector<int>{1}, std::vector<int>{1, 2}); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([] { ami(std::vector<int>{}, std::vector<int>{}); }), ErrorCode::EmptyInput);
}

TEST(Evaluate, FiveNumberSummary) {
    const auto s = five_number_summary({5, 1, 3, 2, 4});
    EXPECT_DOUBLE_EQ(s.min, 1);
    EXPECT_DOUBLE_EQ(s.q1, 2);
    EXPECT_DOUBLE_EQ(s.median, 3);
    EXPECT_DOUBLE_EQ(s.q3, 4);
    EXPECT_DOUBLE_EQ(s.max, 5);
    EXPECT_DOUBLE_EQ(five_number_summary({1, 2, 3, 4}).median, 2.5);
    EXPECT_THROW(five_number_summary({}), Error);
    const std::vector<double> v = {1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(mean(v), 2.5);
    EXPECT_DOUBLE_EQ(sample_variance(v), 5.0 / 3.0);
}

TEST(Evaluate, IdenticalProvidersGiveIdenticalScores) {
    std::mt19937_64 rng(13);
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) labels.push_back(i % 3);
    const auto x = clustered(labels, 6, rng);
    EvaluationOptions o;
    o.seeds = 3;
    o.tsne.perplexity = 10;
    o.tsne.iterations = 100;
    const auto scores = evaluate_embeddings({{"a", x}, {"b", x}}, labels, o);
    ASSERT_EQ(scores.size(), 2u);
    EXPECT_EQ(scores[0].ami, scores[1].ami);
    EXPECT_EQ(scores[0].ami.size(), 3u);
}

TEST(Evaluate, SeparableBeatsIsotropic) {
    std::mt19937_64 rng(14);
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) labels.push_back(i % 4);
    const auto sep = clustered(labels, 8, rng);
    const auto iso = random_matrix(100, 8, rng);
    EvaluationOptions o;
    o.tsne.perplexity = 15;
    o.tsne.iterations = 150;
    const auto scores = evaluate_embeddings({{"separable", sep}, {"random", iso}}, labels, o);
    EXPECT_EQ(scores[0].ami.size(), 10u);
    EXPECT_GT(scores[0].summary.median, scores[1].summary.median);
    EXPECT_LE(scores[0].summary.min, scores[0].summary.q1);
    EXPECT_LE(scores[0].summary.q3, scores[0].summary.max);
}
