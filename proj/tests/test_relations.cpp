#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sdrq/error.hpp"
#include "sdrq/json_export.hpp"
#include "sdrq/relations.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace sdrq;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::NotFound;
}

const NetworkEdge* find_edge(const RelationNetwork& net, const std::string& a, const std::string& b) {
    for (const auto& e : net.edges) {
        if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return &e;
    }
    return nullptr;
}

}  // namespace

TEST(Pearson, MatchesHighPrecisionOracle) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 5 + static_cast<int>(rng() % 200);
        const double rho = std::uniform_real_distribution<double>(-0.9, 0.9)(rng);
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = normal(rng);
            y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * normal(rng);
        }
        const auto s = pearson(x, y);
        const auto o = oracle::pearson(x, y);
        ASSERT_TRUE(s.defined());
        EXPECT_EQ(s.n, n);
        EXPECT_NEAR(*s.r, static_cast<double>(o.r), 1e-9);
        EXPECT_NEAR(*s.p, static_cast<double>(o.p), 1e-6);
        EXPECT_NEAR(*s.se, std::sqrt((1 - *s.r * *s.r) / (n - 2)), 1e-12);
    }
}

TEST(Pearson, KnownPValue) {
    // r = 0.5 with n = 20: t = 0.5 * sqrt(18 / 0.75), p close to 0.0249.
    const double t = 0.5 * std::sqrt(18 / 0.75);
    EXPECT_NEAR(static_cast<double>(oracle::integrated_p(t, 18)), 0.0249, 1e-3);
    std::vector<double> x(20), y(20);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    for (auto& v : x) v = normal(rng);
    // Build y with correlation exactly 0.5 by Gram-Schmidt.
    std::vector<double> z(20);
    for (auto& v : z) v = normal(rng);
    auto centre = [](std::vector<double>& v) {
        double m = 0;
        for (double a : v) m += a;
        for (double& a : v) a -= m / static_cast<double>(v.size());
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    centre(x);
    centre(z);
    const double k = dot(x, z) / dot(x, x);
    for (int i = 0; i < 20; ++i) z[i] -= k * x[i];
    const double nx = std::sqrt(dot(x, x)), nz = std::sqrt(dot(z, z));
    for (int i = 0; i < 20; ++i) y[i] = 0.5 * x[i] / nx + std::sqrt(0.75) * z[i] / nz;
    const auto s = pearson(x, y);
    EXPECT_NEAR(*s.r, 0.5, 1e-12);
    EXPECT_NEAR(*s.p, 0.0249, 1e-3);
    EXPECT_EQ(s.level, Significance::P05);
}

TEST(Pearson, SymmetryAndAffineInvariance) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    std::vector<double> x(50), y(50), x2(50), y2(50);
    for (int i = 0; i < 50; ++i) {
        x[i] = normal(rng);
        y[i] = x[i] + normal(rng);
        x2[i] = 3 * x[i] + 7;
        y2[i] = -0.5 * y[i] + 1;
    }
    EXPECT_NEAR(*pearson(x, y).r, *pearson(y, x).r, 1e-14);
    EXPECT_NEAR(*pearson(x2, y).r, *pearson(x, y).r, 1e-12);
    EXPECT_NEAR(*pearson(x, y2).r, -*pearson(x, y).r, 1e-12);
    EXPECT_NEAR(*pearson(x, y2).p, *pearson(x, y).p, 1e-12);
}

TEST(Pearson, PValueFallsAsCorrelationGrows) {
    double previous = 1.0;
    for (double r = 0.05; r < 0.95; r += 0.1) {
        const double t = r * std::sqrt(30 / (1 - r * r));
        const double p = static_cast<double>(oracle::integrated_p(t, 30));
        EXPECT_LT(p, previous);
        previous = p;
    }
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    std::vector<double> x(40), noise(40);
    for (int i = 0; i < 40; ++i) {
        x[i] = normal(rng);
        noise[i] = normal(rng);
    }
    double last_p = 1.1;
    for (double w : {0.0, 0.3, 0.6, 1.0, 2.0}) {
        std::vector<double> y(40);
        for (int i = 0; i < 40; ++i) y[i] = w * x[i] + noise[i];
        const auto s = pearson(x, y);
        if (w > 0) EXPECT_LT(*s.p, last_p);
        last_p = *s.p;
    }
}

TEST(Pearson, Significance) {
    EXPECT_EQ(significance(0.0005), Significance::P001);
    EXPECT_EQ(significance(0.001), Significance::P01);
    EXPECT_EQ(significance(0.005), Significance::P01);
    EXPECT_EQ(significance(0.03), Significance::P05);
    EXPECT_EQ(significance(0.2), Significance::NS);
    EXPECT_EQ(significance(0.2, {0.1, 0.2, 0.3}), Significance::P05);
    EXPECT_EQ(to_string(Significance::P001), "***");
    EXPECT_EQ(to_string(Significance::Undefined), "undef");
}

TEST(Pearson, UndefinedCases) {
    EXPECT_FALSE(pearson(std::vector<double>{1}, std::vector<double>{2}).r);
    const auto two = pearson(std::vector<double>{1, 2}, std::vector<double>{3, 5});
    EXPECT_FALSE(two.defined());
    const auto flat = pearson(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 2, 3, 4});
    EXPECT_FALSE(flat.defined());
    EXPECT_FALSE(flat.r);
    const auto perfect = pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 4, 6, 8});
    EXPECT_FALSE(perfect.defined());
    EXPECT_NEAR(*perfect.r, 1.0, 1e-12);
    EXPECT_EQ(code_of([] { pearson(std::vector<double>{1, 2}, std::vector<double>{1}); }), ErrorCode::LengthMismatch);
}

TEST(PairStats, ListwiseDeletionMatchesManualPairs) {
    const auto ds = test::random_dataset(5);
    const auto cs = parse_conditions(std::vector<std::string>{"year >= 2003"}, ds);
    std::vector<double> x, y;
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        const auto& a = ds.column("T1")[r];
        const auto& b = ds.column("T2")[r];
        if (ds.years()[r] >= 2003 && a && b) {
            x.push_back(*a);
            y.push_back(*b);
        }
    }
    const auto s = pair_stats(ds, cs, "T1", "T2");
    EXPECT_EQ(s.n, static_cast<long>(x.size()));
    EXPECT_DOUBLE_EQ(*s.r, *pearson(x, y).r);
    EXPECT_EQ(code_of([&] { pair_stats(ds, cs, "T1", "T1"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { pair_stats(ds, cs, "T1", "ZZ"); }), ErrorCode::UnknownVariable);
}

TEST(CorrelationMatrix, LowerTriangle) {
    const auto ds = test::random_dataset(6);
    const std::vector<std::string> vars = {"T1", "T2", "T3", "T4"};
    const auto m = correlation_matrix(ds, {}, vars);
    ASSERT_EQ(m.cells.size(), 6u);
    EXPECT_EQ(m.cells[0].a, "T2");
    EXPECT_EQ(m.cells[0].b, "T1");
    for (const auto& c : m.cells) EXPECT_DOUBLE_EQ(*c.stats.r, *pair_stats(ds, {}, c.b, c.a).r);
    EXPECT_EQ(code_of([&] { correlation_matrix(ds, {}, {"T1"}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { correlation_matrix(ds, {}, {"T1", "T1"}); }), ErrorCode::InvalidArgument);
}

TEST(RelationNetwork, FixtureQualityContrast) {
    const auto& ds = test::fixture_dataset();
    const auto net = relation_network(ds, {}, "T_DEMONST", "T_EDU");
    std::set<std::string> names;
    for (const auto& n : net.nodes) names.insert(n.name);
    for (const auto* t : {"T_DEMONST", "T_EDU"}) {
        for (const auto& c : ds.variables().at(t).controls) EXPECT_TRUE(names.count(c)) << c;
        for (const auto& q : ds.variables().at(t).quality_flags) EXPECT_TRUE(names.count(q)) << q;
    }
    EXPECT_EQ(net.nodes[0].name, "T_DEMONST");
    EXPECT_EQ(net.nodes[1].name, "T_EDU");
    double demonst = 0, edu = 0;
    int flags = 0;
    for (const auto& q : ds.variables().at("T_DEMONST").quality_flags) {
        const auto* d = find_edge(net, "T_DEMONST", q);
        const auto* e = find_edge(net, "T_EDU", q);
        ASSERT_TRUE(d && e);
        demonst += std::abs(*d->stats.r);
        edu += std::abs(*e->stats.r);
        ++flags;
    }
    EXPECT_GT(demonst / flags, edu / flags + 0.05);

    const auto j = network_json(net);
    EXPECT_EQ(j["edges"].dump().find("nan"), std::string::npos);
}

TEST(RelationNetwork, ConstantColumnGivesUndefinedEdge) {
    auto meta = test::small_metadata();
    const std::vector<std::string> columns = {"Q1", "Q2", "C1", "T1", "T2", "T3", "T4"};
    HarmonizedDataset::Builder b(meta, columns);
    for (int r = 0; r < 20; ++r) {
        b.add_row({"r" + std::to_string(r), "S", "W1", 2000, "DEU"},
                  {r % 2, 1, r % 3, r % 4, (r * 7) % 5, 2, std::nullopt});
    }
    const auto ds = std::move(b).build();
    const auto net = relation_network(ds, {}, "T1", "T3");
    const auto* e = find_edge(net, "T1", "T3");
    ASSERT_TRUE(e);
    EXPECT_TRUE(e->undefined);
    EXPECT_FALSE(e->stats.r);
    const auto* q = find_edge(net, "T1", "Q1");
    ASSERT_TRUE(q);
    EXPECT_FALSE(q->undefined);
    const auto j = network_json(net);
    EXPECT_EQ(j.dump().find("nan"), std::string::npos);
    EXPECT_EQ(code_of([&] { relation_network(ds, {}, "T1", "NOPE"); }), ErrorCode::UnknownVariable);
    const auto stats = pair_stats_json(e->stats);
    EXPECT_TRUE(stats["r"].is_null());
    EXPECT_EQ(stats["level"], "undef");
}
