#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "schema_check.hpp"
#include "sdrq/ami.hpp"
#include "sdrq/availability.hpp"
#include "sdrq/evaluate.hpp"
#include "sdrq/json_export.hpp"
#include "sdrq/relations.hpp"
#include "sdrq/service.hpp"
#include "sdrq/tsne.hpp"
#include "support.hpp"

using namespace sdrq;

namespace {

// Pinned tolerances.
constexpr double kMinAccuracy = 0.90;
constexpr double kMaxTrainSeconds = 60.0;
constexpr double kEncoderTol = 1e-6;
constexpr double kRowSumTol = 1e-9;
constexpr double kGradientRelTol = 1e-4;
constexpr double kGradientStep = 1e-5;
constexpr double kPerplexityTol = 1e-3;
constexpr double kAmiIdentityTol = 1e-9;
constexpr double kAmiNullBound = 0.05;
constexpr double kPearsonRTol = 1e-9;
constexpr double kPearsonPTol = 1e-6;
constexpr double kKnownP = 0.0249;
constexpr double kKnownPTol = 1e-3;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

const Workspace& fixture() { return test::trained_fixture(); }

std::vector<int> fixture_labels() {
    std::vector<int> y;
    for (const auto& q : fixture().dataset->questions()) y.push_back(*fixture().head->class_index(q.target));
    return y;
}

const ProjectionState& fixture_projection() {
    static const ProjectionState state = [] {
        const auto& ws = fixture();
        std::vector<std::string> ids;
        for (const auto& q : ws.dataset->questions()) ids.push_back(std::to_string(q.id));
        return tsne(corpus_embeddings(*ws.projection_provider(), ws.dataset->questions()), TsneParams{}, ids);
    }();
    return state;
}

void classifier(Outcome& o) {
    const auto& ws = fixture();
    const auto start = std::chrono::steady_clock::now();
    const auto head = train_workspace_head(ws);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto& questions = ws.dataset->questions();
    int correct = 0;
    for (std::size_t row : head.validation_rows) {
        const auto& q = questions[row];
        correct += head.classes()[static_cast<std::size_t>(head.predict(ws.provider->encode(q.text)).first)] == q.target;
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(head.validation_rows.size());
    const double final_loss = head.training_log.back().validation_loss;
    o.detail << "accuracy=" << accuracy << " (>= " << kMinAccuracy << ") val_loss " << head.initial_validation_loss
             << " -> " << final_loss << " train_seconds=" << seconds;
    o.require(questions.size() == 300 && head.num_classes() == 10, "fixture shape");
    o.require(accuracy >= kMinAccuracy, "accuracy");
    o.require(final_loss < head.initial_validation_loss, "loss decrease");
    o.require(seconds < kMaxTrainSeconds, "runtime");
}

void qbq_narrative(Outcome& o) {
    const auto& rec = *fixture().recommender;
    const auto hard = rec.hard("participation in demonstration");
    std::set<std::string> soft;
    for (const auto& n : rec.soft("trust in parliament")) soft.insert(n.target);
    o.detail << "hard=" << hard.target << " soft_targets=" << soft.size();
    o.require(hard.target == "T_DEMONST", "hard target");
    o.require(soft.count("T_TRPARL_11") == 1, "soft has T_TRPARL_11");
    o.require(soft.count("T_TRPARL_DISTRIB") == 1, "soft has T_TRPARL_DISTRIB");
}

void encoder_math(Outcome& o) {
    std::mt19937_64 rng(101);
    double worst = 0, worst_row = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int heads = 1 + static_cast<int>(rng() % 4);
        const int d_model = heads * (1 + static_cast<int>(rng() % 8));
        const int d_ff = 1 + static_cast<int>(rng() % 16);
        const auto n = 1 + static_cast<Eigen::Index>(rng() % 12);
        const auto layer = oracle::random_layer(d_model, heads, d_ff, rng);
        const auto x = oracle::random_matrix(n, d_model, rng);
        const auto mask = oracle::random_mask(n, rng);
        const auto& h = layer.heads.front();
        const MatrixX<double> q = x * h.query, k = x * h.key, v = x * h.value;

        worst = std::max(worst, (attention_head(q, k, v, mask) - oracle::naive_attention(q, k, v, mask)).cwiseAbs().maxCoeff());
        worst = std::max(worst, (multi_head(x, layer, mask) - oracle::naive_multi_head(x, layer, mask)).cwiseAbs().maxCoeff());
        worst = std::max(worst, (ffn(x, layer.ffn_in, layer.ffn_in_bias, layer.ffn_out, layer.ffn_out_bias) -
                                 oracle::naive_ffn(x, layer.ffn_in, layer.ffn_in_bias, layer.ffn_out, layer.ffn_out_bias))
                                    .cwiseAbs()
                                    .maxCoeff());
        const auto w = attention_weights(q, k, mask);
        worst_row = std::max(worst_row, (w.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    o.detail << "max_abs_error=" << worst << " (<= " << kEncoderTol << ") max_row_sum_error=" << worst_row
             << " (<= " << kRowSumTol << ")";
    o.require(worst <= kEncoderTol, "oracle agreement");
    o.require(worst_row <= kRowSumTol, "row sums");
}

void tsne_checks(Outcome& o) {
    double worst_grad = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const auto x = oracle::random_matrix(10, 5, rng);
        const auto p = joint_probabilities(conditional_affinities(squared_distances(x), 3).p);
        const auto y = oracle::random_matrix(10, 2, rng);
        const auto g = kl_gradient(p, y);
        MatrixX<double> num(10, 2);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            MatrixX<double> yp = y, ym = y;
            yp.data()[i] += kGradientStep;
            ym.data()[i] -= kGradientStep;
            num.data()[i] = (kl_divergence(p, yp) - kl_divergence(p, ym)) / (2 * kGradientStep);
        }
        worst_grad = std::max(worst_grad, (g - num).cwiseAbs().maxCoeff() / num.cwiseAbs().maxCoeff());
    }
    double worst_perp = 0;
    auto check_perplexity = [&](const MatrixX<double>& x, double perplexity) {
        const auto cond = conditional_affinities(squared_distances(x), perplexity);
        for (Eigen::Index i = 0; i < cond.p.rows(); ++i) {
            worst_perp = std::max(worst_perp, std::abs(oracle::perplexity(cond.p.row(i).transpose()) - perplexity));
        }
    };
    // Fixture texts repeat up to ten times, so low targets use random points.
    const auto corpus = corpus_embeddings(*fixture().projection_provider(), fixture().dataset->questions());
    for (double perplexity : {10.0, 30.0, 50.0, 150.0}) check_perplexity(corpus, perplexity);
    std::mt19937_64 rng(99);
    const auto points = oracle::random_matrix(200, 8, rng);
    for (double perplexity : {2.0, 5.0, 30.0, 100.0}) check_perplexity(points, perplexity);
    o.detail << "gradient_rel_error=" << worst_grad << " (<= " << kGradientRelTol << ") perplexity_error=" << worst_perp
             << " (<= " << kPerplexityTol << ")";
    o.require(worst_grad <= kGradientRelTol, "gradient");
    o.require(worst_perp <= kPerplexityTol, "perplexity");
}

void stability(Outcome& o) {
    const auto r = stability_study(fixture_projection(),
                                   fixture().projection_provider()->encode("trust in parliament"), fixture_labels());
    o.detail << "seeds=" << r.runs.size() << " displacement warm=" << r.mean_warm_displacement
             << " random=" << r.mean_random_displacement << " ami_variance warm=" << r.warm_ami_variance
             << " random=" << r.random_ami_variance;
    o.require(r.runs.size() == 10, "ten seeds");
    o.require(r.mean_warm_displacement < r.mean_random_displacement, "displacement");
    o.require(r.warm_ami_variance <= r.random_ami_variance, "AMI variance");
}

void ami_checks(Outcome& o) {
    std::mt19937_64 rng(7);
    double identity = 0;
    bool invariant = true;
    for (int t = 0; t < 50; ++t) {
        std::vector<int> u(100), v(100);
        for (auto& x : u) x = static_cast<int>(rng() % 6);
        for (auto& x : v) x = static_cast<int>(rng() % 4);
        identity = std::max(identity, std::abs(ami(u, u).ami - 1.0));
        std::vector<int> perm = {0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> relabeled;
        for (int x : v) relabeled.push_back(perm[static_cast<std::size_t>(x)] * 11 - 5);
        invariant = invariant && ami(u, v).ami == ami(u, relabeled).ami;
    }
    double worst_null = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 r(seed);
        std::vector<int> u(300), v(300);
        for (auto& x : u) x = static_cast<int>(r() % 3);
        for (auto& x : v) x = static_cast<int>(r() % 3);
        worst_null = std::max(worst_null, std::abs(ami(u, v).ami));
    }
    const auto labels = fixture_labels();
    const auto trained = corpus_embeddings(*fixture().projection_provider(), fixture().dataset->questions());
    MatrixX<double> random = oracle::random_matrix(trained.rows(), trained.cols(), rng);
    EvaluationOptions eo;
    eo.tsne.iterations = 300;
    const auto scores = evaluate_embeddings({{"trained", trained}, {"random", random}}, labels, eo);
    o.detail << "identity_error=" << identity << " relabel_exact=" << invariant << " max_null_ami=" << worst_null
             << " median trained=" << scores[0].summary.median << " random=" << scores[1].summary.median;
    o.require(identity <= kAmiIdentityTol, "identity");
    o.require(invariant, "relabel invariance");
    o.require(worst_null < kAmiNullBound, "null partitions");
    o.require(scores[0].summary.median > scores[1].summary.median, "trained beats random");
}

void availability(Outcome& o) {
    long mismatches = 0, invariant_violations = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto ds = test::random_dataset(seed, 1000);
        const std::vector<std::string> targets = {"T1", "T2", "T3"};
        AvailabilityQuery q;
        q.conditions = parse_conditions(std::vector<std::string>{"year >= 2002", "country != FRA"}, ds);
        q.targets = targets;
        std::map<std::string, YearCounts> sep;
        YearCounts joint;
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            if (ds.years()[r] < 2002 || ds.countries()[r] == "FRA") continue;
            bool all = true;
            for (const auto& t : targets) {
                if (ds.column(t)[r]) {
                    ++sep[t][ds.years()[r]];
                } else {
                    all = false;
                }
            }
            if (all) ++joint[ds.years()[r]];
        }
        auto got = separate_availability(ds, q);
        for (const auto& t : targets) mismatches += got[t] != sep[t];
        mismatches += joint_availability(ds, q).per_year != joint;
        const auto profile = availability_profile(ds, q);
        for (int y : profile.years) {
            for (const auto& t : targets) invariant_violations += profile.joint.per_year.at(y) > profile.separate.at(t).at(y);
        }
    }

    const auto& ds = *fixture().dataset;
    AvailabilityQuery rus;
    rus.conditions = parse_conditions(std::vector<std::string>{"country = RUS", "year >= 2000", "year <= 2020"}, ds);
    rus.targets = {"T_DEMONST", "T_TRPARL_11"};
    std::set<int> case2;
    for (const auto& [y, c] : availability_profile(ds, rus).cases) {
        if (c == YearCase::Case2) case2.insert(y);
    }
    AvailabilityQuery wvs;
    wvs.targets = {"T_TRPARL_11", "T_DEMONST"};
    wvs.level = Level::Macro;
    const long w2006 = level_counts(ds, wvs, "WVS", 2006), w2007 = level_counts(ds, wvs, "WVS", 2007);
    AvailabilityQuery pilot;
    pilot.targets = {"T_DEMONST"};
    const auto quality = survey_quality(ds, "PILOT", pilot);

    o.detail << "oracle_mismatches=" << mismatches << " invariant_violations=" << invariant_violations
             << " russia_case2=" << case2.size() << " wvs=" << w2006 << "/" << w2007
             << " pilot_quality=" << (quality ? *quality : -1);
    o.require(mismatches == 0, "brute-force oracle");
    o.require(invariant_violations == 0, "joint <= separate");
    o.require(case2 == std::set<int>{2007, 2009}, "Russia Case2 years");
    o.require(w2006 == 23 && w2007 == 9, "WVS macro counts");
    o.require(quality && *quality == 100.0 / 150.0, "two-wave quality");
}

void relations(Outcome& o) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    double worst_r = 0, worst_p = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 5 + static_cast<int>(rng() % 300);
        const double rho = std::uniform_real_distribution<double>(-0.9, 0.9)(rng);
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = normal(rng);
            y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * normal(rng);
        }
        const auto s = pearson(x, y);
        const auto ref = oracle::pearson(x, y);
        worst_r = std::max(worst_r, std::abs(*s.r - static_cast<double>(ref.r)));
        worst_p = std::max(worst_p, std::abs(*s.p - static_cast<double>(ref.p)));
    }
    // Twenty points with r = 0.5 exactly, by Gram-Schmidt on two normal draws.
    Eigen::VectorXd a(20), z(20);
    for (Eigen::Index i = 0; i < 20; ++i) {
        a(i) = normal(rng);
        z(i) = normal(rng);
    }
    a.array() -= a.mean();
    z.array() -= z.mean();
    z -= a.dot(z) / a.dot(a) * a;
    const Eigen::VectorXd b20 = 0.5 * a.normalized() + std::sqrt(0.75) * z.normalized();
    const auto half = pearson(std::vector<double>(a.data(), a.data() + 20), std::vector<double>(b20.data(), b20.data() + 20));
    const double known = *half.p;

    auto meta = test::small_metadata();
    HarmonizedDataset::Builder b(meta, {"Q1", "Q2", "C1", "T1", "T2", "T3", "T4"});
    for (int r = 0; r < 20; ++r) {
        b.add_row({"r" + std::to_string(r), "S", "W1", 2000, "DEU"}, {r % 2, 1, r % 3, r % 4, r % 5, 2, 3});
    }
    const auto ds = std::move(b).build();
    const auto flat = pair_stats(ds, {}, "T1", "T3");
    const auto text = network_json(relation_network(ds, {}, "T1", "T3")).dump() +
                      matrix_json(correlation_matrix(ds, {}, {"T1", "T2", "T3", "T4"})).dump();
    o.detail << "max_r_error=" << worst_r << " (<= " << kPearsonRTol << ") max_p_error=" << worst_p << " (<= "
             << kPearsonPTol << ") p(n=20,r=0.5)=" << known;
    o.require(worst_r <= kPearsonRTol, "r");
    o.require(worst_p <= kPearsonPTol, "p");
    o.require(std::abs(known - kKnownP) <= kKnownPTol, "known p");
    o.require(flat.level == Significance::Undefined, "zero variance undefined");
    o.require(text.find("nan") == std::string::npos && text.find("NaN") == std::string::npos, "no NaN");
}

int run_cli(const std::string& args, std::string& out) {
    FILE* pipe = popen((std::string(SDRQ_CLI) + " " + args + " 2>/dev/null").c_str(), "r");
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void service(Outcome& o) {
    ServiceOptions so;
    so.projection.iterations = 150;
    so.update_iterations = 50;
    Api api(so);
    api.add_dataset("fixture", fixture());
    const auto schema = [](const std::string& name) {
        return Json::parse(read_text_file(test::source_dir() / "docs" / "schemas" / (name + ".json")));
    };
    int schema_failures = 0, code_failures = 0;
    auto check = [&](const std::string& name, std::string_view method, const std::string& path,
                     const std::string& body = {}, const QueryParams& query = {}) {
        const auto r = api.handle(method, path, query, body);
        const auto j = Json::parse(r.body);
        if (!test::SchemaCheck::validate(schema(name), j).empty()) ++schema_failures;
        return std::make_pair(r.status, j);
    };
    check("health", "GET", "/healthz");
    check("variables", "GET", "/api/variables");
    check("questions", "GET", "/api/questions");
    check("survey", "GET", "/api/surveys/WVS");
    check("recommendation", "POST", "/api/qbq", R"({"text": "trust in parliament"})");
    check("profile", "POST", "/api/qbc", R"({"targets": ["T_DEMONST", "T_TRPARL_11"], "sort": "quality"})");
    check("coverage", "POST", "/api/qbc/coverage", R"({"targets": ["T_DEMONST"], "surveys": ["WVS"], "year": 2006})");
    check("matrix", "POST", "/api/qbr", R"({"targets": ["T_DEMONST", "T_EDU", "T_AGE"]})");
    check("network", "POST", "/api/qbr/network", R"({"pair": ["T_DEMONST", "T_EDU"]})");
    const auto created = check("projection", "POST", "/api/projection", "{}");
    const std::string id = created.second["session"];
    check("projection_update", "POST", "/api/projection/" + id + "/update", R"({"text": "trust in parliament"})");
    check("projection", "GET", "/api/projection/" + id);
    check("brush", "POST", "/api/projection/" + id + "/brush", R"({"x_min": -5, "x_max": 5, "y_min": -5, "y_max": 5})");

    auto expect_code = [&](const std::string& path, const std::string& body, int status, const std::string& code) {
        const auto r = check("error", "POST", path, body);
        if (r.first != status || r.second["code"] != code) ++code_failures;
    };
    expect_code("/api/qbc", R"({"conditions": ["year >< 2000"], "targets": ["T_EDU"]})", 400, "parse_error");
    expect_code("/api/qbr", R"({"targets": ["T_EDU", "T_NOPE"]})", 400, "unknown_variable");
    expect_code("/api/projection/nope/update", R"({"text": "x"})", 404, "not_found");
    Api untrained;
    untrained.add_dataset("raw", assemble_workspace(*fixture().dataset));
    if (Json::parse(untrained.handle("POST", "/api/qbq", {}, R"({"text": "x"})").body)["code"] != "untrained_head") {
        ++code_failures;
    }

    const std::vector<std::pair<std::string, std::string>> mix = {
        {"/api/qbq", R"({"text": "Did you take part in a demonstration?"})"},
        {"/api/qbc", R"({"targets": ["T_DEMONST", "T_EDU"], "level": "macro"})"},
        {"/api/qbr", R"({"targets": ["T_DEMONST", "T_EDU", "T_GENDER"]})"},
        {"/api/qbr/network", R"({"pair": ["T_DEMONST", "T_EDU"]})"},
    };
    std::vector<std::string> serial;
    for (int i = 0; i < 32; ++i) {
        const auto& [path, body] = mix[static_cast<std::size_t>(i) % mix.size()];
        serial.push_back(api.handle(i % 8 == 7 ? "GET" : "POST", i % 8 == 7 ? "/api/projection/" + id : path, {}, i % 8 == 7 ? "" : body).body);
    }
    std::vector<std::future<std::string>> futures;
    for (int i = 0; i < 32; ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
            const auto& [path, body] = mix[static_cast<std::size_t>(i) % mix.size()];
            return api.handle(i % 8 == 7 ? "GET" : "POST", i % 8 == 7 ? "/api/projection/" + id : path, {}, i % 8 == 7 ? "" : body).body;
        }));
    }
    int concurrent_mismatches = 0;
    for (int i = 0; i < 32; ++i) concurrent_mismatches += futures[static_cast<std::size_t>(i)].get() != serial[static_cast<std::size_t>(i)];

    const auto dir = (std::filesystem::temp_directory_path() / "sdrq_acceptance").string();
    std::filesystem::remove_all(dir);
    std::string out;
    bool cli_ok = run_cli("generate-fixture --out " + dir, out) == 0;
    out.clear();
    cli_ok = cli_ok && run_cli("-w " + dir +
                                   " qbc --filter 'country=RUS' --filter 'year>=2000' --filter 'year<=2020'"
                                   " --targets T_DEMONST,T_TRPARL_11",
                               out) == 0;
    std::set<std::string> cli_case2;
    if (cli_ok) {
        const auto j = Json::parse(out);
        cli_ok = test::SchemaCheck::validate(schema("profile"), j).empty();
        for (const auto& [year, label] : j["cases"].items()) {
            if (label == "case2") cli_case2.insert(year);
        }
    }
    std::filesystem::remove_all(dir);

    o.detail << "schema_failures=" << schema_failures << " error_code_failures=" << code_failures
             << " concurrent_mismatches=" << concurrent_mismatches << " cli_case2=" << cli_case2.size();
    o.require(schema_failures == 0, "schemas");
    o.require(code_failures == 0, "error codes");
    o.require(concurrent_mismatches == 0, "concurrency");
    o.require(cli_ok && cli_case2 == std::set<std::string>{"2007", "2009"}, "CLI profile");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"classifier", classifier},   {"qbq_narrative", qbq_narrative}, {"encoder_math", encoder_math},
        {"tsne", tsne_checks},        {"stability", stability},         {"ami", ami_checks},
        {"availability", availability}, {"relations", relations},       {"service", service},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
