#include "doctest.h"

#include <cmath>

#include "cpgibbs/engine.hpp"
#include "cpgibbs/stats.hpp"
#include "oracles.hpp"

using namespace cpgibbs;
using namespace cpgibbs::scenery;
using sft::ProductAlphabet;

namespace {

const ProductAlphabet kPa{2, 3};

ObservationWindow random_window(const thermo::GibbsModel& g, Rng& rng, int kmax) {
    const long long k = static_cast<long long>(rng.bits() % (kmax + 1));
    const long long l = k == 0 ? 0 : static_cast<long long>(rng.bits() % (k + 1));
    Word path = thermo::sample_path(g, std::max<long long>(k, 1), rng.bits());
    return window_from_path(path, kPa, k, l);
}

Word random_word(Rng& rng, int base, int maxlen, int minlen = 1) {
    Word w(minlen + rng.bits() % (maxlen - minlen + 1));
    for (auto& x : w) x = static_cast<int>(rng.bits() % base);
    return w;
}

}  // namespace

TEST_SUITE("scenery") {

TEST_CASE("independent product ignores the window") {
    std::vector<double> px{0.3, 0.7}, py{0.2, 0.5, 0.3};
    std::vector<std::vector<double>> p(2, std::vector<double>(3));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) p[i][j] = px[i] * py[j];
    auto g = oracle::iid_pair_model(kPa, p);
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto w = random_window(g, rng, 6);
        QueryCylinder q{random_word(rng, 2, 3), random_word(rng, 3, 3)};
        double expect = 1.0;
        for (int x : q.a) expect *= px[x];
        for (int y : q.b) expect *= py[y];
        CHECK(conditional_prob(g, kPa, w, q) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("coupled iid pairs: b is read through the observed first coordinates") {
    std::vector<std::vector<double>> p{{0.25, 0.05, 0.1}, {0.1, 0.3, 0.2}};
    auto g = oracle::iid_pair_model(kPa, p);
    const double px[] = {0.4, 0.6};
    ObservationWindow w{3, 1, {1, 0, 1}, {2}};
    QueryCylinder q{{0, 1}, {1, 2}};
    const double expect = (p[0][1] / px[0]) * (p[1][2] / px[1]) * px[0] * px[1];
    CHECK(conditional_prob(g, kPa, w, q) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("conditional_prob equals brute-force completion sums") {
    Rng rng(2);
    int checked = 0;
    for (int range = 2; range <= 3; ++range)
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto g = oracle::random_pair_model(kPa, range, seed * 10 + range);
            for (int trial = 0; trial < 40; ++trial) {
                auto w = random_window(g, rng, 6);
                QueryCylinder q{random_word(rng, 2, 3, 0), random_word(rng, 3, 3, 0)};
                const double ref = oracle::brute_conditional(g, kPa, w, q);
                CHECK(std::abs(conditional_prob(g, kPa, w, q) - ref) < 1e-12);
                ++checked;
            }
        }
    CHECK(checked == 240);
}

TEST_CASE("constrained SFT: zero windows are reported") {
    // pair symbol 0 may not follow itself
    std::vector<std::uint8_t> a(36, 1);
    a[0] = 0;
    sft::Sft s(6, a);
    auto g = thermo::GibbsModel::build(s, thermo::uniform_potential(s));
    ObservationWindow bad{2, 2, {0, 0}, {0, 0}};
    CHECK_THROWS_AS(conditional_prob(g, kPa, bad, {{0}, {0}}), ZeroProbabilityWindow);
    ObservationWindow ok{2, 1, {0, 0}, {0}};
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        QueryCylinder q{random_word(rng, 2, 3), random_word(rng, 3, 3)};
        CHECK(std::abs(conditional_prob(g, kPa, ok, q) - oracle::brute_conditional(g, kPa, ok, q)) < 1e-12);
    }
    CHECK_THROWS_AS(conditional_prob(g, kPa, ok, {{2}, {0}}), DisallowedWordError);
}

TEST_CASE("normalization and consistency") {
    Rng rng(3);
    auto g = oracle::random_pair_model(kPa, 3, 4);
    for (int trial = 0; trial < 30; ++trial) {
        auto w = random_window(g, rng, 8);
        double total = 0.0;
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 3; ++y) total += conditional_prob(g, kPa, w, {{x}, {y}});
        CHECK(std::abs(total - 1.0) < 1e-10);
        QueryCylinder q{random_word(rng, 2, 3), random_word(rng, 3, 3)};
        double split = 0.0;
        for (int x = 0; x < 2; ++x) {
            QueryCylinder qx = q;
            qx.a.push_back(x);
            split += conditional_prob(g, kPa, w, qx);
        }
        CHECK(std::abs(split - conditional_prob(g, kPa, w, q)) < 1e-10);
    }
}

TEST_CASE("orbit engine equals fresh evaluation at every step") {
    auto params = encoding::make_adic_params(2, 3);
    for (int range = 2; range <= 3; ++range)
        for (double t0 : {0.0, 0.37}) {
            auto g = oracle::random_pair_model(kPa, range, 40 + range, 1.2);
            Word path = thermo::sample_path(g, 400, 8);
            auto tests = default_test_set(kPa, 2);
            CpOrbit orbit(g, kPa, params, path, t0, 2);
            bool saw_engine = false;
            for (long long k = 1; k <= 120; k += (k < 40 ? 1 : 7)) {
                orbit.advance_to(k);
                saw_engine = saw_engine || orbit.engine_active();
                auto w = window_from_path(path, kPa, k, encoding::l_k(t0, k, params));
                CHECK(orbit.l() == w.l);
                for (const auto& q : tests) {
                    const double ref = conditional_prob(g, kPa, w, q);
                    CHECK(std::abs(orbit.conditional(q) - ref) <= 1e-12 * std::max(1.0, ref));
                }
                auto m = orbit.masses(2);
                CHECK(std::abs(m.sum() - 1.0) < 1e-10);
                const int L = static_cast<int>(encoding::l_k(t0, k + 2, params) - w.l);
                CHECK(m.cols() == static_cast<long>(std::pow(3, L)));
                CHECK(m(1, 0) == doctest::Approx(conditional_prob(g, kPa, w, {{0, 1}, Word(L, 0)})).epsilon(1e-11));
            }
            CHECK(saw_engine);
        }
}

TEST_CASE("orbit examples") {
    auto params = encoding::make_adic_params(2, 3);
    auto u = thermo::GibbsModel::build(sft::full_shift(6), thermo::uniform_potential(sft::full_shift(6)));
    auto tests = default_test_set(kPa, 2);
    auto orbit = scenery_orbit(u, params, 3, 200, 0.0, tests, 1);
    CHECK(orbit.size() == 200);
    for (const auto& f : orbit)
        for (std::size_t i = 0; i < tests.size(); ++i)
            CHECK(f.values[i] ==
                  doctest::Approx(std::pow(0.5, tests[i].a.size()) * std::pow(1.0 / 3, tests[i].b.size()))
                      .epsilon(1e-12));

    auto g = oracle::random_pair_model(kPa, 2, 9);
    Word path = thermo::sample_path(g, 500, 4);
    auto o1 = scenery_orbit_on_path(g, params, path, 200, 0.0, tests, 1);
    auto o2 = scenery_orbit_on_path(g, params, path, 100, 0.0, tests, 2);
    for (std::size_t j = 0; j < o2.size(); ++j) {
        CHECK(o2[j].k == o1[2 * j + 1].k);
        CHECK(o2[j].t == o1[2 * j + 1].t);
        for (std::size_t i = 0; i < tests.size(); ++i)
            CHECK(o2[j].values[i] == doctest::Approx(o1[2 * j + 1].values[i]).epsilon(1e-12));
    }
    // nested cylinders are monotone
    for (const auto& f : o1)
        for (std::size_t i = 0; i < tests.size(); ++i)
            for (std::size_t j = 0; j < tests.size(); ++j)
                if (tests[j].b == tests[i].b && tests[j].a.size() == 2 && tests[i].a.size() == 1 &&
                    tests[j].a[0] == tests[i].a[0])
                    CHECK(f.values[i] >= f.values[j] - 1e-15);
}

TEST_CASE("empirical distribution") {
    auto params = encoding::make_adic_params(2, 3);
    auto u = thermo::GibbsModel::build(sft::full_shift(6), thermo::uniform_potential(sft::full_shift(6)));
    std::vector<QueryCylinder> tests{{{0}, {0}}};
    auto a = scenery_orbit(u, params, 1, 10000, 0.0, tests, 1);
    auto one = empirical_distribution({a}, 1);
    CHECK(one.samples.size() == 10000);
    CHECK(one.weight() == doctest::Approx(1e-4));
    auto two = empirical_distribution({a, a}, 1);
    CHECK(two.samples.size() == 20000);
    CHECK(t_marginal_ks(one) <= 0.02);
    CHECK_THROWS_AS(empirical_distribution({}, 1), InvalidArgument);
}

}
