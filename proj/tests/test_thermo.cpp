#include "doctest.h"

#include <cmath>
#include <numeric>

#include "cpgibbs/rng.hpp"
#include "cpgibbs/thermo.hpp"

using namespace cpgibbs;
using namespace cpgibbs::thermo;
using sft::Sft;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

// mu([a]) straight from the eigendata: psi at the head of a, nu summed over
// the states that may follow a, weighted by the Birkhoff sum.
double cylinder_from_eigendata(const GibbsModel& g, const Word& a) {
    const auto& ss = g.states();
    const int s = ss.order();
    const auto& phi = g.potential();
    double sum = 0.0;
    for (int v = 0; v < ss.size(); ++v) {
        Word w = a;
        w.insert(w.end(), ss.state(v).begin(), ss.state(v).end());
        if (!g.sft().admits(w)) continue;
        sum += g.nu()[v] * std::exp(birkhoff_sum(phi, w, static_cast<int>(a.size())));
    }
    return g.psi()[ss.index_of(std::span<const Symbol>(a).first(s))] *
           std::exp(-static_cast<double>(a.size()) * g.pressure()) * sum;
}

}  // namespace

TEST_SUITE("thermo") {

TEST_CASE("transfer matrix examples") {
    auto full2 = sft::full_shift(2);
    Potential zero2;
    zero2.range = 2;
    for (auto& w : sft::enumerate_words(full2, 2)) zero2.table[w] = 0.0;
    auto tm = transfer_matrix(full2, zero2);
    CHECK(tm.matrix.isApproxToConstant(1.0));

    auto gm = transfer_matrix(sft::golden_mean(), uniform_potential(sft::golden_mean()));
    CHECK(tm.matrix.rows() == 2);
    CHECK(gm.matrix(0, 0) == 1.0);
    CHECK(gm.matrix(0, 1) == 1.0);
    CHECK(gm.matrix(1, 0) == 1.0);
    CHECK(gm.matrix(1, 1) == 0.0);

    const double p[] = {0.2, 0.3, 0.5};
    auto bt = transfer_matrix(sft::full_shift(3), bernoulli_potential(sft::full_shift(3), p));
    // entry (u, u') for u' = x is p_x, whatever u is
    for (int u = 0; u < 3; ++u)
        for (int x = 0; x < 3; ++x) CHECK(bt.matrix(u, x) == doctest::Approx(p[x]).epsilon(1e-15));

    Potential bad = zero2;
    bad.table.erase(Word{1, 1});
    CHECK_THROWS_AS(transfer_matrix(full2, bad), InvalidArgument);
}

TEST_CASE("pressure examples") {
    auto g6 = GibbsModel::build(sft::full_shift(6), uniform_potential(sft::full_shift(6)));
    CHECK(std::abs(g6.pressure() - std::log(6.0)) < 1e-12);
    auto gm = GibbsModel::build(sft::golden_mean(), uniform_potential(sft::golden_mean()));
    // positive root of x^2 = x + 1
    CHECK(std::abs(gm.pressure() - std::log(kGolden)) < 1e-10);
    CHECK(std::abs(gm.pressure() - 0.4812118) < 1e-7);
    const double p[] = {0.1, 0.6, 0.3};
    auto gb = GibbsModel::build(sft::full_shift(3), bernoulli_potential(sft::full_shift(3), p));
    CHECK(std::abs(gb.pressure()) < 1e-12);
}

TEST_CASE("periodic subshift converges") {
    // period 2: 0 -> 1 -> 0, plus 1 -> 2 -> 0
    Sft s({{0, 1, 0}, {1, 0, 1}, {1, 0, 0}});
    auto g = GibbsModel::build(s, uniform_potential(s));
    // x^3 = x + 1 for this graph's characteristic polynomial
    const double lam = std::exp(g.pressure());
    CHECK(std::abs(lam * lam * lam - lam - 1.0) < 1e-10);
    Sft swap({{0, 1}, {1, 0}});
    auto g2 = GibbsModel::build(swap, uniform_potential(swap));
    CHECK(std::abs(g2.pressure()) < 1e-12);
}

TEST_CASE("reducible input is rejected") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 1, 0, 1;
    CHECK_THROWS_AS(rpf_solve(m), NonIrreducibleError);
    CHECK_THROWS_AS(GibbsModel::build(Sft({{1, 0}, {0, 1}}), uniform_potential(Sft({{1, 0}, {0, 1}}))),
                    NonIrreducibleError);
    Eigen::MatrixXd slow(2, 2);
    slow << 1, 2, 3, 1;
    CHECK_THROWS_AS(rpf_solve(slow, {1e-12, 3}), NonConvergenceError);
}

TEST_CASE("model invariants on random potentials") {
    for (int range = 1; range <= 3; ++range)
        for (std::uint64_t seed = 1; seed <= 4; ++seed)
            for (const Sft& s : {sft::golden_mean(), sft::full_shift(3), sft::full_shift(6)}) {
                auto phi = random_potential(s, range, seed, 1.0);
                auto g = GibbsModel::build(s, phi);
                CHECK(g.right_residual() <= 1e-12);
                CHECK(g.left_residual() <= 1e-12);
                CHECK((g.psi().array() > 0.0).all());
                CHECK(std::abs(g.nu().sum() - 1.0) < 1e-12);
                CHECK(std::abs(g.nu().dot(g.psi()) - 1.0) < 1e-10);
                Eigen::VectorXd rows = g.kernel().rowwise().sum();
                CHECK((rows.array() - 1.0).abs().maxCoeff() < 1e-12);
                Eigen::RowVectorXd pi = g.stationary().transpose();
                CHECK((pi * g.kernel() - pi).cwiseAbs().maxCoeff() < 1e-10);
            }
}

TEST_CASE("cylinder examples") {
    auto g = GibbsModel::build(sft::full_shift(4), uniform_potential(sft::full_shift(4)));
    CHECK(gibbs_cylinder(g, Word{1, 3, 0, 2, 2}) == doctest::Approx(std::pow(4.0, -5)).epsilon(1e-12));
    const double p[] = {0.7, 0.3};
    auto b = GibbsModel::build(sft::full_shift(2), bernoulli_potential(sft::full_shift(2), p));
    CHECK(gibbs_cylinder(b, Word{0, 1}) == doctest::Approx(0.21).epsilon(1e-12));
    // Parry measure: stationary phi^2/(phi^2+1) on 0, P(0->0) = 1/phi
    auto gm = GibbsModel::build(sft::golden_mean(), uniform_potential(sft::golden_mean()));
    const double parry = kGolden * kGolden / (kGolden * kGolden + 1.0) / (kGolden * kGolden);
    CHECK(std::abs(gibbs_cylinder(gm, Word{0, 0, 0}) - parry) < 1e-12);
    CHECK_THROWS_AS(gibbs_cylinder(gm, Word{0, 1, 1}), DisallowedWordError);
}

TEST_CASE("markov preset reproduces its transition matrix") {
    std::vector<std::vector<double>> q{{0.2, 0.8, 0.0}, {0.5, 0.25, 0.25}, {0.9, 0.0, 0.1}};
    Sft s({{1, 1, 0}, {1, 1, 1}, {1, 0, 1}});
    auto g = GibbsModel::build(s, markov_potential(s, q));
    CHECK(std::abs(g.pressure()) < 1e-12);
    for (int u = 0; u < 3; ++u)
        for (int y = 0; y < 3; ++y) CHECK(std::abs(g.step(u, y) - q[u][y]) < 1e-12);
}

TEST_CASE("cylinders agree with the eigendata formula and are shift invariant") {
    for (int range = 2; range <= 3; ++range)
        for (const Sft& s : {sft::golden_mean(), sft::full_shift(3)}) {
            auto g = GibbsModel::build(s, random_potential(s, range, 77 + range, 1.5));
            for (int L = range - 1; L <= 8; ++L)
                for (const auto& a : sft::enumerate_words(s, L)) {
                    const double mu = gibbs_cylinder(g, a);
                    if (L >= g.order()) CHECK(std::abs(mu - cylinder_from_eigendata(g, a)) < 1e-10);
                    double left = 0.0, right = 0.0;
                    for (Symbol x = 0; x < s.symbol_count(); ++x) {
                        Word xa{x};
                        xa.insert(xa.end(), a.begin(), a.end());
                        Word ax = a;
                        ax.push_back(x);
                        if (s.admits(xa)) left += gibbs_cylinder(g, xa);
                        if (s.admits(ax)) right += gibbs_cylinder(g, ax);
                    }
                    CHECK(std::abs(left - mu) < 1e-10);
                    CHECK(std::abs(right - mu) < 1e-10);
                }
        }
}

TEST_CASE("sampling") {
    auto u = GibbsModel::build(sft::full_shift(3), uniform_potential(sft::full_shift(3)));
    const std::size_t n = 100000;
    auto w = sample_path(u, n, 5);
    std::vector<double> freq(3, 0.0);
    for (auto x : w) freq[x] += 1.0 / n;
    for (double f : freq) CHECK(std::abs(f - 1.0 / 3) < 3.0 / std::sqrt(double(n)));
    CHECK(sample_path(u, 1000, 9) == sample_path(u, 1000, 9));
    CHECK(sample_path(u, 1000, 9) != sample_path(u, 1000, 10));

    const double p[] = {0.9, 0.1};
    auto b = GibbsModel::build(sft::full_shift(2), bernoulli_potential(sft::full_shift(2), p));
    auto wb = sample_path(b, n, 6);
    const double f0 = std::count(wb.begin(), wb.end(), 0) / double(n);
    CHECK(std::abs(f0 - 0.9) < 0.003);

    auto gm = GibbsModel::build(sft::golden_mean(), random_potential(sft::golden_mean(), 3, 3, 1.0));
    CHECK(sft::golden_mean().admits(sample_path(gm, 5000, 1)));
}

TEST_CASE("gibbs bound examples") {
    auto u = GibbsModel::build(sft::full_shift(6), uniform_potential(sft::full_shift(6)));
    auto bu = gibbs_bound(u, u.potential(), 12);
    CHECK(bu.ratio_min == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(bu.ratio_max == doctest::Approx(1.0).epsilon(1e-10));
    const double p[] = {0.5, 0.2, 0.3};
    auto b = GibbsModel::build(sft::full_shift(3), bernoulli_potential(sft::full_shift(3), p));
    auto bb = gibbs_bound(b, b.potential(), 10);
    CHECK(bb.ratio_min == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(bb.ratio_max == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("gibbs bound matches brute-force enumeration") {
    for (int range = 2; range <= 3; ++range)
        for (const Sft& s : {sft::golden_mean(), sft::full_shift(3)}) {
            auto phi = random_potential(s, range, 1000 + range, 1.0);
            auto g = GibbsModel::build(s, phi);
            for (int L : {range, 6, 9}) {
                double lo = INFINITY, hi = 0.0;
                for (int len = range; len <= L; ++len)
                    for (const auto& a : sft::enumerate_words(s, len)) {
                        Word w = a;
                        auto c = least_continuation(s, a.back(), range);
                        w.insert(w.end(), c.begin(), c.end());
                        const double ref = std::exp(-len * g.pressure() + birkhoff_sum(phi, w, len));
                        const double r = gibbs_cylinder(g, a) / ref;
                        lo = std::min(lo, r);
                        hi = std::max(hi, r);
                    }
                auto gb = gibbs_bound(g, phi, L);
                CHECK(gb.ratio_min == doctest::Approx(lo).epsilon(1e-10));
                CHECK(gb.ratio_max == doctest::Approx(hi).epsilon(1e-10));
            }
        }
}

TEST_CASE("distortion vanishes once b covers the range") {
    // E_n(abw) / E_n(abw~) for finite range equals 1 as soon as |b| >= range - 1
    const Sft s = sft::full_shift(2);
    for (int range = 2; range <= 3; ++range) {
        auto phi = random_potential(s, range, 55, 1.0);
        double worst_short = 0.0;
        for (int la = 1; la <= 6; ++la)
            for (int lb = 1; lb <= 6; ++lb)
                for (const auto& a : sft::enumerate_words(s, la))
                    for (const auto& b : sft::enumerate_words(s, lb))
                        for (const auto& w1 : sft::enumerate_words(s, range))
                            for (const auto& w2 : sft::enumerate_words(s, range)) {
                                Word x = a, y = a;
                                x.insert(x.end(), b.begin(), b.end());
                                y.insert(y.end(), b.begin(), b.end());
                                x.insert(x.end(), w1.begin(), w1.end());
                                y.insert(y.end(), w2.begin(), w2.end());
                                const double ratio =
                                    std::exp(birkhoff_sum(phi, x, la) - birkhoff_sum(phi, y, la));
                                if (lb >= range - 1)
                                    CHECK(std::abs(ratio - 1.0) < 1e-12);
                                else
                                    worst_short = std::max(worst_short, std::abs(ratio - 1.0));
                            }
        // K rho^|b| with rho = 1/2 and a finite fitted K
        CHECK(std::isfinite(worst_short / 0.5));
    }
}

TEST_CASE("memory loss") {
    const double p[] = {0.2, 0.5, 0.3};
    auto b = GibbsModel::build(sft::full_shift(3), bernoulli_potential(sft::full_shift(3), p));
    for (double x : memory_loss(b, 6, 2)) CHECK(x < 1e-12);

    auto mk = GibbsModel::build(sft::golden_mean(), random_potential(sft::golden_mean(), 2, 8, 1.0));
    auto gm = memory_loss(mk, 8, 3);
    CHECK(gm[0] > 0.0);
    for (int d = 1; d <= 8; ++d) CHECK(gm[d] == 0.0);

    auto r3 = GibbsModel::build(sft::full_shift(2), random_potential(sft::full_shift(2), 3, 8, 1.0));
    auto g3 = memory_loss(r3, 6, 2);
    CHECK(g3[1] > 0.0);
    for (int d = 2; d <= 6; ++d) CHECK(g3[d] == 0.0);
    CHECK_THROWS_AS(memory_loss(r3, 21, 2), InvalidArgument);
}

}
