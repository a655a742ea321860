#include "cpgibbs/scenery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpgibbs/engine.hpp"
#include "cpgibbs/stats.hpp"

namespace cpgibbs::scenery {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool matches(Symbol z, const Pin& pin, const ProductAlphabet& pa) {
    return (pin.first < 0 || pa.first(z) == pin.first) && (pin.second < 0 || pa.second(z) == pin.second);
}

void check_digits(const Word& w, int base, const char* what) {
    for (Symbol d : w)
        if (d < 0 || d >= base)
            throw DisallowedWordError(std::string(what) + ": digit " + std::to_string(d) + " outside the alphabet");
}

}  // namespace

double log_constrained_mass(const GibbsModel& model, const ProductAlphabet& pa, std::span<const Pin> pins_in) {
    const auto& ss = model.states();
    if (ss.alphabet_size() != pa.size())
        throw InvalidArgument("model alphabet does not match the pair alphabet " + std::to_string(pa.m) + "x" +
                              std::to_string(pa.n));
    const int s = ss.order();
    const int S = ss.size();
    const int K = ss.alphabet_size();
    std::vector<Pin> pins(pins_in.begin(), pins_in.end());
    if (static_cast<int>(pins.size()) < s) pins.resize(s);

    std::vector<double> alpha(S, 0.0), next(S);
    double total = 0.0;
    for (int u = 0; u < S; ++u) {
        const Word& w = ss.state(u);
        bool ok = true;
        for (int i = 0; i < s && ok; ++i) ok = matches(w[i], pins[i], pa);
        if (ok) total += (alpha[u] = model.stationary()[u]);
    }
    if (total <= 0.0) return kNegInf;
    double log_scale = std::log(total);
    for (auto& a : alpha) a /= total;

    for (std::size_t pos = s; pos < pins.size(); ++pos) {
        std::fill(next.begin(), next.end(), 0.0);
        const Pin& pin = pins[pos];
        for (int u = 0; u < S; ++u) {
            if (alpha[u] == 0.0) continue;
            for (Symbol y = 0; y < K; ++y) {
                if (!matches(y, pin, pa)) continue;
                const int v = ss.next(u, y);
                if (v >= 0) next[v] += alpha[u] * model.step(u, y);
            }
        }
        total = 0.0;
        for (double x : next) total += x;
        if (total <= 0.0) return kNegInf;
        log_scale += std::log(total);
        for (int v = 0; v < S; ++v) alpha[v] = next[v] / total;
    }
    return log_scale;
}

void validate_window(const GibbsModel& model, const ProductAlphabet& pa, const ObservationWindow& w) {
    if (model.sft().symbol_count() != pa.size())
        throw InvalidArgument("model alphabet does not match the pair alphabet");
    if (w.k < 0 || w.l < 0 || w.l > w.k) throw InvalidArgument("window: need 0 <= l <= k");
    if (static_cast<long long>(w.x_obs.size()) != w.k || static_cast<long long>(w.y_obs.size()) != w.l)
        throw InvalidArgument("window: observation lengths must equal (k, l)");
    check_digits(w.x_obs, pa.m, "window");
    check_digits(w.y_obs, pa.n, "window");
}

double conditional_prob(const GibbsModel& model, const ProductAlphabet& pa, const ObservationWindow& w,
                        const QueryCylinder& query) {
    validate_window(model, pa, w);
    check_digits(query.a, pa.m, "query a");
    check_digits(query.b, pa.n, "query b");
    const long long len = std::max({w.k, w.k + static_cast<long long>(query.a.size()),
                                    w.l + static_cast<long long>(query.b.size())});
    std::vector<Pin> pins(static_cast<std::size_t>(len));
    for (long long i = 0; i < w.k; ++i) pins[i].first = w.x_obs[i];
    for (long long i = 0; i < w.l; ++i) pins[i].second = w.y_obs[i];
    const double log_den = log_constrained_mass(model, pa, std::span<const Pin>(pins).first(w.k));
    if (log_den == kNegInf) throw ZeroProbabilityWindow("observation window has probability zero");
    for (std::size_t i = 0; i < query.a.size(); ++i) pins[w.k + i].first = query.a[i];
    for (std::size_t i = 0; i < query.b.size(); ++i) pins[w.l + i].second = query.b[i];
    const double log_num = log_constrained_mass(model, pa, pins);
    return log_num == kNegInf ? 0.0 : std::exp(log_num - log_den);
}

Word first_coordinates(std::span<const Symbol> path, const ProductAlphabet& pa) {
    Word out(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) out[i] = pa.first(path[i]);
    return out;
}

Word second_coordinates(std::span<const Symbol> path, const ProductAlphabet& pa) {
    Word out(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) out[i] = pa.second(path[i]);
    return out;
}

ObservationWindow window_from_path(std::span<const Symbol> path, const ProductAlphabet& pa, long long k,
                                   long long l) {
    if (k > static_cast<long long>(path.size()) || l > k || l < 0)
        throw InvalidArgument("window_from_path: path too short or l > k");
    ObservationWindow w{k, l, {}, {}};
    w.x_obs = first_coordinates(path.first(k), pa);
    w.y_obs = second_coordinates(path.first(l), pa);
    return w;
}

std::vector<QueryCylinder> default_test_set(const ProductAlphabet& pa, int depth) {
    std::vector<QueryCylinder> out;
    for (int la = 1; la <= depth; ++la)
        for (const auto& a : sft::enumerate_words(sft::full_shift(pa.m), la))
            for (int lb = 1; lb <= depth; ++lb)
                for (const auto& b : sft::enumerate_words(sft::full_shift(pa.n), lb)) out.push_back({a, b});
    return out;
}

std::size_t orbit_path_length(long long N, int q, const std::vector<QueryCylinder>& tests) {
    std::size_t extra = 1;
    for (const auto& c : tests) extra = std::max({extra, c.a.size(), c.b.size()});
    return static_cast<std::size_t>(N) * static_cast<std::size_t>(q) + extra;
}

std::vector<SceneryFeatures> scenery_orbit_on_path(const GibbsModel& model, const encoding::AdicParams& params,
                                                   std::span<const Symbol> path, long long N, double t0,
                                                   const std::vector<QueryCylinder>& tests, int q) {
    if (N < 0 || q < 1) throw InvalidArgument("scenery_orbit: need N >= 0 and q >= 1");
    const ProductAlphabet pa{params.m, params.n};
    int b_depth = 0;
    for (const auto& c : tests) b_depth = std::max(b_depth, static_cast<int>(c.b.size()));
    CpOrbit orbit(model, pa, params, path, t0, b_depth);
    std::vector<SceneryFeatures> out;
    out.reserve(static_cast<std::size_t>(N));
    for (long long j = 1; j <= N; ++j) {
        const long long k = j * q;
        orbit.advance_to(k);
        SceneryFeatures f{orbit.t(), k, {}};
        f.values.reserve(tests.size());
        for (const auto& c : tests) f.values.push_back(orbit.conditional(c));
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<SceneryFeatures> scenery_orbit(const GibbsModel& model, const encoding::AdicParams& params,
                                           std::uint64_t seed, long long N, double t0,
                                           const std::vector<QueryCylinder>& tests, int q) {
    const Word path = thermo::sample_path(model, orbit_path_length(N, q, tests), seed);
    return scenery_orbit_on_path(model, params, path, N, t0, tests, q);
}

EmpiricalCpDistribution empirical_distribution(const std::vector<std::vector<SceneryFeatures>>& orbits, int q) {
    if (orbits.empty()) throw InvalidArgument("empirical_distribution: no orbits");
    EmpiricalCpDistribution cp;
    cp.q = q;
    for (const auto& o : orbits) cp.samples.insert(cp.samples.end(), o.begin(), o.end());
    return cp;
}

double t_marginal_ks(const EmpiricalCpDistribution& cp) {
    std::vector<double> ts;
    ts.reserve(cp.samples.size());
    for (const auto& s : cp.samples) ts.push_back(s.t);
    return stats::ks_uniform(std::move(ts));
}

}  // namespace cpgibbs::scenery
