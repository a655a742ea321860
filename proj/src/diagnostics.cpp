#include "cpgibbs/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "cpgibbs/engine.hpp"
#include "cpgibbs/rng.hpp"
#include "cpgibbs/stats.hpp"

namespace cpgibbs::diagnostics {

IntervalSet::IntervalSet(std::vector<std::pair<double, double>> parts) {
    for (auto [lo, hi] : parts)
        if (!(lo >= 0.0 && lo <= hi && hi <= 1.0))
            throw InvalidArgument("interval set: need 0 <= lo <= hi <= 1");
    std::sort(parts.begin(), parts.end());
    for (auto p : parts) {
        if (p.first == p.second) continue;
        if (!parts_.empty() && p.first <= parts_.back().second)
            parts_.back().second = std::max(parts_.back().second, p.second);
        else
            parts_.push_back(p);
    }
}

bool IntervalSet::contains(double t) const {
    for (auto [lo, hi] : parts_)
        if (t >= lo && t < hi) return true;
    return false;
}

double IntervalSet::length() const {
    double s = 0.0;
    for (auto [lo, hi] : parts_) s += hi - lo;
    return s;
}

double cylinder_measure(const GibbsModel& model, const ProductAlphabet& pa, const Cylinder& c) {
    std::vector<scenery::Pin> pins(c.word.size());
    for (std::size_t i = 0; i < c.word.size(); ++i) {
        const int x = c.word[i];
        switch (c.coord) {
            case Coordinate::First: pins[i].first = x; break;
            case Coordinate::Second: pins[i].second = x; break;
            case Coordinate::Pair: pins[i] = {pa.first(x), pa.second(x)}; break;
        }
    }
    if (pins.empty()) return 1.0;
    return std::exp(scenery::log_constrained_mass(model, pa, pins));
}

bool cylinder_at(std::span<const sft::Symbol> path, const ProductAlphabet& pa, const Cylinder& c, long long offset) {
    for (std::size_t i = 0; i < c.word.size(); ++i) {
        const int z = path[offset + i];
        const int v = c.coord == Coordinate::First ? pa.first(z) : c.coord == Coordinate::Second ? pa.second(z) : z;
        if (v != c.word[i]) return false;
    }
    return true;
}

bool Report::within(double sigmas) const {
    if (!target) return true;
    const double gap = std::abs(pooled_mean - *target);
    if (stderr_ == 0.0) return gap <= 1e-12;
    return gap <= sigmas * stderr_;
}

nlohmann::json to_json(const Report& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["target"] = r.target ? nlohmann::json(*r.target) : nlohmann::json(nullptr);
    j["per_path_means"] = r.per_path_means;
    j["pooled_mean"] = r.pooled_mean;
    j["stderr"] = r.stderr_;
    j["dispersion"] = r.dispersion;
    j["N"] = r.N;
    j["paths"] = r.per_path_means.size();
    return j;
}

namespace {

Report summarize(std::string name, std::vector<double> means, std::optional<double> target, long long N) {
    Report r;
    r.name = std::move(name);
    r.target = target;
    r.N = N;
    const auto me = stats::mean_error(means);
    r.pooled_mean = me.mean;
    r.stderr_ = me.stderr_;
    r.dispersion = me.stddev;
    r.per_path_means = std::move(means);
    return r;
}

void check_options(const RunOptions& o) {
    if (o.N < 1 || o.paths < 1) throw InvalidArgument("diagnostics: need N >= 1 and paths >= 1");
    if (!(o.t0 >= 0.0 && o.t0 < 1.0)) throw InvalidArgument("diagnostics: t must lie in [0,1)");
}

}  // namespace

Report single_average_diagnostic(const GibbsModel& model, const encoding::AdicParams& params, const Cylinder& F,
                                 const IntervalSet& I, const RunOptions& opts) {
    return double_average_diagnostic(model, params, F, Cylinder{Coordinate::First, {}}, I, opts);
}

Report double_average_diagnostic(const GibbsModel& model, const encoding::AdicParams& params, const Cylinder& F,
                                 const Cylinder& G, const IntervalSet& I, const RunOptions& opts) {
    check_options(opts);
    const ProductAlphabet pa{params.m, params.n};
    const std::size_t len = static_cast<std::size_t>(opts.N) + std::max(F.word.size(), G.word.size()) + 1;
    std::vector<double> means(opts.paths);
    fan_out(opts.paths, opts.exec, [&](std::size_t i) {
        const Word path = thermo::sample_path(model, len, derive_seed(opts.seed, i));
        double sum = 0.0;
        for (long long k = 1; k <= opts.N; ++k) {
            if (!I.contains(encoding::angle_after(opts.t0, k, params))) continue;
            if (cylinder_at(path, pa, F, encoding::l_k(opts.t0, k, params)) && cylinder_at(path, pa, G, k)) sum += 1.0;
        }
        means[i] = sum / static_cast<double>(opts.N);
    });
    const double target = I.length() * cylinder_measure(model, pa, F) * cylinder_measure(model, pa, G);
    return summarize(G.word.empty() ? "single_average" : "double_average", std::move(means), target, opts.N);
}

std::size_t functional_path_length(const TestFunctional& f, long long N) {
    std::size_t extra = std::max({f.c.size(), f.d.size(), std::size_t{1}});
    for (const auto& q : f.queries) extra = std::max({extra, q.a.size(), q.b.size()});
    return static_cast<std::size_t>(N) + extra + 1;
}

std::vector<double> functional_series(const GibbsModel& model, const encoding::AdicParams& params,
                                      std::span<const sft::Symbol> path, const TestFunctional& f, long long N,
                                      double t0) {
    const ProductAlphabet pa{params.m, params.n};
    int b_depth = 0;
    for (const auto& q : f.queries) b_depth = std::max(b_depth, static_cast<int>(q.b.size()));
    scenery::CpOrbit orbit(model, pa, params, path, t0, b_depth);
    const Cylinder c{Coordinate::First, f.c}, d{Coordinate::Second, f.d};
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (long long k = 1; k <= N; ++k) {
        orbit.advance_to(k);
        if (!f.interval.contains(orbit.t())) continue;
        if (!cylinder_at(path, pa, c, k) || !cylinder_at(path, pa, d, orbit.l())) continue;
        double v = 1.0;
        for (const auto& q : f.queries) v *= orbit.conditional(q);
        out[k - 1] = v;
    }
    return out;
}

std::optional<std::vector<std::vector<double>>> iid_pair_table(const GibbsModel& model, const ProductAlphabet& pa) {
    if (model.sft().symbol_count() != pa.size()) return std::nullopt;
    const auto& ss = model.states();
    for (int u = 1; u < ss.size(); ++u)
        for (int y = 0; y < pa.size(); ++y)
            if (std::abs(model.step(u, y) - model.step(0, y)) > 1e-12) return std::nullopt;
    std::vector<std::vector<double>> p(pa.m, std::vector<double>(pa.n));
    for (int i = 0; i < pa.m; ++i)
        for (int j = 0; j < pa.n; ++j) p[i][j] = model.step(0, pa.encode(i, j));
    return p;
}

double closed_form_limit(const std::vector<std::vector<double>>& p, const TestFunctional& f) {
    const int m = static_cast<int>(p.size());
    if (m == 0) throw InvalidArgument("closed_form_limit: empty table");
    const int n = static_cast<int>(p[0].size());
    std::vector<double> px(m, 0.0);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(p[i].size()) != n) throw InvalidArgument("closed_form_limit: ragged table");
        for (int j = 0; j < n; ++j) {
            if (p[i][j] < 0.0) throw InvalidArgument("closed_form_limit: negative entry");
            px[i] += p[i][j];
        }
        total += px[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("closed_form_limit: table must sum to 1");

    // Ahead of k everything is an independent first-coordinate cylinder.
    double ahead = 1.0;
    for (int x : f.c) ahead *= px.at(x);
    for (const auto& q : f.queries)
        for (int x : q.a) ahead *= px.at(x);

    // Behind k the second coordinates at l+1.. are read through first coordinates
    // that are already observed, one position at a time.
    std::size_t span = f.d.size();
    for (const auto& q : f.queries) span = std::max(span, q.b.size());
    double behind = 1.0;
    for (std::size_t pos = 0; pos < span; ++pos) {
        double s = 0.0;
        for (int x = 0; x < m; ++x) {
            if (px[x] == 0.0) continue;
            double term = px[x];
            if (pos < f.d.size()) term *= p[x].at(f.d[pos]) / px[x];
            for (const auto& q : f.queries)
                if (pos < q.b.size()) term *= p[x].at(q.b[pos]) / px[x];
            s += term;
        }
        behind *= s;
    }
    return f.interval.length() * ahead * behind;
}

Report genericity_check(const GibbsModel& model, const encoding::AdicParams& params, const TestFunctional& f,
                        const RunOptions& opts) {
    check_options(opts);
    const std::size_t len = functional_path_length(f, opts.N);
    std::vector<double> means(opts.paths);
    fan_out(opts.paths, opts.exec, [&](std::size_t i) {
        const Word path = thermo::sample_path(model, len, derive_seed(opts.seed, i));
        const auto series = functional_series(model, params, path, f, opts.N, opts.t0);
        double sum = 0.0;
        for (double v : series) sum += v;
        means[i] = sum / static_cast<double>(opts.N);
    });
    std::optional<double> target;
    if (auto p = iid_pair_table(model, {params.m, params.n})) target = closed_form_limit(*p, f);
    return summarize("genericity", std::move(means), target, opts.N);
}

MixingReport mixing_diagnostic(const GibbsModel& model, const encoding::AdicParams& params, const TestFunctional& f,
                               const TestFunctional& f_star, const std::vector<int>& lags, const RunOptions& opts) {
    check_options(opts);
    int hmax = 0;
    for (int h : lags) {
        if (h < 0) throw InvalidArgument("mixing: lags must be >= 0");
        hmax = std::max(hmax, h);
    }
    const long long total = opts.N + hmax;
    const std::size_t len = std::max(functional_path_length(f, total), functional_path_length(f_star, total));
    std::vector<std::vector<double>> gaps(lags.size(), std::vector<double>(opts.paths));
    fan_out(opts.paths, opts.exec, [&](std::size_t i) {
        const Word path = thermo::sample_path(model, len, derive_seed(opts.seed, i));
        const auto a = functional_series(model, params, path, f, total, opts.t0);
        const auto b = functional_series(model, params, path, f_star, total, opts.t0);
        const double n = static_cast<double>(opts.N);
        for (std::size_t j = 0; j < lags.size(); ++j) {
            const int h = lags[j];
            double cross = 0.0, ma = 0.0, mb = 0.0;
            for (long long k = 0; k < opts.N; ++k) {
                cross += a[k] * b[k + h];
                ma += a[k];
                mb += b[k + h];
            }
            gaps[j][i] = cross / n - (ma / n) * (mb / n);
        }
    });
    MixingReport r;
    r.lags = lags;
    for (std::size_t j = 0; j < lags.size(); ++j)
        r.gaps.push_back(summarize("mixing_gap_h" + std::to_string(lags[j]), std::move(gaps[j]), 0.0, opts.N));
    return r;
}

nlohmann::json to_json(const MixingReport& r) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < r.lags.size(); ++i) {
        auto e = to_json(r.gaps[i]);
        e["lag"] = r.lags[i];
        j.push_back(std::move(e));
    }
    return j;
}

}  // namespace cpgibbs::diagnostics
