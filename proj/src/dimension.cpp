#include "cpgibbs/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cpgibbs/engine.hpp"
#include "cpgibbs/rng.hpp"
#include "cpgibbs/stats.hpp"

namespace cpgibbs::dimension {

namespace {

Estimate to_estimate(const std::vector<double>& xs) {
    auto me = stats::mean_error(xs);
    return {me.mean, me.stderr_};
}

}  // namespace

Estimate measure_local_dimension(const GibbsModel& model, const encoding::AdicParams& params, int num_samples,
                                 int K, std::uint64_t seed, Exec exec) {
    if (num_samples < 1 || K < 1) throw InvalidArgument("local dimension: need samples >= 1 and K >= 1");
    const ProductAlphabet pa{params.m, params.n};
    const long long l = encoding::l_k(0.0, K, params);
    std::vector<double> d(num_samples);
    fan_out(num_samples, exec, [&](std::size_t i) {
        const auto path = thermo::sample_path(model, K, derive_seed(seed, i));
        std::vector<scenery::Pin> pins(K);
        for (int j = 0; j < K; ++j) pins[j].first = pa.first(path[j]);
        for (long long j = 0; j < l; ++j) pins[j].second = pa.second(path[j]);
        d[i] = scenery::log_constrained_mass(model, pa, pins) / (-K * std::log(double(params.m)));
    });
    return to_estimate(d);
}

std::vector<SceneryMeasure> sample_scenery_measures(const GibbsModel& model, const encoding::AdicParams& params,
                                                    int depth, int paths, int count, int stride, int burn_in,
                                                    std::uint64_t seed, Exec exec) {
    if (depth < 1 || paths < 1 || count < 1 || stride < 1 || burn_in < 0)
        throw InvalidArgument("scenery measures: invalid sampling parameters");
    const ProductAlphabet pa{params.m, params.n};
    const int b_depth = static_cast<int>(std::floor(depth * params.alpha)) + 1;
    const std::size_t len = static_cast<std::size_t>(burn_in) + static_cast<std::size_t>(count) * stride + depth + 1;
    std::vector<std::vector<SceneryMeasure>> per_path(paths);
    fan_out(paths, exec, [&](std::size_t p) {
        const auto path = thermo::sample_path(model, len, derive_seed(seed, p));
        scenery::CpOrbit orbit(model, pa, params, path, 0.0, b_depth);
        for (int j = 1; j <= count; ++j) {
            orbit.advance_to(burn_in + static_cast<long long>(j) * stride);
            SceneryMeasure s;
            s.t = orbit.t();
            s.depth = depth;
            s.mass = orbit.masses(depth);
            s.y_depth = static_cast<int>(std::lround(std::log(double(s.mass.cols())) / std::log(double(params.n))));
            per_path[p].push_back(std::move(s));
        }
    });
    std::vector<SceneryMeasure> out;
    for (auto& v : per_path)
        for (auto& s : v) out.push_back(std::move(s));
    return out;
}

double GridMeasure::total() const {
    double s = 0.0;
    for (double x : mass) s += x;
    return s;
}

GridMeasure project_scenery_measure(const SceneryMeasure& s, const encoding::AdicParams& params, double theta,
                                    int q) {
    if (q < 1) throw InvalidArgument("projection: q must be >= 1");
    const double m = params.m, n = params.n;
    const double pitch = std::pow(m, -q);
    std::vector<double> xc(s.mass.rows()), yc(s.mass.cols());
    for (Eigen::Index i = 0; i < s.mass.rows(); ++i) {
        double x = 0.0;
        std::size_t idx = static_cast<std::size_t>(i);
        // the last digit of i carries weight m^-D
        double place = std::pow(m, -s.depth);
        for (int d = 0; d < s.depth; ++d) {
            x += static_cast<double>(idx % params.m) * place;
            idx /= params.m;
            place *= m;
        }
        xc[i] = x + std::pow(m, -s.depth) / 2;
    }
    const double lift = std::pow(n, s.t);
    for (Eigen::Index j = 0; j < s.mass.cols(); ++j) {
        double y = 0.0;
        std::size_t idx = static_cast<std::size_t>(j);
        double place = std::pow(n, -s.y_depth);
        for (int d = 0; d < s.y_depth; ++d) {
            y += static_cast<double>(idx % params.n) * place;
            idx /= params.n;
            place *= n;
        }
        yc[j] = lift * (y + std::pow(n, -s.y_depth) / 2);
    }
    const double c = std::cos(theta), sn = std::sin(theta);
    std::vector<long long> cell(xc.size() * yc.size());
    long long lo = std::numeric_limits<long long>::max(), hi = std::numeric_limits<long long>::min();
    for (std::size_t j = 0; j < yc.size(); ++j)
        for (std::size_t i = 0; i < xc.size(); ++i) {
            const long long v = static_cast<long long>(std::floor((xc[i] * c + yc[j] * sn) / pitch));
            cell[j * xc.size() + i] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    GridMeasure g;
    g.pitch = pitch;
    g.origin = lo;
    g.mass.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (std::size_t j = 0; j < yc.size(); ++j)
        for (std::size_t i = 0; i < xc.size(); ++i)
            g.mass[cell[j * xc.size() + i] - lo] += s.mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return g;
}

double r_entropy(const GridMeasure& g, double r) {
    if (g.pitch > r * (1.0 + 1e-12)) throw InvalidArgument("r_entropy: grid pitch must be <= r");
    const long long w = static_cast<long long>(std::floor(r / g.pitch + 1e-9));
    const long long n = static_cast<long long>(g.mass.size());
    std::vector<double> prefix(n + 1, 0.0);
    for (long long i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + g.mass[i];
    double h = 0.0;
    for (long long i = 0; i < n; ++i) {
        if (g.mass[i] <= 0.0) continue;
        const double ball = prefix[std::min(n, i + w + 1)] - prefix[std::max(0LL, i - w)];
        h -= g.mass[i] * std::log(ball);
    }
    return std::max(h, 0.0);
}

Estimate E_q_estimate(const std::vector<SceneryMeasure>& samples, const encoding::AdicParams& params, double theta,
                      int q) {
    if (samples.empty()) throw InvalidArgument("E_q: no scenery samples");
    std::vector<double> v;
    v.reserve(samples.size());
    const double pitch = std::pow(double(params.m), -q);
    for (const auto& s : samples) {
        if (q > s.depth)
            throw InvalidArgument("E_q: feature depth " + std::to_string(s.depth) + " is insufficient for q = " +
                                  std::to_string(q));
        v.push_back(r_entropy(project_scenery_measure(s, params, theta, q), pitch) / (q * std::log(double(params.m))));
    }
    return to_estimate(v);
}

Extrapolation E_extrapolate(const std::vector<int>& qs, const std::vector<double>& values) {
    if (qs.size() != values.size() || qs.size() < 2) throw InvalidArgument("extrapolation: need >= 2 values of q");
    std::vector<double> x;
    for (int q : qs) {
        if (q < 1) throw InvalidArgument("extrapolation: q must be >= 1");
        x.push_back(1.0 / q);
    }
    if (std::all_of(qs.begin(), qs.end(), [&](int q) { return q == qs[0]; }))
        throw InvalidArgument("extrapolation: need distinct q");
    const auto fit = stats::fit_line(x, values);
    Extrapolation e;
    e.E = fit.intercept;
    e.c = -fit.slope;
    e.rms_residual = fit.rms_residual;
    e.max_value = *std::max_element(values.begin(), values.end());
    return e;
}

double correlation_dimension(const GibbsModel& model, const encoding::AdicParams& params, double theta, int points,
                             std::uint64_t seed, double r_min, double r_max) {
    if (points < 2 || !(r_min > 0.0 && r_min < r_max)) throw InvalidArgument("correlation dimension: bad parameters");
    const ProductAlphabet pa{params.m, params.n};
    const int depth = 40;
    std::vector<double> proj(points);
    const double c = std::cos(theta), s = std::sin(theta);
    for (int i = 0; i < points; ++i) {
        const auto path = thermo::sample_path(model, depth, derive_seed(seed, i));
        const auto x = scenery::first_coordinates(path, pa), y = scenery::second_coordinates(path, pa);
        auto [px, py] = encoding::xi_point(x, y, depth, params);
        proj[i] = px * c + py * s;
    }
    std::sort(proj.begin(), proj.end());
    const int radii = 12;
    std::vector<double> lr, lc;
    const double pairs = 0.5 * double(points) * double(points - 1);
    for (int j = 0; j < radii; ++j) {
        const double r = r_min * std::pow(r_max / r_min, double(j) / (radii - 1));
        double count = 0.0;
        std::size_t lo = 0;
        for (std::size_t i = 0; i < proj.size(); ++i) {
            while (proj[i] - proj[lo] >= r) ++lo;
            count += static_cast<double>(i - lo);
        }
        if (count <= 0.0) continue;
        lr.push_back(std::log(r));
        lc.push_back(std::log(count / pairs));
    }
    if (lr.size() < 2) return 0.0;
    return stats::fit_line(lr, lc).slope;
}

Estimate marginal_dimension(const GibbsModel& model, const encoding::AdicParams& params, bool first_coordinate,
                            int L, int samples, std::uint64_t seed) {
    if (L < 1 || samples < 1) throw InvalidArgument("marginal dimension: need L >= 1 and samples >= 1");
    const ProductAlphabet pa{params.m, params.n};
    const double base = std::log(double(first_coordinate ? params.m : params.n));
    std::vector<double> v(samples);
    for (int i = 0; i < samples; ++i) {
        const auto path = thermo::sample_path(model, L, derive_seed(seed, i));
        std::vector<scenery::Pin> pins(L);
        for (int j = 0; j < L; ++j) {
            if (first_coordinate)
                pins[j].first = pa.first(path[j]);
            else
                pins[j].second = pa.second(path[j]);
        }
        v[i] = -scenery::log_constrained_mass(model, pa, pins) / (L * base);
    }
    return to_estimate(v);
}

BoundaryMass boundary_mass_check(const GibbsModel& model, const ProductAlphabet& pa, int depth) {
    if (depth < 2) throw InvalidArgument("boundary mass: depth must be >= 2");
    BoundaryMass b;
    std::vector<double> ds, lf, ls;
    for (int d = 1; d <= depth; ++d) {
        std::vector<scenery::Pin> pf(d), ps(d);
        for (int i = 0; i < d; ++i) pf[i].first = 0, ps[i].second = 0;
        const double f = scenery::log_constrained_mass(model, pa, pf);
        const double s = scenery::log_constrained_mass(model, pa, ps);
        b.first.push_back(std::exp(f));
        b.second.push_back(std::exp(s));
        ds.push_back(d);
        lf.push_back(std::max(f, -700.0));
        ls.push_back(std::max(s, -700.0));
    }
    b.decay_first = std::exp(stats::fit_line(ds, lf).slope);
    b.decay_second = std::exp(stats::fit_line(ds, ls).slope);
    b.degenerate = b.decay_first > 0.99 || b.decay_second > 0.99;
    return b;
}

std::string exceptional_label(double theta) {
    constexpr double pi = std::numbers::pi;
    double r = std::fmod(theta, pi);
    if (r < 0) r += pi;
    if (r < 1e-9 || pi - r < 1e-9) return "pi1";
    if (std::abs(r - pi / 2) < 1e-9) return "pi2";
    return "";
}

DimensionReport conservation_check(const GibbsModel& model, const encoding::AdicParams& params,
                                   const std::vector<double>& thetas, const ConservationConfig& cfg) {
    if (!encoding::check_multiplicative_independence(params.m, params.n))
        throw MultiplicativeDependenceError("conservation: log m / log n is rational, the theorem does not apply");
    const ProductAlphabet pa{params.m, params.n};
    if (model.sft().symbol_count() != pa.size()) throw InvalidArgument("conservation: model is not on the pair alphabet");
    if (!sft::is_transitive(model.sft())) throw NonIrreducibleError("conservation: subshift is not transitive");
    if (cfg.q_list.size() < 2) throw InvalidArgument("conservation: q_list needs at least two values");

    DimensionReport r;
    r.dim_mu = measure_local_dimension(model, params, cfg.local_samples, cfg.local_depth, derive_seed(cfg.seed, 1),
                                       cfg.exec);
    r.target = std::min(1.0, r.dim_mu.mean);
    r.boundary = boundary_mass_check(model, pa, cfg.boundary_depth);
    if (r.boundary.degenerate)
        r.warnings.push_back("boundary mass decays slowly: the measure charges the adic grid lines");

    const auto samples = sample_scenery_measures(model, params, cfg.feature_depth, cfg.paths, cfg.samples_per_path,
                                                 cfg.stride, cfg.burn_in, derive_seed(cfg.seed, 2), cfg.exec);
    for (double theta : thetas) {
        ProjectionResult p;
        p.theta = theta;
        p.exceptional = exceptional_label(theta);
        if (!p.exceptional.empty()) {
            p.marginal = marginal_dimension(model, params, p.exceptional == "pi1", cfg.marginal_length,
                                            cfg.marginal_samples, derive_seed(cfg.seed, 3));
            p.dim_pi = p.marginal->mean;
            p.gap = std::abs(p.dim_pi - r.target);
            r.projections.push_back(std::move(p));
            continue;
        }
        std::vector<double> values(cfg.q_list.size());
        std::vector<Estimate> ests(cfg.q_list.size());
        fan_out(cfg.q_list.size(), cfg.exec,
                [&](std::size_t i) { ests[i] = E_q_estimate(samples, params, theta, cfg.q_list[i]); });
        for (std::size_t i = 0; i < cfg.q_list.size(); ++i) {
            p.E_q[cfg.q_list[i]] = ests[i];
            values[i] = ests[i].mean;
        }
        p.extrapolation = E_extrapolate(cfg.q_list, values);
        p.direct = correlation_dimension(model, params, theta, cfg.direct_points, derive_seed(cfg.seed, 4));
        p.dim_pi = std::clamp(p.extrapolation.E, 0.0, 1.0);
        p.gap = std::abs(p.dim_pi - r.target);
        r.max_gap = std::max(r.max_gap, p.gap);
        r.projections.push_back(std::move(p));
    }
    r.passed = r.max_gap <= cfg.tolerance;
    return r;
}

nlohmann::json to_json(const DimensionReport& r, const std::vector<int>& q_list) {
    using nlohmann::json;
    json j;
    j["dim_mu"] = {{"mean", r.dim_mu.mean}, {"stderr", r.dim_mu.stderr_}};
    j["target"] = r.target;
    j["max_gap"] = r.max_gap;
    j["passed"] = r.passed;
    j["extrapolation_note"] = "E is a heuristic fit E_q = E - c/q; no rate is known for q -> infinity";
    j["boundary"] = {{"first", r.boundary.first},
                     {"second", r.boundary.second},
                     {"decay_first", r.boundary.decay_first},
                     {"decay_second", r.boundary.decay_second},
                     {"degenerate", r.boundary.degenerate}};
    j["warnings"] = r.warnings;
    json ps = json::array();
    for (const auto& p : r.projections) {
        json e;
        e["theta"] = p.theta;
        e["exceptional"] = p.exceptional.empty() ? json(nullptr) : json(p.exceptional);
        if (p.exceptional.empty()) {
            json eq = json::object();
            for (int q : q_list)
                eq[std::to_string(q)] = {{"mean", p.E_q.at(q).mean}, {"stderr", p.E_q.at(q).stderr_}};
            e["E_q"] = eq;
            e["E_extrapolated"] = p.extrapolation.E;
            e["E_max"] = p.extrapolation.max_value;
            e["fit_c"] = p.extrapolation.c;
            e["fit_rms_residual"] = p.extrapolation.rms_residual;
            e["direct_estimate"] = p.direct;
        } else {
            e["marginal_dimension"] = {{"mean", p.marginal->mean}, {"stderr", p.marginal->stderr_}};
        }
        e["dim_pi"] = p.dim_pi;
        e["gap"] = p.gap;
        ps.push_back(std::move(e));
    }
    j["projections"] = ps;
    return j;
}

std::string to_csv(const DimensionReport& r, const std::vector<int>& q_list) {
    std::ostringstream out;
    out.precision(10);
    out << "theta";
    for (int q : q_list) out << ",E_" << q;
    out << ",E_extrapolated,direct_estimate,gap,exceptional\n";
    for (const auto& p : r.projections) {
        out << p.theta;
        for (int q : q_list) {
            out << ',';
            if (p.exceptional.empty()) out << p.E_q.at(q).mean;
        }
        out << ',';
        if (p.exceptional.empty()) out << p.extrapolation.E;
        out << ',';
        if (p.exceptional.empty()) out << p.direct;
        out << ',' << p.gap << ',' << p.exceptional << '\n';
    }
    return out.str();
}

std::string gnuplot_script(const std::string& csv_name) {
    return "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set xlabel 'theta (rad)'\n"
           "set ylabel 'conservation gap'\n"
           "set terminal pngcairo size 800,500\n"
           "set output 'conservation_gap.png'\n"
           "plot '" + csv_name + "' using 1:(column('exceptional') eq '' ? column('gap') : 1/0) with linespoints title 'gap'\n";
}

}  // namespace cpgibbs::dimension
