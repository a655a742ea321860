#include "cpgibbs/commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "cpgibbs/scenery.hpp"
#include "cpgibbs/rng.hpp"
#include "cpgibbs/stats.hpp"

namespace cpgibbs::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Check {
    std::string name;
    bool passed = true;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream o(p, std::ios::binary);
    if (!o) throw Error("cannot write '" + p.string() + "'");
    o << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return json::parse(ss.str());
}

// Everything the eigendata depends on, in canonical form.
std::string model_key(const config::RunConfig& c) {
    json j;
    j["symbols"] = c.sft.symbol_count();
    j["allowed"] = std::vector<int>(c.sft.matrix().begin(), c.sft.matrix().end());
    j["range"] = c.potential.range;
    json t = json::array();
    for (const auto& [w, v] : c.potential.table) t.push_back({sft::to_digit_string(w), v});
    j["table"] = t;
    j["tol"] = c.solver.tol;
    j["max_iter"] = c.solver.max_iter;
    return j.dump();
}

json eigendata_json(double pressure, const Eigen::VectorXd& psi, const Eigen::VectorXd& nu) {
    return {{"pressure", pressure},
            {"psi", std::vector<double>(psi.data(), psi.data() + psi.size())},
            {"nu", std::vector<double>(nu.data(), nu.data() + nu.size())}};
}

thermo::GibbsModel model_from_json(const config::RunConfig& c, const json& e) {
    auto psi = e.at("psi").get<std::vector<double>>();
    auto nu = e.at("nu").get<std::vector<double>>();
    return thermo::GibbsModel::from_eigendata(c.sft, c.potential, e.at("pressure").get<double>(),
                                              Eigen::Map<Eigen::VectorXd>(psi.data(), psi.size()),
                                              Eigen::Map<Eigen::VectorXd>(nu.data(), nu.size()), c.solver.tol);
}

class Runner {
public:
    explicit Runner(Context& ctx) : ctx_(ctx), cfg_(ctx.config), out_(ctx.out_dir) {
        echo_ = config::echo(cfg_);
        hash_ = config::content_hash(echo_.dump());
    }

    int run(const std::string& cmd) {
        const auto start = std::chrono::steady_clock::now();
        int code = kPass;
        if (cmd == "all") {
            for (const char* c : {"solve", "sample", "scenery", "diagnostics", "dimension", "conserve"})
                code = std::max(code, run(c));
            return code;
        }
        if (cmd == "solve")
            code = solve();
        else if (cmd == "sample")
            code = sample();
        else if (cmd == "scenery")
            code = scenery_cmd();
        else if (cmd == "diagnostics")
            code = diagnostics_cmd();
        else if (cmd == "dimension")
            code = dimension_cmd();
        else if (cmd == "conserve")
            code = conserve();
        else
            throw config::ConfigError("unknown command '" + cmd + "'");
        record_timing(cmd, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        return code;
    }

private:
    std::ostream& out() { return *ctx_.out; }
    std::ostream& err() { return *ctx_.err; }

    const thermo::GibbsModel& model() {
        if (model_) return *model_;
        const std::string key = config::content_hash(model_key(cfg_));
        std::optional<fs::path> cached;
        if (!ctx_.cache_dir.empty()) cached = fs::path(ctx_.cache_dir) / ("eigen-" + key + ".json");
        if (cached && fs::exists(*cached)) {
            try {
                model_ = model_from_json(cfg_, read_json(*cached));
                err() << "cache: hit " << cached->string() << "\n";
                return *model_;
            } catch (const std::exception& e) {
                err() << "cache: discarding " << cached->string() << " (" << e.what() << ")\n";
            }
        }
        auto fresh = thermo::GibbsModel::build(cfg_.sft, cfg_.potential, cfg_.solver);
        // Round-trip through the stored form so cached and fresh runs agree bit for bit.
        const json e = json::parse(eigendata_json(fresh.pressure(), fresh.psi(), fresh.nu()).dump());
        model_ = model_from_json(cfg_, e);
        if (cached) {
            write_file(*cached, dump(e));
            err() << "cache: stored " << cached->string() << "\n";
        }
        return *model_;
    }

    const encoding::AdicParams& params() {
        if (!params_) params_ = encoding::make_adic_params(cfg_.m, cfg_.n);
        return *params_;
    }

    sft::ProductAlphabet pair_alphabet() {
        if (cfg_.sft.symbol_count() != cfg_.m * cfg_.n)
            throw config::ConfigError("config field 'sft': needs m * n = " + std::to_string(cfg_.m * cfg_.n) +
                                      " pair symbols for this command, found " +
                                      std::to_string(cfg_.sft.symbol_count()));
        return {cfg_.m, cfg_.n};
    }

    json summary() {
        const auto& g = model();
        return {{"symbols", g.sft().symbol_count()},
                {"range", g.range()},
                {"order", g.order()},
                {"states", g.states().size()},
                {"pressure", g.pressure()},
                {"right_residual", g.right_residual()},
                {"left_residual", g.left_residual()}};
    }

    json report(const std::string& command, json results) {
        json j;
        j["command"] = command;
        j["config"] = echo_;
        j["config_hash"] = hash_;
        j["model"] = summary();
        j["results"] = std::move(results);
        return j;
    }

    void record_timing(const std::string& cmd, double seconds) {
        timings_[cmd] = seconds;
        json j(timings_);
        write_file(out_ / "timings.json", dump(j));
    }

    void warn_sample_size(long long N, int paths) {
        if (paths < 8) err() << "warning: sim.paths = " << paths << " is below 8; standard errors are unreliable\n";
        if (N < 1000) err() << "warning: sim.N = " << N << " is below 1000; averages are far from their limits\n";
    }

    int finish(const std::vector<Check>& checks) {
        int code = kPass;
        for (const auto& c : checks) {
            if (c.passed) continue;
            err() << "check failed: " << c.name << " (" << c.detail << ")\n";
            code = kCheckFailure;
        }
        return code;
    }

    static json checks_json(const std::vector<Check>& checks) {
        json a = json::array();
        for (const auto& c : checks) a.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        return a;
    }

    diagnostics::RunOptions run_options(std::uint64_t stream) const {
        diagnostics::RunOptions o;
        o.N = cfg_.sim.N;
        o.paths = cfg_.sim.paths;
        o.seed = derive_seed(cfg_.sim.seed, stream);
        o.t0 = cfg_.sim.t0;
        return o;
    }

    int solve() {
        const json s = summary();
        out() << "states " << s["states"] << ", order " << s["order"] << "\n";
        out() << "pressure P = " << fmt("%.10f", model().pressure()) << "\n";
        out() << "Perron residuals: right " << fmt("%.1e", model().right_residual()) << ", left "
              << fmt("%.1e", model().left_residual()) << "\n";
        write_file(out_ / "model.json", dump(report("solve", eigendata_json(model().pressure(), model().psi(),
                                                                           model().nu()))));
        return kPass;
    }

    int sample() {
        const auto& g = model();
        const std::size_t len = static_cast<std::size_t>(cfg_.sim.N * cfg_.sim.stride);
        std::vector<std::string> lines(cfg_.sim.paths);
        fan_out(lines.size(), Exec::Parallel, [&](std::size_t i) {
            const auto w = thermo::sample_path(g, len, derive_seed(cfg_.sim.seed, i));
            if (g.sft().symbol_count() <= 36) {
                lines[i] = sft::to_digit_string(w);
            } else {
                std::string s;
                for (std::size_t j = 0; j < w.size(); ++j) s += (j ? " " : "") + std::to_string(w[j]);
                lines[i] = std::move(s);
            }
        });
        std::string text;
        for (const auto& l : lines) text += l + "\n";
        write_file(out_ / "sample.txt", text);
        out() << "wrote " << lines.size() << " paths of length " << len << "\n";
        return kPass;
    }

    int scenery_cmd() {
        const auto& g = model();
        const auto pa = pair_alphabet();
        const auto& ap = params();
        warn_sample_size(cfg_.sim.N, cfg_.sim.paths);
        const auto tests = scenery::default_test_set(pa, cfg_.sim.test_depth);
        std::vector<std::vector<scenery::SceneryFeatures>> orbits(cfg_.sim.paths);
        fan_out(orbits.size(), Exec::Parallel, [&](std::size_t i) {
            orbits[i] = scenery::scenery_orbit(g, ap, derive_seed(cfg_.sim.seed, i), cfg_.sim.N, cfg_.sim.t0, tests,
                                               cfg_.sim.stride);
        });
        const auto cp = scenery::empirical_distribution(orbits, cfg_.sim.stride);

        std::string csv = "path,k,t";
        for (const auto& q : tests) csv += ",a" + sft::to_digit_string(q.a) + "_b" + sft::to_digit_string(q.b);
        csv += "\n";
        for (std::size_t i = 0; i < orbits.size(); ++i)
            for (const auto& f : orbits[i]) {
                csv += std::to_string(i) + "," + std::to_string(f.k) + "," + fmt("%.17g", f.t);
                for (double v : f.values) csv += "," + fmt("%.17g", v);
                csv += "\n";
            }
        write_file(out_ / "scenery.csv", csv);

        const double ks = scenery::t_marginal_ks(cp);
        std::vector<Check> checks;
        if (cp.samples.size() >= 10000)
            checks.push_back({"t-marginal KS <= 0.02", ks <= 0.02, "KS = " + fmt("%.4g", ks)});
        json r = {{"samples", cp.samples.size()},
                  {"weight", cp.weight()},
                  {"t_marginal_ks", ks},
                  {"ks_tolerance", 0.02},
                  {"checks", checks_json(checks)}};
        write_file(out_ / "scenery_summary.json", dump(report("scenery", r)));
        out() << "scenery: " << cp.samples.size() << " samples, t-marginal KS " << fmt("%.4f", ks) << "\n";
        return finish(checks);
    }

    int diagnostics_cmd() {
        const auto& g = model();
        const auto pa = pair_alphabet();
        const auto& ap = params();
        const auto& d = cfg_.diag;
        warn_sample_size(cfg_.sim.N, cfg_.sim.paths);
        (void)pa;

        std::vector<diagnostics::Report> reports;
        reports.push_back(diagnostics::single_average_diagnostic(g, ap, d.F, d.interval, run_options(1)));
        reports.push_back(diagnostics::double_average_diagnostic(g, ap, d.F, d.G, d.interval, run_options(2)));
        reports.push_back(diagnostics::genericity_check(g, ap, d.functional, run_options(3)));
        const auto mixing =
            diagnostics::mixing_diagnostic(g, ap, d.mixing_f, d.mixing_f_star, d.lags, run_options(4));

        std::vector<Check> checks;
        auto check = [&](const diagnostics::Report& r, const std::string& label) {
            if (!r.target) return;
            checks.push_back({label, r.within(d.sigmas),
                              "pooled " + fmt("%.6g", r.pooled_mean) + ", target " + fmt("%.6g", *r.target) +
                                  ", stderr " + fmt("%.3g", r.stderr_)});
        };
        for (const auto& r : reports) check(r, r.name);
        // Only the largest lag is asymptotically decorrelated.
        check(mixing.gaps.back(), "mixing gap at lag " + std::to_string(mixing.lags.back()));

        std::string csv = "name,target,pooled_mean,stderr,dispersion,N,paths\n";
        auto row = [&](const diagnostics::Report& r, const std::string& name) {
            csv += name + "," + (r.target ? fmt("%.17g", *r.target) : std::string()) + "," +
                   fmt("%.17g", r.pooled_mean) + "," + fmt("%.17g", r.stderr_) + "," + fmt("%.17g", r.dispersion) +
                   "," + std::to_string(r.N) + "," + std::to_string(r.per_path_means.size()) + "\n";
        };
        json rs = json::array();
        for (const auto& r : reports) {
            row(r, r.name);
            rs.push_back(diagnostics::to_json(r));
        }
        for (std::size_t i = 0; i < mixing.lags.size(); ++i)
            row(mixing.gaps[i], "mixing_lag_" + std::to_string(mixing.lags[i]));

        json r = {{"averages", rs},
                  {"mixing", diagnostics::to_json(mixing)},
                  {"sigmas", d.sigmas},
                  {"checks", checks_json(checks)}};
        write_file(out_ / "diagnostics.json", dump(report("diagnostics", r)));
        write_file(out_ / "diagnostics.csv", csv);
        for (const auto& c : checks) out() << (c.passed ? "pass " : "FAIL ") << c.name << ": " << c.detail << "\n";
        return finish(checks);
    }

    int dimension_cmd() {
        const auto& g = model();
        const auto pa = pair_alphabet();
        const auto& ap = params();
        const auto& dm = cfg_.dim;
        const auto est = dimension::measure_local_dimension(g, ap, dm.local_samples, dm.local_depth,
                                                            derive_seed(dm.seed, 11), dm.exec);
        const auto b = dimension::boundary_mass_check(g, pa, dm.boundary_depth);
        json r = {{"dim_mu", est.mean},
                  {"dim_mu_stderr", est.stderr_},
                  {"K", dm.local_depth},
                  {"samples", dm.local_samples},
                  {"boundary",
                   {{"first", b.first},
                    {"second", b.second},
                    {"decay_first", b.decay_first},
                    {"decay_second", b.decay_second},
                    {"degenerate", b.degenerate}}}};
        write_file(out_ / "dimension.json", dump(report("dimension", r)));
        out() << "dim mu = " << fmt("%.4f", est.mean) << " +- " << fmt("%.4f", est.stderr_) << "\n";
        if (b.degenerate) err() << "warning: boundary mass decays slowly; local dimension estimates are biased\n";
        return kPass;
    }

    int conserve() {
        const auto& g = model();
        pair_alphabet();
        const auto& ap = params();
        const auto rep = dimension::conservation_check(g, ap, cfg_.projections, cfg_.dim);
        json r = dimension::to_json(rep, cfg_.dim.q_list);
        r["tolerance"] = cfg_.dim.tolerance;
        write_file(out_ / "conservation.json", dump(report("conserve", r)));
        write_file(out_ / "conservation.csv", dimension::to_csv(rep, cfg_.dim.q_list));
        write_file(out_ / "conservation.gp", dimension::gnuplot_script("conservation.csv"));
        for (const auto& w : rep.warnings) err() << "warning: " << w << "\n";
        out() << "dim mu = " << fmt("%.4f", rep.dim_mu.mean) << ", target min(1, dim mu) = "
              << fmt("%.4f", rep.target) << "\n";
        for (const auto& p : rep.projections) {
            out() << "theta " << fmt("%.6f", p.theta) << ": dim = " << fmt("%.4f", p.dim_pi);
            if (!p.exceptional.empty())
                out() << " (exceptional, " << p.exceptional << ")\n";
            else
                out() << ", gap " << fmt("%.4f", p.gap) << "\n";
        }
        out() << "max gap " << fmt("%.4f", rep.max_gap) << " (tolerance " << fmt("%.3g", cfg_.dim.tolerance)
              << ")\n";
        if (!rep.passed) {
            err() << "check failed: conservation gap " << fmt("%.4f", rep.max_gap) << " exceeds "
                  << fmt("%.3g", cfg_.dim.tolerance) << "\n";
            return kCheckFailure;
        }
        return kPass;
    }

    Context& ctx_;
    const config::RunConfig& cfg_;
    fs::path out_;
    json echo_;
    std::string hash_;
    std::optional<thermo::GibbsModel> model_;
    std::optional<encoding::AdicParams> params_;
    std::map<std::string, double> timings_;
};

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"solve",     "sample",   "scenery", "diagnostics",
                                                "dimension", "conserve", "all"};
    return names;
}

int run(const std::string& command, Context& ctx) {
    Runner r(ctx);
    return r.run(command);
}

int run_cli(const std::string& command, const std::string& config_path, const std::string& out_dir,
            std::ostream& out, std::ostream& err) {
    try {
        Context ctx;
        ctx.config = config::load_config(config_path);
        ctx.out_dir = out_dir.empty() ? ctx.config.output_dir : out_dir;
        if (const char* c = std::getenv(kCacheEnv)) ctx.cache_dir = c;
        ctx.out = &out;
        ctx.err = &err;
        return run(command, ctx);
    } catch (const MultiplicativeDependenceError& e) {
        err << "error: " << e.what()
            << " (the projection theorem assumes log m / log n is irrational; refusing to run)\n";
        return kConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace cpgibbs::commands
