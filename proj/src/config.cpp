#include "cpgibbs/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cpgibbs::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config field '" + where + "': " + what);
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) fail(join(where, it.key()), "unknown field");
}

long long as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<long long>();
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

template <class T, class Get>
T field(const json& obj, const std::string& key, T fallback, const std::string& where, Get get) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return get(*it, join(where, key));
}

sft::Word as_word(const json& v, const std::string& where) {
    try {
        return sft::from_digit_string(as_string(v, where));
    } catch (const InvalidArgument& e) {
        fail(where, e.what());
    }
}

std::vector<double> as_doubles(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_double(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<int> as_ints(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(static_cast<int>(as_int(v[i], where + "[" + std::to_string(i) + "]")));
    return out;
}

diagnostics::IntervalSet as_intervals(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected a list of [lo, hi] pairs");
    std::vector<std::pair<double, double>> parts;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        auto d = as_doubles(v[i], w);
        if (d.size() != 2) fail(w, "expected [lo, hi]");
        parts.emplace_back(d[0], d[1]);
    }
    try {
        return diagnostics::IntervalSet(parts);
    } catch (const InvalidArgument& e) {
        fail(where, e.what());
    }
}

diagnostics::Cylinder as_cylinder(const json& v, const std::string& where) {
    check_keys(v, {"coord", "word"}, where);
    diagnostics::Cylinder c;
    const std::string coord = field<std::string>(v, "coord", "first", where, as_string);
    if (coord == "first")
        c.coord = diagnostics::Coordinate::First;
    else if (coord == "second")
        c.coord = diagnostics::Coordinate::Second;
    else if (coord == "pair")
        c.coord = diagnostics::Coordinate::Pair;
    else
        fail(join(where, "coord"), "expected 'first', 'second' or 'pair'");
    if (!v.contains("word")) fail(join(where, "word"), "missing");
    c.word = as_word(v["word"], join(where, "word"));
    return c;
}

diagnostics::TestFunctional as_functional(const json& v, const std::string& where) {
    check_keys(v, {"interval", "c", "d", "queries"}, where);
    diagnostics::TestFunctional f;
    f.interval = field(v, "interval", diagnostics::IntervalSet::whole(), where, as_intervals);
    f.c = field(v, "c", sft::Word{}, where, as_word);
    f.d = field(v, "d", sft::Word{}, where, as_word);
    if (v.contains("queries")) {
        const auto& qs = v["queries"];
        if (!qs.is_array()) fail(join(where, "queries"), "expected an array");
        for (std::size_t i = 0; i < qs.size(); ++i) {
            const std::string w = join(where, "queries") + "[" + std::to_string(i) + "]";
            check_keys(qs[i], {"a", "b"}, w);
            f.queries.push_back({field(qs[i], "a", sft::Word{}, w, as_word), field(qs[i], "b", sft::Word{}, w, as_word)});
        }
    }
    return f;
}

json intervals_json(const diagnostics::IntervalSet& s) {
    json a = json::array();
    for (auto [lo, hi] : s.parts()) a.push_back({lo, hi});
    return a;
}

json cylinder_json(const diagnostics::Cylinder& c) {
    const char* names[] = {"first", "second", "pair"};
    return {{"coord", names[static_cast<int>(c.coord)]}, {"word", sft::to_digit_string(c.word)}};
}

json functional_json(const diagnostics::TestFunctional& f) {
    json q = json::array();
    for (const auto& c : f.queries) q.push_back({{"a", sft::to_digit_string(c.a)}, {"b", sft::to_digit_string(c.b)}});
    return {{"interval", intervals_json(f.interval)},
            {"c", sft::to_digit_string(f.c)},
            {"d", sft::to_digit_string(f.d)},
            {"queries", q}};
}

void check_alphabet(const sft::Word& w, int base, const std::string& where) {
    for (int x : w)
        if (x >= base) fail(where, "symbol " + std::to_string(x) + " outside an alphabet of size " + std::to_string(base));
}

void check_functional(const diagnostics::TestFunctional& f, int m, int n, const std::string& where) {
    check_alphabet(f.c, m, join(where, "c"));
    check_alphabet(f.d, n, join(where, "d"));
    for (const auto& q : f.queries) {
        check_alphabet(q.a, m, join(where, "queries.a"));
        check_alphabet(q.b, n, join(where, "queries.b"));
    }
}

}  // namespace

sft::Sft resolve_sft(const json& spec, int m, int n, const std::string& where) {
    if (spec.is_string()) {
        const auto name = spec.get<std::string>();
        if (name == "full") return sft::full_shift(m * n);
        if (name == "golden_mean") return sft::golden_mean();
        fail(where, "unknown preset '" + name + "' (expected 'full' or 'golden_mean')");
    }
    if (!spec.is_object()) fail(where, "expected a preset name or an object");
    if (spec.contains("full")) {
        check_keys(spec, {"full"}, where);
        const long long k = as_int(spec["full"], join(where, "full"));
        if (k < 1) fail(join(where, "full"), "symbol count must be positive");
        return sft::full_shift(static_cast<int>(k));
    }
    check_keys(spec, {"symbols", "allowed"}, where);
    if (!spec.contains("symbols") || !spec.contains("allowed")) fail(where, "expected {\"symbols\", \"allowed\"}");
    const long long k = as_int(spec["symbols"], join(where, "symbols"));
    const auto& a = spec["allowed"];
    if (!a.is_array() || static_cast<long long>(a.size()) != k)
        fail(join(where, "allowed"), "expected " + std::to_string(k) + " rows");
    std::vector<std::vector<int>> rows;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto r = as_ints(a[i], join(where, "allowed") + "[" + std::to_string(i) + "]");
        if (static_cast<long long>(r.size()) != k)
            fail(join(where, "allowed") + "[" + std::to_string(i) + "]", "expected " + std::to_string(k) + " entries");
        rows.push_back(std::move(r));
    }
    sft::Sft s(rows);
    try {
        sft::validate(s);
    } catch (const DeadSymbolError& e) {
        fail(where, e.what());
    }
    return s;
}

thermo::Potential resolve_potential(const json& spec, const sft::Sft& s, const std::string& where) {
    try {
        if (spec.is_string()) {
            if (spec.get<std::string>() == "uniform") return thermo::uniform_potential(s);
            fail(where, "unknown preset '" + spec.get<std::string>() + "'");
        }
        if (!spec.is_object()) fail(where, "expected a preset name or an object");
        if (spec.contains("uniform")) {
            check_keys(spec, {"uniform"}, where);
            return thermo::uniform_potential(s);
        }
        if (spec.contains("bernoulli")) {
            check_keys(spec, {"bernoulli"}, where);
            auto w = as_doubles(spec["bernoulli"], join(where, "bernoulli"));
            return thermo::bernoulli_potential(s, w);
        }
        if (spec.contains("product_bernoulli")) {
            check_keys(spec, {"product_bernoulli"}, where);
            const auto& pb = spec["product_bernoulli"];
            const std::string w = join(where, "product_bernoulli");
            check_keys(pb, {"first", "second"}, w);
            if (!pb.contains("first") || !pb.contains("second")) fail(w, "expected first and second weights");
            auto px = as_doubles(pb["first"], join(w, "first"));
            auto py = as_doubles(pb["second"], join(w, "second"));
            if (static_cast<int>(px.size() * py.size()) != s.symbol_count())
                fail(w, "needs |first| * |second| = symbol count");
            std::vector<double> joint;
            for (double a : px)
                for (double b : py) joint.push_back(a * b);
            return thermo::bernoulli_potential(s, joint);
        }
        if (spec.contains("markov")) {
            check_keys(spec, {"markov"}, where);
            const auto& q = spec["markov"];
            if (!q.is_array()) fail(join(where, "markov"), "expected a matrix");
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < q.size(); ++i)
                rows.push_back(as_doubles(q[i], join(where, "markov") + "[" + std::to_string(i) + "]"));
            return thermo::markov_potential(s, rows);
        }
        if (spec.contains("random_range2") || spec.contains("random")) {
            const bool r2 = spec.contains("random_range2");
            const std::string key = r2 ? "random_range2" : "random";
            check_keys(spec, {key}, where);
            const auto& r = spec[key];
            const std::string w = join(where, key);
            check_keys(r, r2 ? std::set<std::string>{"seed", "amplitude"} : std::set<std::string>{"seed", "amplitude", "range"}, w);
            if (!r.contains("seed")) fail(join(w, "seed"), "missing");
            const auto seed = static_cast<std::uint64_t>(as_int(r["seed"], join(w, "seed")));
            const double amp = field(r, "amplitude", 1.0, w, as_double);
            const int range = r2 ? 2 : static_cast<int>(field<long long>(r, "range", 2, w, as_int));
            if (range < 1 || range > 6) fail(join(w, "range"), "must lie in [1, 6]");
            return thermo::random_potential(s, range, seed, amp);
        }
        check_keys(spec, {"range", "table"}, where);
        if (!spec.contains("range") || !spec.contains("table")) fail(where, "expected a preset or {\"range\", \"table\"}");
        thermo::Potential p;
        p.range = static_cast<int>(as_int(spec["range"], join(where, "range")));
        const auto& t = spec["table"];
        if (!t.is_object()) fail(join(where, "table"), "expected an object keyed by digit strings");
        for (auto it = t.begin(); it != t.end(); ++it) {
            const std::string w = join(join(where, "table"), it.key());
            sft::Word key;
            try {
                key = sft::from_digit_string(it.key());
            } catch (const InvalidArgument& e) {
                fail(w, e.what());
            }
            if (static_cast<int>(key.size()) != p.range) fail(w, "word length differs from range");
            p.table[key] = as_double(*it, w);
        }
        thermo::validate_potential(s, p);
        return p;
    } catch (const InvalidArgument& e) {
        fail(where, e.what());
    }
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < std::min(e.byte ? e.byte - 1 : 0, text.size()); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config is not valid JSON (line " + std::to_string(line) + ", column " +
                          std::to_string(col) + "): " + e.what());
    }
    check_keys(doc, {"adic", "sft", "potential", "rho", "solver", "sim", "diagnostics", "projections", "q_list",
                     "dimension", "output_dir"},
               "");
    RunConfig c;
    if (doc.contains("adic")) {
        const auto& a = doc["adic"];
        check_keys(a, {"m", "n"}, "adic");
        c.m = static_cast<int>(field<long long>(a, "m", 2, "adic", as_int));
        c.n = static_cast<int>(field<long long>(a, "n", 3, "adic", as_int));
    }
    if (c.m < 2 || c.n < 2) fail("adic", "m and n must be >= 2");
    if (c.m > c.n) std::swap(c.m, c.n);
    if (c.m == c.n) fail("adic", "m and n must differ");

    if (doc.contains("sft")) c.sft_spec = doc["sft"];
    if (doc.contains("potential")) c.potential_spec = doc["potential"];
    c.rho = field(doc, "rho", 0.5, "", as_double);
    if (!(c.rho > 0.0 && c.rho < 1.0)) fail("rho", "must lie in (0, 1)");

    if (doc.contains("solver")) {
        const auto& s = doc["solver"];
        check_keys(s, {"tol", "max_iter"}, "solver");
        c.solver.tol = field(s, "tol", c.solver.tol, "solver", as_double);
        c.solver.max_iter = static_cast<int>(field<long long>(s, "max_iter", c.solver.max_iter, "solver", as_int));
        if (!(c.solver.tol > 0.0)) fail("solver.tol", "must be positive");
        if (c.solver.max_iter < 1) fail("solver.max_iter", "must be positive");
    }

    if (doc.contains("sim")) {
        const auto& s = doc["sim"];
        check_keys(s, {"paths", "N", "stride", "seed", "test_depth", "feature_depth", "t0"}, "sim");
        auto& sim = c.sim;
        sim.paths = static_cast<int>(field<long long>(s, "paths", sim.paths, "sim", as_int));
        sim.N = field<long long>(s, "N", sim.N, "sim", as_int);
        sim.stride = static_cast<int>(field<long long>(s, "stride", sim.stride, "sim", as_int));
        if (s.contains("seed")) {
            const long long seed = as_int(s["seed"], "sim.seed");
            if (seed < 0) fail("sim.seed", "must be nonnegative");
            sim.seed = static_cast<std::uint64_t>(seed);
            sim.seed_given = true;
        }
        sim.test_depth = static_cast<int>(field<long long>(s, "test_depth", sim.test_depth, "sim", as_int));
        sim.feature_depth = static_cast<int>(field<long long>(s, "feature_depth", sim.feature_depth, "sim", as_int));
        sim.t0 = field(s, "t0", sim.t0, "sim", as_double);
        if (sim.paths < 1) fail("sim.paths", "must be >= 1");
        if (sim.N < 1 || sim.N > 1'000'000) fail("sim.N", "must lie in [1, 1e6]");
        if (sim.stride < 1 || sim.N * sim.stride > 1'000'000) fail("sim.stride", "N * stride must not exceed 1e6");
        if (sim.test_depth < 1 || sim.test_depth > 6) fail("sim.test_depth", "must lie in [1, 6]");
        if (sim.feature_depth < 1 || sim.feature_depth > 10) fail("sim.feature_depth", "must lie in [1, 10]");
        if (!(sim.t0 >= 0.0 && sim.t0 < 1.0)) fail("sim.t0", "must lie in [0, 1)");
    }

    auto& d = c.diag;
    d.functional = {diagnostics::IntervalSet({{0.2, 0.7}}), {1}, {}, {{{0}, {1}}, {{1}, {2}}}};
    d.mixing_f = {diagnostics::IntervalSet::whole(), {1}, {}, {}};
    d.mixing_f_star = {diagnostics::IntervalSet::whole(), {}, {0}, {}};
    if (doc.contains("diagnostics")) {
        const auto& s = doc["diagnostics"];
        check_keys(s, {"interval", "F", "G", "functional", "mixing", "sigmas"}, "diagnostics");
        d.interval = field(s, "interval", d.interval, "diagnostics", as_intervals);
        d.F = field(s, "F", d.F, "diagnostics", as_cylinder);
        d.G = field(s, "G", d.G, "diagnostics", as_cylinder);
        d.functional = field(s, "functional", d.functional, "diagnostics", as_functional);
        d.sigmas = field(s, "sigmas", d.sigmas, "diagnostics", as_double);
        if (s.contains("mixing")) {
            const auto& mx = s["mixing"];
            check_keys(mx, {"f", "f_star", "lags"}, "diagnostics.mixing");
            d.mixing_f = field(mx, "f", d.mixing_f, "diagnostics.mixing", as_functional);
            d.mixing_f_star = field(mx, "f_star", d.mixing_f_star, "diagnostics.mixing", as_functional);
            d.lags = field(mx, "lags", d.lags, "diagnostics.mixing", as_ints);
            if (d.lags.empty()) fail("diagnostics.mixing.lags", "must not be empty");
            for (int h : d.lags)
                if (h < 0 || h > 1000) fail("diagnostics.mixing.lags", "lags must lie in [0, 1000]");
        }
        if (!(d.sigmas > 0.0)) fail("diagnostics.sigmas", "must be positive");
    }
    check_functional(d.functional, c.m, c.n, "diagnostics.functional");
    check_functional(d.mixing_f, c.m, c.n, "diagnostics.mixing.f");
    check_functional(d.mixing_f_star, c.m, c.n, "diagnostics.mixing.f_star");

    c.projections = field(doc, "projections", std::vector<double>{std::acos(-1.0) / 6, std::acos(-1.0) / 4,
                                                                  std::acos(-1.0) / 3, 1.0},
                          "", as_doubles);
    c.dim.q_list = field(doc, "q_list", c.dim.q_list, "", as_ints);
    if (c.dim.q_list.size() < 2) fail("q_list", "needs at least two values");
    for (int q : c.dim.q_list)
        if (q < 1 || q > c.sim.feature_depth)
            fail("q_list", "every q must lie in [1, sim.feature_depth = " + std::to_string(c.sim.feature_depth) + "]");
    c.dim.feature_depth = c.sim.feature_depth;
    c.dim.seed = c.sim.seed;
    if (doc.contains("dimension")) {
        const auto& s = doc["dimension"];
        check_keys(s, {"local_samples", "local_depth", "paths", "samples_per_path", "stride", "burn_in",
                       "direct_points", "marginal_length", "marginal_samples", "boundary_depth", "tolerance"},
                   "dimension");
        auto geti = [&](const char* k, int v) {
            const int r = static_cast<int>(field<long long>(s, k, v, "dimension", as_int));
            if (r < 1 && std::string(k) != "burn_in") fail(join("dimension", k), "must be positive");
            if (r < 0) fail(join("dimension", k), "must be nonnegative");
            return r;
        };
        auto& dm = c.dim;
        dm.local_samples = geti("local_samples", dm.local_samples);
        dm.local_depth = geti("local_depth", dm.local_depth);
        dm.paths = geti("paths", dm.paths);
        dm.samples_per_path = geti("samples_per_path", dm.samples_per_path);
        dm.stride = geti("stride", dm.stride);
        dm.burn_in = geti("burn_in", dm.burn_in);
        dm.direct_points = geti("direct_points", dm.direct_points);
        dm.marginal_length = geti("marginal_length", dm.marginal_length);
        dm.marginal_samples = geti("marginal_samples", dm.marginal_samples);
        dm.boundary_depth = geti("boundary_depth", dm.boundary_depth);
        dm.tolerance = field(s, "tolerance", dm.tolerance, "dimension", as_double);
        if (dm.local_depth > 1'000'000) fail("dimension.local_depth", "must not exceed 1e6");
        if (dm.boundary_depth < 2) fail("dimension.boundary_depth", "must be >= 2");
    }
    c.output_dir = field<std::string>(doc, "output_dir", c.output_dir, "", as_string);

    c.sft = resolve_sft(c.sft_spec, c.m, c.n, "sft");
    c.potential = resolve_potential(c.potential_spec, c.sft, "potential");
    c.potential.rho = c.rho;
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json echo(const RunConfig& c) {
    json j;
    j["adic"] = {{"m", c.m}, {"n", c.n}};
    j["sft"] = c.sft_spec;
    j["potential"] = c.potential_spec;
    j["rho"] = c.rho;
    j["solver"] = {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}};
    j["sim"] = {{"paths", c.sim.paths},           {"N", c.sim.N},
                {"stride", c.sim.stride},         {"seed", c.sim.seed},
                {"test_depth", c.sim.test_depth}, {"feature_depth", c.sim.feature_depth},
                {"t0", c.sim.t0}};
    j["diagnostics"] = {{"interval", intervals_json(c.diag.interval)},
                        {"F", cylinder_json(c.diag.F)},
                        {"G", cylinder_json(c.diag.G)},
                        {"functional", functional_json(c.diag.functional)},
                        {"mixing",
                         {{"f", functional_json(c.diag.mixing_f)},
                          {"f_star", functional_json(c.diag.mixing_f_star)},
                          {"lags", c.diag.lags}}},
                        {"sigmas", c.diag.sigmas}};
    j["projections"] = c.projections;
    j["q_list"] = c.dim.q_list;
    const auto& d = c.dim;
    j["dimension"] = {{"local_samples", d.local_samples},
                      {"local_depth", d.local_depth},
                      {"paths", d.paths},
                      {"samples_per_path", d.samples_per_path},
                      {"stride", d.stride},
                      {"burn_in", d.burn_in},
                      {"direct_points", d.direct_points},
                      {"marginal_length", d.marginal_length},
                      {"marginal_samples", d.marginal_samples},
                      {"boundary_depth", d.boundary_depth},
                      {"tolerance", d.tolerance}};
    j["output_dir"] = c.output_dir;
    return j;
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cpgibbs::config
