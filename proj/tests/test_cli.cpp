#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

#include "cpgibbs/config.hpp"

namespace fs = std::filesystem;
using namespace cpgibbs;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code = -1;
    std::string out, err;
};

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "cpgibbs_cli_tests" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

Run cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" CPGIBBS_CLI_PATH "\" " + args + " > \"" + (dir / "stdout").string() +
                            "\" 2> \"" + (dir / "stderr").string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir / "stdout");
    r.err = slurp(dir / "stderr");
    return r;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

const char* kSmallConserve = R"({
  "adic": {"m": 2, "n": 3},
  "projections": [0.0, 0.7853981633974483],
  "q_list": [2, 3],
  "sim": {"seed": 5, "feature_depth": 3},
  "dimension": {"local_samples": 4, "local_depth": 40, "paths": 2, "samples_per_path": 10, "stride": 3,
                "burn_in": 5, "direct_points": 300, "marginal_length": 200, "marginal_samples": 2,
                "boundary_depth": 8}
})";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("config defaults are materialized in the echo") {
        auto c = config::parse_config("{}");
        auto e = config::echo(c);
        CHECK(e["adic"]["m"] == 2);
        CHECK(e["adic"]["n"] == 3);
        CHECK(e["sim"]["seed"] == 1);
        CHECK(e["q_list"].size() == 3);
        CHECK(c.sft.symbol_count() == 6);
        // echo parses back to the same config
        auto again = config::parse_config(e.dump());
        CHECK(config::echo(again) == e);
    }

    TEST_CASE("config errors name the field") {
        auto message = [](const std::string& text) {
            try {
                config::parse_config(text);
            } catch (const config::ConfigError& e) {
                return std::string(e.what());
            }
            return std::string();
        };
        CHECK(message(R"({"sim": {"paths": "many"}})").find("sim.paths") != std::string::npos);
        CHECK(message(R"({"sim": {"pathz": 3}})").find("sim.pathz") != std::string::npos);
        CHECK(message(R"({"adic": {"m": 1, "n": 3}})").find("adic") != std::string::npos);
        CHECK(message(R"({"potential": "lumpy"})").find("potential") != std::string::npos);
        CHECK(message(R"({"potential": {"bernoulli": [1, 2]}})").find("potential") != std::string::npos);
        CHECK(message("{\n  \"sim\": {\"paths\": 3,}\n}").find("line 2") != std::string::npos);
    }

    TEST_CASE("content hash is stable and sensitive") {
        CHECK(config::content_hash("") == "cbf29ce484222325");
        CHECK(config::content_hash("a") == "af63dc4c8601ec8c");
        CHECK(config::content_hash("ab") != config::content_hash("ba"));
    }

    TEST_CASE("solve prints the golden-mean pressure and reuses the cache") {
        const auto dir = scratch("solve");
        const auto cfg = write_config(dir, R"({"sft": "golden_mean", "potential": "uniform"})");
        const std::string env = "CPGIBBS_CACHE_DIR=\"" + (dir / "cache").string() + "\"";
        const std::string args = "solve --config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"";

        auto first = cli(dir, args, env);
        REQUIRE(first.code == 0);
        const double golden = std::log((1.0 + std::sqrt(5.0)) / 2.0);
        CHECK(first.out.find("pressure P = 0.4812118") != std::string::npos);
        auto model = nlohmann::json::parse(slurp(dir / "out" / "model.json"));
        CHECK(model["model"]["pressure"].get<double>() == doctest::Approx(golden).epsilon(1e-12));
        CHECK(first.err.find("cache: stored") != std::string::npos);
        const std::string report = slurp(dir / "out" / "model.json");

        auto second = cli(dir, args, env);
        REQUIRE(second.code == 0);
        CHECK(second.err.find("cache: hit") != std::string::npos);
        CHECK(second.out == first.out);
        CHECK(slurp(dir / "out" / "model.json") == report);
    }

    TEST_CASE("corrupt cache entries are re-verified and discarded") {
        const auto dir = scratch("cache_corrupt");
        const auto cfg = write_config(dir, R"({"sft": "golden_mean"})");
        const std::string env = "CPGIBBS_CACHE_DIR=\"" + (dir / "cache").string() + "\"";
        const std::string args = "solve --config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"";
        REQUIRE(cli(dir, args, env).code == 0);
        for (const auto& e : fs::directory_iterator(dir / "cache")) {
            auto j = nlohmann::json::parse(slurp(e.path()));
            j["pressure"] = 0.3;
            std::ofstream(e.path()) << j.dump();
        }
        auto r = cli(dir, args, env);
        CHECK(r.code == 0);
        CHECK(r.err.find("cache: discarding") != std::string::npos);
        CHECK(r.out.find("pressure P = 0.4812118") != std::string::npos);
    }

    TEST_CASE("malformed config exits 2 with context") {
        const auto dir = scratch("malformed");
        auto cfg = write_config(dir, "{\"sim\": {\"paths\": }}");
        auto r = cli(dir, "solve --config \"" + cfg.string() + "\"");
        CHECK(r.code == 2);
        CHECK(r.err.find("line 1") != std::string::npos);

        cfg = write_config(dir, R"({"sim": {"seed": "abc"}})");
        r = cli(dir, "solve --config \"" + cfg.string() + "\"");
        CHECK(r.code == 2);
        CHECK(r.err.find("sim.seed") != std::string::npos);

        r = cli(dir, "bogus --config \"" + cfg.string() + "\"");
        CHECK(r.code == 2);
    }

    TEST_CASE("dependent bases are refused") {
        const auto dir = scratch("dependent");
        const auto cfg = write_config(dir, R"({"adic": {"m": 2, "n": 4}})");
        auto r = cli(dir, "conserve --config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"");
        CHECK(r.code == 2);
        CHECK(r.err.find("multiplicatively dependent") != std::string::npos);
        CHECK(r.err.find("irrational") != std::string::npos);
    }

    TEST_CASE("theta = 0 is reported as exceptional") {
        const auto dir = scratch("exceptional");
        const auto cfg = write_config(dir, kSmallConserve);
        auto r = cli(dir, "conserve --config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"");
        CHECK((r.code == 0 || r.code == 1));
        auto j = nlohmann::json::parse(slurp(dir / "out" / "conservation.json"));
        const auto& ps = j["results"]["projections"];
        REQUIRE(ps.size() == 2);
        CHECK(ps[0]["exceptional"] == "pi1");
        CHECK(ps[1]["exceptional"].is_null());
        CHECK(r.out.find("exceptional, pi1") != std::string::npos);
        CHECK(fs::exists(dir / "out" / "conservation.csv"));
        CHECK(fs::exists(dir / "out" / "conservation.gp"));
    }

    TEST_CASE("diagnostics outputs do not depend on the thread count") {
        const auto dir = scratch("threads");
        const auto cfg = write_config(dir, R"({"sim": {"paths": 4, "N": 300, "seed": 9}})");
        auto a = cli(dir, "diagnostics --threads 1 --config \"" + cfg.string() + "\" --out \"" +
                              (dir / "a").string() + "\"");
        auto b = cli(dir, "diagnostics --threads 3 --config \"" + cfg.string() + "\" --out \"" +
                              (dir / "b").string() + "\"");
        CHECK(a.code != 2);
        CHECK(a.code == b.code);
        CHECK(slurp(dir / "a" / "diagnostics.csv") == slurp(dir / "b" / "diagnostics.csv"));
        CHECK(slurp(dir / "a" / "diagnostics.json") == slurp(dir / "b" / "diagnostics.json"));
        CHECK(fs::exists(dir / "a" / "timings.json"));
    }

    TEST_CASE("small runs warn but still write raw data") {
        const auto dir = scratch("small");
        const auto cfg = write_config(dir, R"({"sim": {"paths": 1, "N": 100, "seed": 2}})");
        auto r = cli(dir, "diagnostics --config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"");
        CHECK(r.code != 2);
        CHECK(r.err.find("warning: sim.paths") != std::string::npos);
        CHECK(r.err.find("warning: sim.N") != std::string::npos);
        CHECK(fs::exists(dir / "out" / "diagnostics.csv"));
    }

    TEST_CASE("sample writes one line per path") {
        const auto dir = scratch("sample");
        const auto cfg = write_config(dir, R"({"sim": {"paths": 3, "N": 50, "seed": 4}})");
        auto r = cli(dir, "sample --config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"");
        REQUIRE(r.code == 0);
        std::istringstream in(slurp(dir / "out" / "sample.txt"));
        std::string line;
        int lines = 0;
        while (std::getline(in, line)) {
            ++lines;
            CHECK(line.size() == 50);
            CHECK(line.find_first_not_of("012345") == std::string::npos);
        }
        CHECK(lines == 3);
    }
}
