#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpgibbs/diagnostics.hpp"
#include "cpgibbs/dimension.hpp"
#include "cpgibbs/encoding.hpp"
#include "cpgibbs/thermo.hpp"

namespace cpgibbs::config {

/// Malformed configuration; the message names the offending field.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct SimConfig {
    int paths = 32;
    long long N = 100000;
    int stride = 1;
    std::uint64_t seed = 1;
    int test_depth = 2;
    int feature_depth = 6;
    double t0 = 0.0;
    bool seed_given = false;
};

struct DiagnosticsConfig {
    diagnostics::IntervalSet interval{{{0.2, 0.7}}};
    diagnostics::Cylinder F{diagnostics::Coordinate::Second, {0}};
    diagnostics::Cylinder G{diagnostics::Coordinate::First, {0}};
    diagnostics::TestFunctional functional;
    diagnostics::TestFunctional mixing_f;
    diagnostics::TestFunctional mixing_f_star;
    std::vector<int> lags{1, 2, 5, 10, 20};
    double sigmas = 3.0;
};

struct RunConfig {
    int m = 2, n = 3;
    nlohmann::json sft_spec = "full";
    nlohmann::json potential_spec = "uniform";
    double rho = 0.5;
    thermo::RpfOptions solver;
    SimConfig sim;
    DiagnosticsConfig diag;
    std::vector<double> projections;
    dimension::ConservationConfig dim;
    std::string output_dir = "out";

    // resolved
    sft::Sft sft;
    thermo::Potential potential;
};

/// Parses and validates a configuration document; throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every field with defaults filled in, in a fixed key order.
nlohmann::json echo(const RunConfig& c);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string content_hash(const std::string& bytes);

sft::Sft resolve_sft(const nlohmann::json& spec, int m, int n, const std::string& where);
thermo::Potential resolve_potential(const nlohmann::json& spec, const sft::Sft& sft, const std::string& where);

}  // namespace cpgibbs::config
