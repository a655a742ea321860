#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "cpgibbs/parallel.hpp"
#include "cpgibbs/scenery.hpp"

namespace cpgibbs::dimension {

using sft::ProductAlphabet;
using thermo::GibbsModel;

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// d(w) = log mu'(box_K(w)) / log m^-K averaged over sampled w, where box_K
/// pins the first coordinate to depth K and the second to depth l_K(0).
Estimate measure_local_dimension(const GibbsModel& model, const encoding::AdicParams& params, int num_samples,
                                 int K, std::uint64_t seed, Exec exec = Exec::Parallel);

/// Magnified conditional measure at one orbit step, on the depth-(D, L) sub-boxes of R_t.
struct SceneryMeasure {
    double t = 0.0;
    int depth = 0;        // D: first-coordinate digits
    int y_depth = 0;      // L = l_{k+D} - l_k
    Eigen::MatrixXd mass; // rows: a in Lambda^D, cols: b in Lambda'^L
};

/// Samples at k = burn_in + stride, burn_in + 2 stride, .. (count per path) along `paths` sampled paths.
std::vector<SceneryMeasure> sample_scenery_measures(const GibbsModel& model, const encoding::AdicParams& params,
                                                    int depth, int paths, int count, int stride, int burn_in,
                                                    std::uint64_t seed, Exec exec = Exec::Parallel);

/// Measure on the cells [j pitch, (j+1) pitch) of a line, j = origin + index.
struct GridMeasure {
    double pitch = 1.0;
    long long origin = 0;
    std::vector<double> mass;

    double total() const;
};

/// Each sub-box sends its mass to the cell holding the projection of its centre
/// onto direction theta; pitch = m^-q.
GridMeasure project_scenery_measure(const SceneryMeasure& s, const encoding::AdicParams& params, double theta,
                                    int q);

/// -sum_c mass(c) log mass(c-w..c+w), w = floor(r / pitch); needs pitch <= r.
double r_entropy(const GridMeasure& g, double r);

/// Monte Carlo mean of H_{m^-q}(projection) / (q log m); q <= feature depth.
Estimate E_q_estimate(const std::vector<SceneryMeasure>& samples, const encoding::AdicParams& params, double theta,
                      int q);

struct Extrapolation {
    double E = 0.0;          // intercept of the fit E_q = E - c/q
    double c = 0.0;
    double max_value = 0.0;  // max over q of E_q
    double rms_residual = 0.0;
};

Extrapolation E_extrapolate(const std::vector<int>& qs, const std::vector<double>& values);

/// Correlation dimension of the projected measure from sampled points, fitted
/// over radii in [r_min, r_max].
double correlation_dimension(const GibbsModel& model, const encoding::AdicParams& params, double theta, int points,
                             std::uint64_t seed, double r_min = 1e-3, double r_max = 1e-1);

/// -(1/L) log mubar(observed block) / log base for one coordinate marginal (entropy / log base).
Estimate marginal_dimension(const GibbsModel& model, const encoding::AdicParams& params, bool first_coordinate,
                            int L, int samples, std::uint64_t seed);

struct BoundaryMass {
    std::vector<double> first;   // mu(first coordinate 0 at positions 1..d), d = 1..depth
    std::vector<double> second;
    double decay_first = 0.0;    // geometric rate fitted over d
    double decay_second = 0.0;
    bool degenerate = false;     // decay rate above 0.99
};

BoundaryMass boundary_mass_check(const GibbsModel& model, const ProductAlphabet& pa, int depth);

/// "pi1", "pi2" or empty for a valid projection direction.
std::string exceptional_label(double theta);

struct ConservationConfig {
    int local_samples = 64;
    int local_depth = 1000;
    int feature_depth = 6;
    std::vector<int> q_list{4, 5, 6};
    int paths = 8;
    int samples_per_path = 250;
    int stride = 7;
    int burn_in = 50;
    int direct_points = 20000;
    int marginal_length = 10000;
    int marginal_samples = 8;
    int boundary_depth = 20;
    double tolerance = 0.05;
    std::uint64_t seed = 1;
    Exec exec = Exec::Parallel;
};

struct ProjectionResult {
    double theta = 0.0;
    std::string exceptional;  // "pi1"/"pi2" for coordinate projections
    std::map<int, Estimate> E_q;
    Extrapolation extrapolation;
    double direct = 0.0;
    std::optional<Estimate> marginal;
    double dim_pi = 0.0;  // extrapolated E clamped to [0, 1]; marginal for exceptions
    double gap = 0.0;
};

struct DimensionReport {
    Estimate dim_mu;
    double target = 0.0;  // min(1, dim_mu)
    std::vector<ProjectionResult> projections;
    BoundaryMass boundary;
    double max_gap = 0.0;  // over non-exceptional projections
    bool passed = false;
    std::vector<std::string> warnings;
};

/// Refuses multiplicatively dependent (m, n).
DimensionReport conservation_check(const GibbsModel& model, const encoding::AdicParams& params,
                                   const std::vector<double>& thetas, const ConservationConfig& cfg);

nlohmann::json to_json(const DimensionReport& r, const std::vector<int>& q_list);
/// theta, E_q..., E_extrapolated, direct_estimate, gap
std::string to_csv(const DimensionReport& r, const std::vector<int>& q_list);
std::string gnuplot_script(const std::string& csv_name);

}  // namespace cpgibbs::dimension
