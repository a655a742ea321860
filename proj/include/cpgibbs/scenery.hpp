#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cpgibbs/encoding.hpp"
#include "cpgibbs/thermo.hpp"

namespace cpgibbs::scenery {

using sft::ProductAlphabet;
using sft::Symbol;
using sft::Word;
using thermo::GibbsModel;

/// Per-position constraint on a pair symbol; -1 leaves a coordinate free.
struct Pin {
    int first = -1;
    int second = -1;
};

/// log mu(paths matching pins at positions 1..pins.size()), -inf when the set
/// is null. Forward recursion over the chain states with per-step rescaling.
double log_constrained_mass(const GibbsModel& model, const ProductAlphabet& pa, std::span<const Pin> pins);

struct ObservationWindow {
    long long k = 0;
    long long l = 0;
    Word x_obs;  // first coordinate, positions 1..k
    Word y_obs;  // second coordinate, positions 1..l
};

struct QueryCylinder {
    Word a;  // first coordinate from position k+1
    Word b;  // second coordinate from position l+1

    friend bool operator==(const QueryCylinder&, const QueryCylinder&) = default;
};

/// Checks the model lives on the pair alphabet and that the window is well formed.
void validate_window(const GibbsModel& model, const ProductAlphabet& pa, const ObservationWindow& w);

/// mu(first coords a at k+1.., second coords b at l+1.. | window), exact up to
/// rounding. Throws ZeroProbabilityWindow for a null window.
double conditional_prob(const GibbsModel& model, const ProductAlphabet& pa, const ObservationWindow& window,
                        const QueryCylinder& query);

/// The window of depth (k, l) read off a sampled pair path.
ObservationWindow window_from_path(std::span<const Symbol> path, const ProductAlphabet& pa, long long k,
                                   long long l);

Word first_coordinates(std::span<const Symbol> path, const ProductAlphabet& pa);
Word second_coordinates(std::span<const Symbol> path, const ProductAlphabet& pa);

/// All [a] x [b] with 1 <= |a|, |b| <= depth, a and b free words.
std::vector<QueryCylinder> default_test_set(const ProductAlphabet& pa, int depth);

struct SceneryFeatures {
    double t = 0.0;
    long long k = 0;
    std::vector<double> values;
};

struct EmpiricalCpDistribution {
    std::vector<SceneryFeatures> samples;
    int q = 1;

    double weight() const { return samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size()); }
};

/// Path length needed for an orbit of N steps with stride q over the test set.
std::size_t orbit_path_length(long long N, int q, const std::vector<QueryCylinder>& tests);

/// Features at k = q, 2q, .., Nq along one sampled path.
std::vector<SceneryFeatures> scenery_orbit(const GibbsModel& model, const encoding::AdicParams& params,
                                           std::uint64_t seed, long long N, double t0,
                                           const std::vector<QueryCylinder>& tests, int q);

/// As above on a given pair path (at least orbit_path_length symbols).
std::vector<SceneryFeatures> scenery_orbit_on_path(const GibbsModel& model, const encoding::AdicParams& params,
                                                   std::span<const Symbol> path, long long N, double t0,
                                                   const std::vector<QueryCylinder>& tests, int q);

EmpiricalCpDistribution empirical_distribution(const std::vector<std::vector<SceneryFeatures>>& orbits, int q);

/// KS distance between the t-marginal of the samples and Uniform[0,1).
double t_marginal_ks(const EmpiricalCpDistribution& cp);

}  // namespace cpgibbs::scenery
