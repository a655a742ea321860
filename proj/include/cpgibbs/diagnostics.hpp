#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cpgibbs/parallel.hpp"
#include "cpgibbs/scenery.hpp"

namespace cpgibbs::diagnostics {

using scenery::QueryCylinder;
using sft::ProductAlphabet;
using sft::Word;
using thermo::GibbsModel;

/// Finite union of half-open subintervals of [0,1).
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<std::pair<double, double>> parts);
    static IntervalSet whole() { return IntervalSet({{0.0, 1.0}}); }

    bool contains(double t) const;
    double length() const;
    const std::vector<std::pair<double, double>>& parts() const { return parts_; }

private:
    std::vector<std::pair<double, double>> parts_;  // sorted, disjoint
};

enum class Coordinate { First, Second, Pair };

/// Cylinder on one coordinate of the pair path (or on pair symbols).
struct Cylinder {
    Coordinate coord = Coordinate::First;
    Word word;
};

/// mu of the cylinder placed at position 1.
double cylinder_measure(const GibbsModel& model, const ProductAlphabet& pa, const Cylinder& c);

/// Whether the pair path matches c at positions offset+1 .. offset+|c|.
bool cylinder_at(std::span<const sft::Symbol> path, const ProductAlphabet& pa, const Cylinder& c, long long offset);

/// Element of the test algebra: 1_I(t) 1_[c](T^k w1) 1_[d](T^l w2) prod conditional(a_i x b_i).
struct TestFunctional {
    IntervalSet interval = IntervalSet::whole();
    Word c;  // first coordinate after position k
    Word d;  // second coordinate after position l_k
    std::vector<QueryCylinder> queries;
};

struct RunOptions {
    long long N = 100000;
    int paths = 32;
    std::uint64_t seed = 1;
    double t0 = 0.0;
    Exec exec = Exec::Parallel;
};

struct Report {
    std::string name;
    std::optional<double> target;
    std::vector<double> per_path_means;
    double pooled_mean = 0.0;
    double stderr_ = 0.0;     // across-path standard error of the pooled mean
    double dispersion = 0.0;  // standard deviation of the per-path means
    long long N = 0;

    /// |pooled - target| <= sigmas * stderr (a zero stderr requires equality up to 1e-12).
    bool within(double sigmas) const;
};

nlohmann::json to_json(const Report& r);

/// (1/N) sum_k 1_I({t + k alpha}) [F at l_k(t)]; target |I| mu(F).
Report single_average_diagnostic(const GibbsModel& model, const encoding::AdicParams& params, const Cylinder& F,
                                 const IntervalSet& I, const RunOptions& opts);

/// (1/N) sum_k 1_I({t + k alpha}) [F at l_k(t)] [G at k]; target |I| mu(F) mu(G).
Report double_average_diagnostic(const GibbsModel& model, const encoding::AdicParams& params, const Cylinder& F,
                                 const Cylinder& G, const IntervalSet& I, const RunOptions& opts);

/// Values f(S^k(t0, w, mu)) for k = 1..N along one pair path.
std::vector<double> functional_series(const GibbsModel& model, const encoding::AdicParams& params,
                                      std::span<const sft::Symbol> path, const TestFunctional& f, long long N,
                                      double t0);

std::size_t functional_path_length(const TestFunctional& f, long long N);

/// Joint pair table p[i][j] when the model is iid over pair symbols.
std::optional<std::vector<std::vector<double>>> iid_pair_table(const GibbsModel& model, const ProductAlphabet& pa);

/// Limit of the scenery averages of f for an iid pair table.
double closed_form_limit(const std::vector<std::vector<double>>& p, const TestFunctional& f);

/// Per-path averages of f along scenery orbits; target from closed_form_limit for iid models.
Report genericity_check(const GibbsModel& model, const encoding::AdicParams& params, const TestFunctional& f,
                        const RunOptions& opts);

struct MixingReport {
    std::vector<int> lags;
    std::vector<Report> gaps;  // one per lag, target 0
};

/// For each lag h: (1/N) sum f_k f*_{k+h} minus the product of the two means.
MixingReport mixing_diagnostic(const GibbsModel& model, const encoding::AdicParams& params, const TestFunctional& f,
                               const TestFunctional& f_star, const std::vector<int>& lags, const RunOptions& opts);

nlohmann::json to_json(const MixingReport& r);

}  // namespace cpgibbs::diagnostics
