#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cpgibbs/sft.hpp"

namespace cpgibbs::thermo {

using sft::Symbol;
using sft::Word;

/// Finite-range potential: phi(omega) depends on the first `range` symbols.
struct Potential {
    int range = 1;
    std::map<Word, double> table;
    double rho = 0.5;

    double operator()(std::span<const Symbol> window) const;
};

/// Checks the table covers exactly the allowed words of length `range` with finite values.
void validate_potential(const sft::Sft& sft, const Potential& phi);

/// Range-1 potentials rewritten as range 2 by ignoring the second symbol.
Potential lift_to_range2(const sft::Sft& sft, const Potential& phi);

Potential uniform_potential(const sft::Sft& sft);
Potential bernoulli_potential(const sft::Sft& sft, std::span<const double> weights);
/// phi(xy) = log Q(x, y); Q must be positive on every allowed transition.
Potential markov_potential(const sft::Sft& sft, const std::vector<std::vector<double>>& q);
/// Values drawn uniformly from [-amplitude, amplitude] with a fixed seed.
Potential random_potential(const sft::Sft& sft, int range, std::uint64_t seed, double amplitude);

/// S_count^phi evaluated on a finite word; requires count + range - 1 symbols.
double birkhoff_sum(const Potential& phi, std::span<const Symbol> word, int count);

/// Allowed words of a fixed length used as Markov states, indexed densely.
class StateSpace {
public:
    StateSpace() = default;
    StateSpace(const sft::Sft& sft, int order);

    int order() const noexcept { return order_; }
    int size() const noexcept { return static_cast<int>(states_.size()); }
    const Word& state(int i) const { return states_[i]; }
    /// -1 when `w` (length == order) is not an allowed state.
    int index_of(std::span<const Symbol> w) const;
    /// State reached by appending `symbol`, or -1 when disallowed.
    int next(int state, Symbol symbol) const { return next_[static_cast<std::size_t>(state) * k_ + symbol]; }
    Symbol last_symbol(int state) const { return states_[state].back(); }
    int alphabet_size() const noexcept { return k_; }

private:
    int order_ = 1;
    int k_ = 0;
    std::vector<Word> states_;
    std::vector<int> lookup_;  // base-k code -> state index
    std::vector<int> next_;
};

struct TransferMatrix {
    StateSpace states;
    Eigen::MatrixXd matrix;
};

/// Ruelle operator restricted to functions of the first range-1 symbols.
/// Entry (u, u') = exp(phi(x u)) where u' is the first range-1 symbols of x u.
TransferMatrix transfer_matrix(const sft::Sft& sft, const Potential& phi);

struct RpfOptions {
    double tol = 1e-12;
    int max_iter = 100'000;
};

struct RpfResult {
    double pressure = 0.0;
    Eigen::VectorXd psi;  ///< right Perron vector, sum(nu .* psi) = 1
    Eigen::VectorXd nu;   ///< left Perron vector, sum(nu) = 1
    int iterations = 0;
    double right_residual = 0.0;  ///< ||M psi - e^P psi||_inf / e^P
    double left_residual = 0.0;   ///< ||nu^T M - e^P nu^T||_inf / e^P
};

/// Leading eigendata of an irreducible nonnegative matrix by shifted power iteration.
RpfResult rpf_solve(const Eigen::MatrixXd& m, const RpfOptions& opts = {});

/// The invariant Gibbs measure of a finite-range potential as a stationary
/// Markov chain of order max(range - 1, 1) over the states.
class GibbsModel {
public:
    static GibbsModel build(const sft::Sft& sft, const Potential& phi, const RpfOptions& opts = {});
    /// Reassembles a model from stored eigendata and re-verifies the residuals.
    static GibbsModel from_eigendata(const sft::Sft& sft, const Potential& phi, double pressure,
                                     const Eigen::VectorXd& psi, const Eigen::VectorXd& nu,
                                     double tol);

    const sft::Sft& sft() const noexcept { return sft_; }
    const Potential& potential() const noexcept { return phi_; }
    const StateSpace& states() const noexcept { return states_; }
    int order() const noexcept { return states_.order(); }
    int range() const noexcept { return phi_.range; }
    double pressure() const noexcept { return pressure_; }
    double rho() const noexcept { return phi_.rho; }
    const Eigen::VectorXd& psi() const noexcept { return psi_; }
    const Eigen::VectorXd& nu() const noexcept { return nu_; }
    /// Forward transition kernel: row u is the law of the next state given u.
    const Eigen::MatrixXd& kernel() const noexcept { return kernel_; }
    const Eigen::VectorXd& stationary() const noexcept { return stationary_; }
    double right_residual() const noexcept { return right_residual_; }
    double left_residual() const noexcept { return left_residual_; }

    /// Kernel probability of appending `symbol` to `state` (0 when disallowed).
    double step(int state, Symbol symbol) const;

private:
    void assemble(const TransferMatrix& tm, double pressure, Eigen::VectorXd psi, Eigen::VectorXd nu);

    sft::Sft sft_;
    Potential phi_;
    StateSpace states_;
    double pressure_ = 0.0;
    Eigen::VectorXd psi_, nu_, stationary_;
    Eigen::MatrixXd kernel_;
    std::vector<std::vector<double>> cumulative_;  // per state, over symbols
    double right_residual_ = 0.0, left_residual_ = 0.0;

    friend Word sample_path(const GibbsModel&, std::size_t, std::uint64_t);
};

/// mu([a]); throws DisallowedWordError for words outside the subshift.
double gibbs_cylinder(const GibbsModel& model, std::span<const Symbol> a);

/// Stationary chain sample of the given length, deterministic in `seed`.
Word sample_path(const GibbsModel& model, std::size_t length, std::uint64_t seed);

struct GibbsBound {
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    double spread() const { return ratio_max / ratio_min; }
};

/// Extremes of mu([a]) / (exp(-|a| P) exp(S_|a| phi(a c))) over allowed words
/// with range <= |a| <= max_len, `c` being the lexicographically least
/// allowed continuation of a.
GibbsBound gibbs_bound(const GibbsModel& model, const Potential& phi, int max_len);

/// Least allowed continuation of `len` symbols after `last`.
Word least_continuation(const sft::Sft& sft, Symbol last, int len);

struct MemoryLossOptions {
    std::size_t exact_past_limit = 10'000;
    std::size_t sampled_pasts = 10'000;
    std::uint64_t seed = 0x6a09e667f3bcc908ULL;
};

/// gamma_d for d = 1..depth_max (index 0 holds d = 0): the largest relative
/// change of P(A | past) over query cylinders A of length query_len and pasts
/// of length d + range agreeing in their last d symbols.
std::vector<double> memory_loss(const GibbsModel& model, int depth_max, int query_len,
                                const MemoryLossOptions& opts = {});

}  // namespace cpgibbs::thermo
