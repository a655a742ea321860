#include "cpgibbs/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "cpgibbs/rng.hpp"

namespace cpgibbs::thermo {

double Potential::operator()(std::span<const Symbol> window) const {
    auto it = table.find(Word(window.begin(), window.begin() + range));
    if (it == table.end())
        throw DisallowedWordError("potential: no value for word " +
                                  sft::to_digit_string(window.first(range)));
    return it->second;
}

void validate_potential(const sft::Sft& sft, const Potential& phi) {
    if (phi.range < 1) throw InvalidArgument("potential: range must be >= 1");
    if (!(phi.rho > 0.0 && phi.rho < 1.0)) throw InvalidArgument("potential: rho must lie in (0,1)");
    auto words = sft::enumerate_words(sft, phi.range);
    if (words.size() != phi.table.size())
        throw InvalidArgument("potential: table must have exactly one entry per allowed word of length " +
                              std::to_string(phi.range));
    for (const auto& w : words) {
        auto it = phi.table.find(w);
        if (it == phi.table.end())
            throw InvalidArgument("potential: missing value for word " + sft::to_digit_string(w));
        if (!std::isfinite(it->second))
            throw InvalidArgument("potential: non-finite value for word " + sft::to_digit_string(w));
    }
}

Potential lift_to_range2(const sft::Sft& sft, const Potential& phi) {
    if (phi.range != 1) return phi;
    Potential out;
    out.range = 2;
    out.rho = phi.rho;
    for (const auto& w : sft::enumerate_words(sft, 2)) out.table[w] = phi.table.at(Word{w[0]});
    return out;
}

Potential uniform_potential(const sft::Sft& sft) {
    Potential p;
    p.range = 1;
    for (Symbol s = 0; s < sft.symbol_count(); ++s) p.table[Word{s}] = 0.0;
    return p;
}

Potential bernoulli_potential(const sft::Sft& sft, std::span<const double> weights) {
    if (static_cast<int>(weights.size()) != sft.symbol_count())
        throw InvalidArgument("bernoulli: need one weight per symbol");
    Potential p;
    p.range = 1;
    for (Symbol s = 0; s < sft.symbol_count(); ++s) {
        if (!(weights[s] > 0.0)) throw InvalidArgument("bernoulli: weights must be positive");
        p.table[Word{s}] = std::log(weights[s]);
    }
    return p;
}

Potential markov_potential(const sft::Sft& sft, const std::vector<std::vector<double>>& q) {
    const int k = sft.symbol_count();
    if (static_cast<int>(q.size()) != k) throw InvalidArgument("markov: matrix side must equal symbol count");
    Potential p;
    p.range = 2;
    for (int u = 0; u < k; ++u) {
        if (static_cast<int>(q[u].size()) != k) throw InvalidArgument("markov: matrix must be square");
        for (int v = 0; v < k; ++v) {
            if (!sft.allowed(u, v)) continue;
            if (!(q[u][v] > 0.0))
                throw InvalidArgument("markov: entry (" + std::to_string(u) + "," + std::to_string(v) +
                                      ") must be positive on an allowed transition");
            p.table[Word{u, v}] = std::log(q[u][v]);
        }
    }
    return p;
}

Potential random_potential(const sft::Sft& sft, int range, std::uint64_t seed, double amplitude) {
    Potential p;
    p.range = range;
    Rng rng(seed);
    for (const auto& w : sft::enumerate_words(sft, range))
        p.table[w] = amplitude * (2.0 * rng.uniform() - 1.0);
    return p;
}

double birkhoff_sum(const Potential& phi, std::span<const Symbol> word, int count) {
    if (static_cast<int>(word.size()) < count + phi.range - 1)
        throw InvalidArgument("birkhoff_sum: word too short");
    double s = 0.0;
    for (int j = 0; j < count; ++j) s += phi(word.subspan(j, phi.range));
    return s;
}

// ---------------------------------------------------------------------------

StateSpace::StateSpace(const sft::Sft& sft, int order) : order_(order), k_(sft.symbol_count()) {
    if (order < 1) throw InvalidArgument("state order must be >= 1");
    states_ = sft::enumerate_words(sft, order, 1'000'000);
    std::size_t codes = 1;
    for (int i = 0; i < order; ++i) codes *= static_cast<std::size_t>(k_);
    lookup_.assign(codes, -1);
    for (int i = 0; i < size(); ++i) {
        std::size_t c = 0;
        for (Symbol s : states_[i]) c = c * k_ + s;
        lookup_[c] = i;
    }
    next_.assign(static_cast<std::size_t>(size()) * k_, -1);
    Word w(order);
    for (int i = 0; i < size(); ++i) {
        const Word& u = states_[i];
        for (Symbol y = 0; y < k_; ++y) {
            if (!sft.allowed(u.back(), y)) continue;
            std::copy(u.begin() + 1, u.end(), w.begin());
            w.back() = y;
            next_[static_cast<std::size_t>(i) * k_ + y] = index_of(w);
        }
    }
}

int StateSpace::index_of(std::span<const Symbol> w) const {
    if (static_cast<int>(w.size()) != order_) return -1;
    std::size_t c = 0;
    for (Symbol s : w) {
        if (s < 0 || s >= k_) return -1;
        c = c * k_ + s;
    }
    return lookup_[c];
}

TransferMatrix transfer_matrix(const sft::Sft& sft, const Potential& phi_in) {
    validate_potential(sft, phi_in);
    const Potential phi = lift_to_range2(sft, phi_in);
    const int order = phi.range - 1;
    TransferMatrix tm{StateSpace(sft, order), {}};
    const int n = tm.states.size();
    tm.matrix = Eigen::MatrixXd::Zero(n, n);
    Word w(phi.range);
    for (int u = 0; u < n; ++u) {
        const Word& su = tm.states.state(u);
        for (Symbol x = 0; x < sft.symbol_count(); ++x) {
            if (!sft.allowed(x, su.front())) continue;
            w[0] = x;
            std::copy(su.begin(), su.end(), w.begin() + 1);
            const int up = tm.states.index_of(std::span<const Symbol>(w).first(order));
            tm.matrix(u, up) += std::exp(phi.table.at(w));
        }
    }
    return tm;
}

namespace {

bool support_irreducible(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    auto reach = [&](bool transpose) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                double e = transpose ? m(v, u) : m(u, v);
                if (e > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return n > 0 && reach(false) && reach(true);
}

struct PerronVector {
    Eigen::VectorXd v;
    double lambda = 0.0;
    double residual = 0.0;  // relative to lambda, with ||v||_inf = 1
    int iterations = 0;
};

// Power iteration on (M + shift I); the shift makes a periodic irreducible
// matrix primitive without moving the Perron vector.
PerronVector perron(const Eigen::MatrixXd& m, const RpfOptions& opts) {
    const int n = static_cast<int>(m.rows());
    const double shift = 0.5 * m.rowwise().sum().maxCoeff();
    PerronVector best;
    best.residual = std::numeric_limits<double>::infinity();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd mv(n);
    int stalled = 0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        mv.noalias() = m * v;
        const double lambda = mv.sum() / v.sum();
        const double res = (mv - lambda * v).cwiseAbs().maxCoeff() / (lambda * v.maxCoeff());
        if (res < best.residual) {
            best = {v / v.maxCoeff(), lambda, res, it};
            stalled = 0;
        } else {
            ++stalled;
        }
        // Keep iterating past tol until rounding stops helping, so the
        // residuals recomputed after normalization still meet tol.
        if (best.residual <= opts.tol && (best.residual <= 1e-3 * opts.tol || stalled >= 20)) return best;
        v = mv + shift * v;
        v /= v.maxCoeff();
    }
    if (best.residual <= opts.tol) return best;
    throw NonConvergenceError("rpf_solve: power iteration did not converge in " +
                              std::to_string(opts.max_iter) + " iterations");
}

}  // namespace

RpfResult rpf_solve(const Eigen::MatrixXd& m, const RpfOptions& opts) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument("rpf_solve: matrix must be square");
    if ((m.array() < 0.0).any() || !m.allFinite()) throw InvalidArgument("rpf_solve: matrix must be nonnegative");
    if (!support_irreducible(m)) throw NonIrreducibleError("rpf_solve: matrix is reducible");

    const PerronVector right = perron(m, opts);
    const PerronVector left = perron(m.transpose(), opts);

    RpfResult r;
    r.pressure = std::log(right.lambda);
    r.nu = left.v / left.v.sum();
    r.psi = right.v / r.nu.dot(right.v);
    r.iterations = std::max(right.iterations, left.iterations);
    const double lam = right.lambda;
    r.right_residual = (m * r.psi - lam * r.psi).cwiseAbs().maxCoeff() / lam;
    r.left_residual = (m.transpose() * r.nu - lam * r.nu).cwiseAbs().maxCoeff() / lam;
    return r;
}

// ---------------------------------------------------------------------------

void GibbsModel::assemble(const TransferMatrix& tm, double pressure, Eigen::VectorXd psi,
                          Eigen::VectorXd nu) {
    states_ = tm.states;
    pressure_ = pressure;
    psi_ = std::move(psi);
    nu_ = std::move(nu);
    const int n = states_.size();
    const double lambda = std::exp(pressure_);
    // kernel(u, v) = nu_v M(v, u) / (lambda nu_u): the forward-time chain.
    kernel_ = Eigen::MatrixXd::Zero(n, n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (tm.matrix(v, u) > 0.0) kernel_(u, v) = nu_[v] * tm.matrix(v, u) / (lambda * nu_[u]);
    // rows sum to 1 up to the left residual; remove that residue
    for (int u = 0; u < n; ++u) kernel_.row(u) /= kernel_.row(u).sum();
    stationary_ = nu_.cwiseProduct(psi_);
    stationary_ /= stationary_.sum();

    const int k = sft_.symbol_count();
    cumulative_.assign(n, std::vector<double>(k, 0.0));
    for (int u = 0; u < n; ++u) {
        double acc = 0.0;
        for (Symbol y = 0; y < k; ++y) {
            acc += step(u, y);
            cumulative_[u][y] = acc;
        }
    }
}

GibbsModel GibbsModel::build(const sft::Sft& sft, const Potential& phi, const RpfOptions& opts) {
    sft::validate(sft);
    if (!sft::is_transitive(sft)) throw NonIrreducibleError("gibbs model: subshift is not transitive");
    GibbsModel g;
    g.sft_ = sft;
    TransferMatrix tm = transfer_matrix(sft, phi);
    g.phi_ = lift_to_range2(sft, phi);
    RpfResult r = rpf_solve(tm.matrix, opts);
    g.right_residual_ = r.right_residual;
    g.left_residual_ = r.left_residual;
    g.assemble(tm, r.pressure, std::move(r.psi), std::move(r.nu));
    return g;
}

GibbsModel GibbsModel::from_eigendata(const sft::Sft& sft, const Potential& phi, double pressure,
                                      const Eigen::VectorXd& psi, const Eigen::VectorXd& nu, double tol) {
    sft::validate(sft);
    GibbsModel g;
    g.sft_ = sft;
    TransferMatrix tm = transfer_matrix(sft, phi);
    g.phi_ = lift_to_range2(sft, phi);
    if (psi.size() != tm.matrix.rows() || nu.size() != tm.matrix.rows())
        throw InvalidArgument("stored eigendata has the wrong dimension");
    if ((psi.array() <= 0.0).any() || (nu.array() < 0.0).any())
        throw InvalidArgument("stored eigendata is not positive");
    const double lam = std::exp(pressure);
    g.right_residual_ = (tm.matrix * psi - lam * psi).cwiseAbs().maxCoeff() / lam;
    g.left_residual_ = (tm.matrix.transpose() * nu - lam * nu).cwiseAbs().maxCoeff() / lam;
    // Stored values are decimal round-trips, allow a little slack over tol.
    const double slack = std::max(tol, 1e-12) * 16.0;
    if (g.right_residual_ > slack || g.left_residual_ > slack)
        throw NonConvergenceError("stored eigendata fails the Perron residual check");
    g.assemble(tm, pressure, psi, nu);
    return g;
}

double GibbsModel::step(int state, Symbol symbol) const {
    const int v = states_.next(state, symbol);
    return v < 0 ? 0.0 : kernel_(state, v);
}

double gibbs_cylinder(const GibbsModel& model, std::span<const Symbol> a) {
    if (a.empty()) throw InvalidArgument("gibbs_cylinder: empty word");
    if (!model.sft().admits(a))
        throw DisallowedWordError("gibbs_cylinder: word " + sft::to_digit_string(a) + " is not allowed");
    const StateSpace& ss = model.states();
    const int s = ss.order();
    if (static_cast<int>(a.size()) < s) {
        double total = 0.0;
        for (int u = 0; u < ss.size(); ++u)
            if (std::equal(a.begin(), a.end(), ss.state(u).begin())) total += model.stationary()[u];
        return total;
    }
    int u = ss.index_of(a.first(s));
    double p = model.stationary()[u];
    for (std::size_t i = s; i < a.size() && p > 0.0; ++i) {
        p *= model.step(u, a[i]);
        u = ss.next(u, a[i]);
    }
    return p;
}

namespace {

int draw(const std::vector<double>& cumulative, double u) {
    const double total = cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * total);
    int idx = static_cast<int>(it - cumulative.begin());
    if (idx >= static_cast<int>(cumulative.size())) idx = static_cast<int>(cumulative.size()) - 1;
    // skip zero-probability symbols landed on through rounding
    while (idx > 0 && cumulative[idx] == cumulative[idx - 1]) --idx;
    return idx;
}

}  // namespace

Word sample_path(const GibbsModel& model, std::size_t length, std::uint64_t seed) {
    if (length == 0) throw InvalidArgument("sample_path: length must be >= 1");
    Rng rng(seed);
    const StateSpace& ss = model.states();
    std::vector<double> init(ss.size());
    double acc = 0.0;
    for (int u = 0; u < ss.size(); ++u) init[u] = (acc += model.stationary()[u]);
    int u = draw(init, rng.uniform());
    Word out;
    out.reserve(length);
    for (Symbol x : ss.state(u)) {
        if (out.size() == length) break;
        out.push_back(x);
    }
    while (out.size() < length) {
        Symbol y = draw(model.cumulative_[u], rng.uniform());
        out.push_back(y);
        u = ss.next(u, y);
    }
    return out;
}

Word least_continuation(const sft::Sft& sft, Symbol last, int len) {
    Word c;
    Symbol prev = last;
    for (int i = 0; i < len; ++i) {
        Symbol y = 0;
        while (!sft.allowed(prev, y)) ++y;
        c.push_back(y);
        prev = y;
    }
    return c;
}

GibbsBound gibbs_bound(const GibbsModel& model, const Potential& phi_in, int max_len) {
    const Potential phi = lift_to_range2(model.sft(), phi_in);
    if (phi.range != model.range()) throw InvalidArgument("gibbs_bound: potential does not match the model");
    if (max_len < phi.range) throw InvalidArgument("gibbs_bound: max_len must be >= range");
    const StateSpace& ss = model.states();
    const int n = ss.size();
    const int s = ss.order();

    // For |a| >= range, the ratio telescopes to
    //   psi(first state) nu(last state) e^{sP} / e^{S_extra(last state)}
    // where S_extra sums phi over the s windows reaching into the continuation.
    std::vector<double> log_tail(n);
    for (int v = 0; v < n; ++v) {
        Word w = ss.state(v);
        Word c = least_continuation(model.sft(), w.back(), s);
        w.insert(w.end(), c.begin(), c.end());
        log_tail[v] = std::log(model.nu()[v]) + s * model.pressure() - birkhoff_sum(phi, w, s);
    }
    std::vector<double> log_head(n);
    for (int u = 0; u < n; ++u) log_head[u] = std::log(model.psi()[u]);

    // reach[u][v]: some allowed word of the current length starts in u and ends in v.
    std::vector<char> reach(static_cast<std::size_t>(n) * n, 0), next(reach.size());
    for (int u = 0; u < n; ++u) reach[static_cast<std::size_t>(u) * n + u] = 1;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int len = s; len < max_len; ++len) {
        std::fill(next.begin(), next.end(), 0);
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v) {
                if (!reach[static_cast<std::size_t>(u) * n + v]) continue;
                for (Symbol y = 0; y < ss.alphabet_size(); ++y) {
                    int w = ss.next(v, y);
                    if (w >= 0) next[static_cast<std::size_t>(u) * n + w] = 1;
                }
            }
        reach.swap(next);
        if (len + 1 < phi.range) continue;
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (reach[static_cast<std::size_t>(u) * n + v]) {
                    const double r = log_head[u] + log_tail[v];
                    lo = std::min(lo, r);
                    hi = std::max(hi, r);
                }
    }
    return {std::exp(lo), std::exp(hi)};
}

std::vector<double> memory_loss(const GibbsModel& model, int depth_max, int query_len,
                                const MemoryLossOptions& opts) {
    if (query_len < 1 || query_len > 6) throw InvalidArgument("memory_loss: query_len must be in [1,6]");
    if (depth_max < 0 || depth_max > 20) throw InvalidArgument("memory_loss: depth_max must be in [0,20]");
    const StateSpace& ss = model.states();
    const int s = ss.order();
    const int range = model.range();

    // P(A | past) only sees the past through its final state.
    const auto queries = sft::enumerate_words(model.sft(), query_len);
    const int n = ss.size();
    std::vector<double> cond(static_cast<std::size_t>(n) * queries.size(), 0.0);
    for (int u = 0; u < n; ++u)
        for (std::size_t q = 0; q < queries.size(); ++q) {
            double p = 1.0;
            int state = u;
            for (Symbol y : queries[q]) {
                p *= model.step(state, y);
                state = ss.next(state, y);
                if (state < 0) break;
            }
            cond[static_cast<std::size_t>(u) * queries.size() + q] = p;
        }

    std::vector<double> gamma(depth_max + 1, 0.0);
    for (int d = 0; d <= depth_max; ++d) {
        const int past_len = d + range;
        std::vector<Word> pasts;
        if (sft::count_words(model.sft(), past_len) <= opts.exact_past_limit) {
            pasts = sft::enumerate_words(model.sft(), past_len);
        } else {
            pasts.reserve(opts.sampled_pasts);
            for (std::size_t i = 0; i < opts.sampled_pasts; ++i)
                pasts.push_back(sample_path(model, past_len, derive_seed(opts.seed, i * 64 + d)));
        }
        // group final states by the shared suffix of length d
        std::map<Word, std::set<int>> groups;
        for (const auto& p : pasts) {
            Word key(p.end() - d, p.end());
            groups[key].insert(ss.index_of(std::span<const Symbol>(p).last(s)));
        }
        double g = 0.0;
        for (const auto& [key, members] : groups) {
            if (members.size() < 2) continue;
            for (std::size_t q = 0; q < queries.size(); ++q) {
                double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
                for (int u : members) {
                    double p = cond[static_cast<std::size_t>(u) * queries.size() + q];
                    if (p <= 0.0) {
                        lo = 0.0;
                        continue;
                    }
                    lo = std::min(lo, p);
                    hi = std::max(hi, p);
                }
                if (lo > 0.0 && hi > 0.0) g = std::max(g, hi / lo - 1.0);
            }
        }
        gamma[d] = g;
    }
    return gamma;
}

}  // namespace cpgibbs::thermo
