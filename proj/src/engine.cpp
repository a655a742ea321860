#include "cpgibbs/engine.hpp"

#include <string>

namespace cpgibbs::scenery {

namespace {

void normalize(Eigen::MatrixXd& m) {
    const double top = m.maxCoeff();
    if (top > 0.0) m /= top;
}

Word digits_of(std::size_t index, int base, int len) {
    Word w(len);
    for (int i = len - 1; i >= 0; --i) {
        w[i] = static_cast<Symbol>(index % base);
        index /= base;
    }
    return w;
}

std::size_t power(int base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(base);
    return r;
}

}  // namespace

CpOrbit::CpOrbit(const GibbsModel& model, const ProductAlphabet& pa, const encoding::AdicParams& params,
                 std::span<const Symbol> path, double t0, int b_depth)
    : model_(&model), pa_(pa), params_(params), path_(path.begin(), path.end()), t0_(t0), b_depth_(b_depth) {
    if (model.sft().symbol_count() != pa.size()) throw InvalidArgument("CpOrbit: model is not on the pair alphabet");
    if (b_depth < 0) throw InvalidArgument("CpOrbit: b_depth must be >= 0");
    const auto& ss = model.states();
    const int S = ss.size();
    by_first_.assign(pa.m, Mat::Zero(S, S));
    by_pair_.assign(pa.size(), Mat::Zero(S, S));
    for (int u = 0; u < S; ++u)
        for (Symbol y = 0; y < pa.size(); ++y) {
            const int v = ss.next(u, y);
            if (v < 0) continue;
            const double p = model.step(u, y);
            by_first_[pa.first(y)](u, v) += p;
            by_pair_[y](u, v) += p;
        }
}

double CpOrbit::t() const { return encoding::angle_after(t0_, k_, params_); }

ObservationWindow CpOrbit::window() const { return window_from_path(path_, pa_, k_, l_); }

void CpOrbit::push_back(long long pos) {
    const Mat& m = by_first_[pa_.first(path_[pos - 1])];
    if (back_.empty()) {
        back_product_ = m;
    } else {
        back_product_ = back_product_ * m;
        normalize(back_product_);
    }
    back_.push_back(pos);
}

void CpOrbit::pop_front() {
    if (front_.empty()) {
        for (std::size_t i = back_.size(); i-- > 0;) {
            const Mat& m = by_first_[pa_.first(path_[back_[i] - 1])];
            if (front_.empty()) {
                front_.push_back(m);
            } else {
                Mat agg = m * front_.back();
                normalize(agg);
                front_.push_back(std::move(agg));
            }
        }
        back_.clear();
    }
    front_.pop_back();
}

Eigen::MatrixXd CpOrbit::window_product() const {
    const int S = model_->states().size();
    if (front_.empty() && back_.empty()) return Mat::Identity(S, S);
    if (front_.empty()) return back_product_;
    if (back_.empty()) return front_.back();
    Mat p = front_.back() * back_product_;
    normalize(p);
    return p;
}

void CpOrbit::advance_to(long long k) {
    if (k < k_) throw InvalidArgument("CpOrbit: steps must not decrease");
    if (k > static_cast<long long>(path_.size()))
        throw InvalidArgument("CpOrbit: path of length " + std::to_string(path_.size()) + " is too short for k = " +
                              std::to_string(k));
    k_ = k;
    l_ = encoding::l_k(t0_, k, params_);
    fresh_ = false;
    const int s = model_->order();
    if (l_ < s || k_ - l_ < b_depth_) return;
    const long long lo = l_ + b_depth_ + 1;
    if (!active_) {
        active_ = true;
        lo_ = lo;
        hi_ = lo - 1;
    }
    while (hi_ < k_) push_back(++hi_);
    while (lo_ < lo) {
        pop_front();
        ++lo_;
    }
}

void CpOrbit::refresh() {
    if (fresh_) return;
    const auto& ss = model_->states();
    const int s = ss.order();
    Word head(path_.begin() + (l_ - s), path_.begin() + l_);
    start_ = Row::Zero(ss.size());
    start_[ss.index_of(head)] = 1.0;
    product_ = window_product();
    rows_.clear();
    denominator_ = stretch_row({}).sum();
    fresh_ = true;
}

const Eigen::RowVectorXd& CpOrbit::stretch_row(const Word& b) {
    auto it = rows_.find(b);
    if (it != rows_.end()) return it->second;
    Row r = start_;
    for (int j = 1; j <= b_depth_; ++j) {
        const Symbol x = pa_.first(path_[l_ + j - 1]);
        if (j <= static_cast<int>(b.size()))
            r = r * by_pair_[pa_.encode(x, b[j - 1])];
        else
            r = r * by_first_[x];
    }
    r = r * product_;
    return rows_.emplace(b, std::move(r)).first->second;
}

const Eigen::VectorXd& CpOrbit::tail(const Word& a) {
    auto it = tails_.find(a);
    if (it != tails_.end()) return it->second;
    Vec v;
    if (a.empty()) {
        v = Vec::Ones(model_->states().size());
    } else {
        const Vec& rest = tail(Word(a.begin() + 1, a.end()));
        v = by_first_[a[0]] * rest;
    }
    return tails_.emplace(a, std::move(v)).first->second;
}

double CpOrbit::conditional(const QueryCylinder& query) {
    if (!active_) return conditional_prob(*model_, pa_, window(), query);
    if (static_cast<int>(query.b.size()) > b_depth_)
        throw InvalidArgument("CpOrbit: query b longer than the configured depth");
    for (Symbol x : query.a)
        if (x < 0 || x >= pa_.m) throw DisallowedWordError("query a: digit outside the alphabet");
    for (Symbol y : query.b)
        if (y < 0 || y >= pa_.n) throw DisallowedWordError("query b: digit outside the alphabet");
    refresh();
    return stretch_row(query.b).dot(tail(query.a)) / denominator_;
}

Eigen::MatrixXd CpOrbit::masses(int depth) {
    if (depth < 0) throw InvalidArgument("masses: depth must be >= 0");
    const int L = static_cast<int>(encoding::l_k(t0_, k_ + depth, params_) - l_);
    const std::size_t rows = power(pa_.m, depth), cols = power(pa_.n, L);
    Mat out(rows, cols);
    if (!active_) {
        const ObservationWindow w = window();
        for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t i = 0; i < rows; ++i)
                out(i, j) = conditional_prob(*model_, pa_, w, {digits_of(i, pa_.m, depth), digits_of(j, pa_.n, L)});
        return out;
    }
    if (L > b_depth_) throw InvalidArgument("masses: depth needs a larger b_depth");
    refresh();
    std::vector<const Vec*> tails(rows);
    for (std::size_t i = 0; i < rows; ++i) tails[i] = &tail(digits_of(i, pa_.m, depth));
    for (std::size_t j = 0; j < cols; ++j) {
        const Row& r = stretch_row(digits_of(j, pa_.n, L));
        for (std::size_t i = 0; i < rows; ++i) out(i, j) = r.dot(*tails[i]) / denominator_;
    }
    return out;
}

}  // namespace cpgibbs::scenery
