#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cpgibbs/scenery.hpp"

namespace cpgibbs::scenery {

/// Incremental evaluation of the conditional measures along one pair path.
///
/// Once l_k >= state order and k - l_k >= b_depth, the joint law of the query
/// factors as  start(l) * [explicit stretch l+1..l+b_depth] * W * tail(a),
/// where W is the product of first-coordinate-masked kernels over positions
/// l+b_depth+1..k. W is kept in a two-stack sliding window so each step costs
/// O(1) amortized matrix products. Earlier steps use the reference recursion.
class CpOrbit {
public:
    CpOrbit(const GibbsModel& model, const ProductAlphabet& pa, const encoding::AdicParams& params,
            std::span<const Symbol> path, double t0, int b_depth);

    /// Moves to step k (k never decreases).
    void advance_to(long long k);

    long long k() const noexcept { return k_; }
    long long l() const noexcept { return l_; }
    double t() const;
    bool engine_active() const noexcept { return active_; }

    double conditional(const QueryCylinder& query);

    /// Conditional masses of the depth-D sub-boxes: rows index a in Lambda^D,
    /// columns index b in Lambda'^L with L = l_{k+D} - l_k, both lexicographic.
    Eigen::MatrixXd masses(int depth);

    ObservationWindow window() const;

private:
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;
    using Row = Eigen::RowVectorXd;

    void push_back(long long pos);
    void pop_front();
    Mat window_product() const;
    void refresh();
    const Row& stretch_row(const Word& b);
    const Vec& tail(const Word& a);

    const GibbsModel* model_;
    ProductAlphabet pa_;
    encoding::AdicParams params_;
    Word path_;
    double t0_;
    int b_depth_;
    long long k_ = 0, l_ = 0;
    bool active_ = false;

    std::vector<Mat> by_first_;   // kernel masked to a first coordinate
    std::vector<Mat> by_pair_;    // kernel masked to one pair symbol

    // sliding window over positions [lo_, hi_]
    long long lo_ = 1, hi_ = 0;
    std::vector<Mat> front_;              // suffix products, top = whole front block
    std::vector<long long> back_;         // positions pushed since the last transfer
    Mat back_product_;

    bool fresh_ = false;
    Row start_;
    Mat product_;                         // W for the current step
    std::map<Word, Row> rows_;            // start * stretch(b) * W
    std::map<Word, Vec> tails_;
    double denominator_ = 0.0;
};

}  // namespace cpgibbs::scenery
