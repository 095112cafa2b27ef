#pragma once

// Cox PH with penalized B-spline smooths of each metal and centered tensor
// product smooths of every metal pair.

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mixsurv/cox.hpp"

namespace mixsurv {

/// B-spline basis values at x (size knots.size() - degree - 1).
Eigen::VectorXd bspline_basis(const std::vector<double>& knots, int degree, double x);

/// Equally spaced knots whose basis of `size` functions spans [lo, hi].
std::vector<double> uniform_knots(double lo, double hi, int size, int degree);

/// Difference matrix of the given order for `size` coefficients.
Eigen::MatrixXd difference_matrix(int size, int order);

struct SplineBasisSpec {
    int main_basis_size = 8;      // 0 enters every metal linearly
    int tensor_marginal_size = 5;
    int degree = 3;
    int penalty_order = 2;
    bool interactions = true;
    std::vector<double> tau_grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
    int cv_folds = 5;
    /// Skip cross-validation and use this smoothing multiplier.
    std::optional<double> fixed_tau;
    std::uint64_t seed = 1;

    void validate() const;
};

/// One centered smooth of a single metal: x -> B(clamp(x)) Z.
struct MarginalSmooth {
    std::vector<double> knots;
    int degree = 3;
    double lo = 0.0, hi = 0.0;
    Eigen::MatrixXd Z;        // K x (K-1) sum-to-zero constraint basis
    Eigen::MatrixXd penalty;  // (K-1) x (K-1)

    static MarginalSmooth build(const Eigen::VectorXd& x, int size, int degree, int order);
    Eigen::Index columns() const { return Z.cols(); }
    Eigen::RowVectorXd eval(double x) const;
};

class SplineCoxDesign : public CoxDesign {
public:
    SplineCoxDesign(const Dataset& data, const SplineBasisSpec& spec);

    std::size_t columns() const override { return static_cast<std::size_t>(penalty_.rows()); }
    std::vector<std::string> names() const override { return names_; }
    std::vector<bool> penalized() const override;
    void fill_row(std::span<const double> metals, std::span<const double> confounders,
                  DesignRow out) const override;

    /// Sum of all (scaled) smoothing penalties, embedded in design columns.
    const Eigen::MatrixXd& penalty() const { return penalty_; }

    struct Block {
        std::string name;
        Eigen::Index start = 0, size = 0;
        int metal_a = -1, metal_b = -1;  // metal_b >= 0 for tensor terms
    };
    const std::vector<Block>& blocks() const { return blocks_; }

private:
    std::size_t num_metals_ = 0, num_confounders_ = 0;
    std::vector<std::optional<MarginalSmooth>> main_;  // empty -> linear column
    struct Tensor {
        std::size_t a, b;
        MarginalSmooth ma, mb;
    };
    std::vector<Tensor> tensors_;
    std::vector<Block> blocks_;
    std::vector<std::string> names_;
    Eigen::MatrixXd penalty_;
};

struct PsplineCvResult {
    std::vector<double> tau;
    std::vector<double> score;  // summed cross-validated partial log-likelihood, -inf for failed fits
    double best_tau = 0.0;
};

/// Verweij-van Houwelingen cross-validated partial likelihood over the tau grid.
PsplineCvResult cv_pspline_tau(const Dataset& data, const std::shared_ptr<const SplineCoxDesign>& design,
                               const SplineBasisSpec& spec);

/// Fit at a fixed smoothing multiplier.
CoxFit fit_cox_psplines_at(const Dataset& data, std::shared_ptr<const SplineCoxDesign> design, double tau);

/// Cross-validates tau (unless fixed) and refits on the full data.
CoxFit fit_cox_psplines(const Dataset& data, const SplineBasisSpec& spec);

}  // namespace mixsurv
