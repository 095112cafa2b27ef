#pragma once

// Discrete-time MARS: hinge-basis logistic regression on the person-period
// data. Forward pass on the IRLS working response, GCV backward pruning,
// final coefficients by logistic maximum likelihood.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsurv/model.hpp"
#include "mixsurv/stats.hpp"
#include "mixsurv/survival_core.hpp"

namespace mixsurv {

struct HingeFactor {
    std::size_t column = 0;  // feature column of the augmented data
    double knot = 0.0;
    int direction = 1;  // +1: (x - knot)+, -1: (knot - x)+
};

/// A product of hinge factors, or (with no factors) a linear feature column.
struct HingeTerm {
    std::vector<HingeFactor> factors;
    int linear_column = -1;
    double coef = 0.0;

    std::size_t degree() const { return factors.size(); }
    double eval(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct HingeBasis {
    double intercept = 0.0;
    std::vector<HingeTerm> terms;
    std::vector<std::string> feature_names;
    int max_degree = 1;
    bool ridge_fallback = false;
    double gcv = 0.0;

    double linear_predictor(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    /// One line per term: `coef * h(var - knot) * ...`.
    std::string dump() const;
};

struct MarsOptions {
    int max_forward_terms = 21;     // including the intercept, excluding confounder columns
    double min_improvement = 1e-3;  // forward pass stops below this gain in deviance R^2
    double gcv_penalty = 2.0;       // per knot
    double max_coef_norm = 30.0;
    double ridge = 1.0;             // fallback penalty on non-intercept coefficients
    std::vector<int> p_grid = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    std::vector<int> d_grid = {1, 2};
    int folds = 5;
    std::uint64_t seed = 1;
};

/// Logistic regression by IRLS (|delta coef|_inf < 1e-8). With ridge > 0
/// every column but the first is penalized. Throws FitError when the
/// coefficient norm exceeds max_norm or IRLS fails.
Eigen::VectorXd logistic_irls(const Eigen::MatrixXd& B, const Eigen::VectorXd& y, double ridge, double max_norm,
                              Eigen::VectorXd start = {});

/// IRLS with a ridge retry on separation; `fallback` reports whether it was used.
Eigen::VectorXd logistic_fit(const Eigen::MatrixXd& B, const Eigen::VectorXd& y, const MarsOptions& options,
                             bool& fallback, Eigen::VectorXd start = {});

/// Forward pass, then pruning to the best-GCV subset with at most P terms.
HingeBasis fit_mars(const AugmentedDataset& data, int p_max, int degree, const MarsOptions& options = {});

/// Internal stages, exposed for tests.
struct MarsForward {
    std::vector<HingeTerm> terms;  // hinge terms (without intercept and confounders)
    std::vector<double> loglik;    // training log-likelihood after each accepted step
};
MarsForward mars_forward(const AugmentedDataset& data, const std::vector<std::size_t>& rows, int degree,
                         const MarsOptions& options);

struct MarsPruning {
    /// subsets[s]: indices into the forward terms kept at size s + 1 (intercept counted).
    std::vector<std::vector<std::size_t>> subsets;
    std::vector<double> gcv;
};
MarsPruning mars_backward(const AugmentedDataset& data, const std::vector<std::size_t>& rows,
                          const MarsForward& forward, const MarsOptions& options);

struct MarsCvResult {
    int best_p = 0;
    int best_d = 0;
    std::vector<int> p;
    std::vector<int> d;
    std::vector<double> auc;  // mean out-of-fold AUC per (p, d)
    std::size_t dropped_folds = 0;
};

/// Subject-level K-fold CV over the (P, D) grid by out-of-fold AUC.
MarsCvResult cv_tune_mars(const AugmentedDataset& data, const MarsOptions& options);

class MarsModel : public DiscreteTimeModel {
public:
    MarsModel(BinGrid grid, HingeBasis basis) : DiscreteTimeModel(std::move(grid)), basis_(std::move(basis)) {}
    const HingeBasis& basis() const { return basis_; }
    double event_probability(const ExposureProfile& profile, int r) const override;

private:
    HingeBasis basis_;
};

}  // namespace mixsurv
