#pragma once

// Elastic-net penalized Cox regression: standardized two-loop coordinate
// descent along a kappa path, cross-validated over (omega, kappa) with the
// Verweij-van Houwelingen partial-likelihood criterion. Confounders are
// never penalized.

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "mixsurv/cox.hpp"

namespace mixsurv {

struct CoxEnOptions {
    std::vector<double> omega_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int path_length = 100;
    double min_ratio = 1e-3;
    double tolerance = 1e-7;
    int max_outer = 200;
    int max_sweeps = 100000;
    int folds = 5;
    bool include_interactions = false;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Solver on one design. Coefficients handled here are on the standardized
/// scale unless stated otherwise.
class CoxEnSolver {
public:
    CoxEnSolver(const Eigen::MatrixXd& X, const Eigen::VectorXd& time, const std::vector<int>& event,
                std::vector<bool> penalized, double tolerance = 1e-7);

    std::size_t dim() const { return penalized_.size(); }
    const PartialLikelihood& likelihood() const { return pl_; }

    /// Penalized coefficients zero, unpenalized ones at their restricted MLE.
    const Eigen::VectorXd& null_fit() const { return null_; }
    /// Smallest kappa for which every penalized coefficient is zero.
    double kappa_max(double omega) const;

    /// -(1/n) loglik + kappa * [omega ||b||_1 + (1 - omega) ||b||^2 / 2] over penalized b.
    double objective(double omega, double kappa, const Eigen::VectorXd& b) const;

    /// Minimizes the objective from `b`. The optional trace receives the
    /// objective after each outer (quadratic-approximation) iteration.
    Eigen::VectorXd solve(double omega, double kappa, Eigen::VectorXd b, std::vector<double>* trace = nullptr,
                          int max_outer = 200, int max_sweeps = 100000) const;

    Eigen::VectorXd to_original(const Eigen::VectorXd& b) const;
    Eigen::VectorXd to_standardized(const Eigen::VectorXd& beta) const;

private:
    PartialLikelihood pl_;  // on standardized columns
    std::vector<bool> penalized_;
    Eigen::VectorXd scale_;
    double tolerance_;
    Eigen::VectorXd null_;
};

/// kappa_max * min_ratio^(k/(L-1)), k = 0..L-1.
std::vector<double> kappa_sequence(double kappa_max, int length, double min_ratio);

struct ElasticNetPath {
    double omega = 0.0;
    std::vector<double> kappa;  // strictly decreasing
    Eigen::MatrixXd coef;       // columns x path, original scale
    std::vector<double> cv_score;  // summed CV criterion per kappa (empty if not cross-validated)
};

struct CoxEnResult {
    std::vector<ElasticNetPath> paths;
    std::vector<std::string> term_names;
    std::size_t best_path = 0;
    std::size_t best_index = 0;
    double omega_star = 0.0;
    double kappa_star = 0.0;
    std::size_t dropped_folds = 0;
    CoxFit fit;
};

/// Full kappa path for one omega on the dataset's linear design.
ElasticNetPath fit_cox_en_path(const Dataset& data, double omega, const CoxEnOptions& options);

/// Paths for every omega, CV selection and the final fit at (omega*, kappa*).
CoxEnResult fit_cox_en(const Dataset& data, const CoxEnOptions& options);

/// Fit at a given (omega, kappa), reached by a warm-started path on this data.
CoxFit fit_cox_en_at(const Dataset& data, double omega, double kappa, const CoxEnOptions& options);

/// Adds CV criteria to every path (paths must come from the same data and options).
/// Returns the number of folds dropped for having no held-out events.
std::size_t cv_select(const Dataset& data, const CoxEnOptions& options, std::vector<ElasticNetPath>& paths,
                      std::size_t& best_path, std::size_t& best_index);

/// omega,kappa,term,coefficient,cv_score
void write_path_csv(const CoxEnResult& result, std::ostream& out);

}  // namespace mixsurv
