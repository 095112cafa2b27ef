#pragma once

// Cox proportional hazards: Breslow partial likelihood, Newton-Raphson fits
// (optionally with a quadratic penalty), Breslow baseline and the fitted
// model wrapper.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mixsurv/model.hpp"
#include "mixsurv/stats.hpp"
#include "mixsurv/survival_core.hpp"

namespace mixsurv {

/// Writable row of a column-major design matrix.
using DesignRow = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

/// Maps (metals, confounders) to a Cox design row.
class CoxDesign {
public:
    virtual ~CoxDesign() = default;
    virtual std::size_t columns() const = 0;
    virtual std::vector<std::string> names() const = 0;
    /// true for columns subject to the elastic-net penalty.
    virtual std::vector<bool> penalized() const = 0;
    virtual void fill_row(std::span<const double> metals, std::span<const double> confounders,
                          DesignRow out) const = 0;

    Eigen::MatrixXd matrix(const Dataset& data) const;
    Eigen::RowVectorXd row(const ExposureProfile& profile) const;
};

/// Columns: metals, then optional pairwise metal products (j < k), then confounders.
class LinearCoxDesign : public CoxDesign {
public:
    LinearCoxDesign(std::vector<std::string> metal_names, std::vector<std::string> confounder_names,
                    bool interactions);
    static std::shared_ptr<const LinearCoxDesign> for_dataset(const Dataset& data, bool interactions);

    std::size_t columns() const override;
    std::vector<std::string> names() const override;
    std::vector<bool> penalized() const override;
    void fill_row(std::span<const double> metals, std::span<const double> confounders,
                  DesignRow out) const override;

    bool interactions() const { return interactions_; }
    /// Column of the product M_j * M_k (0-based, j != k); -1 without interactions.
    int product_column(std::size_t j, std::size_t k) const;

private:
    std::vector<std::string> metals_;
    std::vector<std::string> confounders_;
    bool interactions_;
};

/// Breslow log partial likelihood on a fixed design. Rows are held sorted
/// by time; all vectors passed to or returned by the *_eta methods use that
/// order.
class PartialLikelihood {
public:
    PartialLikelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& time, const std::vector<int>& event);

    std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(x_.cols()); }
    std::size_t events() const { return events_total_; }
    const Eigen::MatrixXd& X() const { return x_; }
    const Eigen::VectorXd& event() const { return delta_; }
    /// order()[k] = original row of sorted row k.
    const std::vector<std::size_t>& order() const { return order_; }

    double loglik(const Eigen::VectorXd& beta) const;
    double loglik_eta(const Eigen::VectorXd& eta) const;

    /// Score and observed information (negative Hessian) at beta.
    double derivatives(const Eigen::VectorXd& beta, Eigen::VectorXd& score, Eigen::MatrixXd& info) const;

    /// d loglik / d eta and the diagonal of the negative Hessian in eta.
    double eta_derivatives(const Eigen::VectorXd& eta, Eigen::VectorXd& grad, Eigen::VectorXd& weight) const;

    struct Baseline {
        std::vector<double> times;   // distinct event times
        std::vector<double> cumhaz;  // Lambda_0 just after each time, relative to exp(eta - offset)
        double offset = 0.0;
    };
    Baseline breslow(const Eigen::VectorXd& beta) const;

private:
    // Shifted risk-set sums: s0[g] = sum_{risk set of group g} exp(eta - shift).
    double risk_sums(const Eigen::VectorXd& eta, double shift, std::vector<double>& s0, Eigen::VectorXd& theta) const;

    Eigen::MatrixXd x_;
    Eigen::VectorXd time_;
    Eigen::VectorXd delta_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> group_start_;  // group g covers rows [start[g], start[g+1])
    std::vector<double> group_events_;
    std::vector<std::size_t> group_of_;
    std::size_t events_total_ = 0;
};

struct NewtonOptions {
    int max_iterations = 100;
    double score_tol = 1e-8;
    double rel_loglik_tol = 1e-10;
    double max_coef_norm = 50.0;
};

struct NewtonResult {
    Eigen::VectorXd beta;
    Eigen::MatrixXd information;  // of the (penalized) objective
    double loglik = 0.0;          // unpenalized
    double objective = 0.0;       // loglik - beta' P beta / 2
    int iterations = 0;
    double max_score = 0.0;
    std::vector<double> trace;
};

/// Maximizes loglik(beta) - beta' P beta / 2 (P may be empty for no penalty).
/// Throws FitError on non-convergence or when ||beta|| exceeds the limit.
NewtonResult newton_cox(const PartialLikelihood& pl, const Eigen::MatrixXd& penalty, Eigen::VectorXd start,
                        const NewtonOptions& options = {});

/// Step function Lambda_0(t) with a reference linear-predictor offset, so that
/// Lambda(t | eta) = Lambda_0(t) * exp(eta - offset).
struct BreslowBaseline {
    std::vector<double> times;
    std::vector<double> cumhaz;
    double offset = 0.0;

    double cumulative(double t) const;
    /// Smoothed baseline hazard: slope of Lambda_0 across neighbouring event times.
    double hazard(double t) const;
};

struct CoxFit {
    std::shared_ptr<const CoxDesign> design;
    Eigen::VectorXd coef;
    Eigen::MatrixXd information;
    double loglik = 0.0;
    int iterations = 0;
    double max_score = 0.0;
    std::vector<double> trace;
    BreslowBaseline baseline;
    std::string kind = "cox";
    nlohmann::json extra;  // family-specific diagnostics

    Eigen::VectorXd standard_errors() const;
};

/// Unpenalized fit; checks rank and names collinear columns.
CoxFit fit_cox(const Dataset& data, std::shared_ptr<const CoxDesign> design, const NewtonOptions& options = {});
CoxFit fit_cox(const Dataset& data, bool include_interactions);

BreslowBaseline breslow_baseline(const CoxFit& fit, const Dataset& data);

double cox_linear_predictor(const CoxFit& fit, const ExposureProfile& profile);

class CoxModel : public SurvivalModel {
public:
    explicit CoxModel(CoxFit fit) : fit_(std::move(fit)) {}
    const CoxFit& fit() const { return fit_; }

    double survival(const ExposureProfile& profile, double t) const override;
    double hazard(const ExposureProfile& profile, double t) const override;
    std::optional<double> log_hazard_ratio(const ExposureProfile& a, const ExposureProfile& b) const override;

private:
    CoxFit fit_;
};

nlohmann::json fit_summary(const CoxFit& fit);

/// Throws DataError when the dataset has no events.
void require_events(const Dataset& data);

}  // namespace mixsurv
