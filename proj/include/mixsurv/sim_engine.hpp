#pragma once

// Synthetic cohorts for the five benchmark scenarios and the exact
// generating-law hazard/survival used as the truth oracle.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mixsurv/model.hpp"
#include "mixsurv/stats.hpp"
#include "mixsurv/survival_core.hpp"

namespace mixsurv {

/// Confounders in column order (sex, BMI, age). BMI is on the log scale.
struct ConfounderModel {
    double sex_probability = 0.59;
    double bmi_mean = 3.39;
    double bmi_sd = 0.19;
    double age_mean = 56.13;
    double age_sd = 8.10;
};

enum class MetalEffect { linear, nonlinear };

struct ScenarioConfig {
    int scenario_id = 1;
    std::size_t n = 1000;
    std::size_t num_metals = 5;
    ConfounderModel confounders;

    // M_j = intercept_j + conf_coeffs(j,:) . c + sum_{k<j} metal_coeffs(j,k) M_k + N(0, sigma_j^2)
    Eigen::VectorXd metal_intercept;
    Eigen::MatrixXd metal_conf_coeffs;  // J x 3
    Eigen::MatrixXd metal_coeffs;       // J x J, strictly lower triangular
    Eigen::VectorXd metal_sd;

    // f(m,c) = exp{gamma . c + g(m)}; g linear (beta . m) or the fixed nonlinear form.
    Eigen::VectorXd gamma;  // 3
    Eigen::VectorXd beta;   // J
    MetalEffect effect = MetalEffect::linear;

    // alpha(m) = max(alpha_floor, alpha_intercept + alpha_coeffs . m)
    double alpha_intercept = 1.0;
    Eigen::VectorXd alpha_coeffs;  // J, zero for proportional hazards
    double alpha_floor = 0.05;

    bool censoring = true;
    double censor1_low = 0.0, censor1_high = 100.0;
    double censor2_low = 16.0, censor2_high = 20.0;

    std::uint64_t seed = 20240101;

    bool proportional_hazards() const { return alpha_coeffs.cwiseAbs().maxCoeff() == 0.0; }
    /// Throws ConfigError on any violated invariant.
    void validate() const;
    std::vector<std::string> metal_names() const;
};

/// Shipped, calibrated defaults for scenario 1..5.
ScenarioConfig default_scenario(int scenario_id);

nlohmann::json to_json(const ScenarioConfig& config);
/// Missing fields fall back to the default of `scenario_id` (required).
ScenarioConfig scenario_from_json(const nlohmann::json& j);

Eigen::MatrixXd simulate_confounders(std::size_t n, const ConfounderModel& model, Rng& rng);
Eigen::MatrixXd simulate_metals(const Eigen::MatrixXd& confounders, const ScenarioConfig& config, Rng& rng);

/// Inverse-CDF Weibull draw with shape alpha and scale f.
double weibull_time(double alpha, double scale, Rng& rng);

double scenario_alpha(const ScenarioConfig& config, std::span<const double> metals, bool* clamped = nullptr);
double scenario_log_scale(const ScenarioConfig& config, std::span<const double> metals,
                          std::span<const double> confounders);

struct Outcome {
    double time = 0.0;
    bool event = false;
    bool alpha_clamped = false;
};

Outcome scenario_outcome(std::span<const double> metals, std::span<const double> confounders,
                         const ScenarioConfig& config, Rng& rng);

struct Cohort {
    Dataset data;
    std::size_t alpha_clamps = 0;
};

/// Full cohort of config.n subjects from the given stream.
Cohort simulate_cohort(const ScenarioConfig& config, Rng& rng);
/// Cohort from the config's own seed.
Cohort simulate_cohort(const ScenarioConfig& config);

/// Exact Weibull hazard and survival of the generating law.
class OracleModel : public SurvivalModel {
public:
    explicit OracleModel(ScenarioConfig config) : config_(std::move(config)) {}
    double survival(const ExposureProfile& profile, double t) const override;
    double hazard(const ExposureProfile& profile, double t) const override;
    std::optional<double> log_hazard_ratio(const ExposureProfile& a, const ExposureProfile& b) const override;

private:
    ScenarioConfig config_;
};

/// Quantile of metal j's marginal under the generating law (a two-component
/// normal mixture over sex), found by bisection.
double population_metal_quantile(const ScenarioConfig& config, std::size_t j, double p);
/// Confounder medians under the generating law.
std::vector<double> population_confounder_medians(const ScenarioConfig& config);
/// Population 80th percentile of observed time, from a large reference cohort.
double reference_t_spec(const ScenarioConfig& config, std::size_t reference_n = 200000);

struct CalibrationReport {
    int scenario_id = 0;
    std::size_t n = 0;
    std::size_t num_metals = 0;
    double min_correlation = 0.0;
    double max_correlation = 0.0;
    double censoring_fraction = 0.0;
    double t_spec = 0.0;
    std::size_t alpha_clamps = 0;
    bool correlation_ok = true;
    bool censoring_ok = true;
    bool t_spec_ok = true;
    bool all_ok() const { return correlation_ok && censoring_ok && t_spec_ok; }
};

/// Simulates `n` subjects and checks the calibration targets.
CalibrationReport calibrate_defaults(const ScenarioConfig& config, std::size_t n = 100000);
nlohmann::json to_json(const CalibrationReport& report);

}  // namespace mixsurv
