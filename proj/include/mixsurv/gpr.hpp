#pragma once

// Gaussian-kernel weighted averages of the person-period outcomes. The
// bandwidth comes from the median heuristic, not from cross-validation.

#include <atomic>
#include <cstdint>
#include <memory>

#include <Eigen/Dense>

#include "mixsurv/model.hpp"
#include "mixsurv/survival_core.hpp"

namespace mixsurv {

struct BandwidthSummary {
    double rho = 0.0;  // median squared distance
    double q10 = 0.0;  // 0.1 and 0.9 quantiles, reported as a sanity band
    double q90 = 0.0;
    std::size_t rows_used = 0;
};

/// Pairwise squared Euclidean distances over at most `max_rows` rows (a
/// seeded subsample when larger). Throws DataError for fewer than 2 rows or a
/// zero median.
BandwidthSummary median_heuristic(const Eigen::MatrixXd& rows, std::uint64_t seed, std::size_t max_rows = 2000);
double median_heuristic_rho(const Eigen::MatrixXd& rows, std::uint64_t seed, std::size_t max_rows = 2000);

class KernelModel {
public:
    /// Standardizes every feature column; throws DataError on a zero-variance column.
    KernelModel(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, std::uint64_t seed);
    KernelModel(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, double rho);

    double rho() const { return bandwidth_.rho; }
    const BandwidthSummary& bandwidth() const { return bandwidth_; }
    const Eigen::MatrixXd& standardized() const { return x_; }

    Eigen::VectorXd standardize(const Eigen::VectorXd& raw) const;
    /// Normalized kernel weights for a raw feature vector; falls back to a
    /// unit weight on the nearest row when every kernel value underflows.
    Eigen::VectorXd weights(const Eigen::VectorXd& raw, bool* nearest_fallback = nullptr) const;
    double predict(const Eigen::VectorXd& raw, bool* nearest_fallback = nullptr) const;

private:
    void standardize_training(const Eigen::MatrixXd& features);

    Eigen::VectorXd center_, scale_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    BandwidthSummary bandwidth_;
};

class GprModel : public DiscreteTimeModel {
public:
    GprModel(BinGrid grid, std::shared_ptr<const KernelModel> kernel)
        : DiscreteTimeModel(std::move(grid)), kernel_(std::move(kernel)),
          fallbacks_(std::make_shared<std::atomic<std::size_t>>(0)) {}

    const KernelModel& kernel() const { return *kernel_; }
    double event_probability(const ExposureProfile& profile, int r) const override;
    /// Predictions that needed the nearest-neighbour fallback so far.
    std::size_t fallback_count() const { return fallbacks_->load(); }

private:
    std::shared_ptr<const KernelModel> kernel_;
    std::shared_ptr<std::atomic<std::size_t>> fallbacks_;
};

/// Builds the kernel model on an augmented dataset.
GprModel fit_gpr(const AugmentedDataset& data, std::uint64_t seed);

}  // namespace mixsurv
