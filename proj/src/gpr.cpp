#include "mixsurv/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsurv/stats.hpp"

namespace mixsurv {

BandwidthSummary median_heuristic(const Eigen::MatrixXd& rows, std::uint64_t seed, std::size_t max_rows) {
    const auto n = static_cast<std::size_t>(rows.rows());
    if (n < 2) throw DataError("median heuristic needs at least 2 rows");
    std::vector<Eigen::Index> pick(n);
    std::iota(pick.begin(), pick.end(), Eigen::Index{0});
    if (n > max_rows) {
        Rng rng = make_stream(seed, {0x6B12ULL});
        for (std::size_t i = 0; i < max_rows; ++i) std::swap(pick[i], pick[i + uniform_index(n - i, rng)]);
        pick.resize(max_rows);
        std::sort(pick.begin(), pick.end());
    }
    const std::size_t m = pick.size();
    std::vector<double> d;
    d.reserve(m * (m - 1) / 2);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) d.push_back((rows.row(pick[a]) - rows.row(pick[b])).squaredNorm());
    }
    std::sort(d.begin(), d.end());
    BandwidthSummary out;
    out.rho = quantile_sorted(d, 0.5);
    out.q10 = quantile_sorted(d, 0.1);
    out.q90 = quantile_sorted(d, 0.9);
    out.rows_used = m;
    if (!(out.rho > 0.0)) throw DataError("median heuristic bandwidth is zero (rows are identical)");
    return out;
}

double median_heuristic_rho(const Eigen::MatrixXd& rows, std::uint64_t seed, std::size_t max_rows) {
    return median_heuristic(rows, seed, max_rows).rho;
}

void KernelModel::standardize_training(const Eigen::MatrixXd& features) {
    if (features.rows() < 2) throw DataError("kernel model needs at least 2 rows");
    center_ = features.colwise().mean().transpose();
    scale_.resize(features.cols());
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
        const double sd = std::sqrt((features.col(c).array() - center_(c)).square().mean());
        if (!(sd > 0.0)) throw DataError("kernel model: feature column " + std::to_string(c) + " has zero variance");
        scale_(c) = sd;
    }
    x_ = (features.rowwise() - center_.transpose()).array().rowwise() / scale_.transpose().array();
}

KernelModel::KernelModel(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, std::uint64_t seed) : y_(y) {
    if (y.size() != features.rows()) throw DataError("kernel model: outcome length mismatch");
    standardize_training(features);
    bandwidth_ = median_heuristic(x_, seed);
}

KernelModel::KernelModel(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, double rho) : y_(y) {
    if (y.size() != features.rows()) throw DataError("kernel model: outcome length mismatch");
    if (!(rho > 0.0)) throw ConfigError("kernel bandwidth must be positive");
    standardize_training(features);
    bandwidth_.rho = rho;
    bandwidth_.rows_used = static_cast<std::size_t>(x_.rows());
}

Eigen::VectorXd KernelModel::standardize(const Eigen::VectorXd& raw) const {
    if (raw.size() != center_.size()) throw DataError("kernel model: feature length mismatch");
    return (raw - center_).cwiseQuotient(scale_);
}

Eigen::VectorXd KernelModel::weights(const Eigen::VectorXd& raw, bool* nearest_fallback) const {
    const Eigen::RowVectorXd q = standardize(raw).transpose();
    const Eigen::VectorXd d2 = (x_.rowwise() - q).rowwise().squaredNorm();
    Eigen::VectorXd w = (-d2.array() / bandwidth_.rho).exp().matrix();
    const double total = w.sum();
    if (nearest_fallback) *nearest_fallback = false;
    if (!(total > 0.0)) {
        Eigen::Index nearest = 0;
        d2.minCoeff(&nearest);
        w.setZero();
        w(nearest) = 1.0;
        if (nearest_fallback) *nearest_fallback = true;
        return w;
    }
    return w / total;
}

double KernelModel::predict(const Eigen::VectorXd& raw, bool* nearest_fallback) const {
    return std::clamp(weights(raw, nearest_fallback).dot(y_), 0.0, 1.0);
}

double GprModel::event_probability(const ExposureProfile& profile, int r) const {
    bool fallback = false;
    const double p = kernel_->predict(feature_row(profile, grid(), r), &fallback);
    if (fallback) fallbacks_->fetch_add(1);
    return p;
}

GprModel fit_gpr(const AugmentedDataset& data, std::uint64_t seed) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(data.rows()));
    for (std::size_t i = 0; i < data.rows(); ++i) y(static_cast<Eigen::Index>(i)) = data.y[i];
    return GprModel(data.grid, std::make_shared<const KernelModel>(data.features, y, seed));
}

}  // namespace mixsurv
