#include "mixsurv/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mixsurv {

Eigen::MatrixXd CoxDesign::matrix(const Dataset& data) const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(columns()));
    std::vector<double> m(data.num_metals()), c(data.num_confounders());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) m[j] = data.metals()(i, static_cast<Eigen::Index>(j));
        for (std::size_t l = 0; l < c.size(); ++l) c[l] = data.confounders()(i, static_cast<Eigen::Index>(l));
        fill_row(m, c, X.row(i));
    }
    return X;
}

Eigen::RowVectorXd CoxDesign::row(const ExposureProfile& profile) const {
    Eigen::RowVectorXd r(static_cast<Eigen::Index>(columns()));
    fill_row(profile.metals, profile.confounders, r);
    return r;
}

LinearCoxDesign::LinearCoxDesign(std::vector<std::string> metal_names, std::vector<std::string> confounder_names,
                                 bool interactions)
    : metals_(std::move(metal_names)), confounders_(std::move(confounder_names)), interactions_(interactions) {}

std::shared_ptr<const LinearCoxDesign> LinearCoxDesign::for_dataset(const Dataset& data, bool interactions) {
    return std::make_shared<const LinearCoxDesign>(data.metal_names(), data.confounder_names(), interactions);
}

std::size_t LinearCoxDesign::columns() const {
    const std::size_t J = metals_.size();
    return J + (interactions_ ? J * (J - 1) / 2 : 0) + confounders_.size();
}

std::vector<std::string> LinearCoxDesign::names() const {
    std::vector<std::string> out = metals_;
    if (interactions_) {
        for (std::size_t j = 0; j < metals_.size(); ++j) {
            for (std::size_t k = j + 1; k < metals_.size(); ++k) out.push_back(metals_[j] + ":" + metals_[k]);
        }
    }
    out.insert(out.end(), confounders_.begin(), confounders_.end());
    return out;
}

std::vector<bool> LinearCoxDesign::penalized() const {
    std::vector<bool> out(columns(), true);
    std::fill(out.end() - static_cast<std::ptrdiff_t>(confounders_.size()), out.end(), false);
    return out;
}

void LinearCoxDesign::fill_row(std::span<const double> metals, std::span<const double> confounders,
                               DesignRow out) const {
    if (metals.size() != metals_.size() || confounders.size() != confounders_.size()) {
        throw DataError("profile dimension does not match the Cox design");
    }
    Eigen::Index c = 0;
    for (double m : metals) out(c++) = m;
    if (interactions_) {
        for (std::size_t j = 0; j < metals.size(); ++j) {
            for (std::size_t k = j + 1; k < metals.size(); ++k) out(c++) = metals[j] * metals[k];
        }
    }
    for (double v : confounders) out(c++) = v;
}

int LinearCoxDesign::product_column(std::size_t j, std::size_t k) const {
    if (!interactions_ || j == k) return -1;
    if (j > k) std::swap(j, k);
    const std::size_t J = metals_.size();
    // Offset of pair (j, k) in row-major upper-triangle order.
    const std::size_t before = j * J - j * (j + 1) / 2;
    return static_cast<int>(J + before + (k - j - 1));
}

PartialLikelihood::PartialLikelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                                     const std::vector<int>& event) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (static_cast<std::size_t>(time.size()) != n || event.size() != n) {
        throw DataError("partial likelihood: design, time and event sizes differ");
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return time(a) < time(b); });
    x_.resize(X.rows(), X.cols());
    time_.resize(time.size());
    delta_.resize(time.size());
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(order_[k]);
        x_.row(static_cast<Eigen::Index>(k)) = X.row(src);
        time_(static_cast<Eigen::Index>(k)) = time(src);
        delta_(static_cast<Eigen::Index>(k)) = event[order_[k]] ? 1.0 : 0.0;
        events_total_ += event[order_[k]] ? 1 : 0;
    }
    group_of_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || time_(static_cast<Eigen::Index>(k)) != time_(static_cast<Eigen::Index>(k - 1))) {
            group_start_.push_back(k);
            group_events_.push_back(0.0);
        }
        group_of_[k] = group_start_.size() - 1;
        group_events_.back() += delta_(static_cast<Eigen::Index>(k));
    }
    group_start_.push_back(n);
}

double PartialLikelihood::risk_sums(const Eigen::VectorXd& eta, double shift, std::vector<double>& s0,
                                    Eigen::VectorXd& theta) const {
    const std::size_t G = group_events_.size();
    theta = (eta.array() - shift).exp().matrix();
    s0.assign(G, 0.0);
    double acc = 0.0;
    double ll = delta_.dot(eta);
    for (std::size_t g = G; g-- > 0;) {
        for (std::size_t k = group_start_[g]; k < group_start_[g + 1]; ++k) acc += theta(static_cast<Eigen::Index>(k));
        s0[g] = acc;
        if (group_events_[g] > 0.0) ll -= group_events_[g] * (std::log(acc) + shift);
    }
    return ll;
}

double PartialLikelihood::loglik_eta(const Eigen::VectorXd& eta) const {
    std::vector<double> s0;
    Eigen::VectorXd theta;
    return risk_sums(eta, eta.maxCoeff(), s0, theta);
}

double PartialLikelihood::loglik(const Eigen::VectorXd& beta) const {
    return loglik_eta(x_ * beta);
}

double PartialLikelihood::eta_derivatives(const Eigen::VectorXd& eta, Eigen::VectorXd& grad,
                                          Eigen::VectorXd& weight) const {
    std::vector<double> s0;
    Eigen::VectorXd theta;
    const double ll = risk_sums(eta, eta.maxCoeff(), s0, theta);
    const auto n = eta.size();
    grad.resize(n);
    weight.resize(n);
    double a = 0.0, b = 0.0;
    for (std::size_t g = 0; g < group_events_.size(); ++g) {
        if (group_events_[g] > 0.0) {
            a += group_events_[g] / s0[g];
            b += group_events_[g] / (s0[g] * s0[g]);
        }
        for (std::size_t k = group_start_[g]; k < group_start_[g + 1]; ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            grad(i) = delta_(i) - theta(i) * a;
            weight(i) = theta(i) * a - theta(i) * theta(i) * b;
        }
    }
    return ll;
}

double PartialLikelihood::derivatives(const Eigen::VectorXd& beta, Eigen::VectorXd& score,
                                      Eigen::MatrixXd& info) const {
    const Eigen::VectorXd eta = x_ * beta;
    std::vector<double> s0;
    Eigen::VectorXd theta;
    const double ll = risk_sums(eta, eta.maxCoeff(), s0, theta);
    const auto n = x_.rows();
    const auto p = x_.cols();

    // info = X' diag(theta * A) X - sum_g d_g abar_g abar_g'
    Eigen::VectorXd a_weight(n);
    Eigen::VectorXd grad(n);
    std::vector<Eigen::Index> event_groups;
    for (std::size_t g = 0; g < group_events_.size(); ++g) {
        if (group_events_[g] > 0.0) event_groups.push_back(static_cast<Eigen::Index>(g));
    }
    Eigen::MatrixXd abar(p, static_cast<Eigen::Index>(event_groups.size()));
    {
        Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
        Eigen::Index col = static_cast<Eigen::Index>(event_groups.size());
        for (std::size_t g = group_events_.size(); g-- > 0;) {
            for (std::size_t k = group_start_[g]; k < group_start_[g + 1]; ++k) {
                const auto i = static_cast<Eigen::Index>(k);
                s1.noalias() += theta(i) * x_.row(i).transpose();
            }
            if (group_events_[g] > 0.0) abar.col(--col) = std::sqrt(group_events_[g]) * s1 / s0[g];
        }
    }
    double a = 0.0;
    for (std::size_t g = 0; g < group_events_.size(); ++g) {
        if (group_events_[g] > 0.0) a += group_events_[g] / s0[g];
        for (std::size_t k = group_start_[g]; k < group_start_[g + 1]; ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            a_weight(i) = theta(i) * a;
            grad(i) = delta_(i) - theta(i) * a;
        }
    }
    score = x_.transpose() * grad;
    info.noalias() = x_.transpose() * a_weight.asDiagonal() * x_;
    info.noalias() -= abar * abar.transpose();
    return ll;
}

PartialLikelihood::Baseline PartialLikelihood::breslow(const Eigen::VectorXd& beta) const {
    if (events_total_ == 0) throw FitError("Breslow baseline: no events");
    const Eigen::VectorXd eta = x_ * beta;
    Baseline out;
    out.offset = eta.mean();
    std::vector<double> s0;
    Eigen::VectorXd theta;
    risk_sums(eta, out.offset, s0, theta);
    double cum = 0.0;
    for (std::size_t g = 0; g < group_events_.size(); ++g) {
        if (group_events_[g] == 0.0) continue;
        if (!(s0[g] > 0.0)) throw FitError("Breslow baseline: empty risk set");
        cum += group_events_[g] / s0[g];
        out.times.push_back(time_(static_cast<Eigen::Index>(group_start_[g])));
        out.cumhaz.push_back(cum);
    }
    return out;
}

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

NewtonResult newton_cox(const PartialLikelihood& pl, const Eigen::MatrixXd& penalty, Eigen::VectorXd start,
                        const NewtonOptions& options) {
    const auto p = static_cast<Eigen::Index>(pl.dim());
    const bool penalized = penalty.size() > 0;
    if (penalized && (penalty.rows() != p || penalty.cols() != p)) throw DataError("penalty matrix has wrong size");
    if (start.size() != p) start = Eigen::VectorXd::Zero(p);

    NewtonResult r;
    r.beta = std::move(start);
    Eigen::VectorXd score;
    Eigen::MatrixXd info;
    auto evaluate = [&](const Eigen::VectorXd& b, Eigen::VectorXd& s, Eigen::MatrixXd& h, double& ll) {
        ll = pl.derivatives(b, s, h);
        double obj = ll;
        if (penalized) {
            const Eigen::VectorXd pb = penalty * b;
            s -= pb;
            h += penalty;
            obj -= 0.5 * b.dot(pb);
        }
        return obj;
    };
    double ll = 0.0;
    double obj = evaluate(r.beta, score, info, ll);
    r.trace.push_back(obj);

    for (int it = 1; it <= options.max_iterations; ++it) {
        r.iterations = it;
        if (max_abs(score) < options.score_tol) break;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
            throw FitError(penalized ? "singular penalized information matrix" : "singular information matrix");
        }
        Eigen::VectorXd step = ldlt.solve(score);
        if (!step.allFinite()) throw FitError("non-finite Newton step");

        Eigen::VectorXd cand = r.beta + step;
        Eigen::VectorXd cscore;
        Eigen::MatrixXd cinfo;
        double cll = 0.0;
        double cobj = evaluate(cand, cscore, cinfo, cll);
        int halvings = 0;
        while (!(cobj >= obj - 1e-12 * std::abs(obj)) && halvings < 40) {
            step *= 0.5;
            cand = r.beta + step;
            cobj = evaluate(cand, cscore, cinfo, cll);
            ++halvings;
        }
        const double change = std::abs(cobj - obj) / (std::abs(obj) + 1e-10);
        r.beta = std::move(cand);
        score = std::move(cscore);
        info = std::move(cinfo);
        obj = cobj;
        ll = cll;
        r.trace.push_back(obj);
        if (r.beta.norm() > options.max_coef_norm) {
            std::ostringstream msg;
            msg << "monotone likelihood: ||beta|| = " << r.beta.norm() << " exceeds " << options.max_coef_norm
                << " (coefficients diverge; check for separation)";
            throw FitError(msg.str());
        }
        // The log-likelihood criterion alone can stop with a visible score,
        // so it also needs a small score.
        if (max_abs(score) < options.score_tol || (change < options.rel_loglik_tol && max_abs(score) < 1e-6)) break;
        if (it == options.max_iterations) {
            std::ostringstream msg;
            msg << "Newton-Raphson did not converge in " << options.max_iterations << " iterations; objective trace:";
            for (std::size_t k = r.trace.size() > 6 ? r.trace.size() - 6 : 0; k < r.trace.size(); ++k) {
                msg << ' ' << r.trace[k];
            }
            msg << "; max|score| = " << max_abs(score);
            throw FitError(msg.str());
        }
    }
    r.loglik = ll;
    r.objective = obj;
    r.information = std::move(info);
    r.max_score = max_abs(score);
    return r;
}

double BreslowBaseline::cumulative(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0.0;
    return cumhaz[static_cast<std::size_t>(it - times.begin()) - 1];
}

double BreslowBaseline::hazard(double t) const {
    if (times.empty()) return 0.0;
    constexpr std::size_t half = 5;
    const auto k = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
    const std::size_t hi = std::min(times.size() - 1, k + half);
    const std::size_t lo = k > half ? k - half : 0;
    const double t0 = lo == 0 ? 0.0 : times[lo - 1];
    const double c0 = lo == 0 ? 0.0 : cumhaz[lo - 1];
    if (times[hi] <= t0) return 0.0;
    return (cumhaz[hi] - c0) / (times[hi] - t0);
}

Eigen::VectorXd CoxFit::standard_errors() const {
    const Eigen::MatrixXd inv = information.ldlt().solve(Eigen::MatrixXd::Identity(information.rows(), information.cols()));
    return inv.diagonal().cwiseMax(0.0).cwiseSqrt();
}

void require_events(const Dataset& data) {
    if (data.event_count() == 0) throw DataError("dataset has no events; a Cox fit needs at least one");
}

namespace {

void check_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
    const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centered);
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    if (rank == X.cols()) return;
    std::string cols;
    for (Eigen::Index k = rank; k < X.cols(); ++k) {
        if (!cols.empty()) cols += ", ";
        cols += names[static_cast<std::size_t>(qr.colsPermutation().indices()(k))];
    }
    throw FitError("rank-deficient Cox design (rank " + std::to_string(rank) + " of " + std::to_string(X.cols()) +
                   "); collinear columns: " + cols);
}

}  // namespace

CoxFit fit_cox(const Dataset& data, std::shared_ptr<const CoxDesign> design, const NewtonOptions& options) {
    require_events(data);
    const Eigen::MatrixXd X = design->matrix(data);
    check_rank(X, design->names());
    PartialLikelihood pl(X, data.times(), data.events());
    NewtonResult nr = newton_cox(pl, Eigen::MatrixXd(), Eigen::VectorXd::Zero(X.cols()), options);

    CoxFit fit;
    fit.design = std::move(design);
    fit.coef = nr.beta;
    fit.information = nr.information;
    fit.loglik = nr.loglik;
    fit.iterations = nr.iterations;
    fit.max_score = nr.max_score;
    fit.trace = nr.trace;
    const auto b = pl.breslow(fit.coef);
    fit.baseline = {b.times, b.cumhaz, b.offset};
    return fit;
}

CoxFit fit_cox(const Dataset& data, bool include_interactions) {
    CoxFit fit = fit_cox(data, LinearCoxDesign::for_dataset(data, include_interactions));
    fit.kind = include_interactions ? "cox_int" : "cox";
    return fit;
}

BreslowBaseline breslow_baseline(const CoxFit& fit, const Dataset& data) {
    require_events(data);
    PartialLikelihood pl(fit.design->matrix(data), data.times(), data.events());
    const auto b = pl.breslow(fit.coef);
    return {b.times, b.cumhaz, b.offset};
}

double cox_linear_predictor(const CoxFit& fit, const ExposureProfile& profile) {
    return fit.design->row(profile).dot(fit.coef);
}

double CoxModel::survival(const ExposureProfile& profile, double t) const {
    if (t <= 0.0) return 1.0;
    const double eta = cox_linear_predictor(fit_, profile);
    return std::exp(-fit_.baseline.cumulative(t) * std::exp(eta - fit_.baseline.offset));
}

double CoxModel::hazard(const ExposureProfile& profile, double t) const {
    const double eta = cox_linear_predictor(fit_, profile);
    return fit_.baseline.hazard(t) * std::exp(eta - fit_.baseline.offset);
}

std::optional<double> CoxModel::log_hazard_ratio(const ExposureProfile& a, const ExposureProfile& b) const {
    return (fit_.design->row(a) - fit_.design->row(b)).dot(fit_.coef);
}

nlohmann::json fit_summary(const CoxFit& fit) {
    nlohmann::json terms = nlohmann::json::array();
    const auto names = fit.design->names();
    const Eigen::VectorXd se = fit.standard_errors();
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        terms.push_back({{"term", names[k]}, {"coefficient", fit.coef(i)}, {"se", se(i)}});
    }
    nlohmann::json j = {{"kind", fit.kind},
                        {"terms", terms},
                        {"loglik", fit.loglik},
                        {"iterations", fit.iterations},
                        {"max_abs_score", fit.max_score},
                        {"baseline", "breslow"},
                        {"ties", "breslow"}};
    if (!fit.extra.is_null()) j["diagnostics"] = fit.extra;
    return j;
}

}  // namespace mixsurv
