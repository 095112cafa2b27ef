#include "mixsurv/splines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mixsurv {

Eigen::VectorXd bspline_basis(const std::vector<double>& knots, int degree, double x) {
    const int size = static_cast<int>(knots.size()) - degree - 1;
    if (size < 1) throw DataError("too few knots for the spline degree");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
    // Span i with knots[i] <= x < knots[i+1], restricted to the valid range.
    int i = static_cast<int>(std::upper_bound(knots.begin(), knots.end(), x) - knots.begin()) - 1;
    i = std::clamp(i, degree, size - 1);
    std::vector<double> N(static_cast<std::size_t>(degree + 1), 0.0), left(N.size()), right(N.size());
    N[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[static_cast<std::size_t>(j)] = x - knots[static_cast<std::size_t>(i + 1 - j)];
        right[static_cast<std::size_t>(j)] = knots[static_cast<std::size_t>(i + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            const double temp = N[static_cast<std::size_t>(r)] / denom;
            N[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        N[static_cast<std::size_t>(j)] = saved;
    }
    for (int r = 0; r <= degree; ++r) out(i - degree + r) = N[static_cast<std::size_t>(r)];
    return out;
}

std::vector<double> uniform_knots(double lo, double hi, int size, int degree) {
    if (!(hi > lo)) throw DataError("spline variable has no spread");
    const int intervals = size - degree;
    if (intervals < 1) throw ConfigError("spline basis size must exceed the degree");
    const double h = (hi - lo) / intervals;
    std::vector<double> knots(static_cast<std::size_t>(size + degree + 1));
    for (std::size_t k = 0; k < knots.size(); ++k) knots[k] = lo + (static_cast<double>(k) - degree) * h;
    return knots;
}

Eigen::MatrixXd difference_matrix(int size, int order) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(size, size);
    for (int o = 0; o < order; ++o) {
        const Eigen::MatrixXd next = D.bottomRows(D.rows() - 1) - D.topRows(D.rows() - 1);
        D = next;
    }
    return D;
}

void SplineBasisSpec::validate() const {
    if (main_basis_size != 0 && main_basis_size < penalty_order + 1) {
        throw ConfigError("main spline basis size must be at least penalty order + 1");
    }
    if (main_basis_size != 0 && main_basis_size <= degree) throw ConfigError("main spline basis size must exceed degree");
    if (interactions && (tensor_marginal_size < penalty_order + 1 || tensor_marginal_size <= degree)) {
        throw ConfigError("tensor marginal size too small for the degree / penalty order");
    }
    if (tau_grid.empty() && !fixed_tau) throw ConfigError("tau grid is empty");
    if (cv_folds < 2) throw ConfigError("spline CV needs at least 2 folds");
}

MarginalSmooth MarginalSmooth::build(const Eigen::VectorXd& x, int size, int degree, int order) {
    MarginalSmooth s;
    s.degree = degree;
    s.lo = x.minCoeff();
    s.hi = x.maxCoeff();
    s.knots = uniform_knots(s.lo, s.hi, size, degree);
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(size);
    for (Eigen::Index i = 0; i < x.size(); ++i) colsum += bspline_basis(s.knots, degree, x(i));
    // Null space of the sum-to-zero constraint.
    const Eigen::MatrixXd constraint = colsum;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(constraint);
    const Eigen::MatrixXd Q = qr.householderQ();
    s.Z = Q.rightCols(size - 1);
    const Eigen::MatrixXd D = difference_matrix(size, order);
    s.penalty = s.Z.transpose() * D.transpose() * D * s.Z;
    return s;
}

Eigen::RowVectorXd MarginalSmooth::eval(double x) const {
    const double xc = std::clamp(x, lo, hi);
    return (bspline_basis(knots, degree, xc).transpose() * Z);
}

namespace {

Eigen::RowVectorXd kron_row(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    Eigen::RowVectorXd out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
    return out;
}

}  // namespace

SplineCoxDesign::SplineCoxDesign(const Dataset& data, const SplineBasisSpec& spec)
    : num_metals_(data.num_metals()), num_confounders_(data.num_confounders()) {
    spec.validate();
    const auto& M = data.metals();
    const auto& mnames = data.metal_names();
    std::vector<Eigen::MatrixXd> penalties;
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < num_metals_; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (spec.main_basis_size == 0) {
            main_.emplace_back(std::nullopt);
            blocks_.push_back({mnames[j], col, 1, static_cast<int>(j), -1});
            names_.push_back(mnames[j]);
            penalties.push_back(Eigen::MatrixXd::Zero(1, 1));
            ++col;
            continue;
        }
        main_.emplace_back(MarginalSmooth::build(M.col(jj), spec.main_basis_size, spec.degree, spec.penalty_order));
        const auto k = main_.back()->columns();
        blocks_.push_back({"s(" + mnames[j] + ")", col, k, static_cast<int>(j), -1});
        for (Eigen::Index b = 0; b < k; ++b) names_.push_back("s(" + mnames[j] + ")." + std::to_string(b + 1));
        penalties.push_back(main_.back()->penalty);
        col += k;
    }
    if (spec.interactions) {
        for (std::size_t a = 0; a < num_metals_; ++a) {
            for (std::size_t b = a + 1; b < num_metals_; ++b) {
                Tensor t{a, b,
                         MarginalSmooth::build(M.col(static_cast<Eigen::Index>(a)), spec.tensor_marginal_size,
                                               spec.degree, spec.penalty_order),
                         MarginalSmooth::build(M.col(static_cast<Eigen::Index>(b)), spec.tensor_marginal_size,
                                               spec.degree, spec.penalty_order)};
                const Eigen::Index ka = t.ma.columns(), kb = t.mb.columns();
                const std::string name = "ti(" + mnames[a] + "," + mnames[b] + ")";
                blocks_.push_back({name, col, ka * kb, static_cast<int>(a), static_cast<int>(b)});
                for (Eigen::Index c = 0; c < ka * kb; ++c) names_.push_back(name + "." + std::to_string(c + 1));
                penalties.push_back(kron(t.ma.penalty, Eigen::MatrixXd::Identity(kb, kb)) +
                                    kron(Eigen::MatrixXd::Identity(ka, ka), t.mb.penalty));
                tensors_.push_back(std::move(t));
                col += ka * kb;
            }
        }
    }
    for (const auto& c : data.confounder_names()) names_.push_back(c);
    const Eigen::Index p = col + static_cast<Eigen::Index>(num_confounders_);
    penalty_ = Eigen::MatrixXd::Zero(p, p);

    // Scale each block penalty to its design block so one multiplier suits all terms.
    const Eigen::MatrixXd X = matrix(data);
    const double n = static_cast<double>(data.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const auto& blk = blocks_[b];
        const double snorm = penalties[b].norm();
        if (snorm == 0.0) continue;
        const Eigen::MatrixXd Xb = X.middleCols(blk.start, blk.size);
        const Eigen::MatrixXd centered = Xb.rowwise() - Xb.colwise().mean();
        const double xnorm = (centered.transpose() * centered).norm() / n;
        penalty_.block(blk.start, blk.start, blk.size, blk.size) = penalties[b] * (xnorm / snorm);
    }
}

std::vector<bool> SplineCoxDesign::penalized() const {
    std::vector<bool> out(columns(), true);
    std::fill(out.end() - static_cast<std::ptrdiff_t>(num_confounders_), out.end(), false);
    return out;
}

void SplineCoxDesign::fill_row(std::span<const double> metals, std::span<const double> confounders,
                               DesignRow out) const {
    if (metals.size() != num_metals_ || confounders.size() != num_confounders_) {
        throw DataError("profile dimension does not match the spline design");
    }
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < num_metals_; ++j) {
        if (!main_[j]) {
            out(col++) = metals[j];
            continue;
        }
        const Eigen::RowVectorXd e = main_[j]->eval(metals[j]);
        out.segment(col, e.size()) = e;
        col += e.size();
    }
    for (const auto& t : tensors_) {
        const Eigen::RowVectorXd e = kron_row(t.ma.eval(metals[t.a]), t.mb.eval(metals[t.b]));
        out.segment(col, e.size()) = e;
        col += e.size();
    }
    for (double c : confounders) out(col++) = c;
}

namespace {

// Spline coefficients live on the basis scale, so the divergence guard is
// looser than for plain Cox coefficients.
NewtonOptions spline_newton() {
    NewtonOptions o;
    o.max_coef_norm = 1e3;
    return o;
}

}  // namespace

PsplineCvResult cv_pspline_tau(const Dataset& data, const std::shared_ptr<const SplineCoxDesign>& design,
                               const SplineBasisSpec& spec) {
    spec.validate();
    require_events(data);
    const Eigen::MatrixXd X = design->matrix(data);
    const PartialLikelihood full(X, data.times(), data.events());
    Rng fold_rng = make_stream(spec.seed, {0x5B11E5ULL});
    const auto fold = assign_folds(data.size(), spec.cv_folds, fold_rng);

    PsplineCvResult res;
    res.tau = spec.tau_grid;
    std::sort(res.tau.begin(), res.tau.end(), std::greater<>());
    res.score.assign(res.tau.size(), 0.0);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const NewtonOptions opts = spline_newton();

    for (int f = 0; f < spec.cv_folds; ++f) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold[i] != f) rows.push_back(static_cast<Eigen::Index>(i));
        }
        Eigen::MatrixXd Xt(static_cast<Eigen::Index>(rows.size()), X.cols());
        Eigen::VectorXd tt(Xt.rows());
        std::vector<int> et(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            Xt.row(static_cast<Eigen::Index>(k)) = X.row(rows[k]);
            tt(static_cast<Eigen::Index>(k)) = data.times()(rows[k]);
            et[k] = data.events()[static_cast<std::size_t>(rows[k])];
        }
        const PartialLikelihood train(Xt, tt, et);
        if (train.events() == 0) continue;
        Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
        for (std::size_t g = 0; g < res.tau.size(); ++g) {
            if (res.score[g] == neg_inf) continue;
            try {
                const auto nr = newton_cox(train, res.tau[g] * design->penalty(), warm, opts);
                warm = nr.beta;
                res.score[g] += full.loglik(nr.beta) - train.loglik(nr.beta);
            } catch (const FitError&) {
                res.score[g] = neg_inf;
                warm.setZero();
            }
        }
    }
    std::size_t best = res.tau.size();
    for (std::size_t g = 0; g < res.tau.size(); ++g) {
        if (res.score[g] == neg_inf) continue;
        // Strict comparison keeps the smoother fit on ties (grid is descending).
        if (best == res.tau.size() || res.score[g] > res.score[best]) best = g;
    }
    if (best == res.tau.size()) throw FitError("penalized Cox fit failed for every smoothing value");
    res.best_tau = res.tau[best];
    return res;
}

CoxFit fit_cox_psplines_at(const Dataset& data, std::shared_ptr<const SplineCoxDesign> design, double tau) {
    require_events(data);
    if (!(tau >= 0.0)) throw ConfigError("smoothing multiplier must be non-negative");
    const Eigen::MatrixXd X = design->matrix(data);
    const PartialLikelihood pl(X, data.times(), data.events());
    const NewtonResult nr = newton_cox(pl, tau * design->penalty(), Eigen::VectorXd::Zero(X.cols()), spline_newton());
    CoxFit fit;
    fit.coef = nr.beta;
    fit.information = nr.information;
    fit.loglik = nr.loglik;
    fit.iterations = nr.iterations;
    fit.max_score = nr.max_score;
    fit.trace = nr.trace;
    const auto b = pl.breslow(fit.coef);
    fit.baseline = {b.times, b.cumhaz, b.offset};
    fit.design = std::move(design);
    fit.kind = "cox_ps";
    fit.extra = {{"tau", tau}};
    return fit;
}

CoxFit fit_cox_psplines(const Dataset& data, const SplineBasisSpec& spec) {
    auto design = std::make_shared<const SplineCoxDesign>(data, spec);
    if (spec.fixed_tau) return fit_cox_psplines_at(data, design, *spec.fixed_tau);
    const PsplineCvResult cv = cv_pspline_tau(data, design, spec);
    CoxFit fit = fit_cox_psplines_at(data, design, cv.best_tau);
    fit.extra["cv_tau"] = cv.tau;
    std::vector<double> scores;
    for (double s : cv.score) scores.push_back(std::isfinite(s) ? s : -1e300);
    fit.extra["cv_score"] = scores;
    return fit;
}

}  // namespace mixsurv
