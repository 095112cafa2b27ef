#include "mixsurv/cox_en.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace mixsurv {

void CoxEnOptions::validate() const {
    if (omega_grid.empty()) throw ConfigError("elastic net omega grid is empty");
    for (double w : omega_grid) {
        if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("elastic net omega values must lie in [0,1]");
    }
    if (path_length < 2) throw ConfigError("elastic net path needs at least 2 kappa values");
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw ConfigError("kappa ratio must be in (0,1)");
    if (folds < 2) throw ConfigError("elastic net CV needs at least 2 folds");
}

namespace {

Eigen::MatrixXd standardize(const Eigen::MatrixXd& X, Eigen::VectorXd& scale) {
    const Eigen::RowVectorXd mu = X.colwise().mean();
    Eigen::MatrixXd Xs = X.rowwise() - mu;
    scale = (Xs.colwise().squaredNorm() / static_cast<double>(X.rows())).cwiseSqrt().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j) {
        if (!(scale(j) > 0.0)) throw FitError("elastic net: column " + std::to_string(j + 1) + " has zero variance");
        Xs.col(j) /= scale(j);
    }
    return Xs;
}

double soft_threshold(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

}  // namespace

CoxEnSolver::CoxEnSolver(const Eigen::MatrixXd& X, const Eigen::VectorXd& time, const std::vector<int>& event,
                         std::vector<bool> penalized, double tolerance)
    : pl_([&] {
          Eigen::VectorXd s;
          return PartialLikelihood(standardize(X, s), time, event);
      }()),
      penalized_(std::move(penalized)),
      tolerance_(tolerance) {
    standardize(X, scale_);
    if (penalized_.size() != static_cast<std::size_t>(X.cols())) throw DataError("penalty mask has wrong size");
    if (pl_.events() == 0) throw DataError("dataset has no events; a Cox fit needs at least one");
    // A huge kappa pins every penalized coordinate at zero.
    null_ = solve(1.0, 1e300, Eigen::VectorXd::Zero(X.cols()));
}

std::vector<double> kappa_sequence(double kappa_max, int length, double min_ratio) {
    std::vector<double> k(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
        k[static_cast<std::size_t>(i)] = kappa_max * std::pow(min_ratio, static_cast<double>(i) / (length - 1));
    }
    return k;
}

double CoxEnSolver::kappa_max(double omega) const {
    Eigen::VectorXd grad, w;
    pl_.eta_derivatives(pl_.X() * null_, grad, w);
    const Eigen::VectorXd g = pl_.X().transpose() * grad / static_cast<double>(pl_.size());
    double gmax = 0.0;
    for (std::size_t j = 0; j < penalized_.size(); ++j) {
        if (penalized_[j]) gmax = std::max(gmax, std::abs(g(static_cast<Eigen::Index>(j))));
    }
    if (gmax == 0.0) return 1.0;
    return gmax / std::max(omega, 1e-3) * (1.0 + 1e-10);
}

double CoxEnSolver::objective(double omega, double kappa, const Eigen::VectorXd& b) const {
    double pen = 0.0;
    for (std::size_t j = 0; j < penalized_.size(); ++j) {
        if (!penalized_[j]) continue;
        const double v = b(static_cast<Eigen::Index>(j));
        pen += omega * std::abs(v) + 0.5 * (1.0 - omega) * v * v;
    }
    return -pl_.loglik_eta(pl_.X() * b) / static_cast<double>(pl_.size()) + (pen == 0.0 ? 0.0 : kappa * pen);
}

Eigen::VectorXd CoxEnSolver::solve(double omega, double kappa, Eigen::VectorXd b, std::vector<double>* trace,
                                   int max_outer, int max_sweeps) const {
    const Eigen::MatrixXd& X = pl_.X();
    const auto n = X.rows();
    const auto p = X.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double l1 = kappa * omega;
    const double l2 = kappa * (1.0 - omega);
    Eigen::VectorXd score, v(p);
    Eigen::MatrixXd info;
    double f_old = objective(omega, kappa, b);
    for (int outer = 0; outer < max_outer; ++outer) {
        // Quadratic model with the exact information. The diagonal eta-space
        // approximation crawls when one coefficient is near separation.
        pl_.derivatives(b, score, info);
        // Covariance updates: q tracks score/n - G (bn - b) as coordinates
        // move, so each update costs O(p).
        const Eigen::MatrixXd G = inv_n * info;
        Eigen::VectorXd q = inv_n * score;
        v = G.diagonal();

        Eigen::VectorXd bn = b;
        auto update = [&](Eigen::Index j) {
            if (v(j) == 0.0) return 0.0;
            const double num = q(j) + v(j) * bn(j);
            const double next = penalized_[static_cast<std::size_t>(j)] ? soft_threshold(num, l1) / (v(j) + l2)
                                                                         : num / v(j);
            const double d = next - bn(j);
            if (d != 0.0) {
                q -= d * G.col(j);
                bn(j) = next;
            }
            return std::abs(d);
        };
        // Full sweeps, with inner passes restricted to the active set.
        int sweeps = 0;
        for (;;) {
            double change = 0.0;
            for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, update(j));
            if (++sweeps > max_sweeps) throw FitError("elastic net coordinate descent exceeded the sweep limit");
            if (change < tolerance_) break;
            for (;;) {
                double active_change = 0.0;
                for (Eigen::Index j = 0; j < p; ++j) {
                    if (bn(j) != 0.0) active_change = std::max(active_change, update(j));
                }
                if (++sweeps > max_sweeps) throw FitError("elastic net coordinate descent exceeded the sweep limit");
                if (active_change < tolerance_) break;
            }
        }
        // Backtrack along the proposal so the true objective never increases.
        Eigen::VectorXd step = bn - b;
        double f_new = objective(omega, kappa, b + step);
        for (int h = 0; h < 40 && f_new > f_old; ++h) {
            step *= 0.5;
            f_new = objective(omega, kappa, b + step);
        }
        if (f_new > f_old) {
            step.setZero();
            f_new = f_old;
        }
        b += step;
        f_old = f_new;
        if (trace) trace->push_back(f_new);
        if (!b.allFinite()) throw FitError("elastic net produced non-finite coefficients");
        if (step.cwiseAbs().maxCoeff() < tolerance_) return b;
    }
    throw FitError("elastic net outer iterations did not converge");
}

Eigen::VectorXd CoxEnSolver::to_original(const Eigen::VectorXd& b) const { return b.cwiseQuotient(scale_); }

Eigen::VectorXd CoxEnSolver::to_standardized(const Eigen::VectorXd& beta) const { return beta.cwiseProduct(scale_); }

namespace {

struct PathRun {
    std::vector<Eigen::VectorXd> coef;  // original scale; empty vector marks a failed point
};

PathRun run_path(const CoxEnSolver& solver, double omega, const std::vector<double>& kappa, const CoxEnOptions& o) {
    PathRun out;
    Eigen::VectorXd b = solver.null_fit();
    for (double k : kappa) {
        try {
            b = solver.solve(omega, k, b, nullptr, o.max_outer, o.max_sweeps);
            out.coef.push_back(solver.to_original(b));
        } catch (const FitError&) {
            out.coef.emplace_back();
            b = solver.null_fit();
        }
    }
    return out;
}

CoxFit en_fit(std::shared_ptr<const LinearCoxDesign> design, const Eigen::MatrixXd& X, const Dataset& data,
              const Eigen::VectorXd& coef, bool interactions) {
    PartialLikelihood pl(X, data.times(), data.events());
    CoxFit fit;
    fit.design = std::move(design);
    fit.coef = coef;
    Eigen::VectorXd score;
    fit.loglik = pl.derivatives(fit.coef, score, fit.information);
    fit.max_score = score.cwiseAbs().maxCoeff();
    const auto b = pl.breslow(fit.coef);
    fit.baseline = {b.times, b.cumhaz, b.offset};
    fit.kind = interactions ? "coxen_int" : "coxen";
    return fit;
}

}  // namespace

ElasticNetPath fit_cox_en_path(const Dataset& data, double omega, const CoxEnOptions& options) {
    options.validate();
    require_events(data);
    const auto design = LinearCoxDesign::for_dataset(data, options.include_interactions);
    const CoxEnSolver solver(design->matrix(data), data.times(), data.events(), design->penalized(), options.tolerance);
    ElasticNetPath path;
    path.omega = omega;
    path.kappa = kappa_sequence(solver.kappa_max(omega), options.path_length, options.min_ratio);
    const PathRun run = run_path(solver, omega, path.kappa, options);
    path.coef.resize(static_cast<Eigen::Index>(solver.dim()), static_cast<Eigen::Index>(path.kappa.size()));
    for (std::size_t k = 0; k < run.coef.size(); ++k) {
        if (run.coef[k].size() == 0) throw FitError("elastic net failed on the full data at kappa " + std::to_string(path.kappa[k]));
        path.coef.col(static_cast<Eigen::Index>(k)) = run.coef[k];
    }
    return path;
}

std::size_t cv_select(const Dataset& data, const CoxEnOptions& options, std::vector<ElasticNetPath>& paths,
                      std::size_t& best_path, std::size_t& best_index) {
    const auto design = LinearCoxDesign::for_dataset(data, options.include_interactions);
    const Eigen::MatrixXd X = design->matrix(data);
    const PartialLikelihood full(X, data.times(), data.events());
    Rng fold_rng = make_stream(options.seed, {0xC0E4ULL});
    const auto fold = assign_folds(data.size(), options.folds, fold_rng);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (auto& p : paths) p.cv_score.assign(p.kappa.size(), 0.0);

    std::size_t used = 0, dropped = 0;
    for (int f = 0; f < options.folds; ++f) {
        std::vector<Eigen::Index> rows;
        std::size_t held_out_events = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold[i] != f) {
                rows.push_back(static_cast<Eigen::Index>(i));
            } else {
                held_out_events += static_cast<std::size_t>(data.events()[i]);
            }
        }
        Eigen::MatrixXd Xt(static_cast<Eigen::Index>(rows.size()), X.cols());
        Eigen::VectorXd tt(Xt.rows());
        std::vector<int> et(rows.size());
        std::size_t train_events = 0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            Xt.row(static_cast<Eigen::Index>(k)) = X.row(rows[k]);
            tt(static_cast<Eigen::Index>(k)) = data.times()(rows[k]);
            et[k] = data.events()[static_cast<std::size_t>(rows[k])];
            train_events += static_cast<std::size_t>(et[k]);
        }
        if (held_out_events == 0 || train_events == 0) {
            ++dropped;
            continue;
        }
        std::optional<CoxEnSolver> solver;
        try {
            solver.emplace(Xt, tt, et, design->penalized(), options.tolerance);
        } catch (const FitError&) {
            ++dropped;
            continue;
        }
        ++used;
        const PartialLikelihood train(Xt, tt, et);
        for (auto& path : paths) {
            const PathRun run = run_path(*solver, path.omega, path.kappa, options);
            for (std::size_t k = 0; k < run.coef.size(); ++k) {
                if (run.coef[k].size() == 0) {
                    path.cv_score[k] = neg_inf;
                } else if (path.cv_score[k] != neg_inf) {
                    path.cv_score[k] += full.loglik(run.coef[k]) - train.loglik(run.coef[k]);
                }
            }
        }
    }
    if (used == 0) throw FitError("elastic net CV: every fold is degenerate");

    bool found = false;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t k = 0; k < paths[p].kappa.size(); ++k) {
            const double s = paths[p].cv_score[k];
            if (s == neg_inf) continue;
            if (!found || s > paths[best_path].cv_score[best_index]) {
                best_path = p;
                best_index = k;
                found = true;
            }
        }
    }
    if (!found) throw FitError("elastic net CV: no grid point could be fitted");
    return dropped;
}

CoxEnResult fit_cox_en(const Dataset& data, const CoxEnOptions& options) {
    options.validate();
    require_events(data);
    const auto design = LinearCoxDesign::for_dataset(data, options.include_interactions);
    const Eigen::MatrixXd X = design->matrix(data);
    const CoxEnSolver solver(X, data.times(), data.events(), design->penalized(), options.tolerance);

    CoxEnResult res;
    res.term_names = design->names();
    for (double omega : options.omega_grid) {
        ElasticNetPath path;
        path.omega = omega;
        path.kappa = kappa_sequence(solver.kappa_max(omega), options.path_length, options.min_ratio);
        const PathRun run = run_path(solver, omega, path.kappa, options);
        path.coef.resize(X.cols(), static_cast<Eigen::Index>(path.kappa.size()));
        for (std::size_t k = 0; k < run.coef.size(); ++k) {
            if (run.coef[k].size() == 0) {
                throw FitError("elastic net failed on the full data (omega " + std::to_string(omega) + ")");
            }
            path.coef.col(static_cast<Eigen::Index>(k)) = run.coef[k];
        }
        res.paths.push_back(std::move(path));
    }
    res.dropped_folds = cv_select(data, options, res.paths, res.best_path, res.best_index);
    const auto& best = res.paths[res.best_path];
    res.omega_star = best.omega;
    res.kappa_star = best.kappa[res.best_index];

    res.fit = en_fit(design, X, data, best.coef.col(static_cast<Eigen::Index>(res.best_index)),
                     options.include_interactions);
    res.fit.extra = {{"omega", res.omega_star},
                     {"kappa", res.kappa_star},
                     {"kappa_index", res.best_index},
                     {"dropped_folds", res.dropped_folds}};
    return res;
}

CoxFit fit_cox_en_at(const Dataset& data, double omega, double kappa, const CoxEnOptions& options) {
    options.validate();
    require_events(data);
    if (!(kappa > 0.0) || omega < 0.0 || omega > 1.0) throw ConfigError("elastic net needs kappa > 0 and omega in [0,1]");
    const auto design = LinearCoxDesign::for_dataset(data, options.include_interactions);
    const Eigen::MatrixXd X = design->matrix(data);
    const CoxEnSolver solver(X, data.times(), data.events(), design->penalized(), options.tolerance);
    // Warm-started descent from this data's kappa_max to the requested kappa.
    const double kmax = solver.kappa_max(omega);
    std::vector<double> kappas;
    if (kappa < kmax) {
        const int steps = std::max(2, options.path_length / 5);
        for (int k = 0; k < steps; ++k) kappas.push_back(kmax * std::pow(kappa / kmax, static_cast<double>(k) / (steps - 1)));
    } else {
        kappas.push_back(kappa);
    }
    Eigen::VectorXd b = solver.null_fit();
    for (double k : kappas) b = solver.solve(omega, k, b, nullptr, options.max_outer, options.max_sweeps);
    CoxFit fit = en_fit(design, X, data, solver.to_original(b), options.include_interactions);
    fit.extra = {{"omega", omega}, {"kappa", kappa}};
    return fit;
}

void write_path_csv(const CoxEnResult& result, std::ostream& out) {
    out << "omega,kappa,term,coefficient,cv_score\n";
    for (const auto& path : result.paths) {
        for (std::size_t k = 0; k < path.kappa.size(); ++k) {
            const std::string cv = path.cv_score.empty() ? "" : format_double(path.cv_score[k]);
            for (std::size_t t = 0; t < result.term_names.size(); ++t) {
                out << format_double(path.omega) << ',' << format_double(path.kappa[k]) << ','
                    << result.term_names[t] << ','
                    << format_double(path.coef(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k))) << ','
                    << cv << '\n';
            }
        }
    }
}

}  // namespace mixsurv
