#include "mixsurv/mars.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace mixsurv {

double HingeTerm::eval(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (linear_column >= 0) return x(linear_column);
    double v = 1.0;
    for (const auto& f : factors) {
        v *= std::max(0.0, f.direction * (x(static_cast<Eigen::Index>(f.column)) - f.knot));
        if (v == 0.0) break;
    }
    return v;
}

double HingeBasis::linear_predictor(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double eta = intercept;
    for (const auto& t : terms) eta += t.coef * t.eval(x);
    return eta;
}

std::string HingeBasis::dump() const {
    std::ostringstream out;
    out << format_double(intercept) << "  (intercept)\n";
    for (const auto& t : terms) {
        out << format_double(t.coef);
        if (t.linear_column >= 0) {
            out << " * " << feature_names.at(static_cast<std::size_t>(t.linear_column));
        }
        for (const auto& f : t.factors) {
            const auto& name = feature_names.at(f.column);
            if (f.direction > 0) {
                out << " * h(" << name << " - " << format_double(f.knot) << ")";
            } else {
                out << " * h(" << format_double(f.knot) << " - " << name << ")";
            }
        }
        out << '\n';
    }
    if (ridge_fallback) out << "# ridge fallback used for the final fit\n";
    return out.str();
}

namespace {

double log1pexp(double e) { return e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e)); }

double sigmoid(double e) {
    if (e >= 0.0) return 1.0 / (1.0 + std::exp(-e));
    const double z = std::exp(e);
    return z / (1.0 + z);
}

double logistic_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - log1pexp(eta(i));
    return ll;
}

}  // namespace

Eigen::VectorXd logistic_irls(const Eigen::MatrixXd& B, const Eigen::VectorXd& y, double ridge, double max_norm,
                              Eigen::VectorXd start) {
    const auto M = B.cols();
    Eigen::VectorXd beta = start.size() == M ? std::move(start) : Eigen::VectorXd::Zero(M);
    Eigen::VectorXd pen = Eigen::VectorXd::Constant(M, ridge);
    if (M > 0) pen(0) = 0.0;
    auto objective = [&](const Eigen::VectorXd& b) {
        return logistic_loglik(B * b, y) - 0.5 * b.cwiseAbs2().dot(pen);
    };
    double obj = objective(beta);
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd eta = B * beta;
        Eigen::VectorXd mu(eta.size()), w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            mu(i) = sigmoid(eta(i));
            w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-12);
        }
        const Eigen::VectorXd grad = B.transpose() * (y - mu) - pen.cwiseProduct(beta);
        Eigen::MatrixXd H = B.transpose() * w.asDiagonal() * B;
        H.diagonal() += pen;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        Eigen::VectorXd step = ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) throw FitError("logistic IRLS: singular system");
        Eigen::VectorXd cand = beta + step;
        double cobj = objective(cand);
        for (int h = 0; h < 30 && !(cobj >= obj - 1e-12 * std::abs(obj)); ++h) {
            step *= 0.5;
            cand = beta + step;
            cobj = objective(cand);
        }
        beta = std::move(cand);
        obj = cobj;
        if (!beta.allFinite() || beta.norm() > max_norm) {
            throw FitError("logistic IRLS: coefficient norm exceeds " + std::to_string(max_norm) + " (separation)");
        }
        if (step.cwiseAbs().maxCoeff() < 1e-8) return beta;
    }
    throw FitError("logistic IRLS did not converge in 100 iterations");
}

Eigen::VectorXd logistic_fit(const Eigen::MatrixXd& B, const Eigen::VectorXd& y, const MarsOptions& options,
                             bool& fallback, Eigen::VectorXd start) {
    fallback = false;
    try {
        return logistic_irls(B, y, 0.0, options.max_coef_norm, start);
    } catch (const FitError&) {
        fallback = true;
        return logistic_irls(B, y, options.ridge, std::numeric_limits<double>::infinity());
    }
}

namespace {

struct Rows {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

Rows gather(const AugmentedDataset& data, const std::vector<std::size_t>& rows) {
    Rows out{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), data.features.cols()),
             Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.X.row(static_cast<Eigen::Index>(k)) = data.features.row(static_cast<Eigen::Index>(rows[k]));
        out.y(static_cast<Eigen::Index>(k)) = data.y[rows[k]];
    }
    const double s = out.y.sum();
    if (s == 0.0 || s == out.y.size()) throw DataError("MARS needs both outcome classes");
    return out;
}

std::vector<std::size_t> all_rows(const AugmentedDataset& data) {
    std::vector<std::size_t> r(data.rows());
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

std::vector<std::size_t> hinge_columns(const AugmentedDataset& data) {
    std::vector<std::size_t> c(data.num_metals);
    std::iota(c.begin(), c.end(), std::size_t{0});
    c.push_back(data.time_column());
    return c;
}

/// [1 | confounders | hinge terms] on the given rows.
Eigen::MatrixXd design(const Eigen::MatrixXd& X, const AugmentedDataset& data, const std::vector<HingeTerm>& terms,
                       const std::vector<std::size_t>& keep) {
    const auto L = static_cast<Eigen::Index>(data.num_confounders);
    Eigen::MatrixXd B(X.rows(), 1 + L + static_cast<Eigen::Index>(keep.size()));
    B.col(0).setOnes();
    for (Eigen::Index l = 0; l < L; ++l) B.col(1 + l) = X.col(static_cast<Eigen::Index>(data.num_metals) + l);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto& t = terms[keep[k]];
        for (Eigen::Index i = 0; i < X.rows(); ++i) B(i, 1 + L + static_cast<Eigen::Index>(k)) = t.eval(X.row(i));
    }
    return B;
}

struct Candidate {
    double reduction = 0.0;
    int parent = -1;  // -1 intercept, else index into hinge terms
    std::size_t column = 0;
    double knot = 0.0;
};

// Best knot for parent * h(x - k) plus its mirror, scored by the drop in the
// weighted residual sum of squares of the working response. The mirrored
// pair spans the same space as parent * x plus parent * (x - k)+.
void scan_knots(const Eigen::VectorXd& sp, const Eigen::VectorXd& x, const std::vector<Eigen::Index>& order,
                const Eigen::MatrixXd& Q, const Eigen::VectorXd& r, int parent, std::size_t column,
                Candidate& best) {
    const auto M = Q.cols();
    const double xbar = x.mean();
    const Eigen::VectorXd xc = x.array() - xbar;
    const Eigen::VectorXd u1 = sp.cwiseProduct(xc);
    const double u11 = u1.squaredNorm();
    if (u11 == 0.0) return;
    const Eigen::VectorXd Qu1 = Q.transpose() * u1;
    const double g11 = u11 - Qu1.squaredNorm();
    const double u1r = u1.dot(r);
    const bool linear_ok = g11 > 1e-9 * u11;

    Eigen::VectorXd SA = Eigen::VectorXd::Zero(M), SB = Eigen::VectorXd::Zero(M);
    double s2 = 0.0, s2x = 0.0, s2x2 = 0.0, sr = 0.0, srx = 0.0;
    const auto n = static_cast<Eigen::Index>(order.size());
    Eigen::Index pos = n - 1;
    while (pos >= 0) {
        const double value = xc(order[static_cast<std::size_t>(pos)]);
        if (s2 > 0.0) {
            const double k = value;
            const Eigen::VectorXd Qu2 = SA - k * SB;
            const double u22 = s2x2 - 2.0 * k * s2x + k * k * s2;
            const double g22 = u22 - Qu2.squaredNorm();
            const double u2r = srx - k * sr;
            if (g22 > 1e-9 * u22 && u22 > 0.0) {
                double red;
                if (!linear_ok) {
                    red = u2r * u2r / g22;
                } else {
                    const double g12 = (s2x2 - k * s2x) - Qu1.dot(Qu2);
                    const double det = g11 * g22 - g12 * g12;
                    red = det > 1e-10 * g11 * g22 ? (g22 * u1r * u1r - 2.0 * g12 * u1r * u2r + g11 * u2r * u2r) / det
                                                   : u1r * u1r / g11;
                }
                if (red > best.reduction * (1.0 + 1e-12)) best = {red, parent, column, value + xbar};
            }
        }
        // Move every row at this value into the "x > knot" sums.
        while (pos >= 0 && xc(order[static_cast<std::size_t>(pos)]) == value) {
            const Eigen::Index i = order[static_cast<std::size_t>(pos)];
            const double s = sp(i);
            if (s != 0.0) {
                const double xi = xc(i);
                SA.noalias() += (s * xi) * Q.row(i).transpose();
                SB.noalias() += s * Q.row(i).transpose();
                s2 += s * s;
                s2x += s * s * xi;
                s2x2 += s * s * xi * xi;
                sr += s * r(i);
                srx += s * r(i) * xi;
            }
            --pos;
        }
    }
}

}  // namespace

MarsForward mars_forward(const AugmentedDataset& data, const std::vector<std::size_t>& rows, int degree,
                         const MarsOptions& options) {
    if (degree < 1 || degree > 2) throw ConfigError("MARS degree must be 1 or 2");
    const Rows d = gather(data, rows);
    const auto N = d.X.rows();
    const auto hcols = hinge_columns(data);
    std::vector<std::vector<Eigen::Index>> order(hcols.size());
    for (std::size_t v = 0; v < hcols.size(); ++v) {
        order[v].resize(static_cast<std::size_t>(N));
        std::iota(order[v].begin(), order[v].end(), Eigen::Index{0});
        const auto col = static_cast<Eigen::Index>(hcols[v]);
        std::stable_sort(order[v].begin(), order[v].end(),
                         [&](Eigen::Index a, Eigen::Index b) { return d.X(a, col) < d.X(b, col); });
    }

    MarsForward out;
    std::vector<std::size_t> keep;
    Eigen::MatrixXd B = design(d.X, data, out.terms, keep);
    const auto base_cols = B.cols();
    bool fb = false;
    Eigen::VectorXd beta = logistic_fit(B, d.y, options, fb);
    double ll = logistic_loglik(B * beta, d.y);
    const double ybar = d.y.mean();
    const double dev_null = -2.0 * static_cast<double>(N) * (ybar * std::log(ybar) + (1 - ybar) * std::log(1 - ybar));

    while (static_cast<int>(out.terms.size()) + 3 <= options.max_forward_terms) {
        const Eigen::VectorXd eta = B * beta;
        Eigen::VectorXd s(N), zt(N);
        for (Eigen::Index i = 0; i < N; ++i) {
            const double mu = sigmoid(eta(i));
            const double w = std::max(mu * (1.0 - mu), 1e-12);
            s(i) = std::sqrt(w);
            zt(i) = s(i) * (eta(i) + (d.y(i) - mu) / w);
        }
        const Eigen::MatrixXd SB = s.asDiagonal() * B;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(SB);
        const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, B.cols());
        const Eigen::VectorXd r = zt - Q * (Q.transpose() * zt);

        Candidate best;
        for (int parent = -1; parent < static_cast<int>(out.terms.size()); ++parent) {
            const HingeTerm* pt = parent >= 0 ? &out.terms[static_cast<std::size_t>(parent)] : nullptr;
            if (pt && static_cast<int>(pt->degree()) >= degree) continue;
            const Eigen::VectorXd pv = pt ? Eigen::VectorXd(B.col(base_cols + parent)) : Eigen::VectorXd::Ones(N).eval();
            const Eigen::VectorXd sp = s.cwiseProduct(pv);
            for (std::size_t v = 0; v < hcols.size(); ++v) {
                if (pt && std::any_of(pt->factors.begin(), pt->factors.end(),
                                      [&](const HingeFactor& f) { return f.column == hcols[v]; })) {
                    continue;
                }
                scan_knots(sp, d.X.col(static_cast<Eigen::Index>(hcols[v])), order[v], Q, r, parent, hcols[v], best);
            }
        }
        if (best.reduction <= 1e-12 * r.squaredNorm()) break;

        std::vector<HingeTerm> added;
        for (int dir : {1, -1}) {
            HingeTerm t;
            if (best.parent >= 0) t.factors = out.terms[static_cast<std::size_t>(best.parent)].factors;
            t.factors.push_back({best.column, best.knot, dir});
            bool nonzero = false;
            for (Eigen::Index i = 0; i < N && !nonzero; ++i) nonzero = t.eval(d.X.row(i)) != 0.0;
            if (nonzero) added.push_back(std::move(t));
        }
        if (added.empty()) break;
        Eigen::MatrixXd Bn(N, B.cols() + static_cast<Eigen::Index>(added.size()));
        Bn.leftCols(B.cols()) = B;
        for (std::size_t a = 0; a < added.size(); ++a) {
            for (Eigen::Index i = 0; i < N; ++i) Bn(i, B.cols() + static_cast<Eigen::Index>(a)) = added[a].eval(d.X.row(i));
        }
        Eigen::VectorXd start = Eigen::VectorXd::Zero(Bn.cols());
        start.head(beta.size()) = beta;
        Eigen::VectorXd bn;
        try {
            bn = logistic_fit(Bn, d.y, options, fb, start);
        } catch (const FitError&) {
            break;
        }
        const double lln = logistic_loglik(Bn * bn, d.y);
        if (!(lln > ll) || 2.0 * (lln - ll) / dev_null < options.min_improvement) break;
        for (auto& t : added) out.terms.push_back(std::move(t));
        B = std::move(Bn);
        beta = std::move(bn);
        ll = lln;
        out.loglik.push_back(ll);
    }
    return out;
}

MarsPruning mars_backward(const AugmentedDataset& data, const std::vector<std::size_t>& rows,
                          const MarsForward& forward, const MarsOptions& options) {
    const Rows d = gather(data, rows);
    const auto N = static_cast<double>(d.X.rows());
    std::vector<std::size_t> all(forward.terms.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const Eigen::MatrixXd B = design(d.X, data, forward.terms, all);
    bool fb = false;
    const Eigen::VectorXd beta = logistic_fit(B, d.y, options, fb);
    const Eigen::VectorXd eta = B * beta;
    Eigen::VectorXd w(eta.size()), z(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double mu = sigmoid(eta(i));
        w(i) = std::max(mu * (1.0 - mu), 1e-12);
        z(i) = eta(i) + (d.y(i) - mu) / w(i);
    }
    const Eigen::MatrixXd G = B.transpose() * w.asDiagonal() * B;
    const Eigen::VectorXd c = B.transpose() * w.cwiseProduct(z);
    const double zwz = z.dot(w.cwiseProduct(z));
    const auto forced = static_cast<Eigen::Index>(1 + data.num_confounders);

    auto rss = [&](const std::vector<std::size_t>& active) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(forced));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        for (auto a : active) idx.push_back(forced + static_cast<Eigen::Index>(a));
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd Gs(m, m);
        Eigen::VectorXd cs(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            cs(a) = c(idx[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < m; ++b) Gs(a, b) = G(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
        Gs.diagonal().array() += 1e-10 * Gs.diagonal().array().abs().maxCoeff();
        return std::max(0.0, zwz - cs.dot(Gs.ldlt().solve(cs)));
    };
    auto gcv = [&](const std::vector<std::size_t>& active, double r) {
        std::set<std::pair<std::size_t, double>> knots;
        for (auto a : active) {
            const auto& f = forward.terms[a].factors.back();
            knots.insert({f.column, f.knot});
        }
        const double C = static_cast<double>(forced + static_cast<Eigen::Index>(active.size())) +
                         options.gcv_penalty * static_cast<double>(knots.size());
        if (C >= N) return std::numeric_limits<double>::infinity();
        return r / (N * (1.0 - C / N) * (1.0 - C / N));
    };

    MarsPruning out;
    const std::size_t H = forward.terms.size();
    out.subsets.resize(H + 1);
    out.gcv.assign(H + 1, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> active = all;
    double current = rss(active);
    out.subsets[H] = active;
    out.gcv[H] = gcv(active, current);
    while (!active.empty()) {
        std::size_t drop = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < active.size(); ++k) {
            std::vector<std::size_t> trial = active;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
            const double r = rss(trial);
            if (r < best) {
                best = r;
                drop = k;
            }
        }
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
        current = best;
        out.subsets[active.size()] = active;
        out.gcv[active.size()] = gcv(active, current);
    }
    return out;
}

namespace {

std::size_t best_subset(const MarsPruning& pr, int p_max) {
    // Sizes count the intercept, so P terms leave P - 1 hinge terms.
    const auto cap = static_cast<std::size_t>(std::max(0, p_max - 1));
    std::size_t best = 0;
    for (std::size_t s = 0; s < pr.subsets.size() && s <= cap; ++s) {
        if (pr.gcv[s] < pr.gcv[best]) best = s;
    }
    return best;
}

HingeBasis finalize(const AugmentedDataset& data, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const MarsForward& fw, const std::vector<std::size_t>& keep, int degree, double gcv,
                    const MarsOptions& options) {
    const Eigen::MatrixXd B = design(X, data, fw.terms, keep);
    HingeBasis hb;
    const Eigen::VectorXd coef = logistic_fit(B, y, options, hb.ridge_fallback);
    hb.intercept = coef(0);
    hb.max_degree = degree;
    hb.gcv = gcv;
    const auto L = data.num_confounders;
    for (std::size_t l = 0; l < L; ++l) {
        HingeTerm t;
        t.linear_column = static_cast<int>(data.num_metals + l);
        t.coef = coef(static_cast<Eigen::Index>(1 + l));
        hb.terms.push_back(t);
    }
    for (std::size_t k = 0; k < keep.size(); ++k) {
        HingeTerm t = fw.terms[keep[k]];
        t.coef = coef(static_cast<Eigen::Index>(1 + L + k));
        hb.terms.push_back(std::move(t));
    }
    return hb;
}

std::vector<std::string> feature_names(const AugmentedDataset& data, const std::vector<std::string>& metals,
                                       const std::vector<std::string>& confounders) {
    std::vector<std::string> names = metals;
    if (names.size() != data.num_metals) {
        names.clear();
        for (std::size_t j = 0; j < data.num_metals; ++j) names.push_back("M" + std::to_string(j + 1));
    }
    if (confounders.size() == data.num_confounders) {
        names.insert(names.end(), confounders.begin(), confounders.end());
    } else {
        for (std::size_t l = 0; l < data.num_confounders; ++l) names.push_back("C" + std::to_string(l + 1));
    }
    names.push_back("time");
    return names;
}

}  // namespace

HingeBasis fit_mars(const AugmentedDataset& data, int p_max, int degree, const MarsOptions& options) {
    if (p_max < 1) throw ConfigError("MARS P must be positive");
    const auto rows = all_rows(data);
    const MarsForward fw = mars_forward(data, rows, degree, options);
    const MarsPruning pr = mars_backward(data, rows, fw, options);
    const std::size_t s = best_subset(pr, p_max);
    const Rows d = gather(data, rows);
    HingeBasis hb = finalize(data, d.X, d.y, fw, pr.subsets[s], degree, pr.gcv[s], options);
    hb.feature_names = feature_names(data, {}, {});
    return hb;
}

MarsCvResult cv_tune_mars(const AugmentedDataset& data, const MarsOptions& options) {
    if (options.p_grid.empty() || options.d_grid.empty()) throw ConfigError("MARS tuning grids must be non-empty");
    if (options.folds < 2) throw ConfigError("MARS CV needs at least 2 folds");
    std::size_t subjects = 0;
    for (auto s : data.subject) subjects = std::max(subjects, s + 1);
    Rng rng = make_stream(options.seed, {0x3A25ULL});
    const auto subject_fold = assign_folds(subjects, options.folds, rng);

    MarsCvResult res;
    for (int d : options.d_grid) {
        for (int p : options.p_grid) {
            res.d.push_back(d);
            res.p.push_back(p);
        }
    }
    res.auc.assign(res.p.size(), 0.0);
    std::size_t used = 0;
    for (int f = 0; f < options.folds; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            (subject_fold[data.subject[i]] == f ? test : train).push_back(i);
        }
        std::vector<int> test_y;
        for (auto i : test) test_y.push_back(data.y[i]);
        const auto pos = std::count(test_y.begin(), test_y.end(), 1);
        if (pos == 0 || pos == static_cast<long>(test_y.size())) {
            ++res.dropped_folds;
            continue;
        }
        Rows tr;
        try {
            tr = gather(data, train);
        } catch (const DataError&) {
            ++res.dropped_folds;
            continue;
        }
        Eigen::MatrixXd Xtest(static_cast<Eigen::Index>(test.size()), data.features.cols());
        for (std::size_t k = 0; k < test.size(); ++k) {
            Xtest.row(static_cast<Eigen::Index>(k)) = data.features.row(static_cast<Eigen::Index>(test[k]));
        }
        ++used;
        std::size_t cell = 0;
        for (int d : options.d_grid) {
            const MarsForward fw = mars_forward(data, train, d, options);
            const MarsPruning pr = mars_backward(data, train, fw, options);
            for (int p : options.p_grid) {
                const std::size_t s = best_subset(pr, p);
                const HingeBasis hb = finalize(data, tr.X, tr.y, fw, pr.subsets[s], d, pr.gcv[s], options);
                std::vector<double> score(test.size());
                for (std::size_t k = 0; k < test.size(); ++k) {
                    score[k] = hb.linear_predictor(Xtest.row(static_cast<Eigen::Index>(k)));
                }
                res.auc[cell++] += roc_auc(score, test_y);
            }
        }
    }
    if (used == 0) throw FitError("MARS CV: every fold lacks one outcome class");
    std::size_t best = 0;
    for (std::size_t c = 0; c < res.auc.size(); ++c) {
        res.auc[c] /= static_cast<double>(used);
        if (res.auc[c] > res.auc[best]) best = c;
    }
    res.best_p = res.p[best];
    res.best_d = res.d[best];
    return res;
}

double MarsModel::event_probability(const ExposureProfile& profile, int r) const {
    const Eigen::VectorXd x = feature_row(profile, grid(), r);
    return sigmoid(basis_.linear_predictor(x.transpose()));
}

}  // namespace mixsurv
