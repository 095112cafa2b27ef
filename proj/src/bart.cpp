#include "mixsurv/bart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace mixsurv {

std::size_t TreeSkeleton::leaves() const { return static_cast<std::size_t>(std::count(left.begin(), left.end(), -1)); }

TreeSkeleton sample_tree_prior(double a, double b, Rng& rng, int max_depth) {
    if (!(a >= 0.0 && a < 1.0) || b < 0.0) throw ConfigError("tree prior needs a in [0,1) and b >= 0");
    TreeSkeleton t;
    t.left.push_back(-1);
    t.right.push_back(-1);
    t.depth.push_back(0);
    for (std::size_t i = 0; i < t.depth.size(); ++i) {
        const int d = t.depth[i];
        if (d >= max_depth || uniform01(rng) >= a * std::pow(1.0 + d, -b)) continue;
        for (int side = 0; side < 2; ++side) {
            const int child = static_cast<int>(t.depth.size());
            (side == 0 ? t.left : t.right)[i] = child;
            t.left.push_back(-1);
            t.right.push_back(-1);
            t.depth.push_back(d + 1);
        }
    }
    return t;
}

double BartOptions::sigma_mu() const { return 3.0 / (k * std::sqrt(static_cast<double>(trees))); }

void BartOptions::validate() const {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("BART a must lie in (0,1)");
    if (b < 0.0) throw ConfigError("BART b must be non-negative");
    if (!(k > 0.0)) throw ConfigError("BART k must be positive");
    if (trees < 1) throw ConfigError("BART needs at least one tree");
    if (burn_in < 0 || draws < 1 || thin < 1) throw ConfigError("BART schedule needs burn_in >= 0, draws >= 1, thin >= 1");
    if (min_leaf < 1) throw ConfigError("BART min_leaf must be positive");
    if (p_grow < 0 || p_prune < 0 || p_change < 0 || !(p_grow + p_prune + p_change > 0) || p_grow == 0.0 ||
        p_prune == 0.0) {
        throw ConfigError("BART move probabilities must be non-negative with grow and prune positive");
    }
}

BartOptions BartOptions::desk() { return BartOptions{}; }

BartOptions BartOptions::paper() {
    BartOptions o;
    o.draws = 1000;
    o.thin = 250;
    return o;
}

nlohmann::json to_json(const BartOptions& o) {
    return {{"a", o.a},         {"b", o.b},           {"k", o.k},
            {"trees", o.trees}, {"burn_in", o.burn_in}, {"draws", o.draws},
            {"thin", o.thin},   {"min_leaf", o.min_leaf}, {"move_probabilities", {o.p_grow, o.p_prune, o.p_change}}};
}

double eval_tree(const CompactTree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    int i = 0;
    while (tree[static_cast<std::size_t>(i)].var >= 0) {
        const auto& n = tree[static_cast<std::size_t>(i)];
        i = x(n.var) < n.cut ? n.left : n.right;
    }
    return tree[static_cast<std::size_t>(i)].mu;
}

double TreeEnsemble::sum(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double s = 0.0;
    for (const auto& t : trees) s += eval_tree(t, x);
    return s;
}

double PosteriorDraws::probability(std::size_t d, const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return normal_cdf(offset + draws.at(d).sum(x));
}

namespace {

enum Move { kGrow = 0, kPrune = 1, kChange = 2 };

struct Node {
    int parent = -1, left = -1, right = -1;
    int var = -1;
    int cut_rank = 0;
    double mu = 0.0;
    int depth = 0;
    std::vector<int> rows;
    bool growable = false;
    double log_rule = 0.0;  // log prior probability of this node's rule (internal nodes)
    std::vector<std::size_t> ncuts;  // valid cuts per variable, empty until needed
    bool leaf() const { return left < 0; }
};

struct Tree {
    std::vector<Node> nodes;
    std::vector<int> free;

    int add(Node n) {
        if (!free.empty()) {
            const int i = free.back();
            free.pop_back();
            nodes[static_cast<std::size_t>(i)] = std::move(n);
            return i;
        }
        nodes.push_back(std::move(n));
        return static_cast<int>(nodes.size()) - 1;
    }
    void remove(int i) {
        nodes[static_cast<std::size_t>(i)] = Node{};
        nodes[static_cast<std::size_t>(i)].depth = -1;
        free.push_back(i);
    }
    Node& at(int i) { return nodes[static_cast<std::size_t>(i)]; }
    const Node& at(int i) const { return nodes[static_cast<std::size_t>(i)]; }
    bool alive(std::size_t i) const { return nodes[i].depth >= 0; }
};

class Sampler {
public:
    Sampler(const Eigen::MatrixXd& X, const BartOptions& o) : X_(X), o_(o), tau2_(o.sigma_mu() * o.sigma_mu()) {
        const auto F = static_cast<std::size_t>(X.cols());
        const auto N = static_cast<std::size_t>(X.rows());
        values_.resize(F);
        rank_.assign(F, std::vector<int>(N));
        for (std::size_t v = 0; v < F; ++v) {
            std::vector<double> col(X.col(static_cast<Eigen::Index>(v)).data(),
                                    X.col(static_cast<Eigen::Index>(v)).data() + N);
            std::sort(col.begin(), col.end());
            col.erase(std::unique(col.begin(), col.end()), col.end());
            values_[v] = col;
            for (std::size_t i = 0; i < N; ++i) {
                rank_[v][i] = static_cast<int>(
                    std::lower_bound(col.begin(), col.end(), X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v))) -
                    col.begin());
            }
        }
        stamp_.assign(N + 1, 0);
    }

    double split_prob(int depth, bool growable) const {
        return growable ? o_.a * std::pow(1.0 + depth, -o_.b) : 0.0;
    }

    // Cut ranks k present at the node with at least min_leaf rows on each side
    // (rows with rank < k go left).
    std::size_t valid_cuts(const std::vector<int>& rows, std::size_t v, std::vector<int>* out) {
        const auto m = static_cast<std::size_t>(o_.min_leaf);
        const std::size_t n = rows.size();
        if (n < 2 * m) return 0;
        // m-th smallest and m-th largest rank in one pass (m is small).
        small_.assign(m, std::numeric_limits<int>::max());
        large_.assign(m, std::numeric_limits<int>::min());
        for (int row : rows) {
            const int r = rank_[v][static_cast<std::size_t>(row)];
            if (r < small_[m - 1]) {
                std::size_t k = m - 1;
                for (; k > 0 && small_[k - 1] > r; --k) small_[k] = small_[k - 1];
                small_[k] = r;
            }
            if (r > large_[m - 1]) {
                std::size_t k = m - 1;
                for (; k > 0 && large_[k - 1] < r; --k) large_[k] = large_[k - 1];
                large_[k] = r;
            }
        }
        const int lo = small_[m - 1];
        const int hi = large_[m - 1];
        if (lo >= hi) return 0;
        ++token_;
        std::size_t count = 0;
        for (int row : rows) {
            const int r = rank_[v][static_cast<std::size_t>(row)];
            if (r > lo && r <= hi && stamp_[static_cast<std::size_t>(r)] != token_) {
                stamp_[static_cast<std::size_t>(r)] = token_;
                ++count;
                if (out) out->push_back(r);
            }
        }
        return count;
    }

    bool any_valid(const std::vector<int>& rows) {
        for (std::size_t v = 0; v < values_.size(); ++v) {
            if (valid_cuts(rows, v, nullptr) > 0) return true;
        }
        return false;
    }

    /// Valid cut counts per variable at the node, cached until its rows change.
    const std::vector<std::size_t>& cut_counts(Node& n) {
        if (n.ncuts.empty()) {
            n.ncuts.resize(values_.size());
            for (std::size_t v = 0; v < values_.size(); ++v) n.ncuts[v] = valid_cuts(n.rows, v, nullptr);
        }
        return n.ncuts;
    }

    /// log p(rule) for (v, rank) at the node; -inf when the rule is not available there.
    double rule_log_prob(Node& n, std::size_t var, int rank) {
        const auto& counts = cut_counts(n);
        if (counts[var] == 0) return -std::numeric_limits<double>::infinity();
        cuts_.clear();
        valid_cuts(n.rows, var, &cuts_);
        if (std::find(cuts_.begin(), cuts_.end(), rank) == cuts_.end()) return -std::numeric_limits<double>::infinity();
        const auto nvars = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
        return -std::log(static_cast<double>(nvars)) - std::log(static_cast<double>(counts[var]));
    }

    /// Uniform variable among those with a valid cut, then a uniform cut.
    bool draw_rule(Node& n, Rng& rng, std::size_t& var, int& rank, double& log_prob) {
        const auto& counts = cut_counts(n);
        std::vector<std::size_t> vars;
        for (std::size_t v = 0; v < counts.size(); ++v) {
            if (counts[v] > 0) vars.push_back(v);
        }
        if (vars.empty()) return false;
        var = vars[uniform_index(vars.size(), rng)];
        cuts_.clear();
        valid_cuts(n.rows, var, &cuts_);
        std::sort(cuts_.begin(), cuts_.end());
        rank = cuts_[uniform_index(cuts_.size(), rng)];
        log_prob = -std::log(static_cast<double>(vars.size())) - std::log(static_cast<double>(counts[var]));
        return true;
    }

    void partition(const std::vector<int>& rows, std::size_t var, int rank, std::vector<int>& l, std::vector<int>& r) const {
        l.clear();
        r.clear();
        for (int i : rows) (rank_[var][static_cast<std::size_t>(i)] < rank ? l : r).push_back(i);
    }

    double cut_value(std::size_t var, int rank) const { return values_[var][static_cast<std::size_t>(rank)]; }

    double leaf_loglik(const std::vector<int>& rows, const Eigen::VectorXd& R) const {
        if (o_.prior_only) return 0.0;
        double s = 0.0;
        for (int i : rows) s += R(i);
        const double n = static_cast<double>(rows.size());
        return -0.5 * std::log1p(n * tau2_) + 0.5 * tau2_ * s * s / (1.0 + n * tau2_);
    }

    double draw_mu(const std::vector<int>& rows, const Eigen::VectorXd& R, Rng& rng) const {
        if (o_.prior_only) return std::sqrt(tau2_) * standard_normal(rng);
        double s = 0.0;
        for (int i : rows) s += R(i);
        const double prec = 1.0 + static_cast<double>(rows.size()) * tau2_;
        return tau2_ * s / prec + std::sqrt(tau2_ / prec) * standard_normal(rng);
    }

    double move_prob(Move m, std::size_t growable, std::size_t internal) const {
        if (internal == 0) return m == kGrow && growable > 0 ? 1.0 : 0.0;
        const double wg = growable > 0 ? o_.p_grow : 0.0;
        const double w = m == kGrow ? wg : (m == kPrune ? o_.p_prune : o_.p_change);
        return w / (wg + o_.p_prune + o_.p_change);
    }

    const Eigen::MatrixXd& X_;
    const BartOptions& o_;
    double tau2_;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<int>> rank_;
    std::vector<int> small_, large_, cuts_;
    std::vector<unsigned> stamp_;
    unsigned token_ = 0;
};

struct Counts {
    std::size_t growable = 0, internal = 0, nog = 0;
};

Counts count(const Tree& t) {
    Counts c;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        if (!t.alive(i)) continue;
        const Node& n = t.nodes[i];
        if (n.leaf()) {
            c.growable += n.growable;
        } else {
            ++c.internal;
            if (t.at(n.left).leaf() && t.at(n.right).leaf()) ++c.nog;
        }
    }
    return c;
}

template <class Pred>
int pick_node(const Tree& t, std::size_t total, Rng& rng, Pred pred) {
    std::size_t k = uniform_index(total, rng);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        if (t.alive(i) && pred(t.nodes[i]) && k-- == 0) return static_cast<int>(i);
    }
    return -1;
}

/// Prior and likelihood contributions of the subtree below (not including) `root`.
struct SubtreeTerms {
    double log_prior = 0.0;
    double loglik = 0.0;
};

SubtreeTerms subtree_terms(const Tree& t, int root, Sampler& s, const Eigen::VectorXd& R) {
    SubtreeTerms out;
    std::vector<int> stack = {t.at(root).left, t.at(root).right};
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const Node& n = t.at(i);
        const double p = s.split_prob(n.depth, n.growable);
        if (n.leaf()) {
            out.log_prior += std::log1p(-p);
            out.loglik += s.leaf_loglik(n.rows, R);
        } else {
            out.log_prior += std::log(p) + n.log_rule;
            stack.push_back(n.left);
            stack.push_back(n.right);
        }
    }
    return out;
}

// Re-partitions the subtree under `root` after its rule changed. Returns false
// if any rule becomes unavailable (zero prior probability).
bool refresh_subtree(Tree& t, int root, Sampler& s) {
    std::vector<int> stack = {root};
    std::vector<int> l, r;
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        Node& n = t.at(i);
        n.growable = s.any_valid(n.rows);
        if (n.leaf()) continue;
        if (i != root) {
            n.log_rule = s.rule_log_prob(n, static_cast<std::size_t>(n.var), n.cut_rank);
            if (!std::isfinite(n.log_rule)) return false;
        }
        s.partition(n.rows, static_cast<std::size_t>(n.var), n.cut_rank, l, r);
        if (l.size() < static_cast<std::size_t>(s.o_.min_leaf) || r.size() < static_cast<std::size_t>(s.o_.min_leaf)) {
            return false;
        }
        t.at(n.left).rows = l;
        t.at(n.left).ncuts.clear();
        t.at(n.right).rows = r;
        t.at(n.right).ncuts.clear();
        stack.push_back(n.left);
        stack.push_back(n.right);
    }
    return true;
}

CompactTree compact(const Tree& t, const Sampler& s) {
    CompactTree out;
    // Breadth-first copy keeps the root at index 0.
    std::vector<int> queue = {0};
    std::vector<int> slot_of(t.nodes.size(), -1);
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int i = queue[q];
        slot_of[static_cast<std::size_t>(i)] = static_cast<int>(out.size());
        const Node& n = t.at(i);
        CompactNode c;
        c.mu = n.mu;
        if (!n.leaf()) {
            c.var = n.var;
            c.cut = s.cut_value(static_cast<std::size_t>(n.var), n.cut_rank);
            queue.push_back(n.left);
            queue.push_back(n.right);
        }
        out.push_back(c);
    }
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const Node& n = t.at(queue[q]);
        if (!n.leaf()) {
            out[q].left = slot_of[static_cast<std::size_t>(n.left)];
            out[q].right = slot_of[static_cast<std::size_t>(n.right)];
        }
    }
    return out;
}

int tree_depth(const Tree& t) {
    int d = 0;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        if (t.alive(i)) d = std::max(d, t.nodes[i].depth);
    }
    return d;
}

}  // namespace

PosteriorDraws fit_bart(const Eigen::MatrixXd& X, const std::vector<int>& y, const BartOptions& options) {
    options.validate();
    const auto N = X.rows();
    if (static_cast<std::size_t>(N) != y.size() || N == 0) throw DataError("BART: outcome length mismatch");
    const double ybar = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(N);
    if (ybar == 0.0 || ybar == 1.0) throw DataError("BART needs both outcome classes");

    Sampler s(X, options);
    Rng rng = make_stream(options.seed, {0xBA27ULL});
    PosteriorDraws post;
    post.offset = normal_quantile(ybar);
    post.burn_in = options.burn_in;
    post.thin = options.thin;
    post.split_counts.assign(static_cast<std::size_t>(X.cols()), 0);

    const auto T = static_cast<std::size_t>(options.trees);
    std::vector<Tree> trees(T);
    std::vector<std::vector<int>> leaf_of(T, std::vector<int>(static_cast<std::size_t>(N), 0));
    std::vector<int> all(static_cast<std::size_t>(N));
    std::iota(all.begin(), all.end(), 0);
    for (auto& t : trees) {
        Node root;
        root.rows = all;
        root.growable = s.any_valid(all);
        t.add(std::move(root));
    }
    Eigen::VectorXd total = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd z(N), R(N);
    for (Eigen::Index i = 0; i < N; ++i) z(i) = y[static_cast<std::size_t>(i)] ? 0.5 : -0.5;

    const int sweeps = options.burn_in + options.draws * options.thin;
    std::vector<int> l, r;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        SweepDiagnostics diag;
        diag.sweep = sweep;
        diag.depth_histogram.assign(5, 0);
        for (std::size_t ti = 0; ti < T; ++ti) {
            Tree& t = trees[ti];
            auto& lof = leaf_of[ti];
            for (Eigen::Index i = 0; i < N; ++i) {
                R(i) = z(i) - post.offset - total(i) + t.at(lof[static_cast<std::size_t>(i)]).mu;
            }

            if (!options.constant_trees) {
                const Counts c = count(t);
                const double u = uniform01(rng);
                const double pg = s.move_prob(kGrow, c.growable, c.internal);
                const double pp = s.move_prob(kPrune, c.growable, c.internal);
                const Move move = u < pg ? kGrow : (u < pg + pp ? kPrune : kChange);
                const bool possible = s.move_prob(move, c.growable, c.internal) > 0.0;
                if (possible) ++diag.proposed[move];
                if (possible && move == kGrow) {
                    const int eta = pick_node(t, c.growable, rng, [](const Node& n) { return n.leaf() && n.growable; });
                    std::size_t var;
                    int rank;
                    double lrule;
                    Node& e = t.at(eta);
                    s.draw_rule(e, rng, var, rank, lrule);
                    s.partition(e.rows, var, rank, l, r);
                    const bool gl = s.any_valid(l), gr = s.any_valid(r);
                    const int d = e.depth;
                    const bool parent_was_nog =
                        e.parent >= 0 && t.at(t.at(e.parent).left).leaf() && t.at(t.at(e.parent).right).leaf();
                    const std::size_t nog_new = c.nog - (parent_was_nog ? 1 : 0) + 1;
                    const std::size_t grow_new = c.growable - 1 + gl + gr;
                    const double p_eta = s.split_prob(d, true);
                    double log_alpha = s.leaf_loglik(l, R) + s.leaf_loglik(r, R) - s.leaf_loglik(e.rows, R) +
                                       std::log(p_eta) + std::log1p(-s.split_prob(d + 1, gl)) +
                                       std::log1p(-s.split_prob(d + 1, gr)) - std::log1p(-p_eta) +
                                       std::log(s.move_prob(kPrune, grow_new, c.internal + 1)) -
                                       std::log(static_cast<double>(nog_new)) -
                                       std::log(s.move_prob(kGrow, c.growable, c.internal)) +
                                       std::log(static_cast<double>(c.growable));
                    if (std::log(uniform01(rng)) < log_alpha) {
                        Node nl, nr;
                        nl.parent = nr.parent = eta;
                        nl.depth = nr.depth = d + 1;
                        nl.rows = l;
                        nr.rows = r;
                        nl.growable = gl;
                        nr.growable = gr;
                        const int il = t.add(std::move(nl));
                        const int ir = t.add(std::move(nr));
                        Node& en = t.at(eta);
                        en.left = il;
                        en.right = ir;
                        en.var = static_cast<int>(var);
                        en.cut_rank = rank;
                        en.log_rule = lrule;
                        for (int i : t.at(il).rows) lof[static_cast<std::size_t>(i)] = il;
                        for (int i : t.at(ir).rows) lof[static_cast<std::size_t>(i)] = ir;
                        ++diag.accepted[kGrow];
                    }
                } else if (possible && move == kPrune) {
                    const int eta = pick_node(t, c.nog, rng, [&](const Node& n) {
                        return !n.leaf() && t.at(n.left).leaf() && t.at(n.right).leaf();
                    });
                    const Node& e = t.at(eta);
                    const Node& nl = t.at(e.left);
                    const Node& nr = t.at(e.right);
                    const int d = e.depth;
                    const std::size_t grow_new = c.growable - nl.growable - nr.growable + 1;
                    const std::size_t internal_new = c.internal - 1;
                    const double p_eta = s.split_prob(d, true);
                    double log_alpha = s.leaf_loglik(e.rows, R) - s.leaf_loglik(nl.rows, R) -
                                       s.leaf_loglik(nr.rows, R) - std::log(p_eta) -
                                       std::log1p(-s.split_prob(d + 1, nl.growable)) -
                                       std::log1p(-s.split_prob(d + 1, nr.growable)) + std::log1p(-p_eta) +
                                       std::log(s.move_prob(kGrow, grow_new, internal_new)) -
                                       std::log(static_cast<double>(grow_new)) -
                                       std::log(s.move_prob(kPrune, c.growable, c.internal)) +
                                       std::log(static_cast<double>(c.nog));
                    if (std::log(uniform01(rng)) < log_alpha) {
                        const int il = e.left, ir = e.right;
                        Node& en = t.at(eta);
                        en.left = en.right = -1;
                        en.var = -1;
                        en.growable = true;
                        for (int i : en.rows) lof[static_cast<std::size_t>(i)] = eta;
                        t.remove(il);
                        t.remove(ir);
                        ++diag.accepted[kPrune];
                    }
                } else if (possible && move == kChange) {
                    const int eta = pick_node(t, c.internal, rng, [](const Node& n) { return !n.leaf(); });
                    std::size_t var;
                    int rank;
                    double lrule;
                    s.draw_rule(t.at(eta), rng, var, rank, lrule);
                    const SubtreeTerms before = subtree_terms(t, eta, s, R);
                    Tree proposal = t;
                    proposal.at(eta).var = static_cast<int>(var);
                    proposal.at(eta).cut_rank = rank;
                    proposal.at(eta).log_rule = lrule;
                    if (refresh_subtree(proposal, eta, s)) {
                        const SubtreeTerms after = subtree_terms(proposal, eta, s, R);
                        const Counts c2 = count(proposal);
                        const double log_alpha = after.loglik - before.loglik + after.log_prior - before.log_prior +
                                                 std::log(s.move_prob(kChange, c2.growable, c2.internal)) -
                                                 std::log(s.move_prob(kChange, c.growable, c.internal));
                        if (std::log(uniform01(rng)) < log_alpha) {
                            t = std::move(proposal);
                            for (std::size_t k = 0; k < t.nodes.size(); ++k) {
                                if (t.alive(k) && t.nodes[k].leaf()) {
                                    for (int i : t.nodes[k].rows) lof[static_cast<std::size_t>(i)] = static_cast<int>(k);
                                }
                            }
                            ++diag.accepted[kChange];
                        }
                    }
                }
            }

            for (std::size_t k = 0; k < t.nodes.size(); ++k) {
                if (t.alive(k) && t.nodes[k].leaf()) t.nodes[k].mu = s.draw_mu(t.nodes[k].rows, R, rng);
            }
            for (Eigen::Index i = 0; i < N; ++i) {
                total(i) = z(i) - post.offset - R(i) + t.at(lof[static_cast<std::size_t>(i)]).mu;
            }
            ++diag.depth_histogram[static_cast<std::size_t>(std::min(tree_depth(t), 4))];
        }

        double ll = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            const double m = post.offset + total(i);
            if (!options.prior_only) {
                z(i) = y[static_cast<std::size_t>(i)] ? m + truncated_normal_above(-m, rng)
                                                      : m - truncated_normal_above(m, rng);
            }
            ll += std::log(std::max(normal_cdf(y[static_cast<std::size_t>(i)] ? m : -m), 1e-300));
            if (!std::isfinite(z(i)) || !std::isfinite(m)) {
                std::ostringstream msg;
                msg << "BART: non-finite latent value at sweep " << sweep << ", row " << i << " (offset "
                    << post.offset << ", fit " << total(i) << ", z " << z(i) << ", trees " << T << ")";
                throw FitError(msg.str());
            }
        }
        diag.loglik = ll;
        post.diagnostics.push_back(std::move(diag));

        if (sweep >= options.burn_in && (sweep - options.burn_in + 1) % options.thin == 0) {
            TreeEnsemble e;
            e.trees.reserve(T);
            for (const auto& t : trees) {
                e.trees.push_back(compact(t, s));
                for (const auto& n : e.trees.back()) {
                    if (n.var >= 0) ++post.split_counts[static_cast<std::size_t>(n.var)];
                }
            }
            post.draws.push_back(std::move(e));
        }
    }
    return post;
}

void write_bart_diagnostics_csv(const PosteriorDraws& posterior, std::ostream& out) {
    out << "sweep,loglik,grow_proposed,grow_accepted,prune_proposed,prune_accepted,change_proposed,change_accepted,"
           "depth0,depth1,depth2,depth3,depth4plus\n";
    for (const auto& d : posterior.diagnostics) {
        out << d.sweep << ',' << format_double(d.loglik);
        for (int m = 0; m < 3; ++m) out << ',' << d.proposed[m] << ',' << d.accepted[m];
        for (int h : d.depth_histogram) out << ',' << h;
        out << '\n';
    }
}

double BartDrawModel::event_probability(const ExposureProfile& profile, int r) const {
    const Eigen::VectorXd x = feature_row(profile, grid(), r);
    return posterior_->probability(index_, x.transpose());
}

BartPosterior::BartPosterior(BinGrid grid, std::shared_ptr<const PosteriorDraws> posterior)
    : posterior_(std::move(posterior)) {
    models_.reserve(posterior_->draws.size());
    for (std::size_t d = 0; d < posterior_->draws.size(); ++d) models_.emplace_back(grid, posterior_, d);
}

BartPosterior fit_bart(const AugmentedDataset& data, const BartOptions& options) {
    auto post = std::make_shared<const PosteriorDraws>(fit_bart(data.features, data.y, options));
    return BartPosterior(data.grid, std::move(post));
}

}  // namespace mixsurv
