#pragma once

// Probit BART on the person-period data: Bayesian backfitting MCMC with
// grow/prune/change moves, latent truncated normals and conjugate leaf draws.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mixsurv/model.hpp"
#include "mixsurv/stats.hpp"
#include "mixsurv/survival_core.hpp"

namespace mixsurv {

struct TreeSkeleton {
    std::vector<int> left, right, depth;  // -1 children for terminal nodes
    std::size_t leaves() const;
};

/// Draw from the tree-shape prior: a depth-d node splits with probability a(1+d)^-b.
TreeSkeleton sample_tree_prior(double a, double b, Rng& rng, int max_depth = 64);

struct BartOptions {
    double a = 0.95;
    double b = 2.0;
    double k = 2.0;
    int trees = 50;
    int burn_in = 250;
    int draws = 200;
    int thin = 10;
    int min_leaf = 5;
    double p_grow = 0.4, p_prune = 0.4, p_change = 0.2;
    /// Ignore the data: the chain then samples the tree prior (used to check detailed balance).
    bool prior_only = false;
    /// No structural moves: every tree stays a single leaf.
    bool constant_trees = false;
    std::uint64_t seed = 1;

    double sigma_mu() const;
    void validate() const;
    static BartOptions desk();   // 250 burn-in, 200 draws, thin 10
    static BartOptions paper();  // 250 burn-in, 1000 draws, thin 250
};

nlohmann::json to_json(const BartOptions& options);

struct CompactNode {
    int var = -1;  // -1 for leaves
    double cut = 0.0;  // x < cut goes left
    double mu = 0.0;
    int left = -1, right = -1;
};
using CompactTree = std::vector<CompactNode>;

double eval_tree(const CompactTree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& x);

struct TreeEnsemble {
    std::vector<CompactTree> trees;
    double sum(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct SweepDiagnostics {
    int sweep = 0;
    double loglik = 0.0;
    int proposed[3] = {0, 0, 0};  // grow, prune, change
    int accepted[3] = {0, 0, 0};
    std::vector<int> depth_histogram;  // trees with depth 0..4, last bin 4+
};

struct PosteriorDraws {
    double offset = 0.0;  // probit offset, Phi^-1(mean y)
    std::vector<TreeEnsemble> draws;
    int burn_in = 0, thin = 1;
    std::vector<SweepDiagnostics> diagnostics;
    std::vector<std::size_t> split_counts;  // per feature, over kept draws

    /// Phi(offset + sum of trees) for draw d.
    double probability(std::size_t d, const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

/// Runs the chain on (X, y). Throws DataError if y has a single class and
/// FitError (with a state summary) on non-finite latent values.
PosteriorDraws fit_bart(const Eigen::MatrixXd& X, const std::vector<int>& y, const BartOptions& options);

void write_bart_diagnostics_csv(const PosteriorDraws& posterior, std::ostream& out);

/// One posterior draw as a discrete-time survival model.
class BartDrawModel : public DiscreteTimeModel {
public:
    BartDrawModel(BinGrid grid, std::shared_ptr<const PosteriorDraws> posterior, std::size_t index)
        : DiscreteTimeModel(std::move(grid)), posterior_(std::move(posterior)), index_(index) {}
    double event_probability(const ExposureProfile& profile, int r) const override;

private:
    std::shared_ptr<const PosteriorDraws> posterior_;
    std::size_t index_;
};

class BartPosterior : public PosteriorSurvivalModel {
public:
    BartPosterior(BinGrid grid, std::shared_ptr<const PosteriorDraws> posterior);
    std::size_t draw_count() const override { return models_.size(); }
    const SurvivalModel& draw(std::size_t i) const override { return models_.at(i); }
    const PosteriorDraws& posterior() const { return *posterior_; }

private:
    std::shared_ptr<const PosteriorDraws> posterior_;
    std::vector<BartDrawModel> models_;
};

BartPosterior fit_bart(const AugmentedDataset& data, const BartOptions& options);

}  // namespace mixsurv
