#pragma once

// Subject-level survival data, time discretization and the person-period
// (augmented) representation used by the discrete-time learners.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mixsurv {

struct SurvivalRecord {
    std::string id;
    double time = 0.0;  // follow-up time, > 0
    bool event = false;
    std::vector<double> metals;
    std::vector<double> confounders;
};

/// Immutable cohort. Stored column-wise; records are materialized on demand.
class Dataset {
public:
    Dataset(std::vector<SurvivalRecord> records, std::vector<std::string> metal_names,
            std::vector<std::string> confounder_names);

    std::size_t size() const { return ids_.size(); }
    std::size_t num_metals() const { return static_cast<std::size_t>(metals_.cols()); }
    std::size_t num_confounders() const { return static_cast<std::size_t>(confounders_.cols()); }
    std::size_t event_count() const;

    const std::vector<std::string>& ids() const { return ids_; }
    const Eigen::VectorXd& times() const { return times_; }
    const std::vector<int>& events() const { return events_; }
    const Eigen::MatrixXd& metals() const { return metals_; }
    const Eigen::MatrixXd& confounders() const { return confounders_; }
    const std::vector<std::string>& metal_names() const { return metal_names_; }
    const std::vector<std::string>& confounder_names() const { return confounder_names_; }

    SurvivalRecord record(std::size_t i) const;

    /// Rows in the given order. With `relabel`, ids become "<id>#<k>" so a
    /// resample that repeats subjects keeps unique ids.
    Dataset subset(std::span<const std::size_t> rows, bool relabel = false) const;

private:
    Dataset() = default;
    void validate() const;

    std::vector<std::string> ids_;
    Eigen::VectorXd times_;
    std::vector<int> events_;
    Eigen::MatrixXd metals_;
    Eigen::MatrixXd confounders_;
    std::vector<std::string> metal_names_;
    std::vector<std::string> confounder_names_;
};

/// A covariate assignment at which hazards and survival are evaluated.
struct ExposureProfile {
    std::vector<double> metals;
    std::vector<double> confounders;
};

/// R time bins [edges[r-1], edges[r]), the last one closed on the right.
class BinGrid {
public:
    explicit BinGrid(std::vector<double> edges);

    int bins() const { return static_cast<int>(edges_.size()) - 1; }
    const std::vector<double>& edges() const { return edges_; }
    double left_edge(int r) const { return edges_.at(static_cast<std::size_t>(r - 1)); }
    double right_edge(int r) const { return edges_.at(static_cast<std::size_t>(r)); }
    double width(int r) const { return right_edge(r) - left_edge(r); }
    /// Representative time of bin r used as the learners' time covariate.
    double bin_time(int r) const { return right_edge(r); }

    /// 1-based bin containing t; throws DataError outside [0, edges.back()].
    int bin_of(double t) const;

    bool operator==(const BinGrid&) const = default;

private:
    std::vector<double> edges_;
};

/// Relative inflation applied to the last edge so the largest time is binned.
inline constexpr double kMaxTimeInflation = 1e-9;

/// Edges at the inverse-ECDF (r/R)-quantiles of all observed times.
BinGrid make_bin_grid(const Dataset& dataset, int bins);

/// Person-period expansion. Feature columns are
/// [metals (J) | confounders (L) | bin_time].
struct AugmentedDataset {
    BinGrid grid;
    std::vector<std::size_t> subject;  // row -> index into the source Dataset
    std::vector<std::string> subject_id;
    std::vector<int> bin;  // 1..R
    std::vector<int> y;
    Eigen::MatrixXd features;
    std::size_t num_metals = 0;
    std::size_t num_confounders = 0;

    std::size_t rows() const { return y.size(); }
    std::size_t time_column() const { return num_metals + num_confounders; }
};

AugmentedDataset augment(const Dataset& dataset, const BinGrid& grid);

/// Feature row for a profile in bin r, laid out like AugmentedDataset::features.
Eigen::VectorXd feature_row(const ExposureProfile& profile, const BinGrid& grid, int r);

/// S(t_(r)) = prod_{l<=r} (1 - p_l).
std::vector<double> survival_from_bin_probs(std::span<const double> probs);

/// p_r / (t_(r) - t_(r-1)).
double hazard_from_bin_prob(double prob, const BinGrid& grid, int r);

/// Reads `id,time,event,<columns...>`; metal and confounder columns are picked
/// by name in any order. Missing columns are all reported in one DataError.
Dataset read_dataset_csv(std::istream& in, const std::vector<std::string>& metal_names,
                         const std::vector<std::string>& confounder_names);
Dataset read_dataset_csv(const std::string& path, const std::vector<std::string>& metal_names,
                         const std::vector<std::string>& confounder_names);

void write_dataset_csv(const Dataset& dataset, std::ostream& out);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace mixsurv
