#include "mixsurv/survival_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "mixsurv/stats.hpp"

namespace mixsurv {

Dataset::Dataset(std::vector<SurvivalRecord> records, std::vector<std::string> metal_names,
                 std::vector<std::string> confounder_names)
    : metal_names_(std::move(metal_names)), confounder_names_(std::move(confounder_names)) {
    if (records.empty()) throw DataError("dataset is empty");
    const std::size_t n = records.size();
    const std::size_t J = records.front().metals.size();
    const std::size_t L = records.front().confounders.size();
    if (metal_names_.empty()) {
        for (std::size_t j = 0; j < J; ++j) metal_names_.push_back("M" + std::to_string(j + 1));
    }
    if (confounder_names_.empty()) {
        for (std::size_t l = 0; l < L; ++l) confounder_names_.push_back("C" + std::to_string(l + 1));
    }
    if (metal_names_.size() != J || confounder_names_.size() != L) {
        throw DataError("column name count does not match record dimensions");
    }
    ids_.reserve(n);
    times_.resize(static_cast<Eigen::Index>(n));
    events_.reserve(n);
    metals_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(J));
    confounders_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(L));
    for (std::size_t i = 0; i < n; ++i) {
        auto& rec = records[i];
        if (rec.metals.size() != J || rec.confounders.size() != L) {
            throw DataError("record '" + rec.id + "' has inconsistent metal/confounder length");
        }
        const auto row = static_cast<Eigen::Index>(i);
        ids_.push_back(std::move(rec.id));
        times_(row) = rec.time;
        events_.push_back(rec.event ? 1 : 0);
        for (std::size_t j = 0; j < J; ++j) metals_(row, static_cast<Eigen::Index>(j)) = rec.metals[j];
        for (std::size_t l = 0; l < L; ++l) confounders_(row, static_cast<Eigen::Index>(l)) = rec.confounders[l];
    }
    validate();
}

void Dataset::validate() const {
    std::unordered_set<std::string> seen;
    seen.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!seen.insert(ids_[i]).second) throw DataError("duplicate subject id '" + ids_[i] + "'");
        const auto row = static_cast<Eigen::Index>(i);
        if (!std::isfinite(times_(row)) || !(times_(row) > 0.0)) {
            throw DataError("subject '" + ids_[i] + "' has non-positive or non-finite time");
        }
        if (!metals_.row(row).allFinite() || !confounders_.row(row).allFinite()) {
            throw DataError("subject '" + ids_[i] + "' has non-finite covariates");
        }
    }
}

std::size_t Dataset::event_count() const {
    return static_cast<std::size_t>(std::count(events_.begin(), events_.end(), 1));
}

SurvivalRecord Dataset::record(std::size_t i) const {
    const auto row = static_cast<Eigen::Index>(i);
    SurvivalRecord rec;
    rec.id = ids_.at(i);
    rec.time = times_(row);
    rec.event = events_[i] != 0;
    rec.metals.resize(num_metals());
    for (std::size_t j = 0; j < num_metals(); ++j) rec.metals[j] = metals_(row, static_cast<Eigen::Index>(j));
    rec.confounders.resize(num_confounders());
    for (std::size_t l = 0; l < num_confounders(); ++l) {
        rec.confounders[l] = confounders_(row, static_cast<Eigen::Index>(l));
    }
    return rec;
}

Dataset Dataset::subset(std::span<const std::size_t> rows, bool relabel) const {
    if (rows.empty()) throw DataError("subset is empty");
    Dataset out;
    out.metal_names_ = metal_names_;
    out.confounder_names_ = confounder_names_;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.times_.resize(n);
    out.metals_.resize(n, metals_.cols());
    out.confounders_.resize(n, confounders_.cols());
    out.ids_.reserve(rows.size());
    out.events_.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        if (i >= size()) throw DataError("subset row out of range");
        const auto src = static_cast<Eigen::Index>(i);
        const auto dst = static_cast<Eigen::Index>(k);
        out.ids_.push_back(relabel ? ids_[i] + "#" + std::to_string(k) : ids_[i]);
        out.times_(dst) = times_(src);
        out.events_.push_back(events_[i]);
        out.metals_.row(dst) = metals_.row(src);
        out.confounders_.row(dst) = confounders_.row(src);
    }
    if (!relabel) out.validate();
    return out;
}

BinGrid::BinGrid(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 3) throw DataError("bin grid needs at least 2 bins");
    if (edges_.front() != 0.0) throw DataError("bin grid must start at 0");
    for (std::size_t r = 1; r < edges_.size(); ++r) {
        if (!(edges_[r] > edges_[r - 1])) throw DataError("bin grid edges must be strictly increasing");
    }
}

int BinGrid::bin_of(double t) const {
    if (!(t >= 0.0) || t > edges_.back()) {
        throw DataError("time " + format_double(t) + " outside bin grid [0, " + format_double(edges_.back()) + "]");
    }
    // First edge strictly greater than t closes the bin; the last bin is closed.
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
    if (it == edges_.end()) return bins();
    return static_cast<int>(it - edges_.begin());
}

BinGrid make_bin_grid(const Dataset& dataset, int bins) {
    if (bins < 2) throw DataError("bin count R must be at least 2");
    std::vector<double> sorted(dataset.times().data(), dataset.times().data() + dataset.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges{0.0};
    std::vector<std::string> collapsed;
    for (int r = 1; r <= bins; ++r) {
        double q = quantile_inverse_ecdf_sorted(sorted, static_cast<double>(r) / bins);
        if (r == bins) q = sorted.back() * (1.0 + kMaxTimeInflation);
        if (!(q > edges.back())) {
            collapsed.push_back(std::to_string(r) + "/" + std::to_string(bins) + " (=" + format_double(q) + ")");
        }
        edges.push_back(q);
    }
    if (!collapsed.empty()) {
        std::string msg = "degenerate bin grid: quantiles do not increase at";
        for (const auto& c : collapsed) msg += " " + c;
        throw DataError(msg);
    }
    return BinGrid(std::move(edges));
}

AugmentedDataset augment(const Dataset& dataset, const BinGrid& grid) {
    const std::size_t J = dataset.num_metals();
    const std::size_t L = dataset.num_confounders();
    std::vector<int> last_bin(dataset.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        last_bin[i] = grid.bin_of(dataset.times()(static_cast<Eigen::Index>(i)));
        total += static_cast<std::size_t>(last_bin[i]);
    }
    AugmentedDataset aug{grid, {}, {}, {}, {}, Eigen::MatrixXd(static_cast<Eigen::Index>(total),
                                                                static_cast<Eigen::Index>(J + L + 1)),
                         J, L};
    aug.subject.reserve(total);
    aug.subject_id.reserve(total);
    aug.bin.reserve(total);
    aug.y.reserve(total);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto src = static_cast<Eigen::Index>(i);
        for (int r = 1; r <= last_bin[i]; ++r, ++row) {
            aug.subject.push_back(i);
            aug.subject_id.push_back(dataset.ids()[i]);
            aug.bin.push_back(r);
            aug.y.push_back(r == last_bin[i] ? dataset.events()[i] : 0);
            aug.features.block(row, 0, 1, static_cast<Eigen::Index>(J)) = dataset.metals().row(src);
            aug.features.block(row, static_cast<Eigen::Index>(J), 1, static_cast<Eigen::Index>(L)) =
                dataset.confounders().row(src);
            aug.features(row, static_cast<Eigen::Index>(J + L)) = grid.bin_time(r);
        }
    }
    return aug;
}

Eigen::VectorXd feature_row(const ExposureProfile& profile, const BinGrid& grid, int r) {
    const std::size_t J = profile.metals.size();
    const std::size_t L = profile.confounders.size();
    Eigen::VectorXd x(static_cast<Eigen::Index>(J + L + 1));
    for (std::size_t j = 0; j < J; ++j) x(static_cast<Eigen::Index>(j)) = profile.metals[j];
    for (std::size_t l = 0; l < L; ++l) x(static_cast<Eigen::Index>(J + l)) = profile.confounders[l];
    x(static_cast<Eigen::Index>(J + L)) = grid.bin_time(r);
    return x;
}

std::vector<double> survival_from_bin_probs(std::span<const double> probs) {
    std::vector<double> s(probs.size());
    double running = 1.0;
    for (std::size_t r = 0; r < probs.size(); ++r) {
        running *= 1.0 - probs[r];
        s[r] = running;
    }
    return s;
}

double hazard_from_bin_prob(double prob, const BinGrid& grid, int r) {
    if (r < 1 || r > grid.bins()) throw DataError("bin index out of range");
    const double w = grid.width(r);
    if (!(w > 0.0)) throw DataError("zero-width bin");
    return prob / w;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && field[start] == ' ') ++start;
        out.push_back(field.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& text, std::size_t line_no, const std::string& column) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw DataError("line " + std::to_string(line_no) + ": column '" + column + "' is not a number: '" +
                        text + "'");
    }
    return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, const std::vector<std::string>& metal_names,
                         const std::vector<std::string>& confounder_names) {
    std::string line;
    std::size_t line_no = 0;
    do {
        if (!std::getline(in, line)) throw DataError("CSV has no header row");
        ++line_no;
    } while (line.empty() || line.front() == '#');
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < header.size(); ++c) index[header[c]] = c;

    std::vector<std::string> missing;
    auto locate = [&](const std::string& name) -> std::size_t {
        const auto it = index.find(name);
        if (it == index.end()) {
            missing.push_back(name);
            return 0;
        }
        return it->second;
    };
    const std::size_t id_col = locate("id");
    const std::size_t time_col = locate("time");
    const std::size_t event_col = locate("event");
    std::vector<std::size_t> metal_cols, conf_cols;
    for (const auto& m : metal_names) metal_cols.push_back(locate(m));
    for (const auto& c : confounder_names) conf_cols.push_back(locate(c));
    if (!missing.empty()) {
        std::string msg = "CSV schema mismatch; missing columns:";
        for (const auto& m : missing) msg += " " + m;
        throw DataError(msg);
    }

    std::vector<SurvivalRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line.front() == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
        }
        SurvivalRecord rec;
        rec.id = fields[id_col];
        rec.time = parse_double(fields[time_col], line_no, "time");
        const std::string& ev = fields[event_col];
        if (ev != "0" && ev != "1") {
            throw DataError("line " + std::to_string(line_no) + ": event must be 0 or 1, got '" + ev + "'");
        }
        rec.event = ev == "1";
        for (std::size_t j = 0; j < metal_cols.size(); ++j) {
            rec.metals.push_back(parse_double(fields[metal_cols[j]], line_no, metal_names[j]));
        }
        for (std::size_t l = 0; l < conf_cols.size(); ++l) {
            rec.confounders.push_back(parse_double(fields[conf_cols[l]], line_no, confounder_names[l]));
        }
        records.push_back(std::move(rec));
    }
    return Dataset(std::move(records), metal_names, confounder_names);
}

Dataset read_dataset_csv(const std::string& path, const std::vector<std::string>& metal_names,
                         const std::vector<std::string>& confounder_names) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_dataset_csv(in, metal_names, confounder_names);
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
    out << "id,time,event";
    for (const auto& m : dataset.metal_names()) out << ',' << m;
    for (const auto& c : dataset.confounder_names()) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        out << dataset.ids()[i] << ',' << format_double(dataset.times()(row)) << ',' << dataset.events()[i];
        for (Eigen::Index j = 0; j < dataset.metals().cols(); ++j) out << ',' << format_double(dataset.metals()(row, j));
        for (Eigen::Index l = 0; l < dataset.confounders().cols(); ++l) {
            out << ',' << format_double(dataset.confounders()(row, l));
        }
        out << '\n';
    }
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

}  // namespace mixsurv
