#pragma once

// Uniform prediction contract shared by every estimator family.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixsurv/survival_core.hpp"

namespace mixsurv {

/// survival(profile, t) in [0,1], non-increasing in t, 1 at t = 0;
/// hazard(profile, t) >= 0.
class SurvivalModel {
public:
    virtual ~SurvivalModel() = default;

    virtual double survival(const ExposureProfile& profile, double t) const = 0;
    virtual double hazard(const ExposureProfile& profile, double t) const = 0;

    /// log[hazard(a, t) / hazard(b, t)] when it is time-free (proportional
    /// hazards); empty otherwise. Lets PH models report exact exp{delta eta}.
    virtual std::optional<double> log_hazard_ratio(const ExposureProfile& a, const ExposureProfile& b) const {
        (void)a;
        (void)b;
        return std::nullopt;
    }
};

/// A posterior over survival models (one model per kept draw).
class PosteriorSurvivalModel {
public:
    virtual ~PosteriorSurvivalModel() = default;
    virtual std::size_t draw_count() const = 0;
    virtual const SurvivalModel& draw(std::size_t i) const = 0;
    /// Posterior-mean survival curve, used for exposure-response point estimates.
    virtual double mean_survival(const ExposureProfile& profile, double t) const;
};

/// Per-bin event probabilities over a BinGrid turned into S(t) and lambda(t).
/// Within a bin the hazard is held constant, so S interpolates geometrically
/// between the bin edges and equals prod_{l<=r}(1 - p_l) at t_(r).
class DiscreteTimeModel : public SurvivalModel {
public:
    explicit DiscreteTimeModel(BinGrid grid) : grid_(std::move(grid)) {}

    const BinGrid& grid() const { return grid_; }

    /// Event probability in bin r (1-based) for the profile.
    virtual double event_probability(const ExposureProfile& profile, int r) const = 0;

    std::vector<double> bin_probabilities(const ExposureProfile& profile) const;
    double survival(const ExposureProfile& profile, double t) const override;
    double hazard(const ExposureProfile& profile, double t) const override;

private:
    int bin_for(double t) const;
    BinGrid grid_;
};

}  // namespace mixsurv
