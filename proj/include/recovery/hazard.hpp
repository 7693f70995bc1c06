#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "recovery/community.hpp"
#include "recovery/random.hpp"

namespace recovery {

/// Coefficients of the attenuation relation
///   ln IM = c0 + c1 * M + c2 * ln(R + c3)
/// plus the inter-event (tau) and intra-event (phi) standard deviations of ln IM.
struct GmpeParams {
    double c0 = -3.4;
    double c1 = 0.9;
    double c2 = -1.2;
    double c3 = 10.0; // km
    double tau = 0.3;
    double phi = 0.5;
};

/// Throws std::invalid_argument unless tau, phi >= 0 and c3 > 0.
void validate(const GmpeParams& params);

double median_ln_im(const GmpeParams& params, double magnitude, double distance_km);

/// Ground-motion model seen by the hazard sampler. Implementations give the
/// median of ln IM and the two residual standard deviations.
class GroundMotionModel {
public:
    virtual ~GroundMotionModel() = default;
    virtual double median_ln_im(double magnitude, double distance_km) const = 0;
    virtual double inter_event_sigma() const = 0;
    virtual double intra_event_sigma() const = 0;
};

class AttenuationGmpe final : public GroundMotionModel {
public:
    explicit AttenuationGmpe(GmpeParams params);
    double median_ln_im(double magnitude, double distance_km) const override;
    double inter_event_sigma() const override { return params_.tau; }
    double intra_event_sigma() const override { return params_.phi; }
    const GmpeParams& params() const { return params_; }

private:
    GmpeParams params_;
};

struct ScenarioConfig {
    double magnitude = 6.9;
    Point epicenter;
    GmpeParams gmpe;
    std::uint64_t seed = 0;
};

inline constexpr double kDefaultEpicentralDistanceKm = 12.0;
inline constexpr double kDefaultEpicenterBearingDeg = 225.0;

/// Mw 6.9 scenario with the epicenter `distance_km` from the community
/// centroid along `bearing_deg` (counter-clockwise from +x).
ScenarioConfig default_scenario(const CommunityModel& model, double distance_km = kDefaultEpicentralDistanceKm,
                                double bearing_deg = kDefaultEpicenterBearingDeg);

/// Throws std::invalid_argument for magnitude outside [4, 9] or a non-finite epicenter.
void validate(const ScenarioConfig& scenario);

struct IntensityField {
    std::vector<double> im;       // g, one per building
    double eta = 0.0;             // inter-event residual, ln units
    std::vector<double> epsilons; // intra-event residuals, ln units
};

/// eta is drawn once from the "inter-event" substream; epsilon_b from a
/// substream keyed by building id, so the field does not depend on
/// evaluation order.
IntensityField sample_intensity_field(const CommunityModel& model, const ScenarioConfig& scenario,
                                      const GroundMotionModel& gmpe, std::uint64_t seed);

IntensityField sample_intensity_field(const CommunityModel& model, const ScenarioConfig& scenario);

} // namespace recovery
