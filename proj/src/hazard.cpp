#include "recovery/hazard.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace recovery {

void validate(const GmpeParams& params) {
    if (!(params.tau >= 0.0)) throw std::invalid_argument("gmpe.tau must be >= 0");
    if (!(params.phi >= 0.0)) throw std::invalid_argument("gmpe.phi must be >= 0");
    if (!(params.c3 > 0.0)) throw std::invalid_argument("gmpe.c3 must be > 0");
    for (double c : {params.c0, params.c1, params.c2})
        if (!std::isfinite(c)) throw std::invalid_argument("gmpe coefficients must be finite");
}

double median_ln_im(const GmpeParams& params, double magnitude, double distance_km) {
    return params.c0 + params.c1 * magnitude + params.c2 * std::log(distance_km + params.c3);
}

AttenuationGmpe::AttenuationGmpe(GmpeParams params) : params_(params) { validate(params_); }

double AttenuationGmpe::median_ln_im(double magnitude, double distance_km) const {
    return recovery::median_ln_im(params_, magnitude, distance_km);
}

ScenarioConfig default_scenario(const CommunityModel& model, double distance_km, double bearing_deg) {
    ScenarioConfig scenario;
    const Point c = model.centroid();
    const double rad = bearing_deg * std::numbers::pi / 180.0;
    scenario.epicenter = {c.x + distance_km * std::cos(rad), c.y + distance_km * std::sin(rad)};
    return scenario;
}

void validate(const ScenarioConfig& scenario) {
    if (!(scenario.magnitude >= 4.0 && scenario.magnitude <= 9.0))
        throw std::invalid_argument("scenario.magnitude must lie in [4, 9]");
    if (!std::isfinite(scenario.epicenter.x) || !std::isfinite(scenario.epicenter.y))
        throw std::invalid_argument("scenario.epicenter must be finite");
    validate(scenario.gmpe);
}

IntensityField sample_intensity_field(const CommunityModel& model, const ScenarioConfig& scenario,
                                      const GroundMotionModel& gmpe, std::uint64_t seed) {
    validate(scenario);
    IntensityField field;
    const auto n = model.buildings.size();
    field.im.resize(n);
    field.epsilons.resize(n);

    std::normal_distribution<double> standard(0.0, 1.0);
    Rng inter = Rng::keyed(seed, tag_hash("inter-event"));
    field.eta = gmpe.inter_event_sigma() * standard(inter);

    const double phi = gmpe.intra_event_sigma();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = model.buildings[i];
        Rng intra = Rng::keyed(seed, tag_hash("intra-event"), b.id);
        std::normal_distribution<double> z(0.0, 1.0);
        field.epsilons[i] = phi * z(intra);
        const double r = distance(b.location, scenario.epicenter);
        field.im[i] = std::exp(gmpe.median_ln_im(scenario.magnitude, r) + field.eta + field.epsilons[i]);
    }
    return field;
}

IntensityField sample_intensity_field(const CommunityModel& model, const ScenarioConfig& scenario) {
    const AttenuationGmpe gmpe(scenario.gmpe);
    return sample_intensity_field(model, scenario, gmpe, scenario.seed);
}

} // namespace recovery
