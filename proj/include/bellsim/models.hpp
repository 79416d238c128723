// Generators of ideal (noise-free) joint distributions: a factorizable
// local-hidden-variable model with a concrete sign-of-cosine realization, and
// the entangled-pair statistics that reach S = 2*sqrt(2).
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "bellsim/chsh.hpp"

namespace bellsim {

// A hidden-variable value, an angle in [0, 2*pi).
struct HiddenVariable {
    double lambda = 0.0;
};

// Distribution of the hidden variable: uniform-continuous on [0, 2*pi) or
// uniform-discrete on n_tot equispaced points.
struct LambdaDensity {
    enum class Kind : std::uint8_t { uniform_continuous, uniform_discrete };

    Kind kind = Kind::uniform_continuous;
    std::uint64_t n_tot = 0;  // discrete case only

    static LambdaDensity continuous() noexcept { return {Kind::uniform_continuous, 0}; }

    static LambdaDensity discrete(std::uint64_t n_tot) {
        if (n_tot == 0) throw validation_error("discrete lambda density needs n_tot >= 1");
        return {Kind::uniform_discrete, n_tot};
    }
};

// Local model: deterministic outcome functions per wing plus the lambda
// distribution. Same (setting, lambda) always gives the same outcome.
struct LhvModel {
    std::function<Outcome(double setting, double lambda)> outcome_a;
    std::function<Outcome(double setting, double lambda)> outcome_b;
    LambdaDensity lambda_density = LambdaDensity::continuous();
};

// Sign convention: cos = 0 resolves to +, keeping runs reproducible.
inline Outcome sign_outcome(double x) noexcept {
    return x >= 0.0 ? Outcome::plus : Outcome::minus;
}

// The reference model: A(a, lambda) = sign(cos 2(lambda - a)) and
// B(b, lambda) = -sign(cos 2(lambda - b)), lambda uniform on [0, 2*pi).
// Its pair correlation is a sawtooth in the setting difference, with
// E = -1 at equal settings.
inline LhvModel reference_lhv_model() {
    LhvModel model;
    model.outcome_a = [](double setting, double lambda) {
        return sign_outcome(std::cos(2.0 * (lambda - setting)));
    };
    model.outcome_b = [](double setting, double lambda) {
        return negate(sign_outcome(std::cos(2.0 * (lambda - setting))));
    };
    model.lambda_density = LambdaDensity::continuous();
    return model;
}

// Lambda-averaged joint of a local model at settings (a, b). Each lambda
// contributes a point mass on one of the four cells, so the average is a
// tally. Continuous density: midpoint rule over [0, 2*pi) with `resolution`
// nodes. Discrete density: exact average over the n_tot equispaced points
// (`resolution` is not used; the sum is already exact).
inline JointDistribution lhv_joint(const LhvModel& model, double a, double b,
                                   std::uint64_t resolution) {
    if (resolution == 0) throw std::invalid_argument("lhv_joint: resolution must be >= 1");
    if (!model.outcome_a || !model.outcome_b) {
        throw validation_error("lhv_joint: model outcome functions must be set");
    }

    const bool discrete = model.lambda_density.kind == LambdaDensity::Kind::uniform_discrete;
    const std::uint64_t nodes = discrete ? model.lambda_density.n_tot : resolution;
    const double step = two_pi / static_cast<double>(nodes);
    const double offset = discrete ? 0.0 : 0.5;

    std::uint64_t counts[2][2] = {{0, 0}, {0, 0}};
    for (std::uint64_t k = 0; k < nodes; ++k) {
        const double lambda = (static_cast<double>(k) + offset) * step;
        const Outcome oa = model.outcome_a(a, lambda);
        const Outcome ob = model.outcome_b(b, lambda);
        ++counts[oa == Outcome::minus][ob == Outcome::minus];
    }

    const double n = static_cast<double>(nodes);
    return {static_cast<double>(counts[0][0]) / n, static_cast<double>(counts[0][1]) / n,
            static_cast<double>(counts[1][0]) / n, static_cast<double>(counts[1][1]) / n};
}

// Entangled photon-pair statistics at polarizer angles (a, b):
// (cos^2/2, sin^2/2, sin^2/2, cos^2/2) of the angle difference, so
// E(a,b) = cos 2(a-b).
inline JointDistribution qm_joint(double a, double b) {
    const double c = std::cos(a - b);
    const double s = std::sin(a - b);
    const double half_cc = 0.5 * c * c;
    const double half_ss = 0.5 * s * s;
    return {half_cc, half_ss, half_ss, half_cc};
}

// The settings quad where the entangled-pair statistics reach S = 2*sqrt(2):
// a = 0, b = pi/8, c = pi/4, d = 3*pi/8.
inline SettingsQuad optimal_qm_settings() {
    return {0.0, std::numbers::pi / 8.0, std::numbers::pi / 4.0, 3.0 * std::numbers::pi / 8.0};
}

// The four pair correlations of a settings quad under each model.

inline CorrelationSet qm_correlations(const SettingsQuad& q) {
    CorrelationSet corr;
    for (SettingPair p : all_setting_pairs) {
        set_correlation(corr, p,
                        correlation(qm_joint(wing_i_setting(p, q), wing_ii_setting(p, q))));
    }
    return corr;
}

inline CorrelationSet lhv_correlations(const LhvModel& model, const SettingsQuad& q,
                                       std::uint64_t resolution) {
    CorrelationSet corr;
    for (SettingPair p : all_setting_pairs) {
        set_correlation(corr, p,
                        correlation(lhv_joint(model, wing_i_setting(p, q), wing_ii_setting(p, q),
                                              resolution)));
    }
    return corr;
}

}  // namespace bellsim
