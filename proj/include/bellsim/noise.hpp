// Binary-symmetric-channel corruption of marginals and joints, the noisy
// correlation scaling law, the noisy CHSH sum and its critical noise level,
// and the erasure model of detection efficiency.
#pragma once

#include <cmath>
#include <string>

#include "bellsim/chsh.hpp"

namespace bellsim {

// Flip probability of a binary symmetric channel.
class BscRate {
public:
    BscRate() = default;

    explicit BscRate(double epsilon) : epsilon_(epsilon) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
            throw validation_error("BSC rate " + std::to_string(epsilon) + " outside [0, 1]");
        }
    }

    double value() const noexcept { return epsilon_; }

private:
    double epsilon_ = 0.0;
};

// One flip rate per (wing, setting) channel:
// eps1 = wing I at a, eps2 = wing II at b, eps3 = wing I at c, eps4 = wing II at d.
struct NoiseQuad {
    BscRate eps1, eps2, eps3, eps4;

    NoiseQuad() = default;
    NoiseQuad(double e1, double e2, double e3, double e4)
        : eps1(e1), eps2(e2), eps3(e3), eps4(e4) {}

    static NoiseQuad uniform(double epsilon) {
        return {epsilon, epsilon, epsilon, epsilon};
    }

    // Channel rates seen by a setting pair: eps1/eps3 by wing-I setting,
    // eps2/eps4 by wing-II setting.
    BscRate wing_i_rate(SettingPair p) const noexcept {
        return (p == SettingPair::ab || p == SettingPair::ad) ? eps1 : eps3;
    }
    BscRate wing_ii_rate(SettingPair p) const noexcept {
        return (p == SettingPair::ab || p == SettingPair::cb) ? eps2 : eps4;
    }
};

// Non-detection probabilities of the two wings (erasure channel).
struct ErasureRates {
    double delta_a = 0.0;
    double delta_b = 0.0;

    ErasureRates() = default;
    ErasureRates(double da, double db) : delta_a(da), delta_b(db) {
        for (double d : {da, db}) {
            if (!(d >= 0.0 && d <= 1.0)) {
                throw validation_error("erasure rate " + std::to_string(d) + " outside [0, 1]");
            }
        }
    }
};

// Marginal through a BSC: p(1 - 2*eps) + eps.
inline double bsc_marginal(double p, BscRate eps) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw validation_error("probability " + std::to_string(p) + " outside [0, 1]");
    }
    return p * (1.0 - 2.0 * eps.value()) + eps.value();
}

// Joint through independent per-wing BSCs: each output cell mixes the four
// input cells with weights (1-eps) / eps per wing. Applied to a
// lambda-averaged factorized joint this also covers the local-model case,
// since the channel is linear in the distribution.
inline JointDistribution bsc_joint(const JointDistribution& joint, BscRate eps_a, BscRate eps_b) {
    validate_joint(joint);
    const double ea = eps_a.value();
    const double eb = eps_b.value();
    const double ka = 1.0 - ea;
    const double kb = 1.0 - eb;
    return {
        joint.p_pp * ka * kb + joint.p_mp * ea * kb + joint.p_pm * ka * eb + joint.p_mm * ea * eb,
        joint.p_pm * ka * kb + joint.p_mm * ea * kb + joint.p_pp * ka * eb + joint.p_mp * ea * eb,
        joint.p_mp * ka * kb + joint.p_pp * ea * kb + joint.p_mm * ka * eb + joint.p_pm * ea * eb,
        joint.p_mm * ka * kb + joint.p_pm * ea * kb + joint.p_mp * ka * eb + joint.p_pp * ea * eb,
    };
}

// Noisy correlation scaling law: E_eps = (1 - 2*eps_a)(1 - 2*eps_b) E.
inline double noisy_correlation(double e, BscRate eps_a, BscRate eps_b) {
    if (!(std::abs(e) <= 1.0 + normalization_tolerance)) {
        throw validation_error("correlation " + std::to_string(e) + " outside [-1, 1]");
    }
    return (1.0 - 2.0 * eps_a.value()) * (1.0 - 2.0 * eps_b.value()) * e;
}

// CHSH sum with per-channel noise factors:
// S_eps = |(1-2e1)[(1-2e2) E(a,b) - (1-2e4) E(a,d)]|
//       + |(1-2e3)[(1-2e2) E(c,b) + (1-2e4) E(c,d)]|
inline ChshStatistic s_epsilon(const CorrelationSet& corr, const NoiseQuad& noise) {
    validate(corr);
    const double f1 = 1.0 - 2.0 * noise.eps1.value();
    const double f2 = 1.0 - 2.0 * noise.eps2.value();
    const double f3 = 1.0 - 2.0 * noise.eps3.value();
    const double f4 = 1.0 - 2.0 * noise.eps4.value();
    return {std::abs(f1 * (f2 * corr.e_ab - f4 * corr.e_ad)) +
            std::abs(f3 * (f2 * corr.e_cb + f4 * corr.e_cd))};
}

// Equal-noise threshold: the eps where (1 - 2*eps)^2 * s_ideal = 2. The noisy
// sum stays below 2 for every eps in (eps*, 1/2]. Undefined when s_ideal <= 2.
inline BscRate critical_epsilon(ChshStatistic s_ideal) {
    if (!(s_ideal.value > 2.0)) {
        throw no_violation_error("no violation: S = " + std::to_string(s_ideal.value) +
                                 " does not exceed 2, threshold undefined");
    }
    return BscRate{(1.0 - std::sqrt(2.0 / s_ideal.value)) / 2.0};
}

// Probability that both wings detect: (1 - delta_a)(1 - delta_b).
inline double joint_detection_prob(const ErasureRates& rates) {
    return (1.0 - rates.delta_a) * (1.0 - rates.delta_b);
}

}  // namespace bellsim
