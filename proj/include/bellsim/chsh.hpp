// Exact probability and correlation arithmetic for two-outcome Bell tests:
// joint outcome tables, the correlation functional and the CHSH statistic.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include "bellsim/errors.hpp"

namespace bellsim {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Tolerance for accepting a probability table as normalized and a
// correlation as lying in [-1, 1].
inline constexpr double normalization_tolerance = 1e-12;

// Binary measurement outcome.
enum class Outcome : std::uint8_t { plus, minus };

constexpr Outcome negate(Outcome o) noexcept {
    return o == Outcome::plus ? Outcome::minus : Outcome::plus;
}

// The +/-1 value entering product expectations.
constexpr int sign(Outcome o) noexcept { return o == Outcome::plus ? +1 : -1; }

constexpr char label(Outcome o) noexcept { return o == Outcome::plus ? '+' : '-'; }

// Joint outcome distribution for one setting pair.
// Cell order is (++, +-, -+, --) everywhere, including serialized output.
struct JointDistribution {
    double p_pp = 0.0;
    double p_pm = 0.0;
    double p_mp = 0.0;
    double p_mm = 0.0;

    constexpr double sum() const noexcept { return ((p_pp + p_pm) + p_mp) + p_mm; }
};

// Returns the input unchanged if it is a probability table: no negative
// cell, total within normalization_tolerance of 1.
inline const JointDistribution& validate_joint(const JointDistribution& joint) {
    for (double p : {joint.p_pp, joint.p_pm, joint.p_mp, joint.p_mm}) {
        if (!(p >= 0.0)) {
            throw negative_probability_error(
                "joint distribution has a negative (or NaN) cell: " + std::to_string(p));
        }
    }
    const double total = joint.sum();
    if (!(std::abs(total - 1.0) <= normalization_tolerance)) {
        throw non_normalized_error(
            "joint distribution sums to " + std::to_string(total) + ", expected 1");
    }
    return joint;
}

// E(a,b) = P(+,+) + P(-,-) - P(+,-) - P(-,+) for a validated table.
inline double correlation(const JointDistribution& joint) {
    validate_joint(joint);
    return ((joint.p_pp + joint.p_mm) - joint.p_pm) - joint.p_mp;
}

inline double reduce_angle(double radians) {
    if (!std::isfinite(radians)) {
        throw validation_error("analyzer angle must be finite");
    }
    double r = std::fmod(radians, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;  // fmod/rounding edge
    return r;
}

// The four analyzer angles of a CHSH run: a, c on wing I and b, d on wing II.
// Radians, reduced to [0, 2*pi) on construction.
class SettingsQuad {
public:
    SettingsQuad() = default;
    SettingsQuad(double a, double b, double c, double d)
        : a_(reduce_angle(a)), b_(reduce_angle(b)), c_(reduce_angle(c)), d_(reduce_angle(d)) {}

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double c() const noexcept { return c_; }
    double d() const noexcept { return d_; }

private:
    double a_ = 0.0;
    double b_ = 0.0;
    double c_ = 0.0;
    double d_ = 0.0;
};

// The four correlations entering the CHSH sum.
struct CorrelationSet {
    double e_ab = 0.0;
    double e_ad = 0.0;
    double e_cb = 0.0;
    double e_cd = 0.0;
};

inline const CorrelationSet& validate(const CorrelationSet& corr) {
    int i = 0;
    for (double e : {corr.e_ab, corr.e_ad, corr.e_cb, corr.e_cd}) {
        ++i;
        if (!(std::abs(e) <= 1.0 + normalization_tolerance)) {
            throw validation_error("correlation " + std::to_string(i) + " is " +
                                   std::to_string(e) + ", outside [-1, 1]");
        }
    }
    return corr;
}

// Value of the CHSH sum; 0 <= s <= 4 for correlations in [-1, 1].
struct ChshStatistic {
    double value = 0.0;
};

// S = |E(a,b) - E(a,d)| + |E(c,b) + E(c,d)|
inline ChshStatistic chsh(const CorrelationSet& corr) {
    validate(corr);
    return {std::abs(corr.e_ab - corr.e_ad) + std::abs(corr.e_cb + corr.e_cd)};
}

// The four setting pairs measured in a CHSH run, in fixed order.
enum class SettingPair : std::uint8_t { ab = 0, ad = 1, cb = 2, cd = 3 };

inline constexpr std::array<SettingPair, 4> all_setting_pairs{
    SettingPair::ab, SettingPair::ad, SettingPair::cb, SettingPair::cd};

constexpr std::string_view to_string(SettingPair p) noexcept {
    switch (p) {
        case SettingPair::ab: return "ab";
        case SettingPair::ad: return "ad";
        case SettingPair::cb: return "cb";
        case SettingPair::cd: return "cd";
    }
    return "??";
}

inline double wing_i_setting(SettingPair p, const SettingsQuad& q) noexcept {
    return (p == SettingPair::ab || p == SettingPair::ad) ? q.a() : q.c();
}

inline double wing_ii_setting(SettingPair p, const SettingsQuad& q) noexcept {
    return (p == SettingPair::ab || p == SettingPair::cb) ? q.b() : q.d();
}

inline double correlation_for(const CorrelationSet& corr, SettingPair p) noexcept {
    switch (p) {
        case SettingPair::ab: return corr.e_ab;
        case SettingPair::ad: return corr.e_ad;
        case SettingPair::cb: return corr.e_cb;
        case SettingPair::cd: return corr.e_cd;
    }
    return 0.0;
}

inline void set_correlation(CorrelationSet& corr, SettingPair p, double value) noexcept {
    switch (p) {
        case SettingPair::ab: corr.e_ab = value; return;
        case SettingPair::ad: corr.e_ad = value; return;
        case SettingPair::cb: corr.e_cb = value; return;
        case SettingPair::cd: corr.e_cd = value; return;
    }
}

}  // namespace bellsim
