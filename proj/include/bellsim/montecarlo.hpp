// Seed-deterministic trial engine: samples pair outcomes from either model,
// pushes them through per-wing flip channels and erasure detection, and
// reports coincidence tallies with binomial error bars.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "bellsim/chsh.hpp"
#include "bellsim/errors.hpp"
#include "bellsim/models.hpp"
#include "bellsim/noise.hpp"
#include "bellsim/parallel.hpp"
#include "bellsim/rng.hpp"
#include "bellsim/tally.hpp"

namespace bellsim {

enum class ModelKind : std::uint8_t { lhv_reference, qm };

constexpr std::string_view to_string(ModelKind m) noexcept {
    return m == ModelKind::qm ? "qm" : "lhv-ref";
}

struct RunConfig {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    unsigned shards = 1;
    SettingsQuad settings;
    std::optional<NoiseQuad> noise;
    std::optional<ErasureRates> erasure;
    ModelKind model = ModelKind::qm;
};

// Counts for one setting pair: every emitted pair, and the outcome tally of
// the coincidences that survived detection.
struct PairRunStats {
    std::uint64_t emitted = 0;
    OutcomeTally outcomes;

    std::uint64_t detected() const noexcept { return outcomes.total(); }
    double empirical_correlation() const { return outcomes.empirical_correlation(); }
    double correlation_standard_error() const { return outcomes.correlation_standard_error(); }

    PairRunStats& operator+=(const PairRunStats& other) noexcept {
        emitted += other.emitted;
        outcomes += other.outcomes;
        return *this;
    }

    friend bool operator==(const PairRunStats&, const PairRunStats&) = default;
};

struct RunStats {
    std::array<PairRunStats, 4> pairs{};

    const PairRunStats& pair(SettingPair p) const { return pairs[static_cast<int>(p)]; }
    PairRunStats& pair(SettingPair p) { return pairs[static_cast<int>(p)]; }

    CorrelationSet empirical_correlations() const {
        CorrelationSet corr;
        for (SettingPair p : all_setting_pairs)
            set_correlation(corr, p, pair(p).empirical_correlation());
        return corr;
    }

    ChshStatistic empirical_s() const { return chsh(empirical_correlations()); }

    // Pair counts are independent, so variances add across the four terms.
    double s_standard_error() const {
        double var = 0.0;
        for (SettingPair p : all_setting_pairs) {
            const double se = pair(p).correlation_standard_error();
            var += se * se;
        }
        return std::sqrt(var);
    }

    friend bool operator==(const RunStats&, const RunStats&) = default;
};

namespace detail {

// Fixed per-trial draw indices. Unused draws are never generated, but the
// assignment is static so optional channels cannot shift the sequence.
inline constexpr std::uint32_t draw_outcome = 0;
inline constexpr std::uint32_t draw_flip_wing_i = 1;
inline constexpr std::uint32_t draw_flip_wing_ii = 2;
inline constexpr std::uint32_t draw_erase_wing_i = 3;
inline constexpr std::uint32_t draw_erase_wing_ii = 4;
inline constexpr std::uint32_t draw_class_detect = 5;

inline void validate_run_config(const RunConfig& config) {
    if (config.trials < 1) throw validation_error("trial count must be positive");
    if (config.shards < 1) throw validation_error("shard count must be positive");
}

struct CellThresholds {
    double c1, c2, c3;
};

inline CellThresholds thresholds(const JointDistribution& joint) {
    return {joint.p_pp, joint.p_pp + joint.p_pm, joint.p_pp + joint.p_pm + joint.p_mp};
}

}  // namespace detail

// Emits `trials` pairs per setting pair. Each trial:
//   draw 0   samples the model (hidden variable or joint cell),
//   draws 1-2 flip each wing with its channel rate,
//   draws 3-4 erase each wing with its erasure rate.
// A pair is tallied only when both wings detect. Per-trial randomness is a
// pure function of (seed, pair, trial index, draw), so shard count cannot
// change the result.
inline RunStats run(const RunConfig& config) {
    detail::validate_run_config(config);
    const LhvModel lhv =
        config.model == ModelKind::lhv_reference ? reference_lhv_model() : LhvModel{};

    RunStats stats;
    for (SettingPair p : all_setting_pairs) {
        const double setting_i = wing_i_setting(p, config.settings);
        const double setting_ii = wing_ii_setting(p, config.settings);
        const CounterRng rng(config.seed, static_cast<std::uint32_t>(p));

        const detail::CellThresholds qm_cells =
            detail::thresholds(config.model == ModelKind::qm
                                   ? qm_joint(setting_i, setting_ii)
                                   : JointDistribution{1.0, 0.0, 0.0, 0.0});

        const double flip_i = config.noise ? config.noise->wing_i_rate(p).value() : 0.0;
        const double flip_ii = config.noise ? config.noise->wing_ii_rate(p).value() : 0.0;

        stats.pair(p) = detail::sharded_tally<PairRunStats>(
            config.trials, config.shards, [&](PairRunStats& tally, std::uint64_t t) {
                Outcome oa;
                Outcome ob;
                const double u = rng.uniform(t, detail::draw_outcome);
                if (config.model == ModelKind::qm) {
                    oa = u < qm_cells.c2 ? Outcome::plus : Outcome::minus;
                    ob = (u < qm_cells.c1 || (u >= qm_cells.c2 && u < qm_cells.c3))
                             ? Outcome::plus
                             : Outcome::minus;
                } else {
                    double lambda;
                    const LambdaDensity& density = lhv.lambda_density;
                    if (density.kind == LambdaDensity::Kind::uniform_discrete) {
                        std::uint64_t k = static_cast<std::uint64_t>(
                            u * static_cast<double>(density.n_tot));
                        if (k >= density.n_tot) k = density.n_tot - 1;
                        lambda = static_cast<double>(k) * two_pi /
                                 static_cast<double>(density.n_tot);
                    } else {
                        lambda = u * two_pi;
                    }
                    oa = lhv.outcome_a(setting_i, lambda);
                    ob = lhv.outcome_b(setting_ii, lambda);
                }

                if (flip_i > 0.0 && rng.uniform(t, detail::draw_flip_wing_i) < flip_i)
                    oa = negate(oa);
                if (flip_ii > 0.0 && rng.uniform(t, detail::draw_flip_wing_ii) < flip_ii)
                    ob = negate(ob);

                bool coincide = true;
                if (config.erasure) {
                    coincide =
                        !(rng.uniform(t, detail::draw_erase_wing_i) < config.erasure->delta_a) &&
                        !(rng.uniform(t, detail::draw_erase_wing_ii) < config.erasure->delta_b);
                }

                tally.emitted += 1;
                if (coincide) tally.outcomes.add(oa, ob);
            });
    }
    return stats;
}

// Detection rates for the two emission classes of the biased-sampling
// demonstration: class 1 pairs agree, class 2 pairs disagree.
struct ClassDetectionRates {
    double c1 = 1.0;
    double c2 = 1.0;

    ClassDetectionRates() = default;
    ClassDetectionRates(double rate_c1, double rate_c2) : c1(rate_c1), c2(rate_c2) {
        for (double r : {rate_c1, rate_c2}) {
            if (!(r >= 0.0 && r <= 1.0))
                throw validation_error("class detection rate must lie in [0, 1]");
        }
    }
};

// Emission alternates deterministically between the two classes. Each trial
// draws a random shared sign; class 1 reports it on both wings, class 2
// negates wing II. Detection is a single per-pair draw against the class
// rate, so an unequal pair of rates skews the surviving mixture toward
// (r1 - r2)/(r1 + r2) even though the emitted mixture has zero correlation.
inline RunStats run_with_selection(const RunConfig& config, const ClassDetectionRates& bias) {
    detail::validate_run_config(config);

    RunStats stats;
    for (SettingPair p : all_setting_pairs) {
        const CounterRng rng(config.seed, stream_selection + static_cast<std::uint32_t>(p));
        stats.pair(p) = detail::sharded_tally<PairRunStats>(
            config.trials, config.shards, [&](PairRunStats& tally, std::uint64_t t) {
                const bool class_one = t % 2 == 0;
                const Outcome base = rng.uniform(t, detail::draw_outcome) < 0.5
                                         ? Outcome::plus
                                         : Outcome::minus;
                const Outcome oa = base;
                const Outcome ob = class_one ? base : negate(base);
                const double rate = class_one ? bias.c1 : bias.c2;

                tally.emitted += 1;
                if (rng.uniform(t, detail::draw_class_detect) < rate) tally.outcomes.add(oa, ob);
            });
    }
    return stats;
}

}  // namespace bellsim
