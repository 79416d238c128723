#include "bellsim/montecarlo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

using namespace bellsim;

namespace {

RunConfig base_config(std::uint64_t trials, std::uint64_t seed) {
    RunConfig config;
    config.trials = trials;
    config.seed = seed;
    config.settings = optimal_qm_settings();
    config.model = ModelKind::qm;
    return config;
}

}  // namespace

TEST(RunConfigValidation, RejectsZeroTrialsAndZeroShards) {
    RunConfig config = base_config(0, 1);
    EXPECT_THROW(run(config), validation_error);
    config.trials = 10;
    config.shards = 0;
    EXPECT_THROW(run(config), validation_error);
}

TEST(ModelKind, Labels) {
    EXPECT_EQ(to_string(ModelKind::qm), "qm");
    EXPECT_EQ(to_string(ModelKind::lhv_reference), "lhv-ref");
}

TEST(Run, EmitsExactlyTheRequestedTrialsPerPair) {
    RunStats stats = run(base_config(1234, 9));
    for (SettingPair p : all_setting_pairs) {
        EXPECT_EQ(stats.pair(p).emitted, 1234u);
        EXPECT_EQ(stats.pair(p).detected(), 1234u);  // no erasure configured
    }
}

TEST(Run, IsDeterministicInSeed) {
    RunStats one = run(base_config(20000, 42));
    RunStats two = run(base_config(20000, 42));
    EXPECT_EQ(one, two);
    RunStats other = run(base_config(20000, 43));
    EXPECT_NE(one.pair(SettingPair::ab).outcomes, other.pair(SettingPair::ab).outcomes);
}

TEST(Run, ShardCountNeverChangesTheResult) {
    RunConfig config = base_config(300000, 7);
    config.noise = NoiseQuad::uniform(0.1);
    config.erasure = ErasureRates{0.2, 0.1};
    RunStats serial = run(config);
    config.shards = 2;
    RunStats two = run(config);
    config.shards = 8;
    RunStats eight = run(config);
    EXPECT_EQ(serial, two);
    EXPECT_EQ(serial, eight);
}

TEST(Run, QmAtOptimalSettingsReproducesTsirelsonWithinFourSigma) {
    RunStats stats = run(base_config(1000000, 3));
    double s = stats.empirical_s().value;
    double se = stats.s_standard_error();
    EXPECT_GT(se, 0.0);
    EXPECT_NEAR(s, 2.0 * std::sqrt(2.0), 4.0 * se);

    CorrelationSet corr = stats.empirical_correlations();
    double root_half = std::sqrt(0.5);
    double pair_se = stats.pair(SettingPair::ab).correlation_standard_error();
    EXPECT_NEAR(corr.e_ab, root_half, 4.0 * pair_se);
    EXPECT_NEAR(corr.e_ad, -root_half, 4.0 * pair_se);
}

TEST(Run, LhvReferenceAtEqualSettingsIsExactlyAntiCorrelated) {
    RunConfig config = base_config(50000, 5);
    config.model = ModelKind::lhv_reference;
    config.settings = SettingsQuad{0.7, 0.7, 0.7, 0.7};
    RunStats stats = run(config);
    for (SettingPair p : all_setting_pairs) {
        EXPECT_EQ(stats.pair(p).empirical_correlation(), -1.0);
    }
    EXPECT_EQ(stats.empirical_s().value, 2.0);
}

TEST(Run, LhvReferenceFollowsSawtoothWithinFourSigma) {
    // At a quarter-turn difference the sawtooth passes through zero.
    RunConfig config = base_config(1000000, 11);
    config.model = ModelKind::lhv_reference;
    config.settings = SettingsQuad{std::numbers::pi / 4.0, 0.0, 0.0, 0.0};
    RunStats stats = run(config);
    const PairRunStats& ab = stats.pair(SettingPair::ab);
    EXPECT_NEAR(ab.empirical_correlation(), 0.0, 4.0 * ab.correlation_standard_error());
}

TEST(Run, UniformNoiseShrinksTheStatisticByTheSquaredFactor) {
    const double eps = 0.1;
    RunConfig config = base_config(1000000, 13);
    config.noise = NoiseQuad::uniform(eps);
    RunStats stats = run(config);
    double factor = (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps);
    EXPECT_NEAR(stats.empirical_s().value, factor * 2.0 * std::sqrt(2.0),
                4.0 * stats.s_standard_error());
}

TEST(Run, FullFlipOnOneWingNegatesCorrelations) {
    RunConfig config = base_config(100000, 17);
    config.noise = NoiseQuad{1.0, 0.0, 1.0, 0.0};  // wing I always flips
    RunStats noisy = run(config);
    RunStats clean = run(base_config(100000, 17));
    for (SettingPair p : all_setting_pairs) {
        EXPECT_DOUBLE_EQ(noisy.pair(p).empirical_correlation(),
                         -clean.pair(p).empirical_correlation());
    }
}

TEST(Run, ErasureKeepsTheCoincidenceFractionNearTheProductLaw) {
    RunConfig config = base_config(1000000, 19);
    config.erasure = ErasureRates{0.3, 0.2};
    RunStats stats = run(config);
    double want = joint_detection_prob(*config.erasure);
    for (SettingPair p : all_setting_pairs) {
        const PairRunStats& pair = stats.pair(p);
        EXPECT_EQ(pair.emitted, 1000000u);
        double frac = static_cast<double>(pair.detected()) / static_cast<double>(pair.emitted);
        double se = std::sqrt(want * (1.0 - want) / static_cast<double>(pair.emitted));
        EXPECT_NEAR(frac, want, 4.0 * se);
    }
}

TEST(Run, ErasureLeavesTheCorrelationUnbiased) {
    RunConfig config = base_config(1000000, 23);
    config.erasure = ErasureRates{0.25, 0.25};
    RunStats stats = run(config);
    double s = stats.empirical_s().value;
    EXPECT_NEAR(s, 2.0 * std::sqrt(2.0), 4.0 * stats.s_standard_error());
}

TEST(Run, EstimatorErrorShrinksLikeOneOverRootTrials) {
    // Mean absolute error of the ab correlation across ten seeds, at three
    // decades of trial count; the log-log slope should sit near -1/2.
    const double truth = std::sqrt(0.5);
    const std::vector<std::uint64_t> sizes{10000, 100000, 1000000};
    std::vector<double> mean_abs_err;
    for (std::uint64_t m : sizes) {
        double sum = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            RunStats stats = run(base_config(m, seed));
            sum += std::abs(stats.pair(SettingPair::ab).empirical_correlation() - truth);
        }
        mean_abs_err.push_back(sum / 10.0);
    }
    double x1 = std::log10(static_cast<double>(sizes.front()));
    double x3 = std::log10(static_cast<double>(sizes.back()));
    double slope = (std::log10(mean_abs_err.back()) - std::log10(mean_abs_err.front())) /
                   (x3 - x1);
    EXPECT_GE(slope, -0.65) << "errors " << mean_abs_err[0] << " " << mean_abs_err[1] << " "
                            << mean_abs_err[2];
    EXPECT_LE(slope, -0.35) << "errors " << mean_abs_err[0] << " " << mean_abs_err[1] << " "
                            << mean_abs_err[2];
}

TEST(RunWithSelection, ValidatesInputs) {
    RunConfig config = base_config(0, 1);
    EXPECT_THROW(run_with_selection(config, ClassDetectionRates{0.5, 0.5}), validation_error);
    EXPECT_THROW(ClassDetectionRates(1.5, 0.5), validation_error);
    EXPECT_THROW(ClassDetectionRates(0.5, -0.1), validation_error);
}

TEST(RunWithSelection, EqualRatesLeaveZeroCorrelation) {
    RunConfig config = base_config(400000, 29);
    RunStats stats = run_with_selection(config, ClassDetectionRates{0.5, 0.5});
    for (SettingPair p : all_setting_pairs) {
        const PairRunStats& pair = stats.pair(p);
        EXPECT_NEAR(pair.empirical_correlation(), 0.0,
                    4.0 * pair.correlation_standard_error());
    }
}

TEST(RunWithSelection, OneSidedDetectionKeepsOnlyAgreeingPairs) {
    RunConfig config = base_config(100001, 31);
    RunStats stats = run_with_selection(config, ClassDetectionRates{1.0, 0.0});
    for (SettingPair p : all_setting_pairs) {
        const PairRunStats& pair = stats.pair(p);
        // Even trial indices are class one; with 100001 trials that is 50001.
        EXPECT_EQ(pair.detected(), 50001u);
        EXPECT_EQ(pair.empirical_correlation(), 1.0);
        EXPECT_EQ(pair.outcomes.n_pm + pair.outcomes.n_mp, 0u);
    }
}

TEST(RunWithSelection, BiasedRatesSkewTowardTheRateContrast) {
    RunConfig config = base_config(1000000, 37);
    RunStats stats = run_with_selection(config, ClassDetectionRates{0.75, 0.25});
    double want = (0.75 - 0.25) / (0.75 + 0.25);
    for (SettingPair p : all_setting_pairs) {
        const PairRunStats& pair = stats.pair(p);
        EXPECT_NEAR(pair.empirical_correlation(), want,
                    4.0 * pair.correlation_standard_error());
    }
}

TEST(RunWithSelection, ShardCountNeverChangesTheResult) {
    RunConfig config = base_config(200000, 41);
    RunStats serial = run_with_selection(config, ClassDetectionRates{0.8, 0.3});
    config.shards = 8;
    RunStats sharded = run_with_selection(config, ClassDetectionRates{0.8, 0.3});
    EXPECT_EQ(serial, sharded);
}

TEST(OutcomeTallyEstimators, EmptyTallyRejectsEstimation) {
    OutcomeTally tally;
    EXPECT_THROW(tally.empirical_correlation(), validation_error);
    EXPECT_THROW(tally.empirical(), validation_error);
}

TEST(OutcomeTallyEstimators, KnownCounts) {
    OutcomeTally tally{30, 10, 10, 50};
    EXPECT_EQ(tally.total(), 100u);
    EXPECT_DOUBLE_EQ(tally.empirical_correlation(), 0.6);
    EXPECT_DOUBLE_EQ(tally.correlation_standard_error(), std::sqrt((1.0 - 0.6 * 0.6) / 100.0));
    JointDistribution j = tally.empirical();
    EXPECT_DOUBLE_EQ(j.p_pp, 0.3);
    EXPECT_DOUBLE_EQ(j.p_mm, 0.5);
}

TEST(OutcomeTallyEstimators, PerfectAgreementHasZeroError) {
    OutcomeTally tally{100, 0, 0, 0};
    EXPECT_EQ(tally.empirical_correlation(), 1.0);
    EXPECT_EQ(tally.correlation_standard_error(), 0.0);
}
