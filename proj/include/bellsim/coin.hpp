// Four-station coin apparatus with a one-directional fault on a single link.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "bellsim/chsh.hpp"
#include "bellsim/errors.hpp"
#include "bellsim/parallel.hpp"
#include "bellsim/rng.hpp"
#include "bellsim/tally.hpp"

namespace bellsim {

// A coin is cut down the middle and the halves are sent to two stations.
// Cameras at both stations read the same face marking, so every stage
// receives a pair of identical signals. Stage indices map to setting pairs
// in order: stage 1 <-> (a,b), stage 2 <-> (a,d), stage 3 <-> (c,b),
// stage 4 <-> (c,d).

// Fault on the cable carrying camera A's first-setting signal into stage 2:
// a "+" is dropped to "-" with probability epsilon, a "-" always arrives
// intact. Every other link is perfect.
class FaultSpec {
  public:
    static constexpr std::string_view faulty_link = "A(a)->stage2";

    FaultSpec() = default;
    explicit FaultSpec(double epsilon) : epsilon_(epsilon) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0))
            throw validation_error("fault rate must lie in [0, 1]");
    }

    double epsilon() const noexcept { return epsilon_; }

  private:
    double epsilon_ = 0.0;
};

// One cut of the coin, recorded at the cameras and at the faulty link.
// The cameras are deterministic: all four signals equal the coin
// orientation. Only the copy of the first A signal that reaches stage 2
// can differ from a_signal.
struct CoinTrial {
    Outcome orientation = Outcome::plus;
    Outcome a_signal = Outcome::plus;
    Outcome c_signal = Outcome::plus;
    Outcome b_signal = Outcome::plus;
    Outcome d_signal = Outcome::plus;
    Outcome a_signal_at_stage2 = Outcome::plus;
};

// Draw 0 decides the coin orientation; draw 1 is consumed only when the
// faulty link actually has a "+" to drop, and only when epsilon > 0.
inline CoinTrial coin_trial(const FaultSpec& fault, std::uint64_t seed, std::uint64_t trial_index) {
    const CounterRng rng(seed, stream_coin);

    CoinTrial trial;
    trial.orientation = rng.uniform(trial_index, 0) < 0.5 ? Outcome::plus : Outcome::minus;
    trial.a_signal = trial.orientation;
    trial.c_signal = trial.orientation;
    trial.b_signal = trial.orientation;
    trial.d_signal = trial.orientation;

    trial.a_signal_at_stage2 = trial.a_signal;
    if (trial.a_signal == Outcome::plus && fault.epsilon() > 0.0 &&
        rng.uniform(trial_index, 1) < fault.epsilon())
        trial.a_signal_at_stage2 = Outcome::minus;
    return trial;
}

// Joint outcome statistics recorded at the source cameras: perfectly
// correlated halves regardless of which settings the stage compares.
inline JointDistribution camera_joint(SettingPair) {
    return JointDistribution{0.5, 0.0, 0.0, 0.5};
}

// Statistics the stage counters actually see. The fault converts (+,+)
// camera events at stage 2 into (-,+) with probability epsilon.
inline JointDistribution counter_joint(SettingPair pair, const FaultSpec& fault) {
    if (pair != SettingPair::ad) return camera_joint(pair);
    const double eps = fault.epsilon();
    return JointDistribution{0.5 * (1.0 - eps), 0.0, 0.5 * eps, 0.5};
}

// Statistic over the counter statistics; grows past the classical bound as
// the fault rate rises even though every signal pair leaves the cameras
// perfectly correlated.
inline ChshStatistic coin_s(double epsilon) {
    const FaultSpec fault(epsilon);
    CorrelationSet set;
    for (SettingPair pair : all_setting_pairs)
        set_correlation(set, pair, correlation(counter_joint(pair, fault)));
    return chsh(set);
}

// Counts from all four stages over a common number of cuts.
struct CounterTallies {
    std::uint64_t trials = 0;
    std::array<OutcomeTally, 4> stages{};

    const OutcomeTally& stage(SettingPair pair) const { return stages[static_cast<int>(pair)]; }
    OutcomeTally& stage(SettingPair pair) { return stages[static_cast<int>(pair)]; }

    CorrelationSet empirical_correlations() const {
        CorrelationSet set;
        for (SettingPair pair : all_setting_pairs)
            set_correlation(set, pair, stage(pair).empirical_correlation());
        return set;
    }

    ChshStatistic empirical_s() const { return chsh(empirical_correlations()); }

    // Stage counts are independent, so the statistic's variance is the sum
    // of the per-stage correlation variances.
    double s_standard_error() const {
        double var = 0.0;
        for (SettingPair pair : all_setting_pairs) {
            const double se = stage(pair).correlation_standard_error();
            var += se * se;
        }
        return std::sqrt(var);
    }

    CounterTallies& operator+=(const CounterTallies& other) noexcept {
        trials += other.trials;
        for (std::size_t i = 0; i < stages.size(); ++i) stages[i] += other.stages[i];
        return *this;
    }

    friend bool operator==(const CounterTallies&, const CounterTallies&) = default;
};

// Every cut feeds all four stages, so the four stage totals stay equal.
// Stage 2 reads the post-fault copy of the A signal; the rest read the
// camera signals directly.
inline CounterTallies simulate_coin(std::uint64_t trials, const FaultSpec& fault,
                                    std::uint64_t seed, unsigned workers = 1) {
    if (trials == 0) throw validation_error("trial count must be positive");
    CounterTallies result = detail::sharded_tally<CounterTallies>(
        trials, workers, [&](CounterTallies& tally, std::uint64_t t) {
            const CoinTrial trial = coin_trial(fault, seed, t);
            tally.stage(SettingPair::ab).add(trial.a_signal, trial.b_signal);
            tally.stage(SettingPair::ad).add(trial.a_signal_at_stage2, trial.d_signal);
            tally.stage(SettingPair::cb).add(trial.c_signal, trial.b_signal);
            tally.stage(SettingPair::cd).add(trial.c_signal, trial.d_signal);
            tally.trials += 1;
        });
    return result;
}

}  // namespace bellsim
