// Sampling, detection and hidden-variable overlap analysis: probability of a
// class-balanced detected sample, the statistic under per-pair detection
// weights, and the chance that two runs share their hidden-variable draws.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "bellsim/chsh.hpp"
#include "bellsim/errors.hpp"

namespace bellsim {

namespace detail {

inline double log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw validation_error("binomial lower index exceeds upper index");
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace detail

// N pairs split evenly into two classes; a fraction phi of the pairs is
// detected. Balance means N*phi/2 detections drawn from each class, so
// N must be even and N*phi an even integer.
class SampleSpec {
  public:
    SampleSpec(std::uint64_t n_pairs, double detected_fraction)
        : n_pairs_(n_pairs), detected_fraction_(detected_fraction) {
        if (n_pairs < 2 || n_pairs % 2 != 0)
            throw validation_error("pair count must be a positive even integer");
        if (!(detected_fraction > 0.0 && detected_fraction <= 1.0))
            throw validation_error("detected fraction must lie in (0, 1]");
        const double per_class = static_cast<double>(n_pairs) * detected_fraction / 2.0;
        const double rounded = std::round(per_class);
        if (std::abs(per_class - rounded) > 1e-9 * std::max(1.0, per_class))
            throw validation_error("pair count times detected fraction must be an even integer");
        detected_per_class_ = static_cast<std::uint64_t>(rounded);
        if (detected_per_class_ < 1 || detected_per_class_ > n_pairs / 2)
            throw validation_error("per-class detections must lie in [1, N/2]");
    }

    std::uint64_t n_pairs() const noexcept { return n_pairs_; }
    double detected_fraction() const noexcept { return detected_fraction_; }
    std::uint64_t class_size() const noexcept { return n_pairs_ / 2; }
    std::uint64_t detected_per_class() const noexcept { return detected_per_class_; }
    std::uint64_t detected_total() const noexcept { return 2 * detected_per_class_; }

  private:
    std::uint64_t n_pairs_;
    double detected_fraction_;
    std::uint64_t detected_per_class_{};
};

// C(N/2, Nphi/2)^2 (1/2)^(Nphi) in natural-log space, evaluated exactly as
// printed. The expression is not normalized over any sampling model and can
// exceed probability 1 for some inputs; it is reported verbatim, with the
// hypergeometric variant below as the self-consistent alternative.
inline double equilibrate_sampling_log_prob(const SampleSpec& spec) {
    const double log_choose = detail::log_binomial(spec.class_size(), spec.detected_per_class());
    return 2.0 * log_choose -
           static_cast<double>(spec.detected_total()) * std::numbers::ln2;
}

// Probability that a uniformly random Nphi-subset of the N pairs contains
// exactly Nphi/2 pairs from each class: C(N/2, Nphi/2)^2 / C(N, Nphi).
inline double hypergeometric_balanced_log_prob(const SampleSpec& spec) {
    const double log_choose = detail::log_binomial(spec.class_size(), spec.detected_per_class());
    return 2.0 * log_choose - detail::log_binomial(spec.n_pairs(), spec.detected_total());
}

// Per-pair detection weights entering the weighted statistic. The weights
// are free parameters; admissibility depends on the correlations they
// multiply and is checked where they are applied.
struct DeltaQuad {
    double d1 = 1.0;
    double d2 = 1.0;
    double d3 = 1.0;
    double d4 = 1.0;

    friend bool operator==(const DeltaQuad&, const DeltaQuad&) = default;
};

namespace detail {

// Admissibility slack: witnesses built from 1/E can overshoot |t| = 1 by a
// few ulp, which must not trip the constraint check.
inline constexpr double delta_constraint_slack = 1e-9;

inline std::array<double, 4> delta_terms(const CorrelationSet& corr, const DeltaQuad& deltas) {
    validate(corr);
    const std::array<double, 4> ds{deltas.d1, deltas.d2, deltas.d3, deltas.d4};
    std::array<double, 4> terms{};
    for (int i = 0; i < 4; ++i) {
        const double e = correlation_for(corr, all_setting_pairs[static_cast<std::size_t>(i)]);
        const double t = ds[static_cast<std::size_t>(i)] * e;
        if (!(std::abs(t) <= 1.0 + delta_constraint_slack))
            throw constraint_violation_error(
                "delta " + std::to_string(i + 1) + " violates |delta * correlation| <= 1", i + 1);
        terms[static_cast<std::size_t>(i)] = t;
    }
    return terms;
}

}  // namespace detail

// | d1 E(a,b) - d2 E(a,d) | + | d3 E(c,b) + d4 E(c,d) |, each product
// constrained to [-1, 1]. A zero correlation pins its term to zero no
// matter the weight.
inline ChshStatistic s_delta(const CorrelationSet& corr, const DeltaQuad& deltas) {
    const std::array<double, 4> t = detail::delta_terms(corr, deltas);
    return {std::abs(t[0] - t[1]) + std::abs(t[2] + t[3])};
}

// Attainable range of s_delta over admissible weights, with a weight quad
// that realizes the upper end.
struct SDeltaRange {
    double low = 0.0;
    double high = 0.0;
    DeltaQuad high_witness;
};

namespace detail {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline Interval abs_interval(Interval v) {
    if (v.lo <= 0.0 && 0.0 <= v.hi) return {0.0, std::max(-v.lo, v.hi)};
    const double a = std::abs(v.lo);
    const double b = std::abs(v.hi);
    return {std::min(a, b), std::max(a, b)};
}

}  // namespace detail

// Each product term ranges over [-1, 1] where the correlation is nonzero
// and is pinned to 0 where it vanishes; the range of the statistic follows
// by interval arithmetic, which is exact here because the two absolute
// terms depend on disjoint weights.
inline SDeltaRange s_delta_range(const CorrelationSet& corr) {
    validate(corr);
    std::array<detail::Interval, 4> t{};
    std::array<double, 4> es{};
    for (int i = 0; i < 4; ++i) {
        const double e = correlation_for(corr, all_setting_pairs[static_cast<std::size_t>(i)]);
        es[static_cast<std::size_t>(i)] = e;
        t[static_cast<std::size_t>(i)] =
            e != 0.0 ? detail::Interval{-1.0, 1.0} : detail::Interval{0.0, 0.0};
    }

    const detail::Interval diff = detail::abs_interval({t[0].lo - t[1].hi, t[0].hi - t[1].lo});
    const detail::Interval sum = detail::abs_interval({t[2].lo + t[3].lo, t[2].hi + t[3].hi});

    // Corner pick realizing the maxima of |t1 - t2| and |t3 + t4|.
    std::array<double, 4> best{t[0].hi, t[1].lo, t[2].hi, t[3].hi};
    if (std::abs(t[0].lo - t[1].hi) > std::abs(t[0].hi - t[1].lo)) {
        best[0] = t[0].lo;
        best[1] = t[1].hi;
    }
    if (std::abs(t[2].lo + t[3].lo) > std::abs(t[2].hi + t[3].hi)) {
        best[2] = t[2].lo;
        best[3] = t[3].lo;
    }

    SDeltaRange range;
    range.low = diff.lo + sum.lo;
    range.high = diff.hi + sum.hi;
    range.high_witness = DeltaQuad{es[0] != 0.0 ? best[0] / es[0] : 0.0,
                                   es[1] != 0.0 ? best[1] / es[1] : 0.0,
                                   es[2] != 0.0 ? best[2] / es[2] : 0.0,
                                   es[3] != 0.0 ? best[3] / es[3] : 0.0};
    return range;
}

// Two runs of n hidden-variable draws out of n_tot distinct values.
class OverlapSpec {
  public:
    OverlapSpec(std::uint64_t n, std::uint64_t n_tot) : n_(n), n_tot_(n_tot) {
        if (n < 1) throw validation_error("sample size must be positive");
        if (n > n_tot)
            throw validation_error(
                "sample size exceeds the number of distinct values; "
                "the overlap probability is zero and has no finite log");
    }

    std::uint64_t n() const noexcept { return n_; }
    std::uint64_t n_tot() const noexcept { return n_tot_; }

  private:
    std::uint64_t n_;
    std::uint64_t n_tot_;
};

// log prod_{i=0}^{n-1} (n - i)/(n_tot - i), summed term by term so that
// n = 20000 draws from n_tot = 10^9 stay finite. Each term is 0 when
// n = n_tot, so the total is exactly 0 there.
inline double overlap_log_prob(const OverlapSpec& spec) {
    double sum = 0.0;
    for (std::uint64_t i = 0; i < spec.n(); ++i) {
        sum += std::log(static_cast<double>(spec.n() - i)) -
               std::log(static_cast<double>(spec.n_tot() - i));
    }
    return sum;
}

// Overlap log-probability across an increasing list of value-space sizes;
// the result is strictly decreasing.
inline std::vector<double> overlap_limit_scan(std::uint64_t n,
                                              const std::vector<std::uint64_t>& n_tot_values) {
    for (std::size_t i = 1; i < n_tot_values.size(); ++i) {
        if (n_tot_values[i] <= n_tot_values[i - 1])
            throw validation_error("value-space sizes must be strictly increasing");
    }
    std::vector<double> result;
    result.reserve(n_tot_values.size());
    for (std::uint64_t n_tot : n_tot_values)
        result.push_back(overlap_log_prob(OverlapSpec(n, n_tot)));
    return result;
}

}  // namespace bellsim
