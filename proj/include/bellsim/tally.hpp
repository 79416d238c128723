// Integer outcome counts for one detector pair and their estimators.
#pragma once

#include <cmath>
#include <cstdint>

#include "bellsim/chsh.hpp"
#include "bellsim/errors.hpp"

namespace bellsim {

struct OutcomeTally {
    std::uint64_t n_pp = 0;
    std::uint64_t n_pm = 0;
    std::uint64_t n_mp = 0;
    std::uint64_t n_mm = 0;

    std::uint64_t total() const noexcept { return n_pp + n_pm + n_mp + n_mm; }

    void add(Outcome first, Outcome second) noexcept {
        if (first == Outcome::plus)
            (second == Outcome::plus ? n_pp : n_pm) += 1;
        else
            (second == Outcome::plus ? n_mp : n_mm) += 1;
    }

    JointDistribution empirical() const {
        const std::uint64_t n = total();
        if (n == 0) throw validation_error("empty outcome tally");
        const double dn = static_cast<double>(n);
        return JointDistribution{static_cast<double>(n_pp) / dn, static_cast<double>(n_pm) / dn,
                                 static_cast<double>(n_mp) / dn, static_cast<double>(n_mm) / dn};
    }

    // Signed count first, single division after: agreement minus disagreement.
    double empirical_correlation() const {
        const std::uint64_t n = total();
        if (n == 0) throw validation_error("empty outcome tally");
        const std::int64_t agree = static_cast<std::int64_t>(n_pp + n_mm);
        const std::int64_t disagree = static_cast<std::int64_t>(n_pm + n_mp);
        return static_cast<double>(agree - disagree) / static_cast<double>(n);
    }

    double correlation_standard_error() const {
        const double e = empirical_correlation();
        const double var = (1.0 - e * e) / static_cast<double>(total());
        return var > 0.0 ? std::sqrt(var) : 0.0;
    }

    OutcomeTally& operator+=(const OutcomeTally& other) noexcept {
        n_pp += other.n_pp;
        n_pm += other.n_pm;
        n_mp += other.n_mp;
        n_mm += other.n_mm;
        return *this;
    }

    friend bool operator==(const OutcomeTally&, const OutcomeTally&) = default;
};

}  // namespace bellsim
