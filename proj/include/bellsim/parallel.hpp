// Deterministic work partitioning for the trial engines.
#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace bellsim::detail {

// Trials are grouped into fixed-size blocks handed round-robin to workers.
// Per-trial randomness depends only on the global trial index, and tallies
// are additive integers merged in worker order, so the result is identical
// for every worker count.
inline constexpr std::uint64_t trial_block_size = 1u << 16;

template <typename Tally, typename PerTrial>
Tally sharded_tally(std::uint64_t trials, unsigned workers, PerTrial per_trial) {
    if (workers <= 1 || trials <= trial_block_size) {
        Tally total{};
        for (std::uint64_t t = 0; t < trials; ++t) per_trial(total, t);
        return total;
    }

    const std::uint64_t n_blocks = (trials + trial_block_size - 1) / trial_block_size;
    std::vector<Tally> partials(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            Tally local{};
            for (std::uint64_t blk = w; blk < n_blocks; blk += workers) {
                const std::uint64_t begin = blk * trial_block_size;
                const std::uint64_t end =
                    begin + trial_block_size < trials ? begin + trial_block_size : trials;
                for (std::uint64_t t = begin; t < end; ++t) per_trial(local, t);
            }
            partials[w] = local;
        });
    }
    for (auto& th : threads) th.join();

    Tally total{};
    for (const Tally& p : partials) total += p;
    return total;
}

}  // namespace bellsim::detail
