#ifndef SWITCHLAG_UTIL_HPP
#define SWITCHLAG_UTIL_HPP

/// @file util.hpp
/// @brief RNG streams, deterministic reductions and a chunked parallel loop.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace switchlag {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// One independent, reproducible stream per (base seed, path index).
inline std::mt19937_64 make_path_rng(uint64_t base_seed, uint64_t path_index) {
    uint64_t s = splitmix64(splitmix64(base_seed) ^ splitmix64(path_index + 0x51ed2701ULL));
    return std::mt19937_64(s);
}

/// Uniform in [0,1) from the top 53 bits; stdlib distributions are avoided
/// so streams are identical across standard-library implementations.
inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

inline double sample_exponential(std::mt19937_64& rng, double rate) {
    return -std::log1p(-uniform01(rng)) / rate;
}

/// Pairwise (tree) sum: deterministic for a fixed element order, accurate
/// for large n.
inline double tree_sum(const std::vector<double>& xs, size_t lo, size_t hi) {
    if (hi - lo <= 8) {
        double acc = 0.0;
        for (size_t i = lo; i < hi; ++i) acc += xs[i];
        return acc;
    }
    size_t mid = lo + (hi - lo) / 2;
    return tree_sum(xs, lo, mid) + tree_sum(xs, mid, hi);
}

inline double tree_sum(const std::vector<double>& xs) { return tree_sum(xs, 0, xs.size()); }

/// Run fn(i) for i in [0,n) over `threads` workers in contiguous chunks.
/// Work items must write to disjoint state.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t width = std::min<size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(width);
    for (size_t w = 0; w < width; ++w) {
        size_t lo = n * w / width, hi = n * (w + 1) / width;
        pool.emplace_back([lo, hi, &fn] {
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace switchlag

#endif  // SWITCHLAG_UTIL_HPP
