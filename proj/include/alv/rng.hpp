#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace alv {

// Deterministic RNG wrapper.  Distribution sampling is written out explicitly
// (std:: distributions are implementation-defined) so fixed seeds reproduce
// bit-identical streams everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive on both ends.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform() * (static_cast<double>(hi) - lo + 1.0));
    }

private:
    std::mt19937_64 gen_;
};

// Index sampler over a fixed non-negative weight vector (with replacement).
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<double>& weights) {
        cdf_.reserve(weights.size());
        double acc = 0.0;
        for (double w : weights) {
            acc += w;
            cdf_.push_back(acc);
        }
        total_ = acc;
    }

    bool valid() const { return total_ > 0.0; }

    size_t draw(Rng& rng) const {
        const double u = rng.uniform() * total_;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) return cdf_.size() - 1;
        return static_cast<size_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

}  // namespace alv
