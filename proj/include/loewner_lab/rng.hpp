#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ll {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t job_seed(std::uint64_t base, std::uint64_t job) {
    return splitmix64(splitmix64(base) ^ (job * 0xd1342543de82ef95ULL + 1));
}

// Counter-based stream: the n-th draw is a pure function of (key, n), so a
// job's sequence never depends on which worker runs it.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key) : key_(splitmix64(key)), ctr_(0) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        return splitmix64(key_ ^ splitmix64(ctr_++));
    }

    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t below(std::uint64_t n) {
        // reject the short tail so r % n is unbiased
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = (*this)();
            if (r >= threshold) return r % n;
        }
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * M_PI * u2;
        spare_ = rad * std::sin(th);
        has_spare_ = true;
        return rad * std::cos(th);
    }

    std::uint64_t counter() const { return ctr_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ll
