#pragma once

#include <cmath>
#include <cstdint>

namespace gmac {

/// Role of a random substream within one simulation trial. Streams for
/// different roles never overlap, so the draw order inside a trial can
/// change without disturbing the others.
enum class StreamRole : std::uint64_t { Source = 1, Codebook1 = 2, Codebook2 = 3, Noise = 4 };

/// Splittable counter-based generator: the state is (key, counter) and
/// each output is a strong 64-bit mix of key + counter. Substreams are
/// derived from (seed, trial, role), which makes trial-parallel runs
/// reproducible independently of the worker count.
class CounterRng {
   public:
    CounterRng() = default;
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t x) {
        // SplitMix64 finalizer.
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static CounterRng substream(std::uint64_t seed, std::uint64_t trial, StreamRole role) {
        std::uint64_t k = mix(seed);
        k = mix(k ^ (0xa076bc9555c5f92dULL + trial));
        k = mix(k ^ (0x6a09e667f3bcc909ULL * static_cast<std::uint64_t>(role)));
        return CounterRng(k);
    }

    std::uint64_t next_u64() { return mix(key_ ^ counter_++); }

    /// Uniform on (0, 1]; never returns 0 so log() is always safe.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; one spare value is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform01();
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double theta = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

   private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gmac
