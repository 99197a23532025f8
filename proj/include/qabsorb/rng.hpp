#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qabsorb {

inline constexpr const char* rng_algorithm_id = "mt19937_64+box-muller";

// Normal variates from mt19937_64 with an explicit Box-Muller transform, so
// streams are identical across standard libraries.
class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : eng_(seed) {}

    double uniform()  // (0, 1]
    {
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * 3.14159265358979323846 * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed of sample s at sweep point p.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point, std::uint64_t sample)
{
    return splitmix64(splitmix64(splitmix64(master) ^ point) ^ (sample + 0x632be59bd9b4e019ULL));
}

} // namespace qabsorb
