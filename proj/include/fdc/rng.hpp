#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace fdc {

/// Seedable, splittable random stream (splitmix64 seeding, xoshiro256++ core).
///
/// A stream is identified by its seed. `child(tag)` derives an independent
/// stream from the parent's *identity*, not from its draw position, so the
/// substream layout of an experiment never depends on how many draws were
/// consumed in between. All samplers are explicit so sequences are pinned
/// across platforms and standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
    }

    RngStream child(std::uint64_t tag) const {
        std::uint64_t x = seed_;
        std::uint64_t h = splitmix64(x);
        h ^= tag + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return RngStream(h);
    }

    RngStream child(std::string_view tag) const { return child(fnv1a(tag)); }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one variate per uniform pair).
    double normal() {
        double u1 = u01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Student-t with integer dof: Z / sqrt(chi2_dof / dof).
    double student_t(int dof) {
        if (dof < 1) throw std::invalid_argument("student_t: dof must be >= 1");
        const double z = normal();
        double chi2 = 0.0;
        for (int i = 0; i < dof; ++i) {
            const double w = normal();
            chi2 += w * w;
        }
        return z / std::sqrt(chi2 / dof);
    }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        const int k = static_cast<int>(u01() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(u01() * static_cast<double>(i));  // in [0, i)
            std::swap(v[i - 1], v[j]);
        }
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t seed_;
    std::uint64_t state_[4];
};

}  // namespace fdc
