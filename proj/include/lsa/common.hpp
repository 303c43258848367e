#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace lsa {

// 64-bit finalizer; used to derive independent substream seeds from
// (seed, stream-index) pairs without correlation between streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic RNG. All draws are derived from raw engine output, never from
// std:: distributions, so sequences are reproducible across standard libraries
// and identical seeds give bit-identical results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // Independent substream for (seed, stream).
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, bound), bound > 0. Rejection sampling, no modulo bias.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = ~0ULL - ~0ULL % bound;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform in [lo, hi], inclusive.
    std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_real() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double next_real(double lo, double hi) { return lo + (hi - lo) * next_real(); }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[next_below(i)]);
        }
    }

    // First k entries of a Fisher-Yates pass; v is reordered in place so that
    // v[0..k) is a uniform sample without replacement.
    template <typename T>
    void partial_shuffle(std::vector<T>& v, std::size_t k) {
        const std::size_t n = v.size();
        for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
            std::swap(v[i], v[i + next_below(n - i)]);
        }
    }

private:
    std::mt19937_64 eng_;
};

// Dense row-major matrix of doubles; sized for per-slot rate tables.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

}  // namespace lsa
