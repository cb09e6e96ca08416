#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridsr {

// Error taxonomy. The CLI maps ConfigError (and subclasses) to exit code 2,
// everything else to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AlignmentError : public IngestError {
public:
    using IngestError::IngestError;
};

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kVersion = "0.1.0";

//============================================================================
// Deterministic RNG helpers
//
// std::uniform_int_distribution and friends are implementation-defined, so
// sampling goes through these helpers to keep draw sequences identical across
// toolchains for a given seed.
//============================================================================

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    // splitmix64
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), unbiased via rejection
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw DomainError("Rng::next_below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Standard normal via Box-Muller (one value per call, deterministic stream)
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Derive an independent sub-stream (for per-component seeding)
    Rng fork(std::uint64_t salt) {
        return Rng(next_u64() ^ (salt * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

//============================================================================
// Deterministic reductions
//
// Pairwise summation over a fixed tree shape: the result depends only on the
// input, never on thread count or chunking at the call site.
//============================================================================

double pairwise_sum(std::span<const double> values);

// FNV-1a over raw bytes; used for parameter/content fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull);

// Raises the glibc mmap/trim thresholds once per process so the tape's large
// short-lived buffers are recycled from the heap instead of being remapped
// every step. Called by the training and inference entry points.
void tune_allocator();

std::string hex64(std::uint64_t v);

} // namespace gridsr
