#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace landsel {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LANDSEL_ERROR(Name)                  \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    }

LANDSEL_ERROR(InvalidProblem);
LANDSEL_ERROR(DimensionError);
LANDSEL_ERROR(SampleSizeError);
LANDSEL_ERROR(EmptyTrainingSet);
LANDSEL_ERROR(NonFiniteInput);
LANDSEL_ERROR(IncompleteSuite);
LANDSEL_ERROR(DataJoinError);
LANDSEL_ERROR(EmptyPortfolio);
LANDSEL_ERROR(IncompleteMatrix);
LANDSEL_ERROR(ParseError);
LANDSEL_ERROR(MissingInput);

#undef LANDSEL_ERROR

/// Stable 64-bit mixing (splitmix64 finalizer). Identical on every platform,
/// which std::hash does not guarantee.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return mix64(seed ^ mix64(value));
}

inline std::uint64_t stable_hash(std::initializer_list<std::uint64_t> values) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto v : values) h = hash_combine(h, v);
    return h;
}

/// FNV-1a over bytes; used for config fingerprints.
std::uint64_t fnv1a(const std::string& bytes) noexcept;

/// xoshiro256** with hand-rolled distributions so that streams are
/// reproducible across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next() noexcept;
    /// Uniform in [0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n) noexcept;
    double normal() noexcept;

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items must write
/// to disjoint slots; ordering of side effects is unspecified. The first
/// exception thrown by any item is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// printf("%.17g"); round-trips every finite double.
std::string format17(double v);

}  // namespace landsel
