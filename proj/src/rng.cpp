// SPDX-License-Identifier: Apache-2.0

#include "fdsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace fdsim
{
namespace
{
std::uint64_t fnv1a(const std::string &s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}
} // namespace

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::string stream)
    : seed_(seed), stream_(std::move(stream)),
      engine_(splitmix64(splitmix64(seed) ^ fnv1a(stream_)))
{
}

Rng Rng::child(const std::string &label) const
{
    return Rng(seed_, stream_ + "/" + label);
}

Rng Rng::child(std::uint64_t index) const
{
    return child(std::to_string(index));
}

std::uint64_t Rng::next_u64()
{
    return engine_();
}

double Rng::uniform()
{
    return double(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b)
{
    return a + (b - a) * uniform();
}

std::uint64_t Rng::uniform_int(std::uint64_t n)
{
    // Lemire-free rejection keeps the sequence platform independent
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do
        r = engine_();
    while (r >= limit);
    return r % n;
}

double Rng::normal()
{
    if (has_spare_)
    {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do
        u1 = uniform();
    while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

cx Rng::complex_normal(double var)
{
    const double s = std::sqrt(var / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

CMat Rng::complex_normal(arma::uword rows, arma::uword cols, double var)
{
    CMat A(rows, cols);
    // column-major fill order is part of the reproducibility contract
    for (arma::uword c = 0; c < cols; ++c)
        for (arma::uword r = 0; r < rows; ++r)
            A(r, c) = complex_normal(var);
    return A;
}
} // namespace fdsim
