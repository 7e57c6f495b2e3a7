// SPDX-License-Identifier: Apache-2.0
//
// Seeded random streams. A stream is identified by (seed, label); child streams
// are derived by hashing, so draws never depend on thread scheduling.

#pragma once

#include "fdsim/numerics.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace fdsim
{
class Rng
{
public:
    explicit Rng(std::uint64_t seed, std::string stream = "root");

    /// Independent stream derived from this one's identity (not its state).
    Rng child(const std::string &label) const;
    Rng child(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }
    const std::string &stream() const { return stream_; }

    std::uint64_t next_u64();
    double uniform();                   // [0, 1)
    double uniform(double a, double b); // [a, b)
    std::uint64_t uniform_int(std::uint64_t n); // [0, n)
    double normal();                    // N(0, 1), Box-Muller

    /// Circularly-symmetric complex Gaussian with E|x|^2 = var.
    cx complex_normal(double var = 1.0);
    CMat complex_normal(arma::uword rows, arma::uword cols, double var = 1.0);

private:
    std::uint64_t seed_;
    std::string stream_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
} // namespace fdsim
