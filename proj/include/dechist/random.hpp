#pragma once

#include <cstdint>
#include <random>

#include "dechist/hilbert.hpp"

namespace dechist {

/// Seeded generator with a fixed sampling algorithm so that identical
/// seeds reproduce identical streams independent of the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform();          // [0, 1)
    double normal();           // Box-Muller
    Complex complex_normal();  // standard complex Gaussian

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

Operator random_hermitian(Rng& rng, Eigen::Index dim);
Operator random_unitary(Rng& rng, Eigen::Index dim);
PureState random_pure_state(Rng& rng, Eigen::Index dim);
DensityOperator random_density(Rng& rng, Eigen::Index dim);

}  // namespace dechist
