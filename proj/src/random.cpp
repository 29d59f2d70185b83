#include "dechist/random.hpp"

#include <cmath>
#include <numbers>

namespace dechist {

double Rng::uniform() {
    // 53 mantissa bits of a 64-bit draw.
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
}

Complex Rng::complex_normal() {
    const double re = normal();
    const double im = normal();
    return Complex(re, im) / std::sqrt(2.0);
}

Operator random_hermitian(Rng& rng, Eigen::Index dim) {
    Operator g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
    return (g + g.adjoint()) / 2.0;
}

Operator random_unitary(Rng& rng, Eigen::Index dim) {
    Operator g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<Operator> qr(g);
    Operator q = qr.householderQ();
    Operator r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix column phases so the factorization is unique.
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Complex rkk = r(k, k);
        if (std::abs(rkk) > 0.0) q.col(k) *= rkk / std::abs(rkk);
    }
    return q;
}

PureState random_pure_state(Rng& rng, Eigen::Index dim) {
    StateVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.complex_normal();
    v /= v.norm();
    return PureState(std::move(v));
}

DensityOperator random_density(Rng& rng, Eigen::Index dim) {
    Operator g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
    Operator rho = g * g.adjoint();
    rho /= rho.trace();
    rho = (rho + rho.adjoint()) / 2.0;
    return DensityOperator(std::move(rho));
}

}  // namespace dechist
