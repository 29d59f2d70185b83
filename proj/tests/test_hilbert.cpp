#include <doctest.h>

#include <cmath>

#include "dechist/hilbert.hpp"
#include "dechist/random.hpp"

using namespace dechist;

namespace {

// Scaled-and-squared Taylor series for exp(-i H t / hbar), kept as an
// independent oracle for the eigendecomposition route.
Operator series_evolve(const Operator& h, double t, double hbar) {
    const Eigen::Index d = h.rows();
    Operator a = Complex(0.0, -t / hbar) * h;
    int squarings = 0;
    while (max_abs(a) > 0.25) {
        a /= 2.0;
        ++squarings;
    }
    Operator u = identity(d);
    Operator term = identity(d);
    for (int k = 1; k <= 30; ++k) {
        term = (term * a) / static_cast<double>(k);
        u += term;
    }
    for (int s = 0; s < squarings; ++s) u = u * u;
    return u;
}

Operator ket_bra(int i, int j, Eigen::Index dim) {
    Operator m = Operator::Zero(dim, dim);
    m(i, j) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("tensor identity and index convention") {
    CHECK(max_abs(tensor(identity(2), identity(2)) - identity(4)) == 0.0);

    // |0><0| x 1 = diag(1, 1, 0, 0): first factor is the slow index.
    const Operator p0 = ket_bra(0, 0, 2);
    Operator expected = Operator::Zero(4, 4);
    expected(0, 0) = 1.0;
    expected(1, 1) = 1.0;
    CHECK(max_abs(tensor(p0, identity(2)) - expected) == 0.0);
}

TEST_CASE("tensor mixed-product rule against dense multiplication") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Operator a = random_hermitian(rng, 2), b = random_hermitian(rng, 2);
        const Operator c = random_hermitian(rng, 2), d = random_hermitian(rng, 2);
        CHECK(max_abs(tensor(a, b) * tensor(c, d) - tensor((a * c).eval(), (b * d).eval())) <=
              1e-12);
    }
}

TEST_CASE("tensor associativity") {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        const Operator a = random_hermitian(rng, 2);
        const Operator b = random_hermitian(rng, 3);
        const Operator c = random_hermitian(rng, 2);
        CHECK(max_abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c))) <= 1e-12);
    }
}

TEST_CASE("partial trace of the Bell state") {
    StateVector bell = StateVector::Zero(4);
    bell(0) = 1.0 / std::sqrt(2.0);
    bell(3) = 1.0 / std::sqrt(2.0);
    const Operator rho = bell * bell.adjoint();
    const Operator reduced = partial_trace(rho, {2, 2}, {0});
    CHECK(max_abs(reduced - 0.5 * identity(2)) <= 1e-14);
}

TEST_CASE("partial trace of a product state returns the kept factor") {
    Rng rng(13);
    const Operator rho_a = random_density(rng, 2).matrix();
    const Operator rho_b = random_density(rng, 3).matrix();
    CHECK(max_abs(partial_trace(tensor(rho_a, rho_b), {2, 3}, {0}) - rho_a) <= 1e-13);
    CHECK(max_abs(partial_trace(tensor(rho_a, rho_b), {2, 3}, {1}) - rho_b) <= 1e-13);
}

TEST_CASE("partial trace matches the explicit index-summation oracle") {
    Rng rng(14);
    const Operator rho = random_density(rng, 4).matrix();

    // Hand-written double loop for a 2x2 split, tracing the second factor.
    Operator oracle = Operator::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int t = 0; t < 2; ++t) oracle(i, j) += rho(2 * i + t, 2 * j + t);
    CHECK(max_abs(partial_trace(rho, {2, 2}, {0}) - oracle) <= 1e-12);

    // Tracing the first factor instead.
    Operator oracle2 = Operator::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int t = 0; t < 2; ++t) oracle2(i, j) += rho(2 * t + i, 2 * t + j);
    CHECK(max_abs(partial_trace(rho, {2, 2}, {1}) - oracle2) <= 1e-12);

    CHECK(std::abs(partial_trace(rho, {2, 2}, {0}).trace() - rho.trace()) <= 1e-12);
}

TEST_CASE("partial trace over three factors keeps order") {
    Rng rng(15);
    const Operator a = random_density(rng, 2).matrix();
    const Operator b = random_density(rng, 2).matrix();
    const Operator c = random_density(rng, 3).matrix();
    const Operator abc = tensor(tensor(a, b), c);
    CHECK(max_abs(partial_trace(abc, {2, 2, 3}, {0, 2}) - tensor(a, c)) <= 1e-13);
}

TEST_CASE("partial trace rejects mismatched dimensions") {
    CHECK_THROWS_AS(partial_trace(identity(6), {2, 2}, {0}), std::invalid_argument);
}

TEST_CASE("evolve trivial cases") {
    CHECK(max_abs(evolve(Operator::Zero(3, 3), 2.7) - identity(3)) <= 1e-15);

    Operator h = Operator::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = -2.0;
    const Operator u = evolve(h, 0.5, 1.0);
    CHECK(std::abs(u(0, 0) - std::exp(Complex(0.0, -0.5))) <= 1e-14);
    CHECK(std::abs(u(1, 1) - std::exp(Complex(0.0, 1.0))) <= 1e-14);
    CHECK(std::abs(u(0, 1)) <= 1e-15);
}

TEST_CASE("evolve matches the series oracle and is unitary") {
    Rng rng(16);
    for (int trial = 0; trial < 4; ++trial) {
        const Operator h = random_hermitian(rng, 4);
        const double t = 0.3 + 0.4 * trial;
        const Operator u = evolve(h, t, 1.0);
        CHECK(max_abs(u - series_evolve(h, t, 1.0)) <= 1e-9);
        CHECK(max_abs(u.adjoint() * u - identity(4)) <= 1e-10);
    }
}

TEST_CASE("evolve honors hbar") {
    Rng rng(17);
    const Operator h = random_hermitian(rng, 3);
    CHECK(max_abs(evolve(h, 1.0, 2.0) - evolve(h, 0.5, 1.0)) <= 1e-12);
}

TEST_CASE("evolve rejects non-Hermitian input") {
    Operator h = Operator::Zero(2, 2);
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(evolve(h, 1.0), std::invalid_argument);
}

TEST_CASE("density operator validation") {
    CHECK_THROWS_AS(DensityOperator{2.0 * identity(2)}, std::invalid_argument);
    Operator bad = identity(2) / 2.0;
    bad(0, 1) = Complex(0.0, 0.8);  // breaks Hermiticity
    CHECK_THROWS_AS(DensityOperator{bad}, std::invalid_argument);
    Operator notpos = Operator::Zero(2, 2);
    notpos(0, 0) = 1.5;
    notpos(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityOperator{notpos}, std::invalid_argument);
}

TEST_CASE("projector family validation catches each defect") {
    const Operator p0 = ket_bra(0, 0, 2), p1 = ket_bra(1, 1, 2);
    CHECK_NOTHROW(ProjectorFamily({p0, p1}, {"0", "1"}));
    // Not exhaustive.
    CHECK_THROWS_AS(ProjectorFamily({p0}, {"0"}), std::invalid_argument);
    // Not idempotent.
    CHECK_THROWS_AS(ProjectorFamily({0.5 * p0, identity(2) - 0.5 * p0}, {"a", "b"}),
                    std::invalid_argument);
    // Not exclusive: overlapping projectors.
    CHECK_THROWS_AS(ProjectorFamily({p0, identity(2)}, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("purify pure and two-level mixed states") {
    const Operator pure = ket_bra(0, 0, 2);
    const PureState psi = purify(DensityOperator(pure));
    StateVector expected = StateVector::Zero(4);
    expected(0) = 1.0;
    CHECK((psi.amplitudes() - expected).norm() <= 1e-12);

    const double p = 0.7;
    Operator rho = Operator::Zero(2, 2);
    rho(0, 0) = p;
    rho(1, 1) = 1.0 - p;
    const PureState phi = purify(DensityOperator(rho));
    StateVector want = StateVector::Zero(4);
    want(0) = std::sqrt(p);       // |0>|0~>
    want(3) = std::sqrt(1.0 - p); // |1>|1~>
    CHECK((phi.amplitudes() - want).norm() <= 1e-12);
}

TEST_CASE("purify round trip through the partial trace") {
    Rng rng(18);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityOperator rho = random_density(rng, 3);
        const PureState psi = purify(rho);
        const Operator big = psi.amplitudes() * psi.amplitudes().adjoint();
        const Operator back = partial_trace(big, {3, 3}, {0});
        CHECK(max_abs(back - rho.matrix()) <= 1e-10);
    }
}

TEST_CASE("purify handles degenerate spectra") {
    // Maximally mixed state: every eigenvalue ties, the ordering falls
    // back to the lexicographic rule; the round trip must still hold.
    const DensityOperator rho(identity(3) / 3.0);
    const PureState psi = purify(rho);
    const Operator back =
        partial_trace(psi.amplitudes() * psi.amplitudes().adjoint(), {3, 3}, {0});
    CHECK(max_abs(back - rho.matrix()) <= 1e-12);
    CHECK((purify(rho).amplitudes() - psi.amplitudes()).norm() == 0.0);
}

TEST_CASE("partial trace boundary subsets") {
    Rng rng(33);
    const Operator rho = random_density(rng, 6).matrix();
    // Keeping every factor returns the operator itself.
    CHECK(max_abs(partial_trace(rho, {2, 3}, {0, 1}) - rho) <= 1e-15);
    // Keeping nothing returns the 1x1 trace.
    const Operator scalar = partial_trace(rho, {2, 3}, {});
    CHECK(scalar.rows() == 1);
    CHECK(std::abs(scalar(0, 0) - rho.trace()) <= 1e-14);
}

TEST_CASE("purify is deterministic") {
    Rng rng(19);
    const DensityOperator rho = random_density(rng, 4);
    const PureState a = purify(rho);
    const PureState b = purify(rho);
    CHECK((a.amplitudes() - b.amplitudes()).norm() == 0.0);
}
