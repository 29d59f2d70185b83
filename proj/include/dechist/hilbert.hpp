#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dechist {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

namespace tol {
inline constexpr double hermiticity = 1e-12;
inline constexpr double unit_trace = 1e-12;
inline constexpr double positivity = 1e-10;
inline constexpr double unit_norm = 1e-12;
inline constexpr double projector = 1e-10;
inline constexpr double evolve_hermiticity = 1e-10;
}  // namespace tol

/// Largest entry magnitude, max-norm over the matrix.
double max_abs(const Operator& op);
bool all_finite(const Operator& op);

Operator identity(Eigen::Index dim);

/// Kronecker product with `a` indexing the slow (leftmost) factor.
Operator tensor(const Operator& a, const Operator& b);
StateVector tensor(const StateVector& a, const StateVector& b);

/// Trace out the factors not listed in `keep`. `dims` lists the factor
/// dimensions slow-to-fast and must multiply to op's dimension; `keep`
/// is a set of factor positions, result factors stay in original order.
Operator partial_trace(const Operator& op, const std::vector<Eigen::Index>& dims,
                       const std::vector<int>& keep);

/// U = exp(-i H t / hbar) through the eigendecomposition of Hermitian H.
Operator evolve(const Operator& hamiltonian, double t, double hbar = 1.0);

class DensityOperator {
public:
    explicit DensityOperator(Operator op);
    const Operator& matrix() const { return op_; }
    Eigen::Index dim() const { return op_.rows(); }

private:
    Operator op_;
};

class PureState {
public:
    explicit PureState(StateVector amplitudes);
    const StateVector& amplitudes() const { return amplitudes_; }
    Eigen::Index dim() const { return amplitudes_.size(); }
    DensityOperator density() const;

private:
    StateVector amplitudes_;
};

/// An exclusive, exhaustive set of orthogonal projectors labelling one
/// time's alternatives. Validates idempotency, Hermiticity, mutual
/// exclusivity and completeness on construction.
class ProjectorFamily {
public:
    ProjectorFamily(std::vector<Operator> members, std::vector<std::string> labels);
    explicit ProjectorFamily(std::vector<Operator> members);

    int size() const { return static_cast<int>(members_.size()); }
    Eigen::Index dim() const { return members_.front().rows(); }
    const Operator& member(int i) const { return members_.at(static_cast<std::size_t>(i)); }
    const std::string& label(int i) const { return labels_.at(static_cast<std::size_t>(i)); }
    const std::vector<Operator>& members() const { return members_; }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<Operator> members_;
    std::vector<std::string> labels_;
};

/// Pure state on the doubled space whose partial trace over the copy
/// factor returns rho. Basis: descending-eigenvalue eigenbasis, ties
/// broken by lexicographic eigenvector ordering, eigenvector phases
/// fixed so the first significant component is real positive.
PureState purify(const DensityOperator& rho);

}  // namespace dechist
