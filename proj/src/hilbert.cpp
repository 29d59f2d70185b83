#include "dechist/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

namespace dechist {

double max_abs(const Operator& op) {
    if (op.size() == 0) return 0.0;
    return op.cwiseAbs().maxCoeff();
}

bool all_finite(const Operator& op) {
    for (Eigen::Index j = 0; j < op.cols(); ++j)
        for (Eigen::Index i = 0; i < op.rows(); ++i)
            if (!std::isfinite(op(i, j).real()) || !std::isfinite(op(i, j).imag())) return false;
    return true;
}

Operator identity(Eigen::Index dim) { return Operator::Identity(dim, dim); }

Operator tensor(const Operator& a, const Operator& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    StateVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

namespace {

void check_square(const Operator& op, const char* what) {
    if (op.rows() != op.cols() || op.rows() < 1)
        throw std::invalid_argument(std::string(what) + ": operator must be square with dim >= 1");
}

}  // namespace

Operator partial_trace(const Operator& op, const std::vector<Eigen::Index>& dims,
                       const std::vector<int>& keep) {
    check_square(op, "partial_trace");
    Eigen::Index total = 1;
    for (Eigen::Index d : dims) {
        if (d < 1) throw std::invalid_argument("partial_trace: factor dims must be positive");
        total *= d;
    }
    if (total != op.rows())
        throw std::invalid_argument("partial_trace: product of dims does not match operator dim");

    const int n = static_cast<int>(dims.size());
    std::vector<bool> kept(static_cast<std::size_t>(n), false);
    for (int k : keep) {
        if (k < 0 || k >= n) throw std::invalid_argument("partial_trace: keep index out of range");
        if (kept[static_cast<std::size_t>(k)])
            throw std::invalid_argument("partial_trace: duplicate keep index");
        kept[static_cast<std::size_t>(k)] = true;
    }

    // Strides of each factor in the flat index (slow-to-fast layout).
    std::vector<Eigen::Index> stride(static_cast<std::size_t>(n), 1);
    for (int k = n - 2; k >= 0; --k)
        stride[static_cast<std::size_t>(k)] =
            stride[static_cast<std::size_t>(k + 1)] * dims[static_cast<std::size_t>(k + 1)];

    Eigen::Index dim_keep = 1, dim_trace = 1;
    std::vector<int> kept_idx, traced_idx;
    for (int k = 0; k < n; ++k) {
        if (kept[static_cast<std::size_t>(k)]) {
            dim_keep *= dims[static_cast<std::size_t>(k)];
            kept_idx.push_back(k);
        } else {
            dim_trace *= dims[static_cast<std::size_t>(k)];
            traced_idx.push_back(k);
        }
    }

    // Flat offset of composite index `c` enumerated over the listed factors.
    auto offset = [&](const std::vector<int>& factors, Eigen::Index c) {
        Eigen::Index off = 0;
        for (int k = static_cast<int>(factors.size()) - 1; k >= 0; --k) {
            const Eigen::Index d = dims[static_cast<std::size_t>(factors[static_cast<std::size_t>(k)])];
            off += (c % d) * stride[static_cast<std::size_t>(factors[static_cast<std::size_t>(k)])];
            c /= d;
        }
        return off;
    };

    std::vector<Eigen::Index> keep_off(static_cast<std::size_t>(dim_keep));
    for (Eigen::Index i = 0; i < dim_keep; ++i) keep_off[static_cast<std::size_t>(i)] = offset(kept_idx, i);
    std::vector<Eigen::Index> trace_off(static_cast<std::size_t>(dim_trace));
    for (Eigen::Index t = 0; t < dim_trace; ++t) trace_off[static_cast<std::size_t>(t)] = offset(traced_idx, t);

    Operator out = Operator::Zero(dim_keep, dim_keep);
    for (Eigen::Index i = 0; i < dim_keep; ++i)
        for (Eigen::Index j = 0; j < dim_keep; ++j) {
            Complex acc(0.0, 0.0);
            for (Eigen::Index t = 0; t < dim_trace; ++t)
                acc += op(keep_off[static_cast<std::size_t>(i)] + trace_off[static_cast<std::size_t>(t)],
                          keep_off[static_cast<std::size_t>(j)] + trace_off[static_cast<std::size_t>(t)]);
            out(i, j) = acc;
        }
    return out;
}

Operator evolve(const Operator& hamiltonian, double t, double hbar) {
    check_square(hamiltonian, "evolve");
    if (hbar <= 0.0) throw std::invalid_argument("evolve: hbar must be positive");
    if (max_abs(hamiltonian - hamiltonian.adjoint()) > tol::evolve_hermiticity)
        throw std::invalid_argument("evolve: Hamiltonian is not Hermitian");

    Eigen::SelfAdjointEigenSolver<Operator> es(hamiltonian);
    const Eigen::VectorXd& energies = es.eigenvalues();
    StateVector phases(energies.size());
    for (Eigen::Index k = 0; k < energies.size(); ++k)
        phases(k) = std::exp(Complex(0.0, -energies(k) * t / hbar));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DensityOperator::DensityOperator(Operator op) : op_(std::move(op)) {
    check_square(op_, "DensityOperator");
    if (!all_finite(op_)) throw std::invalid_argument("DensityOperator: non-finite entries");
    if (max_abs(op_ - op_.adjoint()) > tol::hermiticity)
        throw std::invalid_argument("DensityOperator: not Hermitian");
    if (std::abs(op_.trace() - Complex(1.0, 0.0)) > tol::unit_trace)
        throw std::invalid_argument("DensityOperator: trace is not 1");
    Eigen::SelfAdjointEigenSolver<Operator> es(op_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::positivity)
        throw std::invalid_argument("DensityOperator: not positive semidefinite");
}

PureState::PureState(StateVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() < 1) throw std::invalid_argument("PureState: dim must be >= 1");
    if (std::abs(amplitudes_.norm() - 1.0) > tol::unit_norm)
        throw std::invalid_argument("PureState: amplitudes are not normalized");
}

DensityOperator PureState::density() const {
    return DensityOperator(amplitudes_ * amplitudes_.adjoint());
}

ProjectorFamily::ProjectorFamily(std::vector<Operator> members, std::vector<std::string> labels)
    : members_(std::move(members)), labels_(std::move(labels)) {
    if (members_.empty()) throw std::invalid_argument("ProjectorFamily: no members");
    if (labels_.size() != members_.size())
        throw std::invalid_argument("ProjectorFamily: label/member count mismatch");
    const Eigen::Index d = members_.front().rows();
    Operator sum = Operator::Zero(d, d);
    for (const Operator& p : members_) {
        check_square(p, "ProjectorFamily");
        if (p.rows() != d) throw std::invalid_argument("ProjectorFamily: mixed dimensions");
        if (max_abs(p - p.adjoint()) > tol::projector)
            throw std::invalid_argument("ProjectorFamily: member not Hermitian");
        if (max_abs(p * p - p) > tol::projector)
            throw std::invalid_argument("ProjectorFamily: member not idempotent");
        sum += p;
    }
    for (std::size_t i = 0; i < members_.size(); ++i)
        for (std::size_t j = i + 1; j < members_.size(); ++j)
            if (max_abs(members_[i] * members_[j]) > tol::projector)
                throw std::invalid_argument("ProjectorFamily: members not mutually exclusive");
    if (max_abs(sum - identity(d)) > tol::projector)
        throw std::invalid_argument("ProjectorFamily: members do not sum to the identity");
}

ProjectorFamily::ProjectorFamily(std::vector<Operator> members)
    : ProjectorFamily(std::move(members), {}) {}

PureState purify(const DensityOperator& rho) {
    const Eigen::Index d = rho.dim();
    Eigen::SelfAdjointEigenSolver<Operator> es(rho.matrix());

    // Canonical phase: first significant component real positive.
    std::vector<std::pair<double, StateVector>> pairs;
    pairs.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) {
        StateVector v = es.eigenvectors().col(k);
        for (Eigen::Index i = 0; i < d; ++i) {
            if (std::abs(v(i)) > 1e-12) {
                v *= std::conj(v(i)) / std::abs(v(i));
                break;
            }
        }
        pairs.emplace_back(es.eigenvalues()(k), std::move(v));
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (std::abs(a.first - b.first) > 1e-12) return a.first > b.first;
        for (Eigen::Index i = 0; i < a.second.size(); ++i) {
            const Complex x = a.second(i), y = b.second(i);
            if (std::abs(x.real() - y.real()) > 1e-12) return x.real() < y.real();
            if (std::abs(x.imag() - y.imag()) > 1e-12) return x.imag() < y.imag();
        }
        return false;
    });

    StateVector psi = StateVector::Zero(d * d);
    for (const auto& [p, v] : pairs) {
        const double w = std::sqrt(std::max(p, 0.0));
        if (w == 0.0) continue;
        psi += w * tensor(v, v);
    }
    psi /= psi.norm();
    return PureState(std::move(psi));
}

}  // namespace dechist
