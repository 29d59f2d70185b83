#include "dechist/histories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dechist::histories {

namespace {
constexpr double eps_floor = 1e-300;
}

void HistorySpec::validate() const {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() < 1)
        throw std::invalid_argument("HistorySpec: Hamiltonian must be square");
    if (times.empty()) throw std::invalid_argument("HistorySpec: no times");
    if (families.size() != times.size())
        throw std::invalid_argument("HistorySpec: one family per time required");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw std::invalid_argument("HistorySpec: times must be strictly increasing");
    for (const ProjectorFamily& f : families)
        if (f.dim() != hamiltonian.rows())
            throw std::invalid_argument("HistorySpec: family dimension mismatch");
    if (hbar <= 0.0) throw std::invalid_argument("HistorySpec: hbar must be positive");
    if (preparation_time && !(*preparation_time < times.front()))
        throw std::invalid_argument("HistorySpec: preparation time must precede the first time");
}

std::size_t HistorySpec::history_count() const {
    std::size_t n = 1;
    for (const ProjectorFamily& f : families) n *= static_cast<std::size_t>(f.size());
    return n;
}

DecoherenceMatrix::DecoherenceMatrix(std::vector<int> family_sizes,
                                     std::vector<std::vector<std::string>> labels,
                                     Operator entries, double tolerance)
    : family_sizes_(std::move(family_sizes)),
      labels_(std::move(labels)),
      entries_(std::move(entries)),
      tolerance_(tolerance) {
    std::size_t n = 1;
    for (int s : family_sizes_) {
        if (s < 1) throw std::invalid_argument("DecoherenceMatrix: family sizes must be positive");
        n *= static_cast<std::size_t>(s);
    }
    if (labels_.size() != family_sizes_.size())
        throw std::invalid_argument("DecoherenceMatrix: label list per family required");
    for (std::size_t k = 0; k < labels_.size(); ++k)
        if (labels_[k].size() != static_cast<std::size_t>(family_sizes_[k]))
            throw std::invalid_argument("DecoherenceMatrix: label count mismatch");
    if (static_cast<std::size_t>(entries_.rows()) != n || entries_.rows() != entries_.cols())
        throw std::invalid_argument("DecoherenceMatrix: entry matrix shape mismatch");
    if (tolerance_ < 0.0) throw std::invalid_argument("DecoherenceMatrix: negative tolerance");
    if (max_abs(entries_ - entries_.adjoint()) > tol::hermiticity)
        throw std::invalid_argument("DecoherenceMatrix: entries not Hermitian");
    for (Eigen::Index i = 0; i < entries_.rows(); ++i)
        if (entries_(i, i).real() < -tol::hermiticity)
            throw std::invalid_argument("DecoherenceMatrix: negative diagonal entry");
}

std::size_t DecoherenceMatrix::flat_index(const HistoryIndex& alpha) const {
    if (alpha.size() != family_sizes_.size())
        throw std::invalid_argument("DecoherenceMatrix: history index length mismatch");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (alpha[k] < 0 || alpha[k] >= family_sizes_[k])
            throw std::invalid_argument("DecoherenceMatrix: label out of range");
        flat = flat * static_cast<std::size_t>(family_sizes_[k]) + static_cast<std::size_t>(alpha[k]);
    }
    return flat;
}

HistoryIndex DecoherenceMatrix::index_at(std::size_t flat) const {
    HistoryIndex alpha(family_sizes_.size());
    for (int k = static_cast<int>(family_sizes_.size()) - 1; k >= 0; --k) {
        const std::size_t s = static_cast<std::size_t>(family_sizes_[static_cast<std::size_t>(k)]);
        alpha[static_cast<std::size_t>(k)] = static_cast<int>(flat % s);
        flat /= s;
    }
    return alpha;
}

Complex DecoherenceMatrix::entry(const HistoryIndex& a, const HistoryIndex& b) const {
    return entries_(static_cast<Eigen::Index>(flat_index(a)), static_cast<Eigen::Index>(flat_index(b)));
}

Operator class_operator(const HistorySpec& spec, const HistoryIndex& alpha) {
    spec.validate();
    if (alpha.size() != spec.families.size())
        throw std::invalid_argument("class_operator: history index length mismatch");
    for (std::size_t k = 0; k < alpha.size(); ++k)
        if (alpha[k] < 0 || alpha[k] >= spec.families[k].size())
            throw std::invalid_argument("class_operator: invalid label");

    Operator c = spec.families[0].member(alpha[0]);
    if (spec.preparation_time)
        c = c * evolve(spec.hamiltonian, spec.times[0] - *spec.preparation_time, spec.hbar);
    for (std::size_t k = 1; k < alpha.size(); ++k) {
        const Operator u = evolve(spec.hamiltonian, spec.times[k] - spec.times[k - 1], spec.hbar);
        c = spec.families[k].member(alpha[k]) * (u * c);
    }
    return c;
}

namespace {

std::vector<Operator> all_class_operators(const HistorySpec& spec) {
    spec.validate();
    const int n = spec.n_times();
    std::vector<Operator> evolutions;
    for (int k = 1; k < n; ++k)
        evolutions.push_back(
            evolve(spec.hamiltonian, spec.times[static_cast<std::size_t>(k)] -
                                         spec.times[static_cast<std::size_t>(k - 1)],
                   spec.hbar));
    std::optional<Operator> prep;
    if (spec.preparation_time)
        prep = evolve(spec.hamiltonian, spec.times[0] - *spec.preparation_time, spec.hbar);

    const std::size_t count = spec.history_count();
    std::vector<Operator> ops;
    ops.reserve(count);
    HistoryIndex alpha(static_cast<std::size_t>(n), 0);
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t rem = flat;
        for (int k = n - 1; k >= 0; --k) {
            const std::size_t s = static_cast<std::size_t>(spec.families[static_cast<std::size_t>(k)].size());
            alpha[static_cast<std::size_t>(k)] = static_cast<int>(rem % s);
            rem /= s;
        }
        Operator c = spec.families[0].member(alpha[0]);
        if (prep) c = c * *prep;
        for (int k = 1; k < n; ++k)
            c = spec.families[static_cast<std::size_t>(k)].member(alpha[static_cast<std::size_t>(k)]) *
                (evolutions[static_cast<std::size_t>(k - 1)] * c);
        ops.push_back(std::move(c));
    }
    return ops;
}

std::vector<int> family_sizes_of(const HistorySpec& spec) {
    std::vector<int> sizes;
    for (const ProjectorFamily& f : spec.families) sizes.push_back(f.size());
    return sizes;
}

std::vector<std::vector<std::string>> labels_of(const HistorySpec& spec) {
    std::vector<std::vector<std::string>> labels;
    for (const ProjectorFamily& f : spec.families) labels.push_back(f.labels());
    return labels;
}

}  // namespace

DecoherenceMatrix decoherence_matrix(const HistorySpec& spec, const DensityOperator& rho,
                                     double tolerance) {
    if (rho.dim() != spec.hamiltonian.rows())
        throw std::invalid_argument("decoherence_matrix: state dimension mismatch");
    const std::vector<Operator> ops = all_class_operators(spec);
    const std::size_t count = ops.size();

    std::vector<Operator> branches;  // C_alpha rho
    branches.reserve(count);
    for (const Operator& c : ops) branches.push_back(c * rho.matrix());

    Operator d(count, count);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const Complex v = (branches[i] * ops[j].adjoint()).trace();
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(v);
        }
        // Exact Hermiticity of the diagonal.
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            Complex(d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real(), 0.0);
    }

    if (std::abs(d.sum() - Complex(1.0, 0.0)) > 1e-10)
        throw std::runtime_error("decoherence_matrix: entries do not sum to 1");
    return DecoherenceMatrix(family_sizes_of(spec), labels_of(spec), std::move(d), tolerance);
}

ProbabilityTable probabilities(const DecoherenceMatrix& d) {
    ProbabilityTable table;
    table.family_sizes = d.family_sizes();
    const std::size_t count = d.size();
    table.p.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        table.p[i] = d.entries()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();

    // Worst violation over single merges of adjacent labels: merging
    // alpha, alpha' differing in one slot by neighbouring labels gives
    // |p(merged) - p(alpha) - p(alpha')| = 2|Re D(alpha, alpha')|.
    double defect = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const HistoryIndex a = d.index_at(i);
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k] + 1 >= d.family_sizes()[k]) continue;
            HistoryIndex b = a;
            b[k] = a[k] + 1;
            const std::size_t j = d.flat_index(b);
            defect = std::max(defect, 2.0 * std::abs(d.entries()(static_cast<Eigen::Index>(i),
                                                                 static_cast<Eigen::Index>(j))
                                                         .real()));
        }
    }
    table.sum_rule_defect = defect;
    return table;
}

namespace {

double offdiagonal_defect(const DecoherenceMatrix& d, bool real_part_only) {
    const std::size_t count = d.size();
    double p_max = 0.0;
    for (std::size_t i = 0; i < count; ++i)
        p_max = std::max(
            p_max, d.entries()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real());
    // Branches whose probability sits at machine precision relative to
    // the largest one are nulls; in exact arithmetic their entries are
    // zero and they contribute nothing, so their roundoff is skipped.
    const double null_threshold = 1e-14 * p_max;

    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double pi = d.entries()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
        if (pi <= null_threshold) continue;
        for (std::size_t j = i + 1; j < count; ++j) {
            const double pj =
                d.entries()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
            if (pj <= null_threshold) continue;
            const Complex off = d.entries()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double num = real_part_only ? std::abs(off.real()) : std::abs(off);
            const double scale = std::max(std::sqrt(pi * pj), eps_floor);
            worst = std::max(worst, num / scale);
        }
    }
    return worst;
}

}  // namespace

double decoherence_defect(const DecoherenceMatrix& d) { return offdiagonal_defect(d, false); }
double consistency_defect(const DecoherenceMatrix& d) { return offdiagonal_defect(d, true); }

DecoherenceMatrix merge_labels(const DecoherenceMatrix& d, int time_index, int label_a,
                               int label_b) {
    const int n = d.n_times();
    if (time_index < 0 || time_index >= n)
        throw std::invalid_argument("merge_labels: time index out of range");
    const int size = d.family_sizes()[static_cast<std::size_t>(time_index)];
    if (label_a == label_b || label_a < 0 || label_b < 0 || label_a >= size || label_b >= size)
        throw std::invalid_argument("merge_labels: bad label pair");
    if (size < 2) throw std::invalid_argument("merge_labels: family has a single member");
    const int lo = std::min(label_a, label_b), hi = std::max(label_a, label_b);

    std::vector<int> sizes = d.family_sizes();
    sizes[static_cast<std::size_t>(time_index)] -= 1;
    std::vector<std::vector<std::string>> labels = d.labels();
    auto& slot = labels[static_cast<std::size_t>(time_index)];
    slot[static_cast<std::size_t>(lo)] += "+" + slot[static_cast<std::size_t>(hi)];
    slot.erase(slot.begin() + hi);

    // Old label -> merged label position.
    auto remap = [&](int old_label) { return old_label == hi ? lo : (old_label > hi ? old_label - 1 : old_label); };

    std::size_t merged_count = 1;
    for (int s : sizes) merged_count *= static_cast<std::size_t>(s);
    Operator entries = Operator::Zero(static_cast<Eigen::Index>(merged_count),
                                      static_cast<Eigen::Index>(merged_count));

    auto merged_flat = [&](const HistoryIndex& alpha) {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            const int lbl = (static_cast<int>(k) == time_index) ? remap(alpha[k]) : alpha[k];
            flat = flat * static_cast<std::size_t>(sizes[k]) + static_cast<std::size_t>(lbl);
        }
        return flat;
    };

    const std::size_t count = d.size();
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            entries(static_cast<Eigen::Index>(merged_flat(d.index_at(i))),
                    static_cast<Eigen::Index>(merged_flat(d.index_at(j)))) +=
                d.entries()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

    // Clean roundoff on the diagonal so the merged matrix revalidates.
    for (Eigen::Index i = 0; i < entries.rows(); ++i)
        entries(i, i) = Complex(entries(i, i).real(), 0.0);
    return DecoherenceMatrix(std::move(sizes), std::move(labels), std::move(entries), d.tolerance());
}

RecordProjectorSet find_records(const HistorySpec& spec, const PureState& psi,
                                double defect_tol) {
    if (psi.dim() != spec.hamiltonian.rows())
        throw std::invalid_argument("find_records: state dimension mismatch");
    const DecoherenceMatrix d = decoherence_matrix(spec, psi.density(), defect_tol);
    const double defect = decoherence_defect(d);
    if (defect > defect_tol)
        throw NoRecordsError("find_records: no records, decoherence defect " +
                             std::to_string(defect) + " exceeds tolerance " +
                             std::to_string(defect_tol));

    const std::vector<Operator> ops = all_class_operators(spec);
    const Eigen::Index dim = psi.dim();

    std::vector<Operator> projectors;
    std::vector<std::string> labels;
    std::map<HistoryIndex, int> correlation;
    std::vector<StateVector> basis;  // orthonormalized branch directions

    for (std::size_t flat = 0; flat < ops.size(); ++flat) {
        StateVector branch = ops[flat] * psi.amplitudes();
        if (branch.squaredNorm() < defect_tol) continue;
        // Gram-Schmidt against the accepted branches.
        for (const StateVector& e : basis) branch -= (e.adjoint() * branch)(0) * e;
        if (branch.squaredNorm() < defect_tol * 1e-6) continue;  // degenerate branch direction
        branch /= branch.norm();
        basis.push_back(branch);
        projectors.push_back(branch * branch.adjoint());
        const HistoryIndex alpha = d.index_at(flat);
        std::string label;
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            if (k) label += ",";
            label += d.labels()[k][static_cast<std::size_t>(alpha[k])];
        }
        labels.push_back(label);
        correlation[alpha] = static_cast<int>(projectors.size()) - 1;
    }

    Operator complement = identity(dim);
    for (const Operator& p : projectors) complement -= p;
    projectors.push_back(std::move(complement));
    labels.emplace_back("rest");

    return RecordProjectorSet{ProjectorFamily(std::move(projectors), std::move(labels)),
                              std::move(correlation)};
}

JointDistribution joint_probability(const HistorySpec& spec, const DensityOperator& rho,
                                    const RecordProjectorSet& records) {
    if (rho.dim() != spec.hamiltonian.rows() || records.projectors.dim() != rho.dim())
        throw std::invalid_argument("joint_probability: dimension mismatch");
    const std::vector<Operator> ops = all_class_operators(spec);
    const int n_records = records.projectors.size();

    JointDistribution joint;
    joint.family_sizes = family_sizes_of(spec);
    joint.record_labels = records.projectors.labels();
    joint.p.resize(static_cast<Eigen::Index>(ops.size()), n_records);
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const Operator branch = ops[i] * rho.matrix() * ops[i].adjoint();
        for (int b = 0; b < n_records; ++b)
            joint.p(static_cast<Eigen::Index>(i), b) =
                (records.projectors.member(b) * branch).trace().real();
    }
    return joint;
}

ConditionalRecordTable conditional_record_probability(const JointDistribution& joint) {
    ConditionalRecordTable table;
    table.family_sizes = joint.family_sizes;
    const Eigen::Index rows = joint.p.rows();
    table.best.assign(static_cast<std::size_t>(rows), 0.0);
    table.best_record.assign(static_cast<std::size_t>(rows), -1);
    table.defined.assign(static_cast<std::size_t>(rows), false);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double total = joint.p.row(i).sum();
        if (total <= 0.0) continue;  // skipped and flagged
        Eigen::Index arg = 0;
        const double best = joint.p.row(i).maxCoeff(&arg);
        table.best[static_cast<std::size_t>(i)] = best / total;
        table.best_record[static_cast<std::size_t>(i)] = static_cast<int>(arg);
        table.defined[static_cast<std::size_t>(i)] = true;
    }
    return table;
}

EffectiveDensity effective_density(const HistorySpec& spec, const DensityOperator& rho,
                                   const HistoryIndex& alpha) {
    const Operator c = class_operator(spec, alpha);
    Operator branch = c * rho.matrix() * c.adjoint();
    const double norm = branch.trace().real();
    if (norm <= 1e-14) throw NullBranchError("effective_density: null branch");
    branch /= norm;
    branch = (branch + branch.adjoint()) / 2.0;
    const double purity = (branch * branch).trace().real();
    return EffectiveDensity{DensityOperator(std::move(branch)), purity};
}

RecordCapacity record_capacity_check(std::uint64_t alternatives, std::uint64_t n_times) {
    if (alternatives < 1 || n_times < 1)
        throw std::invalid_argument("record_capacity_check: require A >= 1 and n >= 1");
    const std::uint64_t limit = std::uint64_t{1} << 63;
    std::uint64_t value = 1;
    for (std::uint64_t k = 1; k < n_times; ++k) {
        if (alternatives != 0 && value > limit / alternatives)
            return RecordCapacity{limit, true};
        value *= alternatives;
        if (value > limit) return RecordCapacity{limit, true};
    }
    return RecordCapacity{value, false};
}

}  // namespace dechist::histories
