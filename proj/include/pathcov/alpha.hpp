#pragma once

#include "pathcov/automaton.hpp"
#include "pathcov/paths.hpp"
#include "pathcov/rng.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pathcov {

enum class AlphaProvenance { exact, approx };

/// Raw counts from the uniform sampling pass.
struct VisitCounts {
    std::size_t samples = 0;
    std::vector<std::uint64_t> per_state;  // m_i
    std::vector<std::uint32_t> pairwise;   // m_{i,j}, row-major n x n, symmetric

    std::uint64_t pair(StateId i, StateId j) const { return pairwise[std::size_t(i) * per_state.size() + j]; }
};

/// alpha(i, j): probability that a bounded successful path visiting j also
/// visits i. Column j is the conditioning state.
class AlphaMatrix {
public:
    AlphaMatrix() = default;
    explicit AlphaMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0)
    {
        for (std::size_t i = 0; i < n; ++i)
            entries_[i * n + i] = 1.0;
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(StateId i, StateId j) const { return entries_[std::size_t(i) * n_ + j]; }
    double& operator()(StateId i, StateId j) { return entries_[std::size_t(i) * n_ + j]; }
    const std::vector<double>& entries() const noexcept { return entries_; }

    AlphaProvenance provenance = AlphaProvenance::exact;
    std::size_t bound = 0;           // N
    std::size_t samples = 0;         // m (approx only)
    std::size_t refinement = 0;      // r (approx only)
    std::uint64_t seed = 0;          // approx only
    std::vector<std::string> state_names;
    std::optional<VisitCounts> counts;
    std::vector<StateId> refined_columns; // columns recomputed from conditioned draws

private:
    std::size_t n_ = 0;
    std::vector<double> entries_;
};

/// Exact rationals, row-major n x n, by inclusion-exclusion over avoiding
/// counts: #(i and j) = V_i + V_j - (T - #avoid{i, j}).
/// Throws Error(uncovered_state) naming a state no bounded path visits.
std::vector<mpq_class> alpha_exact_rational(const Automaton& a, std::size_t bound);

/// Same quantity through the nested must-visit products:
/// NumPaths(trim((A_j)_i)) / NumPaths(trim(A_j)). Quadratically many
/// product constructions; meant for small models and cross-checks.
std::vector<mpq_class> alpha_exact_by_product(const Automaton& a, std::size_t bound);

AlphaMatrix alpha_exact(const Automaton& a, std::size_t bound);

/// Sampling estimate with m uniform paths and refinement threshold r.
/// Deficient columns (m_j <= r, r > 0) are redrawn from r paths conditioned
/// on visiting j, each column on its own stream rng.derive(j).
/// Throws Error(conditioning_impossible) if such a column has no bounded path.
AlphaMatrix alpha_approx(const Automaton& a, std::size_t bound, std::size_t m, std::size_t r,
                         RngHandle& rng);

/// Same as above with the uniform count table already built.
AlphaMatrix alpha_approx(const Automaton& a, const PathCountTable& table, std::size_t m, std::size_t r,
                         RngHandle& rng);

/// m x n bit table: row k has bit s set iff sampled path k visits s.
class VisitTable {
public:
    VisitTable(std::size_t rows, std::size_t states);

    void mark(std::size_t row, StateId s) { bits_[row * words_ + s / 64] |= std::uint64_t{1} << (s % 64); }
    bool test(std::size_t row, StateId s) const
    {
        return (bits_[row * words_ + s / 64] >> (s % 64)) & 1U;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t states() const noexcept { return states_; }

    VisitCounts counts() const;

private:
    std::size_t rows_;
    std::size_t states_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

enum class SampleBound { chebyshev, hoeffding };

/// Smallest r with 1/(4 eps^2 r) <= delta (Chebyshev) or
/// 2 exp(-2 r eps^2) <= delta (Hoeffding). Throws Error(domain) unless
/// 0 < eps < 1 and 0 < delta < 1.
std::size_t required_samples(double epsilon, double delta, SampleBound kind);

/// `row,column,value` with a header line, names taken from state_names.
std::string alpha_to_csv(const AlphaMatrix& alpha);
std::string alpha_to_json(const AlphaMatrix& alpha);
AlphaMatrix alpha_from_csv(const std::string& text);
AlphaMatrix alpha_from_json(const std::string& text);

} // namespace pathcov
