#pragma once

#include "pathcov/alpha.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pathcov {

/// maximize p_min
///   s.t. p_min <= sum_i alpha(j, i) * pi_i   for every state j
///        sum_i pi_i = 1
///        pi_i >= floor_i
///
/// Choosing i with probability pi_i and then a path visiting i visits j with
/// probability sum_i alpha(j, i) * pi_i, since alpha(j, i) conditions on i.
struct CoverageLP {
    std::size_t n = 0;
    std::vector<double> alpha; // row-major n x n, alpha[j * n + i] = alpha(j, i)
    std::vector<double> floors;

    /// Weight of pi_i in the coverage constraint of state j.
    double coefficient(std::size_t i, std::size_t j) const { return alpha[j * n + i]; }
};

/// Throws Error(domain) on a malformed matrix and Error(floor_infeasible)
/// when n * floor > 1.
CoverageLP build_lp(const AlphaMatrix& alpha, std::optional<double> floor = std::nullopt);

enum class SolverStatus { optimal, infeasible };

struct CoverageDistribution {
    std::vector<double> pi;
    double p_min = 0.0;
    SolverStatus status = SolverStatus::optimal;
    std::size_t iterations = 0;
    /// Shadow prices of the n coverage constraints, normalised to sum 1.
    /// Empty when the distribution did not come from solve_lp.
    std::vector<double> dual;
};

/// Dense simplex on the condensed tableau. Pivot tolerance 1e-9. Entering
/// columns follow the largest reduced cost; after a run of degenerate pivots
/// the solver switches to Bland's rule for the rest of the solve.
/// Throws Error(numeric_instability) past 50 * (n + 2) pivots.
CoverageDistribution solve_lp(const CoverageLP& lp);

struct SolutionCheck {
    bool feasible = false;
    bool optimal = false;
    double sum_residual = 0.0;        // |sum pi - 1|
    double floor_violation = 0.0;     // max(floor_i - pi_i, 0)
    double constraint_violation = 0.0; // max_j (p_min - sum_i alpha_ji pi_i, 0)
    double objective = 0.0;           // min_j sum_i alpha_ji pi_i
    std::optional<double> dual_bound;     // upper bound from dist.dual
    std::optional<double> vertex_optimum; // brute force, n <= 10
    std::string note;
};

/// Feasibility residuals plus an optimality certificate: the dual bound when
/// dist carries duals, vertex enumeration when n <= 10. Never throws on a bad
/// solution; failures are reported in the result.
SolutionCheck verify_solution(const AlphaMatrix& alpha, const CoverageDistribution& dist,
                              std::optional<double> floor = std::nullopt);

/// Best objective over all basic feasible solutions, by enumerating every
/// choice of n active constraints among the 2n inequalities.
double vertex_enumeration_optimum(const CoverageLP& lp);

/// Fixed-column MPS (minimises -p_min).
std::string lp_to_mps(const CoverageLP& lp);

std::string distribution_to_json(const CoverageDistribution& dist, const SolutionCheck& check,
                                 const std::vector<std::string>& state_names);

} // namespace pathcov
