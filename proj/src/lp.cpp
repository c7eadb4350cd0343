#include "pathcov/lp.hpp"

#include "pathcov/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace pathcov {

namespace {

constexpr double pivot_tolerance = 1e-9;
constexpr double feasibility_tolerance = 1e-9;
constexpr std::size_t degenerate_streak_for_bland = 20;

} // namespace

CoverageLP build_lp(const AlphaMatrix& alpha, std::optional<double> floor)
{
    const auto n = alpha.size();
    if (n == 0)
        throw Error(ErrorCode::domain, "alpha matrix is empty");
    CoverageLP lp;
    lp.n = n;
    lp.alpha = alpha.entries();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = lp.alpha[i * n + j];
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(ErrorCode::domain, "alpha entry (" + std::to_string(i) + "," + std::to_string(j) +
                                                   ") outside [0,1]");
        }
        if (lp.alpha[i * n + i] != 1.0)
            throw Error(ErrorCode::domain, "alpha diagonal entry " + std::to_string(i) + " is not 1");
    }
    const double eps = floor.value_or(0.0);
    if (eps < 0.0)
        throw Error(ErrorCode::domain, "floor must be non-negative");
    if (static_cast<double>(n) * eps > 1.0)
        throw Error(ErrorCode::floor_infeasible, std::to_string(n) + " states times floor " + std::to_string(eps) +
                                                     " exceeds 1");
    lp.floors.assign(n, eps);
    return lp;
}

// ---------------------------------------------------------------------------
// Simplex
//
// Substituting pi = floor + x leaves
//   maximize p   s.t.  s_j = c_j + sum_i alpha_ji x_i - p >= 0,
//                      sum_i x_i = R,  x >= 0, p >= 0
// with c_j = sum_i alpha_ji floor_i and R = 1 - sum floor. Starting from the
// basis {x_k, s_1..s_n} is feasible for any k, so no phase one is needed.
//
// Tableau convention: basic_r = b_r - sum_c T[r][c] * nonbasic_c and
// z = z0 + sum_c d_c * nonbasic_c.
// Variable ids: x_i -> i, p -> n, s_j -> n + 1 + j.

CoverageDistribution solve_lp(const CoverageLP& lp)
{
    const auto n = lp.n;
    const auto rows = n + 1;
    const auto cols = n; // n - 1 free x plus p
    const auto p_var = n;

    const double remaining = 1.0 - std::accumulate(lp.floors.begin(), lp.floors.end(), 0.0);
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (lp.floors[i] != 0.0)
            for (std::size_t j = 0; j < n; ++j)
                c[j] += lp.coefficient(i, j) * lp.floors[i];

    // The basic x_k with the best worst column gives the largest first step.
    std::size_t k = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            worst = std::min(worst, c[j] + lp.coefficient(i, j) * remaining);
        if (worst > best) {
            best = worst;
            k = i;
        }
    }

    std::vector<std::size_t> basic(rows), nonbasic(cols);
    for (std::size_t j = 0; j < n; ++j)
        basic[j] = n + 1 + j;
    basic[n] = k;
    {
        std::size_t col = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (i != k)
                nonbasic[col++] = i;
        nonbasic[col] = p_var;
    }

    std::vector<double> table(rows * cols, 0.0);
    std::vector<double> b(rows, 0.0);
    std::vector<double> d(cols, 0.0);
    double z0 = 0.0;
    auto at = [&](std::size_t r, std::size_t col) -> double& { return table[r * cols + col]; };

    for (std::size_t j = 0; j < n; ++j) {
        b[j] = c[j] + lp.coefficient(k, j) * remaining;
        for (std::size_t col = 0; col < cols; ++col) {
            const auto var = nonbasic[col];
            at(j, col) = var == p_var ? 1.0 : lp.coefficient(k, j) - lp.coefficient(var, j);
        }
    }
    b[n] = remaining;
    for (std::size_t col = 0; col < cols; ++col)
        at(n, col) = nonbasic[col] == p_var ? 0.0 : 1.0;
    d[cols - 1] = 1.0;

    const std::size_t cap = 50 * (n + 2);
    std::size_t iterations = 0;
    std::size_t degenerate_streak = 0;
    bool bland = false;
    std::vector<double> pivot_row(cols);

    for (;;) {
        std::size_t enter = cols;
        for (std::size_t col = 0; col < cols; ++col) {
            if (d[col] <= pivot_tolerance)
                continue;
            if (enter == cols) {
                enter = col;
            } else if (bland) {
                if (nonbasic[col] < nonbasic[enter])
                    enter = col;
            } else if (d[col] > d[enter] || (d[col] == d[enter] && nonbasic[col] < nonbasic[enter])) {
                enter = col;
            }
        }
        if (enter == cols)
            break;

        std::size_t leave = rows;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows; ++r) {
            const double coef = at(r, enter);
            if (coef <= pivot_tolerance)
                continue;
            const double ratio = std::max(b[r], 0.0) / coef;
            if (leave == rows || ratio < best_ratio - 1e-12) {
                leave = r;
                best_ratio = ratio;
            } else if (ratio <= best_ratio + 1e-12 && basic[r] < basic[leave]) {
                leave = r;
                best_ratio = std::min(best_ratio, ratio);
            }
        }
        if (leave == rows)
            throw Error(ErrorCode::numeric_instability, "simplex found an unbounded direction");

        if (++iterations > cap)
            throw Error(ErrorCode::numeric_instability,
                        "simplex exceeded " + std::to_string(cap) + " pivots");
        if (best_ratio <= pivot_tolerance) {
            if (++degenerate_streak >= degenerate_streak_for_bland)
                bland = true;
        } else {
            degenerate_streak = 0;
        }

        // Exchange basic[leave] <-> nonbasic[enter].
        const double e = at(leave, enter);
        for (std::size_t col = 0; col < cols; ++col)
            pivot_row[col] = at(leave, col) / e;
        pivot_row[enter] = 1.0 / e;
        const double b_leave = b[leave] / e;

        for (std::size_t r = 0; r < rows; ++r) {
            if (r == leave)
                continue;
            const double f = at(r, enter);
            if (f == 0.0)
                continue;
            double* row = &table[r * cols];
            for (std::size_t col = 0; col < cols; ++col)
                row[col] -= f * pivot_row[col];
            row[enter] = -f / e;
            b[r] -= f * b_leave;
            if (b[r] < 0.0 && b[r] > -feasibility_tolerance)
                b[r] = 0.0;
        }
        const double g = d[enter];
        for (std::size_t col = 0; col < cols; ++col)
            d[col] -= g * pivot_row[col];
        d[enter] = -g / e;
        z0 += g * b_leave;

        std::copy(pivot_row.begin(), pivot_row.end(), table.begin() + static_cast<std::ptrdiff_t>(leave * cols));
        b[leave] = b_leave;
        std::swap(basic[leave], nonbasic[enter]);
    }

    CoverageDistribution dist;
    dist.iterations = iterations;
    dist.pi = lp.floors;
    for (std::size_t r = 0; r < rows; ++r)
        if (basic[r] < n)
            dist.pi[basic[r]] += std::max(b[r], 0.0);
    const double total = std::accumulate(dist.pi.begin(), dist.pi.end(), 0.0);
    for (auto& v : dist.pi)
        v /= total;

    dist.dual.assign(n, 0.0);
    double dual_sum = 0.0;
    for (std::size_t col = 0; col < cols; ++col) {
        if (nonbasic[col] > n) {
            const double y = std::max(-d[col], 0.0);
            dist.dual[nonbasic[col] - n - 1] = y;
            dual_sum += y;
        }
    }
    if (dual_sum > 0.0)
        for (auto& y : dist.dual)
            y /= dual_sum;

    // Report the objective the returned pi actually achieves.
    double achieved = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        double col_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            col_sum += lp.coefficient(i, j) * dist.pi[i];
        achieved = std::min(achieved, col_sum);
    }
    dist.p_min = std::min(achieved, z0);
    dist.status = SolverStatus::optimal;
    return dist;
}

// ---------------------------------------------------------------------------
// Verification

namespace {

/// Solves the dense square system in place; false when (near) singular.
bool solve_dense(std::vector<double>& m, std::vector<double>& rhs, std::size_t dim)
{
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < dim; ++r)
            if (std::abs(m[r * dim + col]) > std::abs(m[piv * dim + col]))
                piv = r;
        if (std::abs(m[piv * dim + col]) < 1e-12)
            return false;
        if (piv != col) {
            for (std::size_t c = 0; c < dim; ++c)
                std::swap(m[piv * dim + c], m[col * dim + c]);
            std::swap(rhs[piv], rhs[col]);
        }
        for (std::size_t r = 0; r < dim; ++r) {
            if (r == col)
                continue;
            const double f = m[r * dim + col] / m[col * dim + col];
            if (f == 0.0)
                continue;
            for (std::size_t c = col; c < dim; ++c)
                m[r * dim + c] -= f * m[col * dim + c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t r = 0; r < dim; ++r)
        rhs[r] /= m[r * dim + r];
    return true;
}

} // namespace

double vertex_enumeration_optimum(const CoverageLP& lp)
{
    const auto n = lp.n;
    const auto dim = n + 1; // pi_1..pi_n, p
    double best = -std::numeric_limits<double>::infinity();

    // select[c] for c < n: coverage constraint c active; c >= n: bound on pi_{c-n}.
    std::vector<bool> select(2 * n, false);
    std::fill(select.begin(), select.begin() + static_cast<std::ptrdiff_t>(n), true);
    std::vector<double> m(dim * dim), rhs(dim);
    do {
        std::fill(m.begin(), m.end(), 0.0);
        std::size_t row = 0;
        for (std::size_t i = 0; i < n; ++i)
            m[row * dim + i] = 1.0;
        rhs[row++] = 1.0;
        for (std::size_t c = 0; c < 2 * n; ++c) {
            if (!select[c])
                continue;
            if (c < n) {
                for (std::size_t i = 0; i < n; ++i)
                    m[row * dim + i] = lp.coefficient(i, c);
                m[row * dim + n] = -1.0;
                rhs[row] = 0.0;
            } else {
                m[row * dim + (c - n)] = 1.0;
                rhs[row] = lp.floors[c - n];
            }
            ++row;
        }
        if (!solve_dense(m, rhs, dim))
            continue;
        const double p = rhs[n];
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i)
            ok = rhs[i] >= lp.floors[i] - feasibility_tolerance;
        for (std::size_t j = 0; j < n && ok; ++j) {
            double col_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                col_sum += lp.coefficient(i, j) * rhs[i];
            ok = col_sum >= p - feasibility_tolerance;
        }
        if (ok)
            best = std::max(best, p);
    } while (std::prev_permutation(select.begin(), select.end()));
    return best;
}

SolutionCheck verify_solution(const AlphaMatrix& alpha, const CoverageDistribution& dist,
                              std::optional<double> floor)
{
    SolutionCheck check;
    const auto n = alpha.size();
    if (dist.pi.size() != n) {
        check.note = "distribution has " + std::to_string(dist.pi.size()) + " entries, alpha has " +
                     std::to_string(n) + " states";
        return check;
    }
    const double eps = floor.value_or(0.0);

    const double sum = std::accumulate(dist.pi.begin(), dist.pi.end(), 0.0);
    check.sum_residual = std::abs(sum - 1.0);
    for (auto v : dist.pi)
        check.floor_violation = std::max(check.floor_violation, eps - v);
    check.objective = std::numeric_limits<double>::infinity();
    for (StateId j = 0; j < n; ++j) {
        double col_sum = 0.0;
        for (StateId i = 0; i < n; ++i)
            col_sum += alpha(j, i) * dist.pi[i];
        check.objective = std::min(check.objective, col_sum);
        check.constraint_violation = std::max(check.constraint_violation, dist.p_min - col_sum);
    }
    check.feasible = check.sum_residual <= feasibility_tolerance && check.floor_violation <= feasibility_tolerance &&
                     check.constraint_violation <= feasibility_tolerance;

    if (dist.dual.size() == n) {
        // For any feasible pi: min_j col_j(pi) <= sum_j y_j col_j(pi) = sum_i pi_i w_i,
        // and the right side is largest with all free mass on argmax w.
        std::vector<double> w(n, 0.0);
        for (StateId i = 0; i < n; ++i)
            for (StateId j = 0; j < n; ++j)
                w[i] += alpha(j, i) * dist.dual[j];
        const double free_mass = 1.0 - static_cast<double>(n) * eps;
        check.dual_bound = eps * std::accumulate(w.begin(), w.end(), 0.0) +
                           free_mass * *std::max_element(w.begin(), w.end());
    }
    if (n <= 10) {
        CoverageLP lp;
        lp.n = n;
        lp.alpha = alpha.entries();
        lp.floors.assign(n, eps);
        check.vertex_optimum = vertex_enumeration_optimum(lp);
    }

    constexpr double certificate_tolerance = 1e-8;
    if (check.vertex_optimum) {
        check.optimal = check.feasible && check.objective >= *check.vertex_optimum - certificate_tolerance;
        check.note = "vertex enumeration";
    } else if (check.dual_bound) {
        check.optimal = check.feasible && check.objective >= *check.dual_bound - certificate_tolerance;
        check.note = "dual bound";
    } else {
        check.note = "no optimality certificate available";
    }
    return check;
}

// ---------------------------------------------------------------------------
// Export

std::string lp_to_mps(const CoverageLP& lp)
{
    std::ostringstream out;
    // Fixed MPS fields start at columns 2, 5, 15, 25, 40, 50.
    auto entry = [&](const std::string& col, const std::string& row, double value) {
        std::ostringstream num;
        num << std::setprecision(12) << value;
        out << "    " << std::left << std::setw(8) << col << "  " << std::setw(8) << row << "  " << std::right
            << std::setw(12) << num.str() << '\n';
    };
    auto row_name = [](std::size_t j) { return "C" + std::to_string(j + 1); };
    auto var_name = [](std::size_t i) { return "PI" + std::to_string(i + 1); };

    out << "NAME          COVERAGE\n";
    out << "ROWS\n";
    out << " N  OBJ\n";
    for (std::size_t j = 0; j < lp.n; ++j)
        out << " L  " << row_name(j) << '\n';
    out << " E  SUM\n";
    out << "COLUMNS\n";
    entry("PMIN", "OBJ", -1.0);
    for (std::size_t j = 0; j < lp.n; ++j)
        entry("PMIN", row_name(j), 1.0);
    for (std::size_t i = 0; i < lp.n; ++i) {
        for (std::size_t j = 0; j < lp.n; ++j) {
            const double v = lp.coefficient(i, j);
            if (v != 0.0)
                entry(var_name(i), row_name(j), -v);
        }
        entry(var_name(i), "SUM", 1.0);
    }
    out << "RHS\n";
    entry("RHS", "SUM", 1.0);
    out << "BOUNDS\n";
    for (std::size_t i = 0; i < lp.n; ++i) {
        if (lp.floors[i] > 0.0) {
            std::ostringstream num;
            num << std::setprecision(12) << lp.floors[i];
            out << " LO BND       " << std::left << std::setw(8) << var_name(i) << "  " << std::right
                << std::setw(12) << num.str() << '\n';
        }
    }
    out << "ENDATA\n";
    return out.str();
}

std::string distribution_to_json(const CoverageDistribution& dist, const SolutionCheck& check,
                                 const std::vector<std::string>& state_names)
{
    using nlohmann::json;
    json doc;
    doc["status"] = dist.status == SolverStatus::optimal ? "optimal" : "infeasible";
    doc["p_min"] = dist.p_min;
    doc["iterations"] = dist.iterations;
    json pi = json::array();
    for (std::size_t i = 0; i < dist.pi.size(); ++i)
        pi.push_back({{"state", i < state_names.size() ? state_names[i] : std::to_string(i)}, {"pi", dist.pi[i]}});
    doc["pi"] = std::move(pi);
    doc["residuals"] = {{"sum", check.sum_residual},
                        {"floor", check.floor_violation},
                        {"constraints", check.constraint_violation}};
    doc["feasible"] = check.feasible;
    doc["optimal"] = check.optimal;
    doc["certificate"] = check.note;
    return doc.dump(2) + "\n";
}

} // namespace pathcov
