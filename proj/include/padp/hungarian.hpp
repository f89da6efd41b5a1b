// SPDX-License-Identifier: Apache-2.0
//
// padp - post-processing for gimbal-based mmWave angular channel measurements
// Copyright (C) 2026 The padp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PADP_HUNGARIAN_HPP
#define PADP_HUNGARIAN_HPP

#include "padp/error.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace padp
{
    // Dense rows x cols cost matrix with a per-entry feasibility mask.
    // Infeasible entries carry no cost and are never part of an assignment.
    struct CostMatrix
    {
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::vector<double> cost;
        std::vector<char> feasible;

        CostMatrix() = default;
        CostMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), cost(r * c, 0.0), feasible(r * c, 1) {}

        double &at(std::size_t i, std::size_t j) { return cost[i * cols + j]; }
        double at(std::size_t i, std::size_t j) const { return cost[i * cols + j]; }
        bool is_feasible(std::size_t i, std::size_t j) const { return feasible[i * cols + j] != 0; }
        void set_infeasible(std::size_t i, std::size_t j) { feasible[i * cols + j] = 0; }
    };

    struct Assignment
    {
        std::vector<std::pair<std::size_t, std::size_t>> pairs; // (row, col), ascending row
        std::vector<std::size_t> unassigned_rows;
        std::vector<std::size_t> unassigned_cols;
        double total_cost = 0.0;
    };

    namespace detail
    {
        // Shortest augmenting path Hungarian method with potentials, n <= m, 1-based internally.
        // Returns col assigned to each row.
        inline std::vector<std::size_t> hungarian_rows(const std::vector<double> &a, std::size_t n, std::size_t m)
        {
            const double inf = std::numeric_limits<double>::infinity();
            std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
            std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
            for (std::size_t i = 1; i <= n; ++i)
            {
                p[0] = i;
                std::size_t j0 = 0;
                std::vector<double> minv(m + 1, inf);
                std::vector<char> used(m + 1, 0);
                do
                {
                    used[j0] = 1;
                    const std::size_t i0 = p[j0];
                    double delta = inf;
                    std::size_t j1 = 0;
                    for (std::size_t j = 1; j <= m; ++j)
                        if (!used[j])
                        {
                            const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                            if (cur < minv[j])
                            {
                                minv[j] = cur;
                                way[j] = j0;
                            }
                            if (minv[j] < delta)
                            {
                                delta = minv[j];
                                j1 = j;
                            }
                        }
                    for (std::size_t j = 0; j <= m; ++j)
                        if (used[j])
                        {
                            u[p[j]] += delta;
                            v[j] -= delta;
                        }
                        else
                            minv[j] -= delta;
                    j0 = j1;
                } while (p[j0] != 0);
                do
                {
                    const std::size_t j1 = way[j0];
                    p[j0] = p[j1];
                    j0 = j1;
                } while (j0 != 0);
            }
            std::vector<std::size_t> row_to_col(n, 0);
            for (std::size_t j = 1; j <= m; ++j)
                if (p[j] != 0)
                    row_to_col[p[j] - 1] = j - 1;
            return row_to_col;
        }
    }

    // Maximum number of feasible pairs, and among those the minimum total cost. Rows or columns
    // without any feasible entry are left unassigned up front; remaining infeasible entries get a
    // penalty larger than any feasible total so that the solver only uses them when forced, and
    // such pairs are dropped from the result.
    inline Assignment solve_assignment(const CostMatrix &c)
    {
        if (c.cost.size() != c.rows * c.cols || c.feasible.size() != c.rows * c.cols)
            throw DataError("cost matrix storage does not match its shape");

        std::vector<std::size_t> rows, cols;
        for (std::size_t i = 0; i < c.rows; ++i)
            for (std::size_t j = 0; j < c.cols; ++j)
                if (c.is_feasible(i, j))
                {
                    rows.push_back(i);
                    break;
                }
        for (std::size_t j = 0; j < c.cols; ++j)
            for (std::size_t i = 0; i < c.rows; ++i)
                if (c.is_feasible(i, j))
                {
                    cols.push_back(j);
                    break;
                }

        Assignment out;
        std::vector<char> row_taken(c.rows, 0), col_taken(c.cols, 0);
        if (!rows.empty() && !cols.empty())
        {
            double cmax = 0.0;
            for (std::size_t i : rows)
                for (std::size_t j : cols)
                    if (c.is_feasible(i, j))
                    {
                        if (c.at(i, j) < 0.0)
                            throw DataError("assignment costs must be non-negative");
                        cmax = std::max(cmax, c.at(i, j));
                    }
            const bool transpose = rows.size() > cols.size();
            const std::size_t n = transpose ? cols.size() : rows.size();
            const std::size_t m = transpose ? rows.size() : cols.size();
            const double penalty = double(n) * cmax + 1.0;

            std::vector<double> a(n * m);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t k = 0; k < m; ++k)
                {
                    const std::size_t i = transpose ? rows[k] : rows[r];
                    const std::size_t j = transpose ? cols[r] : cols[k];
                    a[r * m + k] = c.is_feasible(i, j) ? c.at(i, j) : penalty;
                }

            const auto sel = detail::hungarian_rows(a, n, m);
            for (std::size_t r = 0; r < n; ++r)
            {
                const std::size_t i = transpose ? rows[sel[r]] : rows[r];
                const std::size_t j = transpose ? cols[r] : cols[sel[r]];
                if (!c.is_feasible(i, j))
                    continue;
                out.pairs.emplace_back(i, j);
                row_taken[i] = col_taken[j] = 1;
            }
            std::sort(out.pairs.begin(), out.pairs.end());
            for (const auto &[i, j] : out.pairs)
                out.total_cost += c.at(i, j);
        }
        for (std::size_t i = 0; i < c.rows; ++i)
            if (!row_taken[i])
                out.unassigned_rows.push_back(i);
        for (std::size_t j = 0; j < c.cols; ++j)
            if (!col_taken[j])
                out.unassigned_cols.push_back(j);
        return out;
    }
}

#endif
