#pragma once

#include <cstddef>
#include <vector>

namespace tanglekit::lap {

// Solves the square linear assignment problem to optimality: returns, for
// each row, the column it is assigned to, minimizing the total cost.
// Costs may be +infinity for forbidden pairs. Shortest-augmenting-path with
// dual potentials, O(n^3) worst case but fast on sparse/gated instances.
// Throws std::runtime_error("infeasible assignment") when no perfect
// matching of finite cost exists. n == 0 returns an empty vector.
std::vector<int> solve_square(const std::vector<double>& cost, std::size_t n);

}  // namespace tanglekit::lap
