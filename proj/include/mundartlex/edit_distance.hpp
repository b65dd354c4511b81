#pragma once

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <ranges>
#include <vector>

namespace mundartlex {

/// Levenshtein distance with unit insert/delete/substitute costs.
/// Two-row dynamic program, O(|a|·|b|) time and O(|b|) memory.
template <std::ranges::forward_range A, std::ranges::forward_range B, class Eq = std::ranges::equal_to>
std::size_t edit_distance(const A& a, const B& b, Eq eq = {}) {
    const auto n = static_cast<std::size_t>(std::ranges::distance(b));
    std::vector<std::size_t> prev(n + 1), cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
    std::size_t i = 0;
    for (const auto& x : a) {
        ++i;
        cur[0] = i;
        std::size_t j = 0;
        for (const auto& y : b) {
            ++j;
            const std::size_t sub = prev[j - 1] + (eq(x, y) ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

}  // namespace mundartlex
