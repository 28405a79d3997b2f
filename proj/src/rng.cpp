#include "mfy/rng.hpp"

#include <algorithm>
#include <unordered_map>

namespace mfy {

std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
    if (k < 0 || n < 0 || k > n) {
        throw std::invalid_argument("sample_without_replacement: need 0 <= k <= n");
    }
    // Partial Fisher-Yates over a virtual index list; only touched slots are
    // stored, so the cost is O(k) independent of n.
    std::unordered_map<int, int> slot;
    slot.reserve(static_cast<std::size_t>(k) * 2);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        auto at = [&](int idx) {
            auto it = slot.find(idx);
            return it == slot.end() ? idx : it->second;
        };
        const int vj = at(j);
        slot[j] = at(i);
        out.push_back(vj);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace mfy
