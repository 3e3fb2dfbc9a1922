#pragma once

#include <algorithm>
#include <tuple>

namespace dreamkg {

template <typename T, typename KeyFn>
std::vector<Ranked<T>> rank_by_distance(const SpatialAnchor& anchor, std::vector<T> candidates,
                                        KeyFn key_of) {
    std::vector<Ranked<T>> out;
    out.reserve(candidates.size());
    for (auto& c : candidates) {
        const double m = haversine_m(anchor.point, key_of(c).point);
        out.push_back(Ranked<T>{std::move(c), m});
    }
    std::stable_sort(out.begin(), out.end(), [&](const Ranked<T>& a, const Ranked<T>& b) {
        const RankKey ka = key_of(a.item);
        const RankKey kb = key_of(b.item);
        return std::tie(a.meters, ka.name, ka.id) < std::tie(b.meters, kb.name, kb.id);
    });
    return out;
}

}  // namespace dreamkg
