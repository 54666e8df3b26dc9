#include "kadapt/partition.hpp"

#include <algorithm>

#include "kadapt/errors.hpp"

namespace kadapt {

Partition canonicalize_partition(const Partition& partition, int universe_size) {
    Partition canon;
    canon.reserve(partition.size());
    size_t total = 0;
    for (const auto& block : partition) {
        if (block.empty()) throw InvalidPartition("partition has an empty block");
        auto sorted = block;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw InvalidPartition("partition block has duplicate elements");
        total += sorted.size();
        canon.push_back(std::move(sorted));
    }
    std::sort(canon.begin(), canon.end());

    // Disjointness + coverage: the union, sorted, must be exactly 0..N-1.
    std::vector<int> all;
    all.reserve(total);
    for (const auto& block : canon) all.insert(all.end(), block.begin(), block.end());
    std::sort(all.begin(), all.end());
    const int n = universe_size >= 0 ? universe_size
                                     : (all.empty() ? 0 : all.back() + 1);
    if (static_cast<int>(all.size()) != n)
        throw InvalidPartition("partition blocks do not cover the scenario set exactly");
    for (int i = 0; i < n; ++i)
        if (all[i] != i)
            throw InvalidPartition("partition blocks overlap or leave gaps");
    return canon;
}

std::string partition_key(const Partition& canonical) {
    std::string key;
    for (size_t b = 0; b < canonical.size(); ++b) {
        if (b) key += '|';
        for (size_t i = 0; i < canonical[b].size(); ++i) {
            if (i) key += ',';
            key += std::to_string(canonical[b][i]);
        }
    }
    return key;
}

}  // namespace kadapt
