#pragma once

#include <string>
#include <vector>

namespace kadapt {

/// A partition of scenario ids into nonempty blocks.
using Partition = std::vector<std::vector<int>>;

/// Canonical form: every block sorted ascending, blocks sorted
/// lexicographically. The result compares/hashes independently of the order
/// blocks and elements were supplied in.
///
/// If universe_size >= 0, the blocks must be disjoint and cover exactly
/// 0..universe_size-1; otherwise coverage of 0..max is required. Violations
/// throw InvalidPartition.
Partition canonicalize_partition(const Partition& partition, int universe_size = -1);

/// Compact textual key for a canonical partition: "0,2|1|3".
std::string partition_key(const Partition& canonical);

}  // namespace kadapt
