#pragma once

#include "carnot/group.hpp"

#include <string>
#include <vector>

namespace carnot {

/// Abelian R^n, one layer.
GroupDescriptor euclidean(int n);
/// Heisenberg group H^n: layers (2n, 1), [e_{2i-1}, e_{2i}] = e_{2n+1}.
GroupDescriptor heisenberg(int n);
/// Free step-2 group on m generators: layers (m, m(m-1)/2) with
/// [e_i, e_j] = e_{ij} for i < j, second-layer basis in lexicographic order.
GroupDescriptor free_step2(int m);
/// Engel group: layers (2, 1, 1), [e1, e2] = e3, [e1, e3] = e4.
GroupDescriptor engel();

/// Parses "heisenberg:1", "euclidean:2", "free_step2:3", "engel".
/// Throws ParseError for unknown names.
GroupDescriptor builtin_group(const std::string& spec);

/// The groups exercised by the acceptance battery.
std::vector<std::string> builtin_group_names();

}  // namespace carnot
