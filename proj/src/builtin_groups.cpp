#include "carnot/builtin_groups.hpp"

#include "carnot/errors.hpp"

#include <charconv>

namespace carnot {

GroupDescriptor euclidean(int n) {
  if (n < 1) throw std::invalid_argument("euclidean dimension must be positive");
  return {"euclidean:" + std::to_string(n), {n}, {}};
}

GroupDescriptor heisenberg(int n) {
  if (n < 1) throw std::invalid_argument("heisenberg index must be positive");
  GroupDescriptor d{"heisenberg:" + std::to_string(n), {2 * n, 1}, {}};
  for (int i = 0; i < n; ++i) d.brackets.push_back({2 * i, 2 * i + 1, 2 * n, 1.0});
  return d;
}

GroupDescriptor free_step2(int m) {
  if (m < 2) throw std::invalid_argument("free step-2 group needs at least 2 generators");
  GroupDescriptor d{"free_step2:" + std::to_string(m), {m, m * (m - 1) / 2}, {}};
  int k = m;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) d.brackets.push_back({i, j, k++, 1.0});
  }
  return d;
}

GroupDescriptor engel() {
  return {"engel", {2, 1, 1}, {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}}};
}

GroupDescriptor builtin_group(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  int arg = 1;
  if (colon != std::string::npos) {
    const auto tail = spec.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), arg);
    if (ec != std::errc() || ptr != tail.data() + tail.size()) {
      throw ParseError("bad group parameter in '" + spec + "'");
    }
  }
  try {
    if (name == "euclidean") return euclidean(colon == std::string::npos ? 2 : arg);
    if (name == "heisenberg") return heisenberg(arg);
    if (name == "free_step2") return free_step2(colon == std::string::npos ? 3 : arg);
    if (name == "engel") return engel();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  throw ParseError("unknown builtin group '" + spec + "'");
}

std::vector<std::string> builtin_group_names() {
  return {"heisenberg:1", "heisenberg:2", "free_step2:3", "engel"};
}

}  // namespace carnot
