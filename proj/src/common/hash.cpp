#include "common/hash.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "common/error.hpp"

namespace fs = std::filesystem;

namespace cogadapt {

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("hash_file: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

std::uint64_t hash_tree(const std::string& root) {
  std::vector<std::string> rel;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      rel.push_back(fs::relative(e.path(), root).generic_string());
    }
  }
  std::sort(rel.begin(), rel.end());
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& r : rel) {
    h = fnv1a(r.data(), r.size(), h);
    h = fnv1a("\0", 1, h);
    std::uint64_t fh = hash_file((fs::path(root) / r).string());
    h = fnv1a(&fh, sizeof fh, h);
  }
  return h;
}

}  // namespace cogadapt
