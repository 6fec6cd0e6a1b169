#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>

#include "kpz/acceptance.hpp"

// Usage: acceptance [--threads N] [--only ID] [--verbose]
int main(int argc, char** argv) {
  kpz::acceptance::Options opt;
  opt.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--threads" && i + 1 < argc) opt.threads = std::atoi(argv[++i]);
    else if (a == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (a == "--verbose") opt.verbose = true;
    else {
      std::fprintf(stderr, "unknown argument: %s\n", a.c_str());
      return 2;
    }
  }
  bool all = true;
  for (int id = 1; id <= 7; ++id) {
    if (only && id != only) continue;
    const auto v = kpz::acceptance::run_one(id, opt);
    std::printf("%s\n", kpz::acceptance::format(v).c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
