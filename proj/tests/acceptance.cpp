// Acceptance battery runner: prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. --suite fast runs the sub-minute
// subset; --suite full runs all ten criteria.
#include <cstdio>
#include <cstring>
#include <set>
#include <string>

#include "sqrtpot/validate.hpp"

int main(int argc, char** argv) {
  sqrtpot::Suite suite = sqrtpot::Suite::kFast;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--suite") == 0 && i + 1 < argc) {
      const std::string v = argv[++i];
      if (v == "fast") {
        suite = sqrtpot::Suite::kFast;
      } else if (v == "full") {
        suite = sqrtpot::Suite::kFull;
      } else {
        std::fprintf(stderr, "unknown suite '%s' (use fast|full)\n",
                     v.c_str());
        return 1;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--suite fast|full]\n", argv[0]);
      return 1;
    }
  }

  const auto results = sqrtpot::run_acceptance(suite);
  bool all_pass = true;
  std::set<int> seen;
  for (const auto& r : results) {
    std::printf("%s  criterion %2d  %-22s %s\n", r.pass ? "PASS" : "FAIL",
                r.id, r.name.c_str(), r.detail.c_str());
    all_pass = all_pass && r.pass;
    seen.insert(r.id);
  }
  if (suite == sqrtpot::Suite::kFull) {
    for (int id = 1; id <= 10; ++id) {
      if (!seen.count(id)) {
        std::printf("FAIL  criterion %2d  missing from the full battery\n",
                    id);
        all_pass = false;
      }
    }
  }
  std::printf("%s (%zu criteria)\n",
              all_pass ? "ALL CRITERIA PASSED" : "CRITERIA FAILED",
              results.size());
  return all_pass ? 0 : 1;
}
