// Regenerates the committed golden fixture under tests/golden/: a small
// two-phase challenge with a planted ordering, plus the expected output tree
// produced by running the full pipeline over it with jobs=1.
//
// Usage: make_golden [golden-root]   (default: tests/golden)

#include <cstdio>
#include <exception>
#include <filesystem>

#include "fixtures.hpp"
#include "segrank/manifest.hpp"
#include "segrank/pipeline.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? argv[1] : "tests/golden";
  try {
    const fs::path challenge_dir = root / "challenge";
    const fs::path expected_dir = root / "expected";
    fs::remove_all(challenge_dir);
    fs::remove_all(expected_dir);

    const fs::path manifest_path = fixtures::write_challenge(
        challenge_dir, fixtures::default_tasks(), fixtures::default_algorithms(),
        1000, 7);

    const segrank::ChallengeManifest manifest =
        segrank::load_manifest(manifest_path);
    segrank::RunOptions options;
    options.out_dir = expected_dir;
    options.jobs = 1;
    segrank::run_evaluate(manifest, options);
    segrank::run_rank(manifest, options);
    segrank::run_bootstrap(manifest, options);
    segrank::run_report(manifest, options);

    std::printf("golden fixture written under %s\n", root.string().c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_golden: %s\n", e.what());
    return 1;
  }
}
