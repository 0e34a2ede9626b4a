#include "grokinfo/experiment.hpp"
#include "grokinfo/report.hpp"
#include "grokinfo/verify.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace grokinfo;
namespace fs = std::filesystem;

TEST_CASE("a run directory yields accuracy, progress and pareto files") {
    const auto dir = testutil::scratch_dir("report");
    run_experiment(testutil::tiny_config(dir / "run"));
    const auto bundle = build_report({dir / "run"}, dir / "bundle");
    CHECK(bundle.figures.size() == 3);
    for (const auto& f : bundle.figures) CHECK(fs::exists(f.file));
    CHECK(fs::exists(dir / "bundle" / "manifest.json"));

    const auto again = build_report({dir / "run"}, dir / "bundle2");
    for (std::size_t i = 0; i < bundle.figures.size(); ++i)
        CHECK(testutil::slurp(bundle.figures[i].file) == testutil::slurp(again.figures[i].file));
    CHECK_THROWS(build_report({dir / "missing"}, dir / "bundle3"));
    fs::remove_all(dir);
}

TEST_CASE("verification passes on a fresh run") {
    const auto dir = testutil::scratch_dir("verify");
    run_experiment(testutil::tiny_config(dir / "run"));
    for (const auto& c : verify_numerics()) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
    for (const auto& c : verify_run(dir / "run", true)) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
    fs::remove_all(dir);
}
