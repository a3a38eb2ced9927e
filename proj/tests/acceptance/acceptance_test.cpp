// Acceptance criteria 1-10 under the fast profile. Every criterion is
// evaluated once in SetUpTestSuite; each test then reports one verdict.

#include "batchlab/common/allocator.hpp"
#include "batchlab/lab/acceptance.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

namespace batchlab::lab {
namespace {

class Acceptance : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    configure_allocator();
    AcceptanceOptions options;
    options.fast = true;
    options.work_dir = std::filesystem::temp_directory_path() / "batchlab_acceptance";
    options.jobs = std::max(1u, std::thread::hardware_concurrency());
    options.cli = BATCHLAB_CLI_PATH;
    results_ = run_acceptance(options, [](const CriterionResult& r) {
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.name << ": " << r.detail << " [" << r.seconds
                << " s]" << std::endl;
    });
  }

  static const CriterionResult& result(int id) { return results_.at(static_cast<std::size_t>(id - 1)); }

  static void expect_pass(int id) {
    const auto& r = result(id);
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }

  static inline std::vector<CriterionResult> results_;
};

TEST_F(Acceptance, C01GradientCorrectness) { expect_pass(1); }
TEST_F(Acceptance, C02ExpectileLimits) { expect_pass(2); }
TEST_F(Acceptance, C03IqlMatchesValueIteration) { expect_pass(3); }
TEST_F(Acceptance, C04DiffusionKeepsBothModes) { expect_pass(4); }
TEST_F(Acceptance, C05RecipeImprovesOnBasePolicy) { expect_pass(5); }
TEST_F(Acceptance, C06ImplicitExtractionAtLeastAwr) { expect_pass(6); }
TEST_F(Acceptance, C07SuccessDiversity) { expect_pass(7); }
TEST_F(Acceptance, C08OuNoiseStatistics) { expect_pass(8); }
TEST_F(Acceptance, C09BestOfNMonotone) { expect_pass(9); }
TEST_F(Acceptance, C10CliRunIsDeterministic) { expect_pass(10); }

}  // namespace
}  // namespace batchlab::lab
