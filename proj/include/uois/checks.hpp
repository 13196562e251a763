#pragma once

// Randomized self-checks: analytic gradients against finite differences,
// fast paths against brute-force oracles, algebraic laws, and seeded
// determinism. Reports contain no timings so they are reproducible.

#include <cstdint>
#include <string>
#include <vector>

namespace uois {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

enum class GradientFault { None, Semantic, Direction, Rrn };

/// Relative error of each loss gradient against central differences, plus
/// loss 0 at a perfect prediction. `fault` perturbs one analytic gradient.
CheckResult check_semantic_gradient(std::uint64_t seed, int trials, GradientFault fault = GradientFault::None);
CheckResult check_direction_gradient(std::uint64_t seed, int trials, GradientFault fault = GradientFault::None);
CheckResult check_rrn_gradient(std::uint64_t seed, int trials, GradientFault fault = GradientFault::None);

/// Fast and exact voting give identical instance maps on random grids up
/// to max_side x max_side.
CheckResult check_voting_equivalence(std::uint64_t seed, int grids, int max_side = 64);

/// Anti-extensivity/extensivity, idempotence of open and close, and
/// component labeling against a flood fill.
CheckResult check_morphology_laws(std::uint64_t seed, int masks);

/// Hungarian matching against exhaustive search for up to 6 instances.
CheckResult check_hungarian(std::uint64_t seed, int cases);
/// Identical, half-overlap and shifted-square fixtures.
CheckResult check_metric_fixtures();

/// Nonempty same-grid outputs, identity at zero probabilities, reruns equal.
CheckResult check_augment_contract(std::uint64_t seed, int runs);

/// Scene generation, noisy prediction, segmentation and augmentation
/// repeated with the same seed give identical outputs.
CheckResult check_determinism(std::uint64_t seed);

struct SelfcheckOptions {
    std::uint64_t seed = 0;
    GradientFault fault = GradientFault::None;
};

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options);

/// One "PASS name: detail" / "FAIL ..." line per result.
std::string format_report(const std::vector<CheckResult>& results);

}  // namespace uois
