#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <map>
#include <string>
#include <vector>

#include "pqchain/analytics.hpp"
#include "pqchain/bench.hpp"
#include "pqchain/pki.hpp"

namespace pqchain::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// "PASS 3 server-bound decomposition: <detail>"
std::string format(const CriterionResult& r);

/// Criterion 1: analytics over the shipped reference fixture against published values.
CriterionResult check_fixture();

struct LiveRun {
    std::vector<bench::RunAggregate> aggregates;
    std::map<std::string, std::vector<bench::HandshakeSample>> samples;
};

/// Criteria 2-6 over a MIRROR_PAPER bench of the full matrix.
std::vector<CriterionResult> check_live(const LiveRun& run);

/// Criterion 7: every scenario under every served-chain policy completes with
/// agreeing secrets, and single-byte tampering of Certificate or
/// CertificateVerify is rejected. `tampers_per_message` offsets per message type.
CriterionResult check_correctness(const std::map<std::string, pki::HierarchyMaterial>& hierarchies,
                                  std::uint64_t now, std::uint64_t rng_seed, int tampers_per_message = 8);

/// Criterion 8: re-provisioning is byte-identical and bytes_read is constant per scenario.
CriterionResult check_determinism(const std::map<std::string, pki::HierarchyMaterial>& hierarchies,
                                  ByteView seed, std::uint64_t issued_at, const LiveRun& run);

struct SuiteOptions {
    bool fixture_only = false;
    int runs_ml_leaf = 50;
    int runs_slh_leaf = 20;
    int warmup = 1;
    Bytes seed = Bytes(32, 0x5a);
    /// When set, scenarios.json, pki/, results/ and report/ are written here.
    std::optional<std::filesystem::path> workdir;
    std::function<void(const std::string&)> log;
};

/// gen -> provision -> bench -> analyze -> criteria. Stage failures are
/// rethrown with the stage name prefixed and their error type preserved.
std::vector<CriterionResult> run_suite(const SuiteOptions& options);

}  // namespace pqchain::acceptance
