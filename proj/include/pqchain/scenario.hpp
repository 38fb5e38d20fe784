#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pqchain {

enum class SigFamily { ML_DSA_65, SLH_DSA_SHAKE_192S };

enum class KexMode { CLASSICAL, HYBRID, PURE_PQC };

/// Certificate algorithm identifiers.
inline constexpr std::uint16_t kAlgMlDsa65 = 0x0905;
inline constexpr std::uint16_t kAlgSlhDsaShake192s = 0x091C;

std::uint16_t algorithm_id(SigFamily f);
std::optional<SigFamily> family_from_algorithm_id(std::uint16_t id);
std::string_view family_token(SigFamily f);  // "ml" / "slh"
std::string_view family_name(SigFamily f);   // "ML-DSA-65" / "SLH-DSA-SHAKE-192s"

std::string_view tls_group_label(KexMode k);  // "x25519", ...
std::string_view kex_mode_name(KexMode k);    // "classical", "hybrid", "pure_pqc"
std::optional<KexMode> kex_from_group_label(std::string_view label);
std::optional<KexMode> kex_from_mode_name(std::string_view name);

struct Placement {
    SigFamily root;
    std::optional<SigFamily> intermediate;
    SigFamily leaf;

    int depth() const { return intermediate ? 3 : 2; }
    bool operator==(const Placement&) const = default;
};

struct PlacementClass {
    bool all_ml = false;
    bool root_slh_leaf_not_slh = false;
    bool intermediate_slh_any = false;
    bool leaf_slh = false;

    bool operator==(const PlacementClass&) const = default;
};

struct Scenario {
    std::string scenario_id;
    KexMode kex;
    Placement placement;
    char campaign;  // 'A'..'D'
    int runs;
    int warmup_runs;
    bool legacy_alias = false;  // id uses the leaf_<alg> form

    int depth() const { return placement.depth(); }
    std::string hierarchy_label() const;  // "SLH root / ML int / ML leaf"
};

inline constexpr int kRunsMlLeaf = 10000;
inline constexpr int kRunsSlhLeaf = 300;
inline constexpr int kDefaultWarmup = 20;

std::string compose_scenario_id(KexMode kex, const Placement& p);

/// Legacy Campaign-A form, e.g. "x25519__leaf_mldsa65"; only for uniform depth-2 placements.
std::optional<std::string> legacy_scenario_id(KexMode kex, const Placement& p);

struct ParsedId {
    KexMode kex;
    Placement placement;
    bool legacy_alias;
};

/// Accepts positional ids and the legacy aliases; nullopt on anything else.
std::optional<ParsedId> parse_scenario_id(std::string_view id);

int default_runs(const Placement& p);

std::vector<Scenario> enumerate_matrix();

PlacementClass classify_placement(const Placement& p);

/// Exact scenario_id lookup in the matrix; legacy ids resolve to their own row.
std::optional<Scenario> find_scenario(std::string_view id);

std::string scenarios_to_json(const std::vector<Scenario>& scenarios);
std::vector<Scenario> scenarios_from_json(std::string_view text);

}  // namespace pqchain
