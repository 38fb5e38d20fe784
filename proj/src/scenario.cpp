#include "pqchain/scenario.hpp"

#include <algorithm>
#include <array>

#include "json.hpp"
#include "pqchain/errors.hpp"

namespace pqchain {
namespace {

constexpr SigFamily ML = SigFamily::ML_DSA_65;
constexpr SigFamily SLH = SigFamily::SLH_DSA_SHAKE_192S;

std::optional<SigFamily> family_from_token(std::string_view t) {
    if (t == "ml") return ML;
    if (t == "slh") return SLH;
    return std::nullopt;
}

std::string_view legacy_leaf_token(SigFamily f) { return f == ML ? "mldsa65" : "slhdsashake192s"; }

std::vector<std::string_view> split_tokens(std::string_view id) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = id.find("__", start);
        parts.push_back(id.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 2;
    }
    return parts;
}

// Parses "<f>_<position>" and checks the position word.
std::optional<SigFamily> positional(std::string_view token, std::string_view position) {
    const std::size_t us = token.find('_');
    if (us == std::string_view::npos || token.substr(us + 1) != position) return std::nullopt;
    return family_from_token(token.substr(0, us));
}

std::string_view family_word(SigFamily f) { return f == ML ? "ML" : "SLH"; }

}  // namespace

std::uint16_t algorithm_id(SigFamily f) { return f == ML ? kAlgMlDsa65 : kAlgSlhDsaShake192s; }

std::optional<SigFamily> family_from_algorithm_id(std::uint16_t id) {
    if (id == kAlgMlDsa65) return ML;
    if (id == kAlgSlhDsaShake192s) return SLH;
    return std::nullopt;
}

std::string_view family_token(SigFamily f) { return f == ML ? "ml" : "slh"; }

std::string_view family_name(SigFamily f) { return f == ML ? "ML-DSA-65" : "SLH-DSA-SHAKE-192s"; }

std::string_view tls_group_label(KexMode k) {
    switch (k) {
        case KexMode::CLASSICAL: return "x25519";
        case KexMode::HYBRID: return "x25519mlkem768";
        case KexMode::PURE_PQC: return "mlkem768";
    }
    return "";
}

std::string_view kex_mode_name(KexMode k) {
    switch (k) {
        case KexMode::CLASSICAL: return "classical";
        case KexMode::HYBRID: return "hybrid";
        case KexMode::PURE_PQC: return "pure_pqc";
    }
    return "";
}

std::optional<KexMode> kex_from_group_label(std::string_view label) {
    for (KexMode k : {KexMode::CLASSICAL, KexMode::HYBRID, KexMode::PURE_PQC})
        if (tls_group_label(k) == label) return k;
    return std::nullopt;
}

std::optional<KexMode> kex_from_mode_name(std::string_view name) {
    for (KexMode k : {KexMode::CLASSICAL, KexMode::HYBRID, KexMode::PURE_PQC})
        if (kex_mode_name(k) == name) return k;
    return std::nullopt;
}

std::string Scenario::hierarchy_label() const {
    std::string out(family_word(placement.root));
    out += " root / ";
    if (placement.intermediate) {
        out += family_word(*placement.intermediate);
        out += " int / ";
    }
    out += family_word(placement.leaf);
    out += " leaf";
    return out;
}

std::string compose_scenario_id(KexMode kex, const Placement& p) {
    std::string id(tls_group_label(kex));
    id += "__";
    id += family_token(p.root);
    id += "_root__";
    if (p.intermediate) {
        id += family_token(*p.intermediate);
        id += "_int__";
    }
    id += family_token(p.leaf);
    id += "_leaf";
    return id;
}

std::optional<std::string> legacy_scenario_id(KexMode kex, const Placement& p) {
    if (p.intermediate || p.root != p.leaf) return std::nullopt;
    std::string id(tls_group_label(kex));
    id += "__leaf_";
    id += legacy_leaf_token(p.leaf);
    return id;
}

std::optional<ParsedId> parse_scenario_id(std::string_view id) {
    const auto parts = split_tokens(id);
    if (parts.size() < 2) return std::nullopt;
    const auto kex = kex_from_group_label(parts[0]);
    if (!kex) return std::nullopt;

    if (parts.size() == 2) {
        for (SigFamily f : {ML, SLH}) {
            if (parts[1] == std::string("leaf_") + std::string(legacy_leaf_token(f)))
                return ParsedId{*kex, Placement{f, std::nullopt, f}, true};
        }
        return std::nullopt;
    }
    if (parts.size() == 3) {
        const auto root = positional(parts[1], "root");
        const auto leaf = positional(parts[2], "leaf");
        if (!root || !leaf) return std::nullopt;
        return ParsedId{*kex, Placement{*root, std::nullopt, *leaf}, false};
    }
    if (parts.size() == 4) {
        const auto root = positional(parts[1], "root");
        const auto inter = positional(parts[2], "int");
        const auto leaf = positional(parts[3], "leaf");
        if (!root || !inter || !leaf) return std::nullopt;
        return ParsedId{*kex, Placement{*root, *inter, *leaf}, false};
    }
    return std::nullopt;
}

int default_runs(const Placement& p) { return p.leaf == SLH ? kRunsSlhLeaf : kRunsMlLeaf; }

std::vector<Scenario> enumerate_matrix() {
    struct Row {
        char campaign;
        KexMode kex;
        Placement placement;
        bool legacy;
    };
    constexpr auto H = KexMode::HYBRID;
    const std::array<Row, 17> rows{{
        {'A', KexMode::CLASSICAL, {ML, std::nullopt, ML}, true},
        {'A', KexMode::CLASSICAL, {SLH, std::nullopt, SLH}, true},
        {'A', H, {ML, std::nullopt, ML}, true},
        {'A', H, {SLH, std::nullopt, SLH}, true},
        {'B', H, {ML, ML, ML}, false},
        {'B', H, {ML, ML, SLH}, false},
        {'B', H, {ML, SLH, SLH}, false},
        {'B', H, {SLH, ML, ML}, false},
        {'B', H, {SLH, ML, SLH}, false},
        {'B', H, {SLH, SLH, SLH}, false},
        {'C', H, {ML, std::nullopt, ML}, false},
        {'C', H, {ML, std::nullopt, SLH}, false},
        {'C', H, {SLH, std::nullopt, ML}, false},
        {'C', H, {SLH, std::nullopt, SLH}, false},
        {'D', KexMode::PURE_PQC, {ML, std::nullopt, ML}, false},
        {'D', KexMode::PURE_PQC, {SLH, ML, ML}, false},
        {'D', KexMode::PURE_PQC, {SLH, std::nullopt, SLH}, false},
    }};
    std::vector<Scenario> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        Scenario s;
        s.scenario_id = r.legacy ? *legacy_scenario_id(r.kex, r.placement) : compose_scenario_id(r.kex, r.placement);
        s.kex = r.kex;
        s.placement = r.placement;
        s.campaign = r.campaign;
        s.runs = default_runs(r.placement);
        s.warmup_runs = kDefaultWarmup;
        s.legacy_alias = r.legacy;
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) {
        return a.campaign != b.campaign ? a.campaign < b.campaign : a.scenario_id < b.scenario_id;
    });
    return out;
}

PlacementClass classify_placement(const Placement& p) {
    PlacementClass c;
    c.leaf_slh = p.leaf == SLH;
    c.intermediate_slh_any = p.intermediate && *p.intermediate == SLH;
    c.root_slh_leaf_not_slh = p.root == SLH && p.leaf != SLH;
    c.all_ml = p.root == ML && p.leaf == ML && (!p.intermediate || *p.intermediate == ML);
    return c;
}

std::optional<Scenario> find_scenario(std::string_view id) {
    for (auto& s : enumerate_matrix())
        if (s.scenario_id == id) return s;
    return std::nullopt;
}

namespace {

nlohmann::ordered_json scenario_json(const Scenario& s) {
    return nlohmann::ordered_json{
        {"scenario_id", s.scenario_id},
        {"kex_mode", kex_mode_name(s.kex)},
        {"tls_group", tls_group_label(s.kex)},
        {"depth", s.depth()},
        {"root_family", family_token(s.placement.root)},
        {"intermediate_family",
         s.placement.intermediate ? nlohmann::ordered_json(family_token(*s.placement.intermediate))
                                 : nlohmann::ordered_json(nullptr)},
        {"leaf_family", family_token(s.placement.leaf)},
        {"campaign", std::string(1, s.campaign)},
        {"runs", s.runs},
        {"warmup_runs", s.warmup_runs},
        {"canonical_id", compose_scenario_id(s.kex, s.placement)},
        {"legacy_alias", s.legacy_alias},
    };
}

SigFamily family_field(const nlohmann::json& j, const char* key) {
    const auto f = family_from_token(j.at(key).get<std::string>());
    if (!f) throw SchemaError(std::string("unknown signature family in field ") + key);
    return *f;
}

}  // namespace

std::string scenarios_to_json(const std::vector<Scenario>& scenarios) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : scenarios) arr.push_back(scenario_json(s));
    return arr.dump(2) + "\n";
}

std::vector<Scenario> scenarios_from_json(std::string_view text) {
    std::vector<Scenario> out;
    try {
        const auto arr = nlohmann::json::parse(text);
        if (!arr.is_array()) throw SchemaError("scenarios file must hold a JSON array");
        for (const auto& j : arr) {
            Scenario s;
            s.scenario_id = j.at("scenario_id").get<std::string>();
            const auto kex = kex_from_mode_name(j.at("kex_mode").get<std::string>());
            if (!kex) throw SchemaError("unknown kex_mode for " + s.scenario_id);
            s.kex = *kex;
            s.placement.root = family_field(j, "root_family");
            if (j.contains("intermediate_family") && !j.at("intermediate_family").is_null())
                s.placement.intermediate = family_field(j, "intermediate_family");
            s.placement.leaf = family_field(j, "leaf_family");
            const auto campaign = j.at("campaign").get<std::string>();
            if (campaign.size() != 1 || campaign[0] < 'A' || campaign[0] > 'D')
                throw SchemaError("bad campaign for " + s.scenario_id);
            s.campaign = campaign[0];
            s.runs = j.at("runs").get<int>();
            s.warmup_runs = j.at("warmup_runs").get<int>();
            s.legacy_alias = j.value("legacy_alias", false);
            if (s.runs < 1 || s.warmup_runs < 0) throw SchemaError("bad run counts for " + s.scenario_id);
            if (j.at("depth").get<int>() != s.depth()) throw SchemaError("depth mismatch for " + s.scenario_id);
            const auto parsed = parse_scenario_id(s.scenario_id);
            if (!parsed || parsed->kex != s.kex || !(parsed->placement == s.placement))
                throw SchemaError("scenario_id does not match its fields: " + s.scenario_id);
            out.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("scenarios JSON: ") + e.what());
    }
    return out;
}

}  // namespace pqchain
