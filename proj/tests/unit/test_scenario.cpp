#include <gtest/gtest.h>

#include <map>
#include <set>

#include "pqchain/errors.hpp"
#include "pqchain/scenario.hpp"

using namespace pqchain;

namespace {
constexpr auto ML = SigFamily::ML_DSA_65;
constexpr auto SLH = SigFamily::SLH_DSA_SHAKE_192S;
}  // namespace

TEST(Scenario, MatrixHasSeventeenUniqueEntries) {
    const auto m = enumerate_matrix();
    ASSERT_EQ(m.size(), 17u);
    std::set<std::string> ids;
    std::map<char, int> per_campaign;
    for (const auto& s : m) {
        ids.insert(s.scenario_id);
        ++per_campaign[s.campaign];
    }
    EXPECT_EQ(ids.size(), 17u);
    EXPECT_EQ(per_campaign['A'], 4);
    EXPECT_EQ(per_campaign['B'], 6);
    EXPECT_EQ(per_campaign['C'], 4);
    EXPECT_EQ(per_campaign['D'], 3);
}

TEST(Scenario, RunCountsFollowLeafFamily) {
    for (const auto& s : enumerate_matrix()) {
        EXPECT_EQ(s.runs, s.placement.leaf == SLH ? kRunsSlhLeaf : kRunsMlLeaf) << s.scenario_id;
        EXPECT_EQ(s.warmup_runs, kDefaultWarmup);
    }
}

TEST(Scenario, IdsRoundTripThroughParser) {
    for (const auto& s : enumerate_matrix()) {
        const auto p = parse_scenario_id(s.scenario_id);
        ASSERT_TRUE(p) << s.scenario_id;
        EXPECT_EQ(p->kex, s.kex);
        EXPECT_EQ(p->placement, s.placement);
        EXPECT_EQ(p->legacy_alias, s.legacy_alias);
    }
}

TEST(Scenario, ComposesPositionalIds) {
    EXPECT_EQ(compose_scenario_id(KexMode::HYBRID, Placement{SLH, ML, ML}), "x25519mlkem768__slh_root__ml_int__ml_leaf");
    EXPECT_EQ(compose_scenario_id(KexMode::PURE_PQC, Placement{ML, std::nullopt, ML}), "mlkem768__ml_root__ml_leaf");
    EXPECT_EQ(legacy_scenario_id(KexMode::CLASSICAL, Placement{SLH, std::nullopt, SLH}), "x25519__leaf_slhdsashake192s");
    EXPECT_FALSE(legacy_scenario_id(KexMode::HYBRID, Placement{SLH, std::nullopt, ML}));
}

TEST(Scenario, RejectsMalformedIds) {
    for (const char* bad : {"", "x25519", "x25519mlkem768__ml_root", "foo__ml_root__ml_leaf",
                            "x25519mlkem768__ml_leaf__ml_root", "x25519mlkem768__xx_root__ml_leaf",
                            "x25519mlkem768__ml_root__ml_int__ml_int__ml_leaf", "x25519__leaf_rsa"})
        EXPECT_FALSE(parse_scenario_id(bad)) << bad;
}

TEST(Scenario, ClassificationFlags) {
    const auto c = classify_placement(Placement{SLH, ML, ML});
    EXPECT_FALSE(c.all_ml);
    EXPECT_TRUE(c.root_slh_leaf_not_slh);
    const auto d = classify_placement(Placement{ML, SLH, SLH});
    EXPECT_TRUE(d.leaf_slh);
    EXPECT_TRUE(classify_placement(Placement{ML, std::nullopt, ML}).all_ml);
}

TEST(Scenario, JsonIsByteStableAndRoundTrips) {
    const auto m = enumerate_matrix();
    const auto a = scenarios_to_json(m);
    EXPECT_EQ(a, scenarios_to_json(enumerate_matrix()));
    const auto back = scenarios_from_json(a);
    ASSERT_EQ(back.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_EQ(back[i].scenario_id, m[i].scenario_id);
        EXPECT_EQ(back[i].placement, m[i].placement);
        EXPECT_EQ(back[i].kex, m[i].kex);
        EXPECT_EQ(back[i].runs, m[i].runs);
    }
    EXPECT_EQ(scenarios_to_json(back), a);
}

TEST(Scenario, FindScenario) {
    EXPECT_TRUE(find_scenario("mlkem768__slh_root__slh_leaf"));
    EXPECT_FALSE(find_scenario("mlkem768__ml_root__slh_leaf"));
}

TEST(Scenario, JsonSchemaErrors) {
    EXPECT_THROW(scenarios_from_json("{}"), SchemaError);
    EXPECT_THROW(scenarios_from_json("not json"), SchemaError);
    auto text = scenarios_to_json(enumerate_matrix());
    const auto pos = text.find("\"depth\": 2");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 10, "\"depth\": 3");
    EXPECT_THROW(scenarios_from_json(text), SchemaError);
}
