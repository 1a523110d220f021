#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "gamenet/characterization.hpp"

using namespace gamenet;

namespace {

GameId G(std::uint64_t v) { return GameId{v}; }

GameMeta game(std::uint64_t id, std::vector<std::string> tags, std::vector<std::string> genres = {}) {
  return make_game_meta(G(id), "game " + std::to_string(id), std::move(genres), tags);
}

const TagScore& find(const std::vector<TagScore>& v, const std::string& tag) {
  auto it = std::find_if(v.begin(), v.end(), [&](const TagScore& t) { return t.tag == tag; });
  if (it == v.end()) throw std::runtime_error("tag not selected: " + tag);
  return *it;
}

StructuralProfile prof(double density, PowerLawVerdict verdict, std::optional<double> assort = std::nullopt) {
  StructuralProfile p;
  p.n_nodes = 10;
  p.n_edges = 20;
  p.density = density;
  p.mean_degree = 4;
  p.assortativity = assort;
  p.n_components = 1;
  p.lcc_fraction = 1;
  p.powerlaw.verdict = verdict;
  return p;
}

}  // namespace

TEST(Tags, Normalization) {
  EXPECT_EQ(normalize_tag("  Online   Co-op \t"), "online co-op");
  EXPECT_EQ(normalize_tag("FPS"), "fps");
  const auto g = make_game_meta(G(1), "x", {"Action"}, std::vector<std::string>{"Multiplayer", " multiplayer ", "RPG"});
  EXPECT_EQ(g.tags, (std::vector<std::string>{"multiplayer", "rpg"}));
  EXPECT_EQ(g.genres, std::vector<std::string>{"Action"});
}

TEST(TfIdf, HandComputedScores) {
  const std::vector<GameMeta> cat{game(1, {"common", "rare"}), game(2, {"common", "b"}), game(3, {"common", "b"})};
  const auto sel = tfidf_select(cat);
  const auto& g1 = sel.at(G(1));
  EXPECT_NEAR(find(g1, "rare").score, 0.5 * std::log(3.0), 1e-12);
  EXPECT_EQ(find(g1, "common").score, 0.0);
  EXPECT_EQ(find(g1, "common").idf, 0.0);
  EXPECT_EQ(g1.back().tag, "common");
  EXPECT_NEAR(find(sel.at(G(2)), "b").score, 0.5 * std::log(1.5), 1e-12);
}

TEST(TfIdf, TopKAndTieOrder) {
  const std::vector<GameMeta> cat{game(1, {"d", "c", "b", "a"}), game(2, {"z"})};
  const auto sel = tfidf_select(cat, 2);
  ASSERT_EQ(sel.at(G(1)).size(), 2u);
  EXPECT_EQ(sel.at(G(1))[0].tag, "a");
  EXPECT_EQ(sel.at(G(1))[1].tag, "b");
}

TEST(TfIdf, EmptyTagListIsEmptySelection) {
  const std::vector<GameMeta> cat{game(1, {}), game(2, {"x"})};
  const auto sel = tfidf_select(cat);
  EXPECT_TRUE(sel.at(G(1)).empty());
}

TEST(TfIdf, OrderIndependentAndNonnegative) {
  std::mt19937_64 rng(1);
  const std::vector<std::string> pool{"a", "b", "c", "d", "e", "f", "g", "h"};
  std::vector<GameMeta> cat;
  for (std::uint64_t i = 0; i < 30; ++i) {
    std::vector<std::string> t;
    for (const auto& s : pool)
      if (rng() % 3 == 0) t.push_back(s);
    cat.push_back(game(i, t));
  }
  const auto a = tfidf_select(cat, 4);
  std::shuffle(cat.begin(), cat.end(), rng);
  const auto b = tfidf_select(cat, 4);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [id, tags] : a) {
    const auto& other = b.at(id);
    ASSERT_EQ(tags.size(), other.size());
    for (std::size_t i = 0; i < tags.size(); ++i) {
      EXPECT_EQ(tags[i].tag, other[i].tag);
      EXPECT_EQ(tags[i].score, other[i].score);
      EXPECT_GE(tags[i].score, 0.0);
    }
  }
}

TEST(TagFrequencies, CountsSelectedTags) {
  TagSelections sel;
  Membership m;
  for (std::uint64_t i = 0; i < 10; ++i) {
    std::vector<TagScore> t{{"shared", 0, 0, 0}};
    if (i < 7) t.push_back({"online coop", 0, 0, 0});
    sel[G(i)] = t;
    m.emplace_back(G(i), 0);
  }
  sel[G(50)] = {{"solo", 0, 0, 0}, {"puzzle", 0, 0, 0}};
  m.emplace_back(G(50), 1);
  const auto f = cluster_tag_frequencies(m, 3, sel);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].at("online coop"), 7u);
  EXPECT_EQ(f[0].at("shared"), 10u);
  EXPECT_EQ(f[1], (TagCounts{{"puzzle", 1}, {"solo", 1}}));
  EXPECT_TRUE(f[2].empty());
}

TEST(TagFrequencies, MissingSelectionNamesGame) {
  const Membership m{{G(77), 0}};
  try {
    cluster_tag_frequencies(m, 1, {});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("77"), std::string::npos);
  }
}

TEST(Genres, Distribution) {
  const std::vector<GameMeta> cat{game(1, {}, {"A", "B"}), game(2, {}, {"A"}), game(3, {}, {"Action"}),
                                  game(4, {}, {"Action"}), game(5, {}, {})};
  const Membership m{{G(1), 0}, {G(2), 0}, {G(3), 1}, {G(4), 1}, {G(5), 2}};
  const auto d = genre_distribution(m, 3, cat);
  EXPECT_NEAR(d[0].at("A"), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d[0].at("B"), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(d[1], (std::map<std::string, double>{{"Action", 1.0}}));
  EXPECT_TRUE(d[2].empty());
}

TEST(Profiles, AveragesSkipNullsAndCountPowerLawShare) {
  const std::vector<GameMeta> cat{game(1, {"x"}, {"A"}), game(2, {"y"}, {"B"}), game(3, {"x"}, {"A"}),
                                  game(4, {"z"}, {"C"})};
  const auto sel = tfidf_select(cat);
  const std::map<GameId, StructuralProfile> profiles{{G(1), prof(0.2, PowerLawVerdict::power_law, 0.5)},
                                                     {G(2), prof(0.4, PowerLawVerdict::not_power_law)},
                                                     {G(3), prof(0.6, PowerLawVerdict::power_law)},
                                                     {G(4), prof(0.9, PowerLawVerdict::inconclusive)}};
  const Membership m{{G(3), 0}, {G(1), 0}, {G(2), 0}, {G(4), 2}};
  const auto cps = build_cluster_profiles(m, 3, profiles, cat, sel);
  ASSERT_EQ(cps.size(), 2u);
  const auto& c0 = cps[0];
  EXPECT_EQ(c0.cluster, 0u);
  EXPECT_EQ(c0.size, 3u);
  EXPECT_NEAR(*c0.avg_metrics.density, 0.4, 1e-15);
  EXPECT_EQ(*c0.avg_metrics.assortativity, 0.5);
  EXPECT_NEAR(*c0.avg_metrics.powerlaw_share, 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(c0.avg_metrics.degree_centralization.has_value());
  EXPECT_EQ(c0.member_ids, (std::vector<GameId>{G(1), G(2), G(3)}));
  EXPECT_EQ(c0.members, (std::vector<std::string>{"game 1", "game 2", "game 3"}));
  EXPECT_EQ(c0.tag_frequencies.at("x"), 2u);

  const auto& c2 = cps[1];
  EXPECT_EQ(c2.cluster, 2u);
  EXPECT_EQ(*c2.avg_metrics.density, 0.9);
  EXPECT_EQ(*c2.avg_metrics.nodes, 10.0);
  EXPECT_EQ(*c2.avg_metrics.powerlaw_share, 0.0);

  std::size_t total = 0;
  for (const auto& c : cps) {
    total += c.size;
    double sum = 0;
    for (const auto& [g, f] : c.genre_distribution) sum += f;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  EXPECT_EQ(total, m.size());

  Membership reversed(m.rbegin(), m.rend());
  const auto again = build_cluster_profiles(reversed, 3, profiles, cat, sel);
  EXPECT_EQ(nlohmann::json(again), nlohmann::json(cps));

  const auto back = nlohmann::json(cps).get<std::vector<ClusterProfile>>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(cps));
}

TEST(Profiles, CoverageMismatchListsIds) {
  const std::vector<GameMeta> cat{game(1, {"x"})};
  const auto sel = tfidf_select(cat);
  const std::map<GameId, StructuralProfile> profiles{{G(1), prof(0.2, PowerLawVerdict::power_law)}};
  const Membership m{{G(1), 0}, {G(42), 0}};
  try {
    build_cluster_profiles(m, 1, profiles, cat, sel);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }
}

TEST(Catalog, JsonlRoundTripAndCsvHeader) {
  const std::vector<GameMeta> cat{game(1, {"Rpg", "OPEN world"}, {"RPG"}), game(2, {}, {})};
  std::stringstream s;
  write_catalog_jsonl(s, cat);
  const auto back = read_catalog_jsonl(s);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].tags, (std::vector<std::string>{"rpg", "open world"}));
  EXPECT_EQ(back[0].genres, std::vector<std::string>{"RPG"});

  const std::map<GameId, StructuralProfile> profiles{{G(1), prof(0.2, PowerLawVerdict::power_law)},
                                                     {G(2), prof(0.4, PowerLawVerdict::power_law)}};
  const auto cps = build_cluster_profiles({{G(1), 0}, {G(2), 1}}, 2, profiles, cat, tfidf_select(cat));
  std::ostringstream csv;
  write_cluster_profiles_csv(csv, cps);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "cluster,games,nodes,density,mean_deg,std_deg,avg_clust,n_cc,lcc_fraction,modularity,assortativity,"
            "%pl,deg_centr,betw_centr");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Catalog, MalformedLineReportsLineNumber) {
  std::istringstream in("{\"game_id\": 1, \"name\": \"a\", \"genres\": [], \"tags\": []}\nnot json\n");
  try {
    read_catalog_jsonl(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
