#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_support.hpp"
#include "tutor/resources.hpp"

using namespace tutor;
using namespace tutor::resources;

namespace {

const std::string kHeader = "area,resource_type,title,description,url,difficulty_level\n";

ResourceCatalog load(const std::string& csv) {
  std::istringstream in(csv);
  return load_resources(in);
}

ImprovementArea area(const std::string& name, double confidence, std::vector<std::string> examples = {}) {
  return {name, confidence, std::move(examples), test::epoch(), "ses"};
}

Resource res(const std::string& a, const std::string& title, Band band, const std::string& desc = "") {
  return {a, "article", title, desc, "https://example.org/" + title, band};
}

int band_index(Band b) { return static_cast<int>(b); }

}  // namespace

TEST(Bands, Boundaries) {
  EXPECT_EQ(band_for_level(1.0), Band::beginner);
  EXPECT_EQ(band_for_level(5.0), Band::beginner);
  EXPECT_EQ(band_for_level(5.1), Band::intermediate);
  EXPECT_EQ(band_for_level(10.0), Band::intermediate);
  EXPECT_EQ(band_for_level(10.01), Band::advanced);
  EXPECT_EQ(band_for_level(14.0), Band::advanced);
  EXPECT_THROW(band_for_level(0.99), OutOfRange);
  EXPECT_THROW(band_for_level(14.01), OutOfRange);
  EXPECT_EQ(parse_band("Advanced"), Band::advanced);
  EXPECT_FALSE(parse_band("expert"));
}

TEST(Urls, Syntax) {
  for (const char* ok : {"https://example.org", "http://a.b/c?d=1#e", "ftp://host:21/x", "git+ssh://u@host/repo"}) {
    EXPECT_TRUE(is_valid_url(ok)) << ok;
  }
  for (const char* bad : {"", "example.org", "https://", "://host", "1http://host", "https:// host", "mailto:a@b"}) {
    EXPECT_FALSE(is_valid_url(bad)) << bad;
  }
}

TEST(LoadResources, ColumnsInAnyOrder) {
  const auto cat = load(
      "URL,Title,area,description,difficulty_level,resource_type\n"
      "https://example.org/x,Articles 101,articles,About a and an.,Beginner,video\n");
  ASSERT_EQ(cat.size(), 1u);
  EXPECT_EQ(cat.items()[0], (Resource{"Articles", "video", "Articles 101", "About a and an.", "https://example.org/x",
                                      Band::beginner}));
}

TEST(LoadResources, MissingColumn) {
  try {
    load("area,resource_type,title,description,url\n");
    FAIL();
  } catch (const MissingColumn& e) {
    EXPECT_EQ(e.column(), "difficulty_level");
  }
}

TEST(LoadResources, AggregatesRowIssues) {
  try {
    load(kHeader +
         "Articles,article,Fine,ok,https://example.org/a,beginner\n"
         "Spelling,article,Bad area,x,https://example.org/b,beginner\n"
         "Articles,article,,x,https://example.org/c,beginner\n"
         "Articles,article,Bad url,x,not a url,beginner\n"
         "Articles,article,Bad band,x,https://example.org/d,expert\n"
         "Articles,article,short row\n");
    FAIL();
  } catch (const RowValidation& e) {
    std::vector<std::size_t> rows;
    for (const auto& i : e.issues()) rows.push_back(i.row);
    EXPECT_EQ(rows, (std::vector<std::size_t>{3, 4, 5, 6, 7}));
  }
}

TEST(LoadResources, SampleFileCoversAllAreas) {
  const auto cat = test::sample_catalog();
  EXPECT_EQ(cat.per_area_counts().size(), kAreaTaxonomy.size());
}

TEST(Recommend, TwoResourceExample) {
  const ResourceCatalog cat({res("Articles", "Advanced articles", Band::advanced),
                             res("Articles", "Beginner articles", Band::beginner)});
  const auto out = recommend(cat, {area("Articles", 0.8)}, 3.0, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].title, "Beginner articles");
  EXPECT_EQ(recommend(cat, {area("Articles", 0.8)}, 3.0, 1), out);
}

TEST(Recommend, EdgeCases) {
  const ResourceCatalog cat({res("Articles", "A", Band::beginner), res("Tenses", "T", Band::beginner)});
  EXPECT_TRUE(recommend(cat, {area("Idioms", 0.9)}, 3.0, 3).empty());
  EXPECT_EQ(recommend(cat, {area("Articles", 0.5), area("Tenses", 0.9)}, 3.0, 10).size(), 2u);
  EXPECT_EQ(recommend(cat, {area("Articles", 0.5), area("Tenses", 0.9)}, 3.0, 10)[0].title, "T");
  EXPECT_THROW(recommend(ResourceCatalog{}, {area("Articles", 0.5)}, 3.0, 1), EmptyCatalog);
  EXPECT_THROW(recommend(cat, {}, 3.0, 1), ValidationError);
  EXPECT_THROW(recommend(cat, {area("Articles", 0.5)}, 3.0, 0), ValidationError);
  EXPECT_THROW(recommend(cat, {area("Articles", 0.5)}, 20.0, 1), OutOfRange);
}

TEST(Recommend, RelevanceBreaksTies) {
  const ResourceCatalog cat({res("Tenses", "Alpha", Band::beginner, "Reading practice."),
                             res("Tenses", "Beta", Band::beginner, "Past tense of go: went, not goed.")});
  const auto out = recommend(cat, {area("Tenses", 0.7, {"I goed to school"})}, 2.0, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].title, "Beta");
  LexicalScorer scorer;
  EXPECT_GT(scorer.score(cat.items()[1], area("Tenses", 0.7, {"I goed to school"})), 0.0);
}

TEST(Recommend, RandomCatalogsDeterministicAndBandOrdered) {
  std::mt19937_64 rng(31337);
  const std::vector<std::string> names(kAreaTaxonomy.begin(), kAreaTaxonomy.begin() + 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Resource> items;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      items.push_back(res(names[rng() % names.size()], "r" + std::to_string(rng() % 1000),
                          static_cast<Band>(rng() % 3), rng() % 2 ? "present tense articles" : "idioms"));
    }
    const ResourceCatalog cat(items);
    std::vector<ImprovementArea> areas;
    for (int i = 0; i < 3; ++i) {
      areas.push_back(area(names[rng() % names.size()], 0.31 + 0.1 * static_cast<double>(rng() % 7), {"the tense"}));
    }
    const double level = 1.0 + static_cast<double>(rng() % 1300) / 100.0;
    const std::size_t k = 1 + rng() % 50;

    const auto out = recommend(cat, areas, level, k);
    ASSERT_EQ(out, recommend(cat, areas, level, k));

    std::map<std::string, double> conf;
    for (const auto& a : areas) conf[a.area] = std::max(conf[a.area], a.confidence);
    std::size_t candidates = 0;
    for (const auto& r : items) candidates += conf.count(r.area);
    ASSERT_EQ(out.size(), std::min(k, candidates));

    const int learner_band = band_index(band_for_level(level));
    for (std::size_t i = 0; i < out.size(); ++i) {
      ASSERT_TRUE(conf.count(out[i].area));
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        if (out[i].area != out[j].area) {
          ASSERT_GE(conf[out[i].area], conf[out[j].area]);
          continue;
        }
        const bool later_in_band = band_index(out[j].difficulty_level) == learner_band;
        const bool earlier_in_band = band_index(out[i].difficulty_level) == learner_band;
        ASSERT_FALSE(later_in_band && !earlier_in_band) << "trial " << trial;
        ASSERT_LE(std::abs(band_index(out[i].difficulty_level) - learner_band),
                  std::abs(band_index(out[j].difficulty_level) - learner_band));
      }
    }
  }
}
