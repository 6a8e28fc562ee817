#include "poster/curation.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace poster {
namespace {

using test::TempDir;
using test::write_text;

KeywordCategory category(std::string name, std::vector<std::string> keywords) {
  return KeywordCategory{std::move(name), std::move(keywords), 0};
}

TEST(QueryPlanTest, OneKeywordGetsEverySuffix) {
  const std::vector<KeywordCategory> cats = {category("Parties Ideologies", {"liberalism"})};
  const auto plan = generate_query_plan(cats, default_suffix_quotas());
  ASSERT_EQ(plan.entries.size(), 4u);
  EXPECT_EQ(plan.entries[0].query(), "liberalism ad");
  EXPECT_EQ(plan.entries[0].quota, 5u);
  EXPECT_EQ(plan.entries[1].query(), "liberalism poster");
  EXPECT_EQ(plan.entries[1].quota, 20u);
  EXPECT_EQ(plan.entries[2].query(), "liberalism election poster");
  EXPECT_EQ(plan.entries[2].quota, 40u);
  EXPECT_EQ(plan.entries[3].query(), "liberalism political poster");
  EXPECT_EQ(plan.entries[3].quota, 40u);
  EXPECT_EQ(plan.total_budget(), 105u);
}

TEST(QueryPlanTest, FullCategorySize) {
  std::vector<std::string> kws;
  for (int i = 0; i < 170; ++i) kws.push_back("ideology" + std::to_string(i));
  const std::vector<KeywordCategory> cats = {category("Parties Ideologies", kws)};
  const auto plan = generate_query_plan(cats, default_suffix_quotas());
  EXPECT_EQ(plan.entries.size(), 680u);
  EXPECT_EQ(plan.total_budget(), 170u * 105u);
}

TEST(QueryPlanTest, EmptyInputs) {
  const std::vector<KeywordCategory> empty_cat = {category("General", {})};
  EXPECT_TRUE(generate_query_plan(empty_cat, default_suffix_quotas()).entries.empty());
  EXPECT_THROW(generate_query_plan(empty_cat, SuffixQuotas{}), InvalidArgument);
  EXPECT_THROW(generate_query_plan(empty_cat, SuffixQuotas{{"ad", 0}}), InvalidArgument);
  EXPECT_THROW(generate_query_plan(empty_cat, SuffixQuotas{{"ad", 1}, {"ad", 2}}), InvalidArgument);
}

TEST(QueryPlanTest, DuplicateKeywords) {
  const std::vector<KeywordCategory> within = {category("General", {"vote", "vote"})};
  EXPECT_THROW(generate_query_plan(within, default_suffix_quotas()), InvalidArgument);
  const std::vector<KeywordCategory> across = {category("General", {"vote"}),
                                               category("Cartoons", {"vote"})};
  try {
    generate_query_plan(across, default_suffix_quotas());
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("Cartoons"), std::string::npos);
  }
}

TEST(QueryPlanTest, PerCategoryOverride) {
  const std::vector<KeywordCategory> cats = {category("General", {"vote"}),
                                             category("Cartoons", {"satire"})};
  const std::map<std::string, SuffixQuotas> overrides = {{"Cartoons", {{"cartoon", 7}}}};
  const auto plan = generate_query_plan(cats, default_suffix_quotas(), overrides);
  ASSERT_EQ(plan.entries.size(), 5u);
  EXPECT_EQ(plan.entries[4].query(), "satire cartoon");
  EXPECT_EQ(plan.entries[4].quota, 7u);
}

TEST(PublishedCountsTest, TableValues) {
  EXPECT_EQ(published_keyword_count("Candidates"), 1301u);
  EXPECT_EQ(published_keyword_count("Parties Ideologies"), 170u);
  EXPECT_EQ(published_keyword_count("Cartoons"), 1u);
  EXPECT_FALSE(published_keyword_count("Unknown").has_value());
  std::size_t total = 0;
  for (const auto& [name, n] : published_keyword_counts()) total += n;
  EXPECT_EQ(total, 2467u);
}

TEST(PlanCsvTest, ShapeAndRoundTrip) {
  const std::vector<KeywordCategory> one = {category("General", {"vote"})};
  const SuffixQuotas q = {{"ad", 5}};
  const auto csv = plan_to_csv(generate_query_plan(one, q));
  EXPECT_EQ(csv, "category,keyword,suffix,quota\nGeneral,vote,ad,5\n");

  const std::vector<KeywordCategory> cats = {
      category("Paid for by", {"Paid for by \"Friends\", Inc.", "multi\nline"}),
      category("General", {"plain"})};
  const auto plan = generate_query_plan(cats, default_suffix_quotas());
  EXPECT_EQ(plan_from_csv(plan_to_csv(plan)), plan);

  TempDir dir;
  export_plan(plan, dir / "plan.csv");
  EXPECT_EQ(import_plan(dir / "plan.csv"), plan);
}

TEST(PlanCsvTest, Errors) {
  EXPECT_THROW(plan_from_csv(""), ParseError);
  EXPECT_THROW(plan_from_csv("a,b\n"), ParseError);
  EXPECT_THROW(plan_from_csv("category,keyword,suffix,quota\nx,y,z\n"), ParseError);
  EXPECT_THROW(plan_from_csv("category,keyword,suffix,quota\nx,y,z,\"unterminated\n"), ParseError);
  try {
    plan_from_csv("category,keyword,suffix,quota\nx,y,z,1\nx,y,z,abc\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(CsvFieldTest, Quoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(parse_csv("\"a,b\",c\r\n", "t"), (std::vector<std::vector<std::string>>{{"a,b", "c"}}));
  EXPECT_EQ(parse_csv("x,\n", "t"), (std::vector<std::vector<std::string>>{{"x", ""}}));
}

TEST(QuotaFileTest, DefaultsAndOverrides) {
  const auto d = parse_quota_csv("suffix,quota\nad,5\nposter,20\n");
  EXPECT_EQ(d.defaults, (SuffixQuotas{{"ad", 5}, {"poster", 20}}));
  EXPECT_TRUE(d.overrides.empty());

  const auto o = parse_quota_csv("category,suffix,quota\n,ad,5\nCartoons,cartoon,9\n");
  EXPECT_EQ(o.defaults, (SuffixQuotas{{"ad", 5}}));
  EXPECT_EQ(o.overrides.at("Cartoons"), (SuffixQuotas{{"cartoon", 9}}));
}

TEST(QuotaFileTest, RejectsNonPositive) {
  EXPECT_THROW(parse_quota_csv("suffix,quota\nad,0\n"), ParseError);
  EXPECT_THROW(parse_quota_csv("suffix,quota\nad,-3\n"), ParseError);
  EXPECT_THROW(parse_quota_csv("suffix,quota\n,3\n"), ParseError);
  EXPECT_THROW(parse_quota_csv("suffix,count\nad,3\n"), ParseError);
  TempDir dir;
  EXPECT_THROW(load_quota_file(dir / "missing.csv"), IoError);
}

TEST(KeywordDirTest, LoadsSortedFilesAndSkipsComments) {
  TempDir dir;
  write_text(dir / "General.txt", "# sample list\nvote\n\n  election  \n");
  write_text(dir / "Cartoons.txt", "political cartoon\n");
  write_text(dir / "notes.md", "ignored\n");
  const auto cats = load_keyword_dir(dir.path());
  ASSERT_EQ(cats.size(), 2u);
  EXPECT_EQ(cats[0].name, "Cartoons");
  EXPECT_EQ(cats[1].name, "General");
  EXPECT_EQ(cats[1].keywords, (std::vector<std::string>{"vote", "election"}));
  EXPECT_EQ(cats[1].expected_count, 34u);
  EXPECT_THROW(load_keyword_dir(dir / "nope"), IoError);

  TempDir empty;
  EXPECT_TRUE(load_keyword_dir(empty.path()).empty());
}

}  // namespace
}  // namespace poster
