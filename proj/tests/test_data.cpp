#include <gtest/gtest.h>

#include <filesystem>

#include "rcgan/data.hpp"
#include "support.hpp"

using namespace rcgan;

namespace {

text::RawCsv raw(std::vector<std::string> header, std::vector<std::vector<std::string>> rows) {
  return {std::move(header), std::move(rows)};
}

}  // namespace

TEST(Text, ShortestRoundTripDoubles) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 48842.0, 1e17}) {
    EXPECT_EQ(*text::parse_double(text::format_double(v)), v);
  }
  EXPECT_FALSE(text::parse_double("1.5x"));
  EXPECT_FALSE(text::parse_double(""));
  EXPECT_FALSE(text::parse_uint("-1"));
}

TEST(Text, CsvQuotesAndBlankLines) {
  const auto csv = text::parse_csv("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n\n2,3\n");
  ASSERT_EQ(csv.rows.size(), 2u);
  EXPECT_EQ(csv.rows[0][0], "x,1");
  EXPECT_EQ(csv.rows[0][1], "say \"hi\"");
  EXPECT_EQ(text::split_csv_line(text::csv_escape("a,\"b\""))[0], "a,\"b\"");
}

TEST(Text, KvReaderRejectsTruncatedFile) {
  EXPECT_THROW(text::KvReader("a=1\nb=2", "f"), Error);
  text::KvReader r("# comment\na=1\n\nb=x y\n", "f");
  EXPECT_EQ(r.next_uint("a"), 1u);
  EXPECT_THROW(r.next("c"), Error);
}

TEST(InferSchema, CategoricalAndNumericByRule) {
  const Schema s = infer_schema(raw({}, {{"a", "1"}, {"b", "2"}}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_TRUE(s.column(0).is_categorical());
  EXPECT_EQ(s.column(0).categories, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(s.column(1).is_numeric());
  EXPECT_EQ(s.column(1).domain_min, 1.0);
  EXPECT_EQ(s.column(1).domain_max, 2.0);
  EXPECT_EQ(s.column(0).name, "col0");
}

TEST(InferSchema, MixedParseForcesCategorical) {
  const Schema s = infer_schema(raw({}, {{"1"}, {"x"}}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_TRUE(s.column(0).is_categorical());
  EXPECT_EQ(s.column(0).categories, (std::vector<std::string>{"1", "x"}));
}

TEST(InferSchema, Errors) {
  try {
    infer_schema(raw({"a"}, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_input);
  }
  try {
    infer_schema(raw({}, {{"1", "2"}, {"3"}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::structural);
  }
}

TEST(InferSchema, HintForcesNumeric) {
  EXPECT_THROW(infer_schema(raw({"a"}, {{"1"}, {"x"}}), {"a"}), Error);
  const Schema s = infer_schema(raw({"a"}, {{"1"}, {"4"}}), {"a"});
  EXPECT_TRUE(s.column(0).is_numeric());
}

TEST(InferSchema, CensusShape) {
  const std::string path = std::string(RCGAN_DATA_DIR) + "/census.csv";
  if (!std::filesystem::exists(path)) GTEST_SKIP() << "census.csv not present";
  const auto csv = text::parse_csv(text::read_file(path));
  const Schema s = infer_schema(csv);
  // 14 attributes plus the income label.
  EXPECT_EQ(s.size(), 15u);
  EXPECT_EQ(s.count(ColumnKind::numeric), 6u);
  const auto attrs = s.project([&] {
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.column(i).name != "income") c.push_back(i);
    }
    return c;
  }());
  EXPECT_EQ(attrs.count(ColumnKind::categorical), 8u);
  EXPECT_EQ(attrs.count(ColumnKind::numeric), 6u);
  EXPECT_EQ(table_from_raw(csv, s).rows(), 48842u);
}

TEST(SchemaType, EncodedWidthIsBlockSum) {
  const Schema s = test::mixed_schema();
  EXPECT_EQ(s.encoded_width(), 1u + 3u + 1u);
  EXPECT_EQ(s.offset(0), 0u);
  EXPECT_EQ(s.offset(1), 1u);
  EXPECT_EQ(s.offset(2), 4u);
}

TEST(SchemaType, RejectsInvalidSpecs) {
  EXPECT_THROW(Schema({{"a", ColumnKind::numeric, {}, 0, 1}, {"a", ColumnKind::numeric, {}, 0, 1}}), Error);
  EXPECT_THROW(Schema({{"a", ColumnKind::categorical, {}, 0, 0}}), Error);
  EXPECT_THROW(Schema({{"a", ColumnKind::categorical, {"x", "x"}, 0, 0}}), Error);
  EXPECT_THROW(Schema({{"a", ColumnKind::numeric, {}, 2, 1}}), Error);
}

TEST(SchemaType, SerializeRoundTripAndVersionTag) {
  const Schema s = test::mixed_schema();
  const auto txt = s.serialize();
  EXPECT_EQ(Schema::parse(txt), s);
  EXPECT_EQ(Schema::parse(txt).serialize(), txt);
  std::string bad = txt;
  bad.replace(bad.find("rcgan-schema/1"), 14, "rcgan-schema/9");
  try {
    Schema::parse(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::version_mismatch);
  }
}

TEST(LoadTable, ClampsNumericsAndRejectsUnknownLabels) {
  const Schema s = test::mixed_schema();
  const Table t = table_from_raw(raw({"x", "color", "y"}, {{"12", "blue", "-9"}}), s);
  EXPECT_EQ(t.value(0, 0), 10.0);
  EXPECT_EQ(t.value(0, 2), -5.0);
  EXPECT_EQ(t.label(0, 1), "blue");
  try {
    table_from_raw(raw({"x", "color", "y"}, {{"1", "red", "0"}, {"1", "pink", "0"}}), s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ingestion);
    EXPECT_NE(std::string(e.what()).find("color"), std::string::npos);
  }
  EXPECT_THROW(table_from_raw(raw({"x", "color", "y"}, {{"abc", "red", "0"}}), s), Error);
}

TEST(LoadTable, EmptyDataSectionGivesEmptyTable) {
  const Schema s = test::mixed_schema();
  EXPECT_EQ(table_from_raw(text::parse_csv("x,color,y\n"), s).rows(), 0u);
}

TEST(Encode, NumericAndOneHot) {
  const Schema s({{"v", ColumnKind::numeric, {}, 0, 10}, {"c", ColumnKind::categorical, {"a", "b", "c"}, 0, 0}});
  Table t(s);
  t.append({5.0, 1.0});
  const auto m = encode(t);
  EXPECT_DOUBLE_EQ(m(0, 0), 0.5);
  EXPECT_EQ(m(0, 1), 0.0);
  EXPECT_EQ(m(0, 2), 1.0);
  EXPECT_EQ(m(0, 3), 0.0);
}

TEST(Encode, DegenerateColumnEncodesToHalf) {
  const Schema s({{"v", ColumnKind::numeric, {}, 3, 3}});
  Table t(s);
  t.append({3.0});
  EXPECT_EQ(encode(t)(0, 0), 0.5);
  EXPECT_EQ(decode(encode(t), s).value(0, 0), 3.0);
}

TEST(Decode, ArgmaxTiesAndClamp) {
  const Schema s({{"c", ColumnKind::categorical, {"a", "b", "c"}, 0, 0}, {"v", ColumnKind::numeric, {}, 0, 10}});
  Matrix m(4, 4);
  m << 0, 1, 0, 1.2,       //
      0.2, 0.5, 0.3, -0.4,  //
      0.4, 0.1, 0.4, 0.5,   //
      0.0, 0.0, 0.0, std::nan("");
  const Table t = decode(m, s);
  EXPECT_EQ(t.label(0, 0), "b");
  EXPECT_EQ(t.value(0, 1), 10.0);
  EXPECT_EQ(t.label(1, 0), "b");
  EXPECT_EQ(t.value(1, 1), 0.0);
  EXPECT_EQ(t.label(2, 0), "a");
  EXPECT_DOUBLE_EQ(t.value(2, 1), 5.0);
  EXPECT_EQ(t.label(3, 0), "a");
  EXPECT_THROW(decode(Matrix(1, 3), s), Error);
}

TEST(Decode, TotalOnArbitraryMatrices) {
  const Schema s = test::mixed_schema();
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 5.0);
  Matrix m(200, static_cast<Eigen::Index>(s.encoded_width()));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(gen);
  const Table t = decode(m, s);
  ASSERT_EQ(t.rows(), 200u);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    EXPECT_GE(t.value(r, 0), 0.0);
    EXPECT_LE(t.value(r, 0), 10.0);
    EXPECT_LT(t.code(r, 1), 3u);
  }
}

TEST(Encode, RoundTripOnRandomRows) {
  const Schema s = test::mixed_schema();
  std::mt19937_64 gen(11);
  Table t(s);
  for (int i = 0; i < 100; ++i) {
    std::uniform_real_distribution<double> ux(0, 10), uy(-5, 5);
    t.append({ux(gen), static_cast<double>(gen() % 3), uy(gen)});
  }
  const Table back = decode(encode(t), s);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    EXPECT_EQ(back.code(r, 1), t.code(r, 1));
    EXPECT_NEAR(back.value(r, 0), t.value(r, 0), 10 * 1e-12);
    EXPECT_NEAR(back.value(r, 2), t.value(r, 2), 10 * 1e-12);
  }
}

TEST(Encode, RealDataBlocksAreOneHot) {
  const Schema s = test::mixed_schema();
  const auto m = encode(test::random_table(s, 50, 1));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    EXPECT_EQ(m.row(r).segment(1, 3).sum(), 1.0);
    EXPECT_EQ(m.row(r).segment(1, 3).maxCoeff(), 1.0);
    EXPECT_GE(m.row(r).minCoeff(), 0.0);
    EXPECT_LE(m.row(r).maxCoeff(), 1.0);
  }
}

TEST(TableOps, CsvRoundTrip) {
  const Schema s = test::mixed_schema();
  const Table t = test::random_table(s, 30, 2);
  EXPECT_EQ(table_from_raw(text::parse_csv(table_to_csv(t)), s), t);
}

TEST(TableOps, SubsampleIsSeededAndOrdered) {
  const Schema s = test::numeric_schema(1);
  Table t(s);
  for (int i = 0; i < 100; ++i) t.append({static_cast<double>(i)});
  const Table a = subsample(t, 10, 5);
  EXPECT_EQ(a, subsample(t, 10, 5));
  ASSERT_EQ(a.rows(), 10u);
  for (std::size_t r = 1; r < a.rows(); ++r) EXPECT_LT(a.value(r - 1, 0), a.value(r, 0));
  EXPECT_EQ(subsample(t, 1000, 5), t);
}
