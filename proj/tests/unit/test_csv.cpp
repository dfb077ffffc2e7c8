#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "seqdesign/csv.hpp"
#include "seqdesign/errors.hpp"
#include "seqdesign/matrix.hpp"

using namespace seqdesign;

TEST_SUITE("csv") {
  TEST_CASE("doubles round-trip through their shortest text") {
    Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
      const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(200)) - 100);
      double back = 0.0;
      REQUIRE(parse_double(format_double(v), back));
      CHECK(back == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(3.0) == "3");
  }

  TEST_CASE("strict number parsing rejects trailing garbage") {
    double v = 0.0;
    CHECK(parse_double("+1.5", v));
    CHECK(v == 1.5);
    CHECK_FALSE(parse_double("1.5x", v));
    CHECK_FALSE(parse_double("", v));
    CHECK_FALSE(parse_double("abc", v));
  }

  TEST_CASE("comments, header and rows survive a format/parse cycle") {
    CsvTable t;
    t.comments = {"kind=demo,seed=1"};
    t.header = {"a", "b"};
    t.rows = {{"1", "2"}, {"3", "4.5"}};
    const std::string text = format_csv(t);
    CHECK(text == "#kind=demo,seed=1\na,b\n1,2\n3,4.5\n");
    const CsvTable back = parse_csv(text);
    CHECK(back.comments == t.comments);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(back.column_index("b") == 1);
    CHECK(back.column_index("zzz") == CsvTable::npos);
  }

  TEST_CASE("ragged rows are parse errors carrying the line number") {
    try {
      parse_csv("a,b\n1,2\n3\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
    }
  }

  TEST_CASE("files are written with parent directories and read back") {
    testing::TempDir dir;
    CsvTable t;
    t.header = {"x"};
    t.rows = {{"1"}};
    write_csv(dir / "nested/deeper/t.csv", t);
    CHECK(read_csv(dir / "nested/deeper/t.csv").rows == t.rows);
    CHECK_THROWS_AS(read_csv(dir / "missing.csv"), ArgumentError);
  }
}

TEST_SUITE("matrix") {
  TEST_CASE("row and column selection") {
    const Matrix m{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    const std::vector<std::size_t> rows{2, 0};
    const std::vector<std::size_t> cols{1};
    CHECK(m.select_rows(rows) == Matrix{{7, 8, 9}, {1, 2, 3}});
    CHECK(m.select_cols(cols) == Matrix{{2}, {5}, {8}});
    CHECK(m.column(2) == std::vector<double>{3, 6, 9});
    CHECK(Matrix::hconcat(m.select_cols(cols), m.select_cols(cols)) == Matrix{{2, 2}, {5, 5}, {8, 8}});
  }

  TEST_CASE("appending checks widths") {
    Matrix m;
    const std::vector<double> a{1, 2};
    m.append_row(a);
    m.append_row(a);
    CHECK(m.rows() == 2);
    const std::vector<double> bad{1};
    CHECK_THROWS_AS(m.append_row(bad), ShapeError);
    const std::vector<double> col{9, 9};
    m.append_column(col);
    CHECK(m == Matrix{{1, 2, 9}, {1, 2, 9}});
  }

  TEST_CASE("squared distance") {
    const std::vector<double> a{0, 0}, b{3, 4};
    CHECK(squared_distance(a, b) == 25.0);
  }
}
