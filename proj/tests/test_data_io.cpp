#include <doctest.h>

#include <cmath>

#include "kbahc/data_io.hpp"
#include "kbahc/errors.hpp"

using namespace kbahc;

TEST_CASE("prices become simple returns and the first date is dropped") {
    const auto p = parse_panel("date,A\n2020-01-01,100\n2020-01-02,110\n2020-01-03,99\n", PanelKind::Prices);
    REQUIRE(p.n_dates() == 2);
    CHECK(format_date(p.dates()[0]) == "2020-01-02");
    CHECK(p.values()(0, 0) == doctest::Approx(0.10).epsilon(1e-14));
    CHECK(p.values()(0, 1) == doctest::Approx(-0.10).epsilon(1e-14));
}

TEST_CASE("returns file with one fully observed asset is read verbatim") {
    const auto p = parse_panel("date,A\n2020-01-01,0.01\n2020-01-02,-0.02\n", PanelKind::Returns);
    REQUIRE(p.n_assets() == 1);
    CHECK(p.values()(0, 0) == 0.01);
    CHECK(p.values()(0, 1) == -0.02);
    CHECK(p.available().all());
    const auto again = parse_panel(format_panel(p), PanelKind::Returns);
    CHECK(again.values() == p.values());
}

TEST_CASE("missing price marks both adjacent returns unavailable") {
    const auto p = parse_panel("date,A,B\n2020-01-01,100,1\n2020-01-02,,2\n2020-01-03,99,3\n", PanelKind::Prices);
    CHECK_FALSE(p.available()(0, 0));
    CHECK_FALSE(p.available()(0, 1));
    CHECK(std::isnan(p.values()(0, 0)));
    CHECK(p.available()(1, 0));
    CHECK(p.available()(1, 1));
}

TEST_CASE("malformed input reports its location") {
    CHECK_THROWS_AS(parse_panel("date,A\n2020-01-01,abc\n", PanelKind::Returns), DataError);
    CHECK_THROWS_AS(parse_panel("date,A\n2020-01-02,1\n2020-01-01,1\n", PanelKind::Returns), DataError);
    try {
        parse_panel("date,A\n2020-01-01,abc\n", PanelKind::Returns);
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

namespace {
// A: always observed; B: misses one in-sample day; C: only in-sample.
ReturnPanel availability_fixture() {
    return parse_panel(
        "date,A,B,C\n"
        "2020-01-01,0.01,0.01,0.01\n"
        "2020-01-02,0.02,,0.02\n"
        "2020-01-03,0.03,0.03,0.03\n"
        "2020-01-06,0.04,0.04,\n"
        "2020-01-07,0.05,0.05,\n",
        PanelKind::Returns);
}
}  // namespace

TEST_CASE("universe requires full availability in both periods") {
    const auto p = availability_fixture();
    const auto u = universe_at(p, WindowSpec{3, 3, 2});
    REQUIRE(u.size() == 1);
    CHECK(p.assets()[u[0]] == "A");
    const auto later = universe_at(p, WindowSpec{4, 2, 1});
    CHECK(later == std::vector<std::size_t>{0, 1});
}

TEST_CASE("empty universe is an error") {
    const auto p = parse_panel("date,A\n2020-01-01,\n2020-01-02,0.1\n2020-01-03,0.1\n", PanelKind::Returns);
    CHECK_THROWS_AS(universe_at(p, WindowSpec{2, 2, 1}), EmptyUniverseError);
}

TEST_CASE("slice returns contiguous submatrices") {
    const auto p = availability_fixture();
    const auto s = slice(p, WindowSpec{3, 3, 2}, {0});
    REQUIRE(s.in_sample.cols() == 3);
    REQUIRE(s.out_sample.cols() == 2);
    CHECK(s.in_sample(0, 2) == 0.03);
    CHECK(s.out_sample(0, 0) == 0.04);
    const auto one = slice(p, WindowSpec{4, 2, 1}, {0, 1});
    CHECK(one.out_sample.cols() == 1);
    CHECK(one.out_sample(1, 0) == 0.05);
    CHECK_THROWS(slice(p, WindowSpec{3, 3, 2}, {1}));
}

TEST_CASE("window must fit the panel") {
    const auto p = availability_fixture();
    CHECK_THROWS_AS(WindowSpec({4, 3, 2}).validate(p), ConfigError);
    CHECK_THROWS_AS(WindowSpec({3, 4, 1}).validate(p), ConfigError);
}
