#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numeric>

#include "hubopt/market.hpp"

using namespace hubopt;

namespace {

std::string hourly_csv(std::size_t hours, double value = 1.0, std::size_t skip = SIZE_MAX) {
  std::string text = "timestamp,value\n";
  const auto start = parse_timestamp("2022-01-01T00:00:00Z");
  for (std::size_t h = 0; h < hours; ++h) {
    if (h == skip) continue;
    text += format_timestamp(start + std::chrono::hours(h)) + "," + std::to_string(value) + "\n";
  }
  return text;
}

MarketSeries flat_market(std::size_t hours, double spot, double ng, double em) {
  MarketSeries m;
  m.snapshots = Snapshots::hourly(parse_timestamp("2022-01-01T00:00:00Z"), hours);
  m.spot.assign(hours, spot);
  m.ng.assign(hours, ng);
  m.emission.assign(hours, em);
  m.dk1_demand.assign(hours, 1.0);
  m.dh_demand.assign(hours, 1.0);
  m.wind_cf.assign(hours, 0.5);
  m.solar_cf.assign(hours, 0.1);
  return m;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("well-formed year loads in full") {
  const auto s = parse_series_csv(hourly_csv(8760), "year.csv");
  CHECK(s.size() == 8760);
  CHECK(s.timestamps.back() - s.timestamps.front() == std::chrono::hours(8759));
}

TEST_CASE("a missing hour is rejected with its row") {
  try {
    parse_series_csv(hourly_csv(10, 1.0, 4), "gap.csv");
    FAIL("expected an error");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gap.csv: row 6") != std::string::npos);
    CHECK(msg.find("1 missing hour") != std::string::npos);
    CHECK(msg.find("2022-01-01T03:00:00Z") != std::string::npos);
  }
}

TEST_CASE("duplicate and malformed rows are fatal") {
  std::string dup = hourly_csv(3);
  dup += "2022-01-01T02:00:00Z,4\n";
  CHECK_THROWS_WITH_AS(parse_series_csv(dup, "d.csv"), doctest::Contains("row 5: duplicate"), InputError);
  CHECK_THROWS_WITH_AS(parse_series_csv("timestamp,value\n2022-01-01T00:00:00Z,abc\n", "b.csv"),
                       doctest::Contains("row 2: unparseable"), InputError);
  CHECK_THROWS_WITH_AS(parse_series_csv("time,val\n", "h.csv"), doctest::Contains("row 1"), InputError);
  CHECK_THROWS_AS(parse_series_csv("timestamp,value\n", "e.csv"), InputError);
}

TEST_CASE("coarse series are forward-filled to hourly") {
  const std::string daily =
      "timestamp,value\n2022-01-01T00:00:00Z,20\n2022-01-02T00:00:00Z,30\n2022-01-03T00:00:00Z,25\n";
  CHECK_THROWS_AS(parse_series_csv(daily, "ng.csv"), InputError);
  const auto s = parse_series_csv(daily, "ng.csv", GapPolicy::ForwardFill);
  REQUIRE(s.size() == 49);
  CHECK(s.values[0] == 20.0);
  CHECK(s.values[23] == 20.0);
  CHECK(s.values[24] == 30.0);
  CHECK(s.values[48] == 25.0);
  const auto snaps = Snapshots::hourly(parse_timestamp("2022-01-01T00:00:00Z"), 72);
  const auto aligned = align(s, snaps, "ng", GapPolicy::ForwardFill);
  CHECK(aligned[71] == 25.0);
  CHECK_THROWS_AS(align(s, snaps, "ng"), InputError);
}

TEST_CASE("purchase price") {
  auto m = flat_market(3, 30.0, 25.0, 0.2);
  m.tariffs.purchase = 20.0;
  CHECK(purchase_price(m, 150.0)[0] == doctest::Approx(30.0 + 20.0 + 0.2 * 150.0));
  CHECK(purchase_price(m, 0.0)[1] == 50.0);
  m.emission.assign(3, 0.0);
  CHECK(purchase_price(m, 250.0)[2] == 50.0);
}

TEST_CASE("sale price passes negative spot through") {
  auto m = flat_market(2, 40.0, 0.0, 0.0);
  m.tariffs.sale = 1.0;
  CHECK(sale_price(m)[0] == 39.0);
  m.spot = {-5.0, 12.5};
  CHECK(sale_price(m)[0] == -6.0);
  m.tariffs.sale = 0.0;
  CHECK(sale_price(m) == m.spot);
}

TEST_CASE("natural gas price") {
  auto m = flat_market(1, 0.0, 25.0, 0.0);
  m.tariffs.ng_emission = 0.202;
  CHECK(ng_price(m, 150.0)[0] == doctest::Approx(25.0 + 0.202 * 150.0));
  CHECK(ng_price(m, 0.0)[0] == 25.0);
  m.tariffs.ng_emission = 0.0;
  CHECK(ng_price(m, 150.0)[0] == 25.0);
}

TEST_CASE("RFNBO mask boundary is inclusive") {
  CHECK(rfnbo_mask({15.0, 25.0, 20.0}) == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(sum(rfnbo_mask(std::vector<double>(10, 100.0))) == 0.0);
  CHECK(sum(rfnbo_mask(std::vector<double>(10, -10.0))) == 10.0);
}

TEST_CASE("external demand rescales the profile") {
  std::vector<double> profile(8760);
  for (std::size_t t = 0; t < profile.size(); ++t) profile[t] = 1.0 + 0.3 * std::sin(0.01 * static_cast<double>(t));
  const auto tenth = external_demand(profile, max_re_sales(0.0, 0.622, 500e3, 1.0, 0.1));
  CHECK(sum(tenth) == doctest::Approx(50e3).epsilon(1e-12));
  CHECK(sum(external_demand(profile, max_re_sales(272e3, 0.622, 0.0, 0.5, 0.0))) == 0.0);
  const double h2_only = max_re_sales(272e3, 0.622, 0.0, 0.5, 1.0);
  CHECK(h2_only == doctest::Approx(272e3 / 0.622));
  CHECK(h2_only / 1e3 == doctest::Approx(437.3).epsilon(1e-4));
  const auto scaled = external_demand(profile, h2_only);
  CHECK(std::abs(sum(scaled) - h2_only) <= 1e-9 * h2_only);
  CHECK_THROWS_AS(external_demand(std::vector<double>(5, 0.0), 1.0), InputError);
}

TEST_CASE("purchase never undercuts sale with non-negative tariffs") {
  auto m = flat_market(4, 0.0, 0.0, 0.0);
  m.spot = {-50.0, 0.0, 20.0, 300.0};
  m.emission = {0.0, 0.1, 0.3, 0.05};
  const auto buy = purchase_price(m, 150.0);
  const auto sell = sale_price(m);
  for (std::size_t t = 0; t < 4; ++t) CHECK(buy[t] >= sell[t]);
}

TEST_CASE("week selection stitches onto a contiguous index") {
  auto m = flat_market(8736, 0.0, 0.0, 0.0);
  for (std::size_t t = 0; t < m.spot.size(); ++t) m.spot[t] = static_cast<double>(t);
  const auto w = select_weeks(m, {2, 15, 28, 41});
  CHECK(w.snapshots.size() == 672);
  CHECK(w.snapshots.check().empty());
  CHECK(w.spot[0] == 336.0);
  CHECK(w.spot[168] == 15.0 * 168.0);
  CHECK(w.spot[671] == 41.0 * 168.0 + 167.0);
  CHECK(w.check().empty());
  CHECK_THROWS_AS(select_weeks(m, {52}), InputError);
  CHECK(select_hours(m, 48, 24).spot[0] == 24.0);
}

TEST_CASE("market directory round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "hubopt_market_test";
  std::filesystem::create_directories(dir);
  for (const char* f : {MarketFiles::spot, MarketFiles::emission, MarketFiles::dk1, MarketFiles::dh,
                        MarketFiles::wind, MarketFiles::solar}) {
    std::ofstream(dir / f) << hourly_csv(48, 0.5);
  }
  std::ofstream(dir / MarketFiles::ng) << "timestamp,value\n2022-01-01T00:00:00Z,20\n2022-01-02T00:00:00Z,30\n";
  const auto m = load_market(dir.string());
  CHECK(m.snapshots.size() == 48);
  CHECK(m.ng[47] == 30.0);
  CHECK(m.check().empty());
  std::ofstream(dir / MarketFiles::wind) << hourly_csv(48, 1.5);
  CHECK_THROWS_WITH_AS(load_market(dir.string()), doctest::Contains("wind_cf outside"), InputError);
  std::filesystem::remove_all(dir);
}
