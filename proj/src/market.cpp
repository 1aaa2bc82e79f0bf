#include "hubopt/market.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace hubopt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

HourlySeries parse_series_csv(const std::string& text, const std::string& source, GapPolicy policy) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  ++row;
  if (trim(line) != "timestamp,value")
    throw InputError(fmt::format("{}: row 1: expected header 'timestamp,value', got '{}'", source, trim(line)));

  std::vector<TimePoint> ts;
  std::vector<double> vs;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) throw InputError(fmt::format("{}: row {}: expected two fields", source, row));
    TimePoint when;
    try {
      when = parse_timestamp(trim(t.substr(0, comma)));
    } catch (const InputError& e) {
      throw InputError(fmt::format("{}: row {}: {}", source, row, e.what()));
    }
    const std::string value_text = trim(t.substr(comma + 1));
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(value_text, &used);
      if (used != value_text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw InputError(fmt::format("{}: row {}: unparseable value '{}'", source, row, value_text));
    }
    if (!std::isfinite(value)) throw InputError(fmt::format("{}: row {}: non-finite value", source, row));
    if (!ts.empty()) {
      if (when == ts.back()) throw InputError(fmt::format("{}: row {}: duplicate timestamp {}", source, row,
                                                          format_timestamp(when)));
      if (when < ts.back())
        throw InputError(fmt::format("{}: row {}: timestamp {} is earlier than the previous row", source, row,
                                     format_timestamp(when)));
      const auto step = std::chrono::duration_cast<std::chrono::hours>(when - ts.back()).count();
      if (when - ts.back() != std::chrono::hours(step))
        throw InputError(fmt::format("{}: row {}: timestamp {} is not on the hour grid", source, row,
                                     format_timestamp(when)));
      if (step > 1) {
        if (policy == GapPolicy::Reject)
          throw InputError(fmt::format("{}: row {}: {} missing hour(s) after {}", source, row, step - 1,
                                       format_timestamp(ts.back())));
        const double carry = vs.back();
        for (long h = 1; h < step; ++h) {
          ts.push_back(ts.back() + std::chrono::hours(1));
          vs.push_back(carry);
        }
      }
    }
    ts.push_back(when);
    vs.push_back(value);
  }
  if (ts.empty()) throw InputError(source + ": no data rows");
  return {std::move(ts), std::move(vs)};
}

HourlySeries load_series_csv(const std::string& path, GapPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_series_csv(ss.str(), path, policy);
}

std::vector<double> align(const HourlySeries& series, const Snapshots& snapshots, const std::string& what,
                          GapPolicy policy) {
  std::vector<double> out;
  out.reserve(snapshots.size());
  if (series.timestamps.empty()) throw InputError(what + ": empty series");
  const TimePoint first = series.timestamps.front();
  for (const TimePoint t : snapshots.timestamps()) {
    if (t < first) throw InputError(fmt::format("{}: no value at {}", what, format_timestamp(t)));
    const auto idx = static_cast<std::size_t>(std::chrono::duration_cast<std::chrono::hours>(t - first).count());
    if (idx < series.size()) {
      out.push_back(series.values[idx]);
    } else if (policy == GapPolicy::ForwardFill) {
      out.push_back(series.values.back());
    } else {
      throw InputError(fmt::format("{}: no value at {}", what, format_timestamp(t)));
    }
  }
  return out;
}

std::vector<std::string> MarketSeries::check() const {
  std::vector<std::string> problems;
  const std::size_t n = snapshots.size();
  auto length = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != n) problems.push_back(fmt::format("{} has {} values for {} snapshots", name, v.size(), n));
  };
  length(spot, "spot");
  length(ng, "ng");
  length(emission, "emission");
  length(dk1_demand, "dk1_demand");
  length(dh_demand, "dh_demand");
  length(wind_cf, "wind_cf");
  length(solar_cf, "solar_cf");
  if (!problems.empty()) return problems;
  for (std::size_t t = 0; t < n; ++t) {
    if (wind_cf[t] < 0.0 || wind_cf[t] > 1.0) problems.push_back(fmt::format("wind_cf outside [0,1] at {}", t));
    if (solar_cf[t] < 0.0 || solar_cf[t] > 1.0) problems.push_back(fmt::format("solar_cf outside [0,1] at {}", t));
    if (emission[t] < 0.0) problems.push_back(fmt::format("negative emission intensity at {}", t));
    if (dk1_demand[t] < 0.0) problems.push_back(fmt::format("negative DK1 demand at {}", t));
    if (dh_demand[t] < 0.0) problems.push_back(fmt::format("negative DH demand at {}", t));
    if (problems.size() > 20) break;
  }
  return problems;
}

MarketSeries load_market(const std::string& directory, const Tariffs& tariffs) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  auto path = [&](const char* file) { return (dir / file).string(); };
  const HourlySeries spot = load_series_csv(path(MarketFiles::spot));
  MarketSeries m;
  m.snapshots = Snapshots(spot.timestamps);
  m.spot = spot.values;
  m.ng = align(load_series_csv(path(MarketFiles::ng), GapPolicy::ForwardFill), m.snapshots, "ng",
               GapPolicy::ForwardFill);
  m.emission = align(load_series_csv(path(MarketFiles::emission)), m.snapshots, "emission");
  m.dk1_demand = align(load_series_csv(path(MarketFiles::dk1)), m.snapshots, "dk1_demand");
  m.dh_demand = align(load_series_csv(path(MarketFiles::dh)), m.snapshots, "dh_demand");
  m.wind_cf = align(load_series_csv(path(MarketFiles::wind)), m.snapshots, "wind_cf");
  m.solar_cf = align(load_series_csv(path(MarketFiles::solar)), m.snapshots, "solar_cf");
  m.tariffs = tariffs;
  const auto problems = m.check();
  if (!problems.empty()) throw InputError(directory + ": " + problems.front());
  return m;
}

namespace {

MarketSeries pick(const MarketSeries& full, const std::vector<std::size_t>& hours) {
  MarketSeries m;
  m.tariffs = full.tariffs;
  auto take = [&](const std::vector<double>& src) {
    std::vector<double> out;
    out.reserve(hours.size());
    for (std::size_t h : hours) out.push_back(src.at(h));
    return out;
  };
  m.spot = take(full.spot);
  m.ng = take(full.ng);
  m.emission = take(full.emission);
  m.dk1_demand = take(full.dk1_demand);
  m.dh_demand = take(full.dh_demand);
  m.wind_cf = take(full.wind_cf);
  m.solar_cf = take(full.solar_cf);
  m.snapshots = Snapshots::hourly(full.snapshots.timestamps().front(), hours.size());
  return m;
}

}  // namespace

MarketSeries select_weeks(const MarketSeries& full, const std::vector<int>& weeks) {
  std::vector<std::size_t> hours;
  for (int w : weeks) {
    if (w < 0) throw InputError(fmt::format("week {} is negative", w));
    const std::size_t start = static_cast<std::size_t>(w) * 168;
    if (start + 168 > full.snapshots.size())
      throw InputError(fmt::format("week {} extends past the {} available hours", w, full.snapshots.size()));
    for (std::size_t h = 0; h < 168; ++h) hours.push_back(start + h);
  }
  if (hours.empty()) throw InputError("no weeks selected");
  return pick(full, hours);
}

MarketSeries select_hours(const MarketSeries& full, std::size_t hours, std::size_t offset) {
  if (hours == 0 || offset + hours > full.snapshots.size())
    throw InputError(fmt::format("cannot take {} hours from offset {} of {}", hours, offset, full.snapshots.size()));
  std::vector<std::size_t> idx(hours);
  std::iota(idx.begin(), idx.end(), offset);
  return pick(full, idx);
}

std::vector<double> purchase_price(const MarketSeries& market, double co2_tax) {
  std::vector<double> out(market.spot.size());
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = market.spot[t] + market.tariffs.purchase + market.emission[t] * co2_tax;
  return out;
}

std::vector<double> sale_price(const MarketSeries& market) {
  std::vector<double> out(market.spot.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = market.spot[t] - market.tariffs.sale;
  return out;
}

std::vector<double> ng_price(const MarketSeries& market, double co2_tax) {
  std::vector<double> out(market.ng.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = market.ng[t] + market.tariffs.ng_emission * co2_tax;
  return out;
}

std::vector<double> rfnbo_mask(const std::vector<double>& spot, double threshold) {
  std::vector<double> out(spot.size());
  for (std::size_t t = 0; t < spot.size(); ++t) out[t] = spot[t] <= threshold ? 1.0 : 0.0;
  return out;
}

double max_re_sales(double h2_demand, double alpha_h2, double meoh_demand, double alpha_meoh, double max_re) {
  if (alpha_h2 <= 0.0 || alpha_meoh <= 0.0) throw InputError("conversion ratios must be positive");
  return (h2_demand / alpha_h2 + meoh_demand / alpha_meoh) * max_re;
}

std::vector<double> external_demand(const std::vector<double>& profile, double annual_total) {
  const double sum = std::accumulate(profile.begin(), profile.end(), 0.0);
  if (!(sum > 0.0)) throw InputError("external demand profile sums to zero");
  std::vector<double> out(profile.size());
  const double scale = annual_total / sum;
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = profile[t] * scale;
  return out;
}

}  // namespace hubopt
