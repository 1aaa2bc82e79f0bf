#pragma once

#include <string>
#include <vector>

#include "hubopt/netcore.hpp"

namespace hubopt {

/// How load_series_csv treats hours absent from the file.
enum class GapPolicy {
  Reject,       ///< any missing hour is fatal
  ForwardFill,  ///< coarser or gappy data is carried forward hour by hour
};

/// A gap-free hourly series.
struct HourlySeries {
  std::vector<TimePoint> timestamps;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Reads a `timestamp,value` CSV. Errors name the offending row.
HourlySeries load_series_csv(const std::string& path, GapPolicy policy = GapPolicy::Reject);
HourlySeries parse_series_csv(const std::string& text, const std::string& source,
                              GapPolicy policy = GapPolicy::Reject);

/// Values at each snapshot. With ForwardFill, snapshots past the last row reuse it.
std::vector<double> align(const HourlySeries& series, const Snapshots& snapshots, const std::string& what,
                          GapPolicy policy = GapPolicy::Reject);

/// Interface tariffs and emission factors; the defaults are placeholders.
struct Tariffs {
  double purchase = 15.0;   ///< TF_p, €/MWh
  double sale = 1.0;        ///< TF_sl, €/MWh
  double ng_emission = 0.202;  ///< em_NG, tCO2/MWh
  bool placeholder = true;  ///< set false once user-supplied values are configured

  bool operator==(const Tariffs&) const = default;
};

/// Exogenous hourly inputs for one price year, aligned to one snapshot index.
struct MarketSeries {
  Snapshots snapshots;
  std::vector<double> spot;           ///< €/MWh
  std::vector<double> ng;             ///< €/MWh
  std::vector<double> emission;       ///< tCO2/MWh, net of the reference-year carbon cost
  std::vector<double> dk1_demand;     ///< MW, shape only
  std::vector<double> dh_demand;      ///< MW
  std::vector<double> wind_cf;        ///< per unit
  std::vector<double> solar_cf;       ///< per unit
  Tariffs tariffs;

  /// Empty when every series matches the snapshots and lies in its domain.
  std::vector<std::string> check() const;
};

/// File names expected inside a market data directory.
struct MarketFiles {
  static constexpr const char* spot = "spot_price.csv";
  static constexpr const char* ng = "ng_price.csv";
  static constexpr const char* emission = "grid_emission.csv";
  static constexpr const char* dk1 = "dk1_demand.csv";
  static constexpr const char* dh = "dh_demand.csv";
  static constexpr const char* wind = "wind_cf.csv";
  static constexpr const char* solar = "solar_cf.csv";
};

/// Loads all series of a directory onto the spot-price timestamps. The NG file may be
/// coarser than hourly and is forward-filled.
MarketSeries load_market(const std::string& directory, const Tariffs& tariffs = {});

/// Keeps the listed weeks (0-based, 168 h each) and relabels them onto a contiguous
/// hourly index starting at the first snapshot.
MarketSeries select_weeks(const MarketSeries& full, const std::vector<int>& weeks);
/// Keeps the first `hours` snapshots.
MarketSeries select_hours(const MarketSeries& full, std::size_t hours, std::size_t offset = 0);

/// spot + TF_p + em_t * co2_tax
std::vector<double> purchase_price(const MarketSeries& market, double co2_tax);
/// spot - TF_sl
std::vector<double> sale_price(const MarketSeries& market);
/// NG + em_NG * co2_tax
std::vector<double> ng_price(const MarketSeries& market, double co2_tax);
/// 1 where spot <= threshold, else 0.
std::vector<double> rfnbo_mask(const std::vector<double>& spot, double threshold = 20.0);

/// Right-hand side of the maximum-sales constraint:
/// (D_H2 / alpha_H2 + D_MeOH / alpha_MeOH) * maxRE.
double max_re_sales(double h2_demand, double alpha_h2, double meoh_demand, double alpha_meoh, double max_re);

/// The profile rescaled to sum to `annual_total`. Throws InputError for a zero-sum profile.
std::vector<double> external_demand(const std::vector<double>& profile, double annual_total);

}  // namespace hubopt
