#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace kbahc {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

enum class PanelKind { Prices, Returns };

PanelKind parse_panel_kind(std::string_view text);

/// Dated n_assets x n_dates matrix of simple returns with an availability mask.
///
/// Unavailable entries hold NaN in `values()`. The panel is immutable once
/// constructed and can be shared freely between threads.
class ReturnPanel {
public:
    using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

    ReturnPanel() = default;
    /// Validates: strictly increasing dates, unique asset ids, matching
    /// shapes, finite values wherever available.
    ReturnPanel(std::vector<Date> dates, std::vector<std::string> assets,
                Eigen::MatrixXd values, Mask available);

    /// Fully observed panel.
    ReturnPanel(std::vector<Date> dates, std::vector<std::string> assets,
                Eigen::MatrixXd values);

    std::size_t n_assets() const { return assets_.size(); }
    std::size_t n_dates() const { return dates_.size(); }
    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<std::string>& assets() const { return assets_; }
    const Eigen::MatrixXd& values() const { return values_; }
    const Mask& available() const { return available_; }

private:
    std::vector<Date> dates_;
    std::vector<std::string> assets_;
    Eigen::MatrixXd values_;
    Mask available_;
};

/// Calibration window [t_end - dt_in, t_end) followed by the test window
/// [t_end, t_end + dt_out), as date indices into a panel.
struct WindowSpec {
    std::size_t t_end = 0;
    std::size_t dt_in = 0;
    std::size_t dt_out = 0;

    /// Throws ConfigError unless dt_in >= 2, dt_out >= 1 and the window fits.
    void validate(const ReturnPanel& panel) const;
};

/// Loads a wide CSV: header "date,<asset ids...>", one row per date, empty
/// cells are missing. Prices are turned into close-to-close simple returns
/// p_t / p_{t-1} - 1; the first date is dropped and a return is available
/// only when both prices exist.
ReturnPanel load_panel(const std::filesystem::path& path, PanelKind kind);
ReturnPanel parse_panel(std::string_view csv, PanelKind kind);

/// Writes the panel in the same wide layout; values use the shortest
/// round-trip representation so reloading is bit-identical.
void write_panel(const ReturnPanel& panel, const std::filesystem::path& path);
std::string format_panel(const ReturnPanel& panel);

/// Assets with full availability over [t_end - dt_in, t_end).
std::vector<std::size_t> calibration_universe(const ReturnPanel& panel, std::size_t t_end,
                                              std::size_t dt_in);

/// Assets with full availability over both the calibration and the test
/// window. Throws EmptyUniverseError when none qualifies.
std::vector<std::size_t> universe_at(const ReturnPanel& panel, const WindowSpec& w);

struct WindowSlices {
    Eigen::MatrixXd in_sample;   // n x dt_in
    Eigen::MatrixXd out_sample;  // n x dt_out
};

/// Dense in/out-of-sample blocks for the given assets, in the given order.
/// Throws DataError if any requested entry is missing.
WindowSlices slice(const ReturnPanel& panel, const WindowSpec& w,
                   const std::vector<std::size_t>& assets);

}  // namespace kbahc
