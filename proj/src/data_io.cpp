#include "kbahc/data_io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "kbahc/errors.hpp"

namespace kbahc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::string where(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

Date parse_date(std::string_view text) {
    auto digits = [&](std::size_t pos, std::size_t len, int& out) {
        const char* first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, out);
        return ec == std::errc{} && ptr == first + len;
    };
    int y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !digits(0, 4, y) ||
        !digits(5, 2, m) || !digits(8, 2, d)) {
        throw DataError("invalid ISO-8601 date '" + std::string(text) + "'");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

PanelKind parse_panel_kind(std::string_view text) {
    if (text == "prices") return PanelKind::Prices;
    if (text == "returns") return PanelKind::Returns;
    throw ConfigError("input kind must be 'prices' or 'returns', got '" + std::string(text) +
                      "'");
}

ReturnPanel::ReturnPanel(std::vector<Date> dates, std::vector<std::string> assets,
                         Eigen::MatrixXd values, Mask available)
    : dates_(std::move(dates)),
      assets_(std::move(assets)),
      values_(std::move(values)),
      available_(std::move(available)) {
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i]))
            throw DataError("dates must be strictly increasing (at " + format_date(dates_[i]) +
                            ")");
    }
    std::unordered_set<std::string> seen;
    for (const auto& a : assets_) {
        if (!seen.insert(a).second) throw DataError("duplicate asset id '" + a + "'");
    }
    const auto n = static_cast<Eigen::Index>(assets_.size());
    const auto t = static_cast<Eigen::Index>(dates_.size());
    if (values_.rows() != n || values_.cols() != t || available_.rows() != n ||
        available_.cols() != t) {
        throw DataError("panel shape does not match its labels");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < t; ++j) {
            if (available_(i, j) && !std::isfinite(values_(i, j)))
                throw DataError("non-finite value for asset '" + assets_[i] + "' on " +
                                format_date(dates_[j]));
        }
    }
}

ReturnPanel::ReturnPanel(std::vector<Date> dates, std::vector<std::string> assets,
                         Eigen::MatrixXd values)
    : ReturnPanel(std::move(dates), std::move(assets), values,
                  Mask::Constant(values.rows(), values.cols(), true)) {}

void WindowSpec::validate(const ReturnPanel& panel) const {
    if (dt_in < 2) throw ConfigError("calibration length dt_in must be >= 2");
    if (dt_out < 1) throw ConfigError("test length dt_out must be >= 1");
    if (t_end < dt_in || t_end + dt_out > panel.n_dates())
        throw ConfigError("window [t_end - " + std::to_string(dt_in) + ", t_end + " +
                          std::to_string(dt_out) + ") with t_end = " + std::to_string(t_end) +
                          " does not fit a panel of " + std::to_string(panel.n_dates()) +
                          " dates");
}

ReturnPanel parse_panel(std::string_view csv, PanelKind kind) {
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start < csv.size()) {
            std::size_t end = csv.find('\n', start);
            if (end == std::string_view::npos) end = csv.size();
            std::string_view line = csv.substr(start, end - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            start = end + 1;
        }
        while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    }
    if (lines.empty()) throw DataError("empty CSV");

    const auto header = split_line(lines[0]);
    if (header.size() < 2) throw DataError("header must contain a date column and at least one asset");
    std::vector<std::string> assets;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const auto id = trim(header[c]);
        if (id.empty()) throw DataError("empty asset id at " + where(1, c + 1));
        assets.emplace_back(id);
    }
    std::unordered_set<std::string> seen;
    for (std::size_t c = 0; c < assets.size(); ++c) {
        if (!seen.insert(assets[c]).second)
            throw DataError("duplicate asset id '" + assets[c] + "' at " + where(1, c + 2));
    }

    const std::size_t n = assets.size();
    const std::size_t rows = lines.size() - 1;
    std::vector<Date> dates;
    dates.reserve(rows);
    Eigen::MatrixXd raw = Eigen::MatrixXd::Constant(n, rows, kNaN);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t line_no = r + 2;
        const auto cells = split_line(lines[r + 1]);
        if (cells.size() != n + 1)
            throw DataError("expected " + std::to_string(n + 1) + " cells, got " +
                            std::to_string(cells.size()) + " at line " + std::to_string(line_no));
        Date d;
        try {
            d = parse_date(trim(cells[0]));
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at " + where(line_no, 1));
        }
        if (!dates.empty()) {
            if (d == dates.back())
                throw DataError("duplicate date " + format_date(d) + " at " + where(line_no, 1));
            if (d < dates.back())
                throw DataError("dates not increasing at " + where(line_no, 1));
        }
        dates.push_back(d);
        for (std::size_t c = 0; c < n; ++c) {
            const auto cell = trim(cells[c + 1]);
            if (cell.empty()) continue;
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw DataError("non-numeric cell '" + std::string(cell) + "' at " +
                                where(line_no, c + 2));
            if (kind == PanelKind::Prices && v <= 0.0)
                throw DataError("non-positive price at " + where(line_no, c + 2));
            raw(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = v;
        }
    }

    if (kind == PanelKind::Returns) {
        ReturnPanel::Mask mask = raw.array().isFinite();
        return ReturnPanel(std::move(dates), std::move(assets), std::move(raw), std::move(mask));
    }

    if (rows < 2) throw DataError("a price file needs at least two dates");
    const auto t = static_cast<Eigen::Index>(rows - 1);
    Eigen::MatrixXd returns = Eigen::MatrixXd::Constant(n, t, kNaN);
    ReturnPanel::Mask mask = ReturnPanel::Mask::Constant(n, t, false);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        for (Eigen::Index j = 0; j < t; ++j) {
            const double prev = raw(i, j);
            const double cur = raw(i, j + 1);
            if (std::isfinite(prev) && std::isfinite(cur)) {
                returns(i, j) = cur / prev - 1.0;
                mask(i, j) = true;
            }
        }
    }
    dates.erase(dates.begin());
    return ReturnPanel(std::move(dates), std::move(assets), std::move(returns), std::move(mask));
}

ReturnPanel load_panel(const std::filesystem::path& path, PanelKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_panel(buffer.str(), kind);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string format_panel(const ReturnPanel& panel) {
    std::string out = "date";
    for (const auto& a : panel.assets()) {
        out += ',';
        out += a;
    }
    out += '\n';
    char buf[64];
    for (std::size_t j = 0; j < panel.n_dates(); ++j) {
        out += format_date(panel.dates()[j]);
        for (std::size_t i = 0; i < panel.n_assets(); ++i) {
            out += ',';
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            if (!panel.available()(ii, jj)) continue;
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, panel.values()(ii, jj));
            out.append(buf, ptr);
        }
        out += '\n';
    }
    return out;
}

void write_panel(const ReturnPanel& panel, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << format_panel(panel);
}

std::vector<std::size_t> calibration_universe(const ReturnPanel& panel, std::size_t t_end,
                                              std::size_t dt_in) {
    if (t_end < dt_in || t_end > panel.n_dates())
        throw ConfigError("calibration window does not fit the panel");
    std::vector<std::size_t> out;
    const auto first = static_cast<Eigen::Index>(t_end - dt_in);
    const auto len = static_cast<Eigen::Index>(dt_in);
    for (std::size_t i = 0; i < panel.n_assets(); ++i) {
        if (panel.available().row(static_cast<Eigen::Index>(i)).segment(first, len).all())
            out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> universe_at(const ReturnPanel& panel, const WindowSpec& w) {
    w.validate(panel);
    auto out = calibration_universe(panel, w.t_end + w.dt_out, w.dt_in + w.dt_out);
    if (out.empty())
        throw EmptyUniverseError("empty universe for the window ending " +
                                 format_date(panel.dates()[w.t_end - 1]));
    return out;
}

WindowSlices slice(const ReturnPanel& panel, const WindowSpec& w,
                   const std::vector<std::size_t>& assets) {
    w.validate(panel);
    const auto n = static_cast<Eigen::Index>(assets.size());
    const auto start = static_cast<Eigen::Index>(w.t_end - w.dt_in);
    const auto in_len = static_cast<Eigen::Index>(w.dt_in);
    const auto out_len = static_cast<Eigen::Index>(w.dt_out);
    WindowSlices s{Eigen::MatrixXd(n, in_len), Eigen::MatrixXd(n, out_len)};
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t a = assets[static_cast<std::size_t>(r)];
        if (a >= panel.n_assets()) throw DataError("asset index out of range");
        const auto ai = static_cast<Eigen::Index>(a);
        if (!panel.available().row(ai).segment(start, in_len + out_len).all())
            throw DataError("asset '" + panel.assets()[a] +
                            "' has missing observations in the requested window");
        s.in_sample.row(r) = panel.values().row(ai).segment(start, in_len);
        s.out_sample.row(r) = panel.values().row(ai).segment(start + in_len, out_len);
    }
    return s;
}

}  // namespace kbahc
