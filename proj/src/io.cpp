#include "minsky/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "minsky/errors.hpp"

namespace minsky::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return in;
}

std::ofstream create_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot create '" + path + "'");
    return out;
}

void expect_header(const std::string& path, const std::string& got,
                   const std::string& want) {
    std::string cleaned = got;
    while (!cleaned.empty() && (cleaned.back() == '\r' || cleaned.back() == '\n')) {
        cleaned.pop_back();
    }
    if (cleaned != want) {
        throw ValidationError("'" + path + "': expected header '" + want +
                              "', found '" + cleaned + "'");
    }
}

bool parse_double(const std::string& s, double* out) {
    if (s.empty()) return false;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) return false;
        *out = v;
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

bool parse_int(const std::string& s, long long* out) {
    if (s.empty()) return false;
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) return false;
        *out = v;
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

// Parses an optional non-negative currency cell; empty stays missing.
bool parse_currency_cell(const std::string& cell, bool allow_negative,
                         std::optional<double>* out, std::string* why) {
    if (cell.empty()) {
        out->reset();
        return true;
    }
    double v = 0.0;
    if (!parse_double(cell, &v)) {
        *why = "not a number: '" + cell + "'";
        return false;
    }
    if (!allow_negative && v < 0.0) {
        *why = "negative value not allowed: " + cell;
        return false;
    }
    *out = v;
    return true;
}

void enforce_invalid_share(const std::string& path, std::size_t n_rows,
                           const std::vector<RowError>& errors,
                           const IngestOptions& opts) {
    if (errors.empty() || n_rows == 0) return;
    const double share =
        static_cast<double>(errors.size()) / static_cast<double>(n_rows);
    if (share > opts.max_invalid_fraction) {
        std::ostringstream msg;
        msg << "'" << path << "': " << errors.size() << " of " << n_rows
            << " rows invalid (" << share * 100.0 << "%, limit "
            << opts.max_invalid_fraction * 100.0 << "%); first: line "
            << errors.front().line << ": " << errors.front().reason;
        throw ValidationError(msg.str());
    }
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<FirmRecord> FirmDataset::for_year(int year) const {
    std::vector<FirmRecord> out;
    for (const auto& r : records) {
        if (r.year == year) out.push_back(r);
    }
    return out;
}

std::vector<int> FirmDataset::years() const {
    std::set<int> ys;
    for (const auto& r : records) ys.insert(r.year);
    return {ys.begin(), ys.end()};
}

FirmDataset read_firm_csv(const std::string& path, const IngestOptions& opts) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("'" + path + "': empty file");
    expect_header(path, line,
                  "firm_id,year,ebit,bank_loans,ebtda,financial_costs,sales,"
                  "purchases,sector");
    FirmDataset ds;
    std::set<std::pair<std::string, int>> seen;
    int line_no = 1;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++n_rows;
        const auto cells = split_csv_line(line);
        if (cells.size() != 9) {
            ds.row_errors.push_back({line_no, "expected 9 cells, found " +
                                                  std::to_string(cells.size())});
            continue;
        }
        FirmRecord r;
        r.firm_id = cells[0];
        if (r.firm_id.empty()) {
            ds.row_errors.push_back({line_no, "empty firm_id"});
            continue;
        }
        long long year = 0;
        if (!parse_int(cells[1], &year)) {
            ds.row_errors.push_back({line_no, "bad year: '" + cells[1] + "'"});
            continue;
        }
        r.year = static_cast<int>(year);
        std::string why;
        const bool ok = parse_currency_cell(cells[2], true, &r.ebit, &why) &&
                        parse_currency_cell(cells[3], false, &r.bank_loans, &why) &&
                        parse_currency_cell(cells[4], true, &r.ebtda, &why) &&
                        parse_currency_cell(cells[5], false, &r.financial_costs, &why) &&
                        parse_currency_cell(cells[6], false, &r.sales, &why) &&
                        parse_currency_cell(cells[7], false, &r.purchases, &why);
        if (!ok) {
            ds.row_errors.push_back({line_no, why});
            continue;
        }
        r.sector = cells[8];
        if (!seen.insert({r.firm_id, r.year}).second) {
            ds.row_errors.push_back(
                {line_no, "duplicate (firm_id, year): " + r.firm_id + "/" + cells[1]});
            continue;
        }
        ds.records.push_back(std::move(r));
    }
    ds.header_only = n_rows == 0;
    enforce_invalid_share(path, n_rows, ds.row_errors, opts);
    return ds;
}

void write_firm_csv(const std::string& path, const std::vector<FirmRecord>& records) {
    auto out = create_or_throw(path);
    out << "firm_id,year,ebit,bank_loans,ebtda,financial_costs,sales,purchases,"
           "sector\n";
    const auto cell = [](const std::optional<double>& v) {
        return v ? format_number(*v) : std::string();
    };
    for (const auto& r : records) {
        out << r.firm_id << ',' << r.year << ',' << cell(r.ebit) << ','
            << cell(r.bank_loans) << ',' << cell(r.ebtda) << ','
            << cell(r.financial_costs) << ',' << cell(r.sales) << ','
            << cell(r.purchases) << ',' << r.sector << '\n';
    }
}

RateSeries read_rate_csv(const std::string& path, const IngestOptions& opts) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("'" + path + "': empty file");
    expect_header(path, line, "period,rate");
    RateSeries series;
    std::vector<RowError> errors;
    int line_no = 1;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++n_rows;
        const auto cells = split_csv_line(line);
        long long period = 0;
        double rate = 0.0;
        if (cells.size() != 2 || !parse_int(cells[0], &period) ||
            !parse_double(cells[1], &rate) || !(rate > 0.0)) {
            errors.push_back({line_no, "bad rate row: '" + line + "'"});
            continue;
        }
        if (!series.empty() && period <= series.back().period) {
            errors.push_back({line_no, "periods must strictly increase"});
            continue;
        }
        series.push_back({static_cast<int>(period), rate});
    }
    enforce_invalid_share(path, n_rows, errors, opts);
    return series;
}

void write_rate_csv(const std::string& path, const RateSeries& series) {
    auto out = create_or_throw(path);
    out << "period,rate\n";
    for (const auto& obs : series) {
        out << obs.period << ',' << format_number(obs.rate) << '\n';
    }
}

TradeNetwork read_edge_csv(const std::string& path, const IngestOptions& opts) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("'" + path + "': empty file");
    expect_header(path, line, "buyer_id,supplier_id,weight");
    TradeNetwork net;
    std::vector<RowError> errors;
    int line_no = 1;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++n_rows;
        const auto cells = split_csv_line(line);
        double weight = 0.0;
        if (cells.size() != 3 || cells[0].empty() || cells[1].empty() ||
            !parse_double(cells[2], &weight) || !(weight > 0.0)) {
            errors.push_back({line_no, "bad edge row: '" + line + "'"});
            continue;
        }
        if (cells[0] == cells[1]) {
            errors.push_back({line_no, "self-loop: " + cells[0]});
            continue;
        }
        net.add_edge(cells[0], cells[1], weight);
    }
    enforce_invalid_share(path, n_rows, errors, opts);
    return net;
}

void write_edge_csv(const std::string& path, const TradeNetwork& net) {
    auto out = create_or_throw(path);
    out << "buyer_id,supplier_id,weight\n";
    for (const auto& e : net.edges()) {
        out << net.id_of(e.buyer) << ',' << net.id_of(e.supplier) << ','
            << format_number(e.weight) << '\n';
    }
}

std::vector<PopulationUpdate> read_population_csv(const std::string& path,
                                                  const IngestOptions& opts) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("'" + path + "': empty file");
    expect_header(path, line, "year,n_tot,n_hedge,n_ponzi");
    std::vector<PopulationUpdate> rows;
    std::vector<RowError> errors;
    int line_no = 1;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++n_rows;
        const auto cells = split_csv_line(line);
        long long year = 0, n_tot = 0, n_hedge = 0, n_ponzi = 0;
        if (cells.size() != 4 || !parse_int(cells[0], &year) ||
            !parse_int(cells[1], &n_tot) || !parse_int(cells[2], &n_hedge) ||
            !parse_int(cells[3], &n_ponzi) || n_tot < 0 || n_hedge < 0 ||
            n_ponzi < 0 || n_hedge + n_ponzi > n_tot) {
            errors.push_back({line_no, "bad population row: '" + line + "'"});
            continue;
        }
        rows.push_back({static_cast<int>(year), n_tot, n_hedge, n_ponzi});
    }
    enforce_invalid_share(path, n_rows, errors, opts);
    return rows;
}

void write_population_csv(const std::string& path,
                          const std::vector<PopulationUpdate>& rows) {
    auto out = create_or_throw(path);
    out << "year,n_tot,n_hedge,n_ponzi\n";
    for (const auto& r : rows) {
        out << r.year << ',' << r.n_tot << ',' << r.n_hedge << ',' << r.n_ponzi
            << '\n';
    }
}

std::map<std::string, MinskyStatus> read_status_csv(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("'" + path + "': empty file");
    std::string header = line;
    while (!header.empty() && (header.back() == '\r' || header.back() == '\n')) {
        header.pop_back();
    }
    int status_col;
    if (header == "firm_id,status") {
        status_col = 1;
    } else if (header == "firm_id,year,status") {
        status_col = 2;
    } else {
        throw ValidationError("'" + path +
                              "': expected header 'firm_id,status' or "
                              "'firm_id,year,status'");
    }
    std::map<std::string, MinskyStatus> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != status_col + 1 || cells[0].empty()) {
            throw ValidationError("'" + path + "' line " + std::to_string(line_no) +
                                  ": bad status row");
        }
        out[cells[0]] = status_from_string(cells[status_col]);
    }
    return out;
}

void write_status_csv(const std::string& path,
                      const std::vector<std::pair<std::string, MinskyStatus>>& statuses) {
    auto out = create_or_throw(path);
    out << "firm_id,status\n";
    for (const auto& [id, status] : statuses) {
        out << id << ',' << to_string(status) << '\n';
    }
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<SystemState>& trajectory,
                          const std::vector<Regime>& regimes) {
    if (!trajectory.empty() && regimes.size() != trajectory.size()) {
        throw ValidationError("trajectory and regime lists differ in length");
    }
    auto out = create_or_throw(path);
    out << "t,regime,rate,loans_fraction,ponzi_density,n_tot,n_loans,n_ponzi,"
           "clamped\n";
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        const auto& s = trajectory[k];
        out << s.t << ',' << to_string(regimes[k]) << ',' << format_number(s.rate)
            << ',' << format_number(s.loans_fraction) << ','
            << format_number(s.ponzi_density) << ',' << s.n_tot << ',' << s.n_loans
            << ',' << s.n_ponzi << ',' << (s.clamped ? 1 : 0) << '\n';
    }
}

void write_cascade_csv(const std::string& path, const CascadeReport& report) {
    auto out = create_or_throw(path);
    out << "round,new_failures,cumulative_failures\n";
    std::size_t cumulative = report.initial;
    out << "0," << report.initial << ',' << cumulative << '\n';
    for (std::size_t r = 0; r < report.rounds.size(); ++r) {
        cumulative += report.rounds[r].size();
        out << (r + 1) << ',' << report.rounds[r].size() << ',' << cumulative
            << '\n';
    }
}

}  // namespace minsky::io
