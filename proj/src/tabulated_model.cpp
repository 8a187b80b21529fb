#include <algorithm>
#include <cmath>

// The installed Boost pchip header calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "shewhart/errors.hpp"
#include "shewhart/lr_models.hpp"
#include "shewhart/numerics.hpp"

namespace shewhart {

struct TabulatedModel::Interpolants {
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    std::vector<Pchip> columns;  // s_inf, s_post1[, s_post2]
};

namespace {

bool strictly_decreasing_until_zero(const std::vector<double>& s) {
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i - 1] == 0.0) {
            if (s[i] != 0.0) return false;
            continue;
        }
        if (!(s[i] < s[i - 1])) return false;
    }
    return true;
}

void check_column(const std::vector<double>& s, const char* name, std::size_t n) {
    if (s.size() != n) throw std::invalid_argument(std::string("column ") + name + " has wrong length");
    for (double v : s) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument(std::string("column ") + name + " must hold probabilities");
        }
    }
    if (s.front() != 1.0) {
        throw std::invalid_argument(std::string("column ") + name + " must equal 1 at nu = 0");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (s[i] > s[i - 1]) {
            throw NonMonotoneModel(std::string("column ") + name + " increases with nu");
        }
    }
}

}  // namespace

TabulatedModel::TabulatedModel(Table table) : table_(std::move(table)) {
    const std::size_t n = table_.nu.size();
    if (n < 4) throw std::invalid_argument("tabulated model needs at least 4 rows");
    if (table_.nu.front() != 0.0) throw std::invalid_argument("first tabulated nu must be 0");
    check_column(table_.s_inf, "s_inf", n);
    check_column(table_.s_post1, "s_post1", n);
    if (!table_.s_post2.empty()) check_column(table_.s_post2, "s_post2", n);

    bool distinct_nu = true;
    for (std::size_t i = 1; i < n; ++i) {
        if (table_.nu[i] < table_.nu[i - 1]) throw std::invalid_argument("nu must be sorted");
        if (table_.nu[i] == table_.nu[i - 1]) distinct_nu = false;
    }
    // Repeated nu rows encode jumps (atoms); flat stretches and a nonzero
    // last row break strict monotonicity / continuity at the support edge.
    continuous_ = distinct_nu && strictly_decreasing_until_zero(table_.s_inf) &&
                  strictly_decreasing_until_zero(table_.s_post1) && table_.s_inf.back() == 0.0 &&
                  table_.s_post1.back() == 0.0;
    if (!table_.s_post2.empty()) {
        continuous_ = continuous_ && strictly_decreasing_until_zero(table_.s_post2) &&
                      table_.s_post2.back() == 0.0;
    }

    auto interp = std::make_shared<Interpolants>();
    if (distinct_nu) {
        auto add = [&](const std::vector<double>& s) {
            interp->columns.emplace_back(std::vector<double>(table_.nu), std::vector<double>(s));
        };
        add(table_.s_inf);
        add(table_.s_post1);
        if (!table_.s_post2.empty()) add(table_.s_post2);
    }
    interp_ = std::move(interp);
}

double TabulatedModel::survival_log(Measure m, int /*lr*/, std::int64_t /*t*/,
                                    double log_nu) const {
    std::size_t col = 0;
    if (m == Measure::Alt1) col = 1;
    if (m == Measure::Alt2) {
        if (table_.s_post2.empty()) throw std::invalid_argument("table has no s_post2 column");
        col = 2;
    }
    const auto& s = col == 0 ? table_.s_inf : (col == 1 ? table_.s_post1 : table_.s_post2);
    if (log_nu == kNegInf) return 1.0;
    const double nu = std::exp(log_nu);
    if (nu > table_.nu.back()) return 0.0;
    if (interp_->columns.empty()) {
        // Repeated abscissae: right-continuous step lookup of the survival.
        const auto it = std::lower_bound(table_.nu.begin(), table_.nu.end(), nu);
        return s[static_cast<std::size_t>(it - table_.nu.begin())];
    }
    return std::clamp(interp_->columns[col](nu), 0.0, 1.0);
}

LrSample TabulatedModel::sample(Measure m, std::int64_t t, Rng& rng) const {
    double u = uniform01(rng);
    while (u == 0.0) u = uniform01(rng);
    const double y = log_quantile(*this, m, 1, t, u);
    return {y, table_.s_post2.empty() ? std::numeric_limits<double>::quiet_NaN() : y};
}

TabulatedModel TabulatedModel::from_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    Table table;
    int columns = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell.erase(0, cell.find_first_not_of(" \t"));
            cell.erase(cell.find_last_not_of(" \t") + 1);
            cells.push_back(cell);
        }
        if (header.empty()) {
            header = cells;
            columns = static_cast<int>(header.size());
            const bool ok = (columns == 3 || columns == 4) && header[0] == "nu" &&
                            header[1] == "s_inf" && header[2] == "s_post1" &&
                            (columns == 3 || header[3] == "s_post2");
            if (!ok) throw std::invalid_argument("CSV header must be nu,s_inf,s_post1[,s_post2]");
            continue;
        }
        if (static_cast<int>(cells.size()) != columns) {
            throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(columns));
        }
        table.nu.push_back(std::stod(cells[0]));
        table.s_inf.push_back(std::stod(cells[1]));
        table.s_post1.push_back(std::stod(cells[2]));
        if (columns == 4) table.s_post2.push_back(std::stod(cells[3]));
    }
    return TabulatedModel(std::move(table));
}

TabulatedModel TabulatedModel::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open CSV file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_csv_text(buffer.str());
}

}  // namespace shewhart
