#include <array>
#include <charconv>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <string>

#include "polystab/error.hpp"
#include "polystab/mc_harness.hpp"

namespace polystab {
namespace {

constexpr std::array<std::string_view, 6> kColumns{"k",         "t",          "mean_square",
                                                   "std_error", "surviving", "blown_up"};

template <typename T>
void put(std::string& out, T value) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    out.append(buf.data(), res.ptr);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) return cells;
        start = comma + 1;
    }
}

template <typename T>
T parse_cell(std::string_view cell, std::string_view column, std::size_t line) {
    T value{};
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw ParseError("bad value '" + std::string(cell) + "' in column " + std::string(column),
                         line);
    }
    return value;
}

std::string_view solver_method_name(SolverMethod m) {
    return m == SolverMethod::newton ? "newton" : "bisection";
}

std::string_view fallback_name(SolverFallback f) {
    switch (f) {
        case SolverFallback::none: return "none";
        case SolverFallback::bisection: return "bisection";
        case SolverFallback::damped_iteration: return "damped_iteration";
    }
    return "none";
}

}  // namespace

std::string moment_csv(std::span<const MomentPoint> points, std::span<const double> envelope) {
    if (!envelope.empty() && envelope.size() != points.size()) {
        throw DomainError("envelope column needs one value per checkpoint");
    }
    std::string out = "k,t,mean_square,std_error,surviving,blown_up";
    if (!envelope.empty()) out += ",envelope";
    out += '\n';
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        put(out, p.k);
        out += ',';
        put(out, p.t);
        out += ',';
        put(out, p.mean_square);
        out += ',';
        put(out, p.std_error);
        out += ',';
        put(out, p.surviving);
        out += ',';
        put(out, p.blown_up);
        if (!envelope.empty()) {
            out += ',';
            put(out, envelope[i]);
        }
        out += '\n';
    }
    return out;
}

void write_moment_csv(std::ostream& os, std::span<const MomentPoint> points,
                      std::span<const double> envelope) {
    os << moment_csv(points, envelope);
}

std::vector<MomentPoint> read_moment_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(is, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (!next_line()) throw ParseError("empty moment CSV", 0);
    const auto header = split(line);
    if (header.size() < kColumns.size()) {
        throw ParseError("header needs columns k,t,mean_square,std_error,surviving,blown_up",
                         line_no);
    }
    for (std::size_t i = 0; i < kColumns.size(); ++i) {
        if (header[i] != kColumns[i]) {
            throw ParseError("expected column '" + std::string(kColumns[i]) + "', found '" +
                                 std::string(header[i]) + "'",
                             line_no);
        }
    }

    std::vector<MomentPoint> points;
    while (next_line()) {
        const auto cells = split(line);
        if (cells.size() < kColumns.size()) {
            throw ParseError("expected at least " + std::to_string(kColumns.size()) +
                                 " columns, found " + std::to_string(cells.size()),
                             line_no);
        }
        MomentPoint p;
        p.k = parse_cell<std::int64_t>(cells[0], kColumns[0], line_no);
        p.t = parse_cell<double>(cells[1], kColumns[1], line_no);
        p.mean_square = parse_cell<double>(cells[2], kColumns[2], line_no);
        p.std_error = parse_cell<double>(cells[3], kColumns[3], line_no);
        p.surviving = parse_cell<std::int64_t>(cells[4], kColumns[4], line_no);
        p.blown_up = parse_cell<std::int64_t>(cells[5], kColumns[5], line_no);
        if (p.surviving < 0 || p.blown_up < 0) {
            throw ParseError("path counts must be nonnegative", line_no);
        }
        p.lower_bound = p.blown_up > 0;
        points.push_back(p);
    }
    return points;
}

std::string config_echo_json(const MomentSeries& series) {
    const SimConfig& c = series.config;
    nlohmann::ordered_json j;
    j["problem"] = series.problem_label;
    j["scheme"] = std::string(to_string(c.scheme));
    j["dt"] = c.dt;
    j["num_steps"] = c.num_steps;
    j["num_paths"] = c.num_paths;
    j["seed"] = c.seed;
    j["path_id_offset"] = c.path_id_offset;
    j["initial_value"] = c.initial_value;
    j["blow_up_cap"] = c.blow_up_cap;
    j["checkpoints"] = c.checkpoints;
    j["strict"] = c.strict;
    j["solver"] = {{"residual_tolerance", c.solver.residual_tolerance},
                   {"max_iterations", c.solver.max_iterations},
                   {"method", std::string(solver_method_name(c.solver.method))},
                   {"fallback", std::string(fallback_name(c.solver.fallback))}};
    j["failed_paths"] = series.failures.size();
    return j.dump(2) + "\n";
}

}  // namespace polystab
