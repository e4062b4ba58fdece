#include "riskball/cohort_csv.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace riskball::cohort {

namespace {

std::string build_header() {
    std::string h = "patient_id,hour";
    for (const auto& name : observed_column_names()) h += "," + name;
    for (std::size_t k = 0; k < kAuxDim; ++k) h += ",aux_" + std::to_string(k);
    h += ",vaso,fluids,outcome";
    return h;
}

[[noreturn]] void parse_fail(std::size_t row, const std::string& column, const std::string& what) {
    throw std::runtime_error("cohort csv: row " + std::to_string(row) + ", column '" + column +
                             "': " + what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

int parse_int_field(const std::string& field, std::size_t row, const std::string& column, int lo,
                    int hi) {
    const double v = parse_double(field, row, column);
    const int i = static_cast<int>(v);
    if (v != static_cast<double>(i) || i < lo || i > hi) {
        parse_fail(row, column, "expected integer in " + std::to_string(lo) + ".." +
                                    std::to_string(hi) + ", got '" + field + "'");
    }
    return i;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, std::size_t row, const std::string& column) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || field.empty()) {
        parse_fail(row, column, "not a number: '" + field + "'");
    }
    return v;
}

const std::string& cohort_csv_header() {
    static const std::string header = build_header();
    return header;
}

void save_cohort_csv(const Cohort& cohort, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cohort csv: cannot open " + tmp);
        out << cohort_csv_header() << '\n';
        for (const auto& traj : cohort) {
            for (std::size_t t = 0; t < traj.length(); ++t) {
                const auto& s = traj.states[t];
                out << traj.patient_id << ',' << (t + 1);
                for (std::size_t c = 0; c < kStateDim; ++c) out << ',' << format_double(s[c]);
                out << ',' << traj.actions[t].vaso << ',' << traj.actions[t].fluids << ',';
                if (t + 1 == traj.length()) {
                    out << (traj.outcome == Outcome::Death ? "DEATH" : "RELEASE");
                }
                out << '\n';
            }
        }
        if (!out) throw std::runtime_error("cohort csv: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Cohort load_cohort_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cohort csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("cohort csv: empty file " + path);
    {
        auto fields = split_csv_line(line);
        auto expected = split_csv_line(cohort_csv_header());
        if (fields != expected) {
            throw std::runtime_error("cohort csv: header mismatch in " + path);
        }
    }

    const std::size_t n_cols = 2 + kStateDim + 3;
    Cohort cohort;
    PatientTrajectory current;
    bool have_current = false;
    bool current_closed = false;
    std::size_t row = 1;

    auto finish_current = [&]() {
        if (!have_current) return;
        if (!current_closed) {
            throw std::runtime_error("cohort csv: patient " + current.patient_id +
                                     " has no outcome on its final row");
        }
        current.validate();
        cohort.push_back(std::move(current));
        current = PatientTrajectory{};
        have_current = false;
        current_closed = false;
    };

    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != n_cols) {
            throw std::runtime_error("cohort csv: row " + std::to_string(row) + ": expected " +
                                     std::to_string(n_cols) + " columns, got " +
                                     std::to_string(fields.size()));
        }
        const std::string& pid = fields[0];
        if (pid.empty()) parse_fail(row, "patient_id", "empty");
        if (!have_current || pid != current.patient_id) {
            finish_current();
            current.patient_id = pid;
            have_current = true;
        } else if (current_closed) {
            parse_fail(row, "patient_id", "rows continue after the outcome row of " + pid);
        }

        const int hour = parse_int_field(fields[1], row, "hour", 1, 1 << 20);
        if (static_cast<std::size_t>(hour) != current.length() + 1) {
            parse_fail(row, "hour",
                       "non-monotone hour index (expected " +
                           std::to_string(current.length() + 1) + ", got " + fields[1] + ")");
        }

        StateVector s;
        const auto& names = observed_column_names();
        for (std::size_t c = 0; c < kStateDim; ++c) {
            const std::string column =
                c < kObservedDim ? names[c] : "aux_" + std::to_string(c - kObservedDim);
            s[c] = parse_double(fields[2 + c], row, column);
        }
        // Score invariants surface as parse errors naming the offending cell.
        for (std::size_t c : {kLiver, kRenal, kCns, kCardio}) {
            parse_int_field(fields[2 + c], row, names[c], 0, 4);
        }
        parse_int_field(fields[2 + kSofa], row, names[kSofa], 0, 24);
        const double worst_sub =
            std::max(std::max(s[kLiver], s[kRenal]), std::max(s[kCns], s[kCardio]));
        if (s[kSofa] < worst_sub) {
            parse_fail(row, names[kSofa], "SOFA below the worst organ subscore");
        }

        ActionPair act;
        act.vaso = parse_int_field(fields[2 + kStateDim], row, "vaso", 0, 2);
        act.fluids = parse_int_field(fields[2 + kStateDim + 1], row, "fluids", 0, 2);

        const std::string& outcome_field = fields[2 + kStateDim + 2];
        if (outcome_field == "DEATH" || outcome_field == "RELEASE") {
            current.outcome = outcome_field == "DEATH" ? Outcome::Death : Outcome::Release;
            current_closed = true;
        } else if (!outcome_field.empty()) {
            parse_fail(row, "outcome", "expected DEATH, RELEASE or blank, got '" + outcome_field + "'");
        }

        current.states.push_back(s);
        current.actions.push_back(act);
    }
    finish_current();
    if (cohort.empty()) throw std::runtime_error("cohort csv: no patients in " + path);
    return cohort;
}

}  // namespace riskball::cohort
