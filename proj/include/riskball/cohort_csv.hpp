#pragma once

#include <string>

#include "riskball/state.hpp"

namespace riskball::cohort {

// One row per patient-hour: patient_id, hour (1-based, contiguous), the 27
// observed columns, aux_0..aux_13, vaso, fluids, outcome. The outcome cell is
// DEATH or RELEASE on the final row of a stay and blank elsewhere. UTF-8,
// comma separated, '.' decimal; floats are written in shortest round-trip
// form so load(save(c)) == c exactly.
void save_cohort_csv(const Cohort& cohort, const std::string& path);

Cohort load_cohort_csv(const std::string& path);

const std::string& cohort_csv_header();

// Shortest round-trip float formatting used in every CSV this project writes.
std::string format_double(double v);
double parse_double(const std::string& field, std::size_t row, const std::string& column);

}  // namespace riskball::cohort
