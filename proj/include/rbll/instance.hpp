#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbll/family.hpp"
#include "rbll/settuple.hpp"

namespace rbll {

// Flat key-value instance file: coefficient matrix (row-major), ambient
// dimension, target measures, labels, default seed.
struct Instance {
  std::string name = "instance";
  LinearFamily fam;
  std::vector<double> e;
  std::uint64_t seed = 1;

  MeasureSpec spec() const { return make_measure_spec(e, fam.dim_d); }
};

Instance parse_instance(const std::string& text);
Instance load_instance(const std::string& path);
std::string serialize_instance(const Instance& inst);

// Riesz-Sobolev demo instances used across the test suite.
Instance rs_instance(std::vector<double> e, int d, const std::string& name);

}  // namespace rbll
