#pragma once

#include <iosfwd>
#include <string>

#include "stmmmf/model.hpp"

namespace stmmmf {

// Line-oriented text checkpoint:
//   STMMMF 1 <N> <M> <d> <R>
//   N lines of d values (U), M lines of d values (V), N lines of R-1 values (Theta)
// Values are written with 17 significant digits, so a reload is bit-exact.
void save_checkpoint(std::ostream& out, const FactorModel& model);
FactorModel load_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const FactorModel& model);
FactorModel load_checkpoint(const std::string& path);

}  // namespace stmmmf
