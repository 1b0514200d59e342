#include "szinterp/parallel.hpp"

namespace szinterp {

namespace {
ExecMode& exec_mode_storage() {
  static ExecMode mode = ExecMode::OpenMP;
  return mode;
}
}  // namespace

ExecMode exec_mode() { return exec_mode_storage(); }
void set_exec_mode(ExecMode mode) { exec_mode_storage() = mode; }

}  // namespace szinterp
