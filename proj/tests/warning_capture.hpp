#pragma once

#include "qisim/log.hpp"

#include <string>
#include <vector>

// Collects qisim warnings for the lifetime of the object.
struct WarningCapture {
  std::vector<std::string> messages;
  qisim::WarningHandler previous;
  WarningCapture() {
    previous = qisim::set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { qisim::set_warning_handler(previous); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;
};
