#pragma once

#include <iosfwd>
#include <string>

namespace oscar::tools {

struct DemoOptions {
  std::string producer_id = "prod-01";
  std::string resource_path = "/temp";
  std::string capability = "temperature-sensor";
  std::string representation = "21.5C@2026-10-14T12:00Z";
  bool tamper = false;       // flip one ciphertext byte in transit
  bool wrong_scope = false;  // consumer is only authorised for another path
  int timeout_ms = 2000;
};

struct DemoResult {
  bool ok = false;
  std::string failed_step;  // grant | get | response | verify
  std::string detail;
};

// Producer, consumer and Authorization Server exchange real UDP datagrams on
// 127.0.0.1. Writes one line per step to out.
DemoResult run_demo(const DemoOptions& opt, std::ostream& out);

}  // namespace oscar::tools
