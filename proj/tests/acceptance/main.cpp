#include <cstdio>
#include <exception>

#include "qdesign/config.hpp"
#include "qdesign/verification/acceptance.hpp"

int main(int argc, char** argv) {
  try {
    const std::string path = argc > 1 ? argv[1] : QDESIGN_SOURCE_DIR "/config/default.json";
    const auto cfg = qdesign::config::load_config(path);
    int failed = 0;
    qdesign::verification::run_acceptance(cfg, [&](const auto& r) {
      std::printf("%s\n", qdesign::verification::format_line(r).c_str());
      std::fflush(stdout);
      if (!r.pass()) ++failed;
    });
    std::printf("%d of 14 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
