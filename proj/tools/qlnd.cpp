#include "qlnd/cli.hpp"

#include <cstdio>

int main(int argc, char **argv) {
  try {
    const qlnd::RunConfig cfg = qlnd::parse_config({argv + 1, argv + argc});
    return qlnd::run(cfg);
  } catch (const qlnd::HelpRequested &h) {
    std::fputs(h.what(), stdout);
    return 0;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "qlnd: %s\n", e.what());
    return 1;
  }
}
