// Regenerates the bundled fixtures (corpora, manifests, replay files recorded
// over the scenario backend, golden eval report) into a target directory.

#include <cstdio>

#include "memloop/fixtures.hpp"
#include "memloop/log.hpp"

int main(int argc, char** argv) {
    std::string out_dir = "fixtures";
    if (argc > 1) {
        out_dir = argv[1];
    }
    try {
        memloop::fixtures::write_generated_fixtures(out_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fixgen failed: %s\n", e.what());
        return 1;
    }
    std::printf("fixtures written to %s\n", out_dir.c_str());
    return 0;
}
