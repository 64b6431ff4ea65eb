// Writes the bundled synthetic 3-layer document (gradient background,
// occluding disk, occluding star) as a manifest plus PNG rasters.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "alv/errors.hpp"
#include "alv/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate the synthetic 3-layer demo fixture"};
    std::string out_dir = "fixture";
    app.add_option("--out", out_dir, "output directory");
    CLI11_PARSE(app, argc, argv);
    try {
        const auto manifest = alv::synthetic::write_three_layer_fixture(out_dir);
        std::printf("wrote %s\n", manifest.string().c_str());
        return 0;
    } catch (const alv::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
}
