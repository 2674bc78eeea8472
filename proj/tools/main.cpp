#include "amsearch/cli.hpp"

int main(int argc, char** argv) {
    return amsearch::run_cli(argc, argv);
}
