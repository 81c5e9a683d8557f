#include "pcf/cli.hpp"

int main(int argc, char** argv) { return pcf::cli::run(argc, argv); }
