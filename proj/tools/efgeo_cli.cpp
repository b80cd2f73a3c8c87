#include "efgeo/cli.hpp"

int main(int argc, char** argv) { return efgeo::cli::run(argc, argv); }
