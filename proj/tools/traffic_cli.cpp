#include "traffic/cli.hpp"

int main(int argc, char** argv) { return traffic::cli::run(argc, argv); }
