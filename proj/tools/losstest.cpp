#include "cli.hpp"

int main(int argc, char** argv) { return losstest::cli::run(argc, argv); }
