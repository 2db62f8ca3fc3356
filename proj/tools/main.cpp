#include "kbahc/cli.hpp"

int main(int argc, char** argv) { return kbahc::cli::run(argc, argv); }
