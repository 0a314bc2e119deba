#include "lrgibbs/cli.hpp"

int main(int argc, char** argv) { return lrgibbs::cli::run(argc, argv); }
