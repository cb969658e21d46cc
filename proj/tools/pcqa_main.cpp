#include "cli.hpp"

int main(int argc, char** argv) { return pcqa::cli::run(argc, argv); }
