#include "bondindiff/cli.hpp"

int main(int argc, char** argv) { return bondindiff::cli::run(argc, argv); }
