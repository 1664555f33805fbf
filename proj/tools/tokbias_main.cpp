#include "tokbias/cli.hpp"

int main(int argc, char** argv) { return tokbias::cli::run(argc, argv); }
