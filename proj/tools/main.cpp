#include "cli.hpp"

int main(int argc, char** argv) { return bilab::cli::run(argc, argv); }
