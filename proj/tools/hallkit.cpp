#include "hallkit/cli.hpp"

int main(int argc, char** argv) { return hallkit::cli::run(argc, argv); }
