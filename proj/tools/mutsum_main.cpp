#include "mutsum/cli.hpp"

int main(int argc, char** argv) { return mutsum::cli::run(argc, argv); }
