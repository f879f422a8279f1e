#include "momentctl/cli/app.hpp"

int main(int argc, char** argv) { return momentctl::cli::run(argc, argv); }
