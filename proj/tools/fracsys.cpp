#include "cli.hpp"

int main(int argc, char** argv) { return fracsys::cli::run(argc, argv); }
