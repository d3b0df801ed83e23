#include "cli.hpp"

int main(int argc, char** argv) { return agestruct::cli::main(argc, argv); }
