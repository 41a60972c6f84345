#include "memdyn/cli.hpp"

int main(int argc, char** argv) { return memdyn::cli::run(argc, argv); }
