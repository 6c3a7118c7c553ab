#include "ftlgan/cli.hpp"

int main(int argc, char** argv) { return ftlgan::cli::run(argc, argv); }
