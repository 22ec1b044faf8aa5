#include "uad/cli/dispatch.hpp"

int main(int argc, char** argv) { return uad::cli::run(argc, argv); }
