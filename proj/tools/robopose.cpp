#include "robopose/cli.hpp"

int main(int argc, char** argv) { return robopose::cli::run(argc, argv); }
