#include "tvinfer/cli.hpp"

int main(int argc, char** argv) { return tvinfer::cli::run(argc, argv); }
