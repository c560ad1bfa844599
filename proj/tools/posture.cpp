#include "posture/cli.hpp"

int main(int argc, char** argv) { return posture::cli::run(argc, argv); }
