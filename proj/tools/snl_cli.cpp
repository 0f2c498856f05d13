#include "snl/cli.hpp"

int main(int argc, char** argv)
{
  return snl::cli::run(argc, argv);
}
