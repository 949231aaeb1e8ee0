#include "iashock/cli.hpp"

int main(int argc, char **argv)
{
  return iashock::cli::dispatch(argc, argv);
}
