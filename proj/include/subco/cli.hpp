#pragma once

namespace subco {

/// Entry point of the `subco` command-line tool. Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace subco
