#pragma once

// Full command-line front end; returns the process exit code
// (0 success, 1 runtime/IO error, 2 usage error).
int tanglekit_cli_main(int argc, char** argv);
