#pragma once

namespace dinw {

// Entry point behind the dinw binary; also callable in-process from tests.
int run_cli(int argc, const char* const* argv);

}  // namespace dinw
