#pragma once

namespace demine {

// Raises glibc's mmap and trim thresholds so large freed blocks stay on the
// heap. No-op on other C libraries.
void retain_freed_memory();

} // namespace demine
