#include "crossfuse/version.h"

namespace crossfuse {

const char* Version() { return CROSSFUSE_VERSION_STRING; }

}  // namespace crossfuse
