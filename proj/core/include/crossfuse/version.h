#ifndef CROSSFUSE_VERSION_H_
#define CROSSFUSE_VERSION_H_

namespace crossfuse {

// Library version, "MAJOR.MINOR.PATCH".
const char* Version();

}  // namespace crossfuse

#endif  // CROSSFUSE_VERSION_H_
