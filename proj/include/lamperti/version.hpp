#ifndef LAMPERTI_VERSION_HPP
#define LAMPERTI_VERSION_HPP

namespace lamperti {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace lamperti

#endif  // LAMPERTI_VERSION_HPP
