#pragma once

#include <sstream>
#include <string>

namespace eegtriage {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from EEGTRIAGE_LOG (error|warn|info|debug); default is warn.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_line(LogLevel level, const std::string& msg);

namespace detail {
inline void log_fmt(std::ostringstream&) {}
template <typename T, typename... Rest>
void log_fmt(std::ostringstream& os, const T& v, const Rest&... rest) {
    os << v;
    log_fmt(os, rest...);
}
}  // namespace detail

template <typename... Args>
void log_error(const Args&... args) {
    std::ostringstream os;
    detail::log_fmt(os, args...);
    log_line(LogLevel::Error, os.str());
}

template <typename... Args>
void log_warn(const Args&... args) {
    std::ostringstream os;
    detail::log_fmt(os, args...);
    log_line(LogLevel::Warn, os.str());
}

template <typename... Args>
void log_info(const Args&... args) {
    std::ostringstream os;
    detail::log_fmt(os, args...);
    log_line(LogLevel::Info, os.str());
}

template <typename... Args>
void log_debug(const Args&... args) {
    std::ostringstream os;
    detail::log_fmt(os, args...);
    log_line(LogLevel::Debug, os.str());
}

}  // namespace eegtriage
