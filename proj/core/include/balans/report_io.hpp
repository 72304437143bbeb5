#ifndef BALANS_REPORT_IO_HPP
#define BALANS_REPORT_IO_HPP

#include <string>
#include <vector>

namespace balans {

/// Formats a double with 17 significant digits (loss-free round trip).
std::string format_double(double v);

/// Minimal ordered JSON writer. All numbers go through format_double so
/// report files are byte-reproducible across runs.
class JsonWriter {
public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(int v);
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& s);
  JsonWriter& value(const char* s) { return value(std::string(s)); }
  JsonWriter& value(const std::vector<double>& vs);

  const std::string& str() const { return out_; }

private:
  void separator();
  std::string out_;
  std::vector<bool> needs_comma_;
  bool pending_key_ = false;
};

/// Writes text to `path` (LF endings as written); throws IoError on failure.
void write_file(const std::string& path, const std::string& contents);

/// Creates the directory (and parents) if missing; throws IoError.
void ensure_directory(const std::string& path);

} // namespace balans

#endif
