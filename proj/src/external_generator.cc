#include "external_generator.h"

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.h"
#include "image_io.h"

namespace foveapano {

namespace fs = std::filesystem;

namespace {

void ReplaceAll(std::string& text, const std::string& from, const std::string& to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

[[noreturn]] void Fail(const std::string& what, const std::string& command,
                       const CommandResult& result) {
  std::ostringstream msg;
  msg << "external generator failed: " << what << "\n$ " << command
      << "\n[exit " << result.exit_code << "]\n" << result.output;
  throw Error(ErrorCode::kExternalGenerator, msg.str());
}

RasterImage ReadValidated(const std::string& path, const std::string& command,
                          const CommandResult& result) {
  if (!fs::exists(path)) Fail("missing output file " + path, command, result);
  RasterImage img;
  try {
    img = LoadRgbPngStrict(path);
  } catch (const Error& e) {
    Fail(e.what(), command, result);
  }
  if (img.width() != kNetworkSize || img.height() != kNetworkSize) {
    Fail("output " + path + " is " + std::to_string(img.width()) + "x" +
             std::to_string(img.height()) + ", expected " +
             std::to_string(kNetworkSize) + "x" + std::to_string(kNetworkSize),
         command, result);
  }
  return img;
}

}  // namespace

CommandResult RunShellCommand(const std::string& command) {
  CommandResult result;
  const std::string full = "( " + command + " ) 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (pipe == nullptr) {
    result.exit_code = -1;
    result.output = "popen failed";
    return result;
  }
  std::array<char, 4096> buffer;
  std::size_t n;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  if (status == -1) {
    result.exit_code = -1;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  }
  return result;
}

std::string ShellQuote(const std::string& text) {
  std::string quoted = "'";
  for (char ch : text) {
    if (ch == '\'') {
      quoted += "'\\''";
    } else {
      quoted += ch;
    }
  }
  return quoted + "'";
}

std::string SubstitutePlaceholders(const std::string& command_template,
                                   const std::string& input,
                                   const std::string& output,
                                   const std::string& stage,
                                   const std::string& input_list) {
  std::string cmd = command_template;
  ReplaceAll(cmd, "{input_list}", ShellQuote(input_list));
  ReplaceAll(cmd, "{input}", ShellQuote(input));
  ReplaceAll(cmd, "{output}", ShellQuote(output));
  ReplaceAll(cmd, "{stage}", stage);
  return cmd;
}

fs::path MakeTempDirectory(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  const auto stamp =
      std::chrono::steady_clock::now().time_since_epoch().count();
  for (int attempt = 0; attempt < 100; ++attempt) {
    const fs::path dir = fs::temp_directory_path() /
                         (prefix + "-" + std::to_string(getpid()) + "-" +
                          std::to_string(stamp) + "-" +
                          std::to_string(counter++));
    if (fs::create_directories(dir)) return dir;
  }
  throw Error(ErrorCode::kIo, "cannot create temporary directory");
}

std::vector<RasterImage> ExternalGenerate(const GeneratorSpec& spec,
                                          const std::vector<std::string>& inputs,
                                          GeneratorStage stage,
                                          const fs::path& work_dir) {
  spec.Validate();
  Require(spec.kind == GeneratorKind::kExternal, ErrorCode::kInvalidArgument,
          "generator spec is not external");
  for (const auto& in : inputs) {
    Require(fs::exists(in), ErrorCode::kIo, "generator input not found: " + in);
  }
  const fs::path dir = work_dir.empty() ? MakeTempDirectory("foveapano-gen") : work_dir;
  fs::create_directories(dir);
  // Outputs are decoded before return, so a directory we created can go.
  struct Cleanup {
    fs::path path;
    ~Cleanup() {
      std::error_code ec;
      if (!path.empty()) fs::remove_all(path, ec);
    }
  } cleanup{work_dir.empty() ? dir : fs::path()};
  const std::string stage_name(StageName(stage));

  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const fs::path out = dir / (fs::path(inputs[i]).stem().string() + "_" +
                                stage_name + "_" + std::to_string(i) + ".png");
    fs::remove(out);
    outputs.push_back(out.string());
  }

  std::vector<RasterImage> results;
  if (spec.external_command.find("{input_list}") != std::string::npos) {
    const fs::path list = dir / ("inputs_" + stage_name + ".tsv");
    {
      std::ofstream f(list);
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        f << inputs[i] << '\t' << outputs[i] << '\n';
      }
    }
    const std::string cmd = SubstitutePlaceholders(
        spec.external_command, "", "", stage_name, list.string());
    const CommandResult res = RunShellCommand(cmd);
    if (res.exit_code != 0) Fail("nonzero exit status", cmd, res);
    for (const auto& out : outputs) results.push_back(ReadValidated(out, cmd, res));
    return results;
  }

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string cmd = SubstitutePlaceholders(spec.external_command, inputs[i],
                                                   outputs[i], stage_name);
    const CommandResult res = RunShellCommand(cmd);
    if (res.exit_code != 0) Fail("nonzero exit status", cmd, res);
    results.push_back(ReadValidated(outputs[i], cmd, res));
  }
  return results;
}

ExternalGenerator::ExternalGenerator(GeneratorSpec spec) : spec_(std::move(spec)) {
  spec_.Validate();
}

GeneratedImage ExternalGenerator::Generate(const RasterImage& input,
                                           GeneratorStage stage) const {
  const fs::path dir = MakeTempDirectory("foveapano-ext");
  std::vector<RasterImage> out;
  try {
    const fs::path in = dir / "input.png";
    SavePng(input, in.string());
    out = ExternalGenerate(spec_, {in.string()}, stage, dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    throw;
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return {std::move(out.front()), stage};
}

}  // namespace foveapano
