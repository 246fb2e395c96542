#ifndef FOVEAPANO_EXTERNAL_GENERATOR_H_
#define FOVEAPANO_EXTERNAL_GENERATOR_H_

#include <filesystem>
#include <string>
#include <vector>

#include "generator.h"

// Subprocess protocol for out-of-process generators.
//
// The command template is run through /bin/sh once per image with
// {input}, {output} and {stage} substituted (paths are shell-quoted). If
// the template contains {input_list}, it is run once for the whole batch
// with a file whose lines are "<input>\t<output>". Outputs must be 8-bit
// RGB PNGs of exactly kNetworkSize x kNetworkSize and the exit code must
// be 0.
namespace foveapano {

struct CommandResult {
  int exit_code = 0;
  std::string output;  // combined stdout and stderr
};

CommandResult RunShellCommand(const std::string& command);

std::string ShellQuote(const std::string& text);

// Replaces every occurrence of each placeholder.
std::string SubstitutePlaceholders(const std::string& command_template,
                                   const std::string& input,
                                   const std::string& output,
                                   const std::string& stage,
                                   const std::string& input_list = "");

// Runs the external generator over |inputs|. Outputs are written under
// |work_dir|, or in a temporary directory that is removed before
// returning when |work_dir| is empty. Throws
// kExternalGenerator with the command transcript on any failure.
std::vector<RasterImage> ExternalGenerate(const GeneratorSpec& spec,
                                          const std::vector<std::string>& inputs,
                                          GeneratorStage stage,
                                          const std::filesystem::path& work_dir = {});

// Fresh, uniquely named directory under the system temp directory.
std::filesystem::path MakeTempDirectory(const std::string& prefix);

class ExternalGenerator : public Generator {
 public:
  explicit ExternalGenerator(GeneratorSpec spec);

  GeneratedImage Generate(const RasterImage& input,
                          GeneratorStage stage) const override;
  std::string name() const override { return "external"; }

 private:
  GeneratorSpec spec_;
};

}  // namespace foveapano

#endif  // FOVEAPANO_EXTERNAL_GENERATOR_H_
