// Copyright 2026 The dprecon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <string_view>

#include "CLI11.hpp"
#include "dprecon/cli.h"

namespace {

const char* Describe(std::string_view command) {
  if (command == "sanitize") return "Sanitize the corpus into records.jsonl";
  if (command == "attack-blackbox") {
    return "Sanitize, reconstruct with an instruction prompt, score";
  }
  if (command == "finetune-export") {
    return "Write (sanitized, original) training pairs from the train split";
  }
  if (command == "attack-whitebox-eval") {
    return "Reconstruct held-out documents with a finetuned model and score";
  }
  if (command == "evaluate") return "Recompute a report from results.jsonl";
  if (command == "sweep") return "Run the attack over budgets x models";
  if (command == "report") return "Merge report.json files into tables";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private text sanitization and reconstruction "
               "attacks"};
  app.require_subcommand(1);
  dprecon::CliOptions opts;
  for (const char* name : dprecon::kCommands) {
    CLI::App* sub = app.add_subcommand(name, Describe(name));
    sub->add_option("--config", opts.config_path, "JSON config file");
    sub->add_option("--out", opts.out, "Run directory");
    sub->add_option("--input", opts.inputs,
                    "Records/results JSONL, or report files and directories");
    sub->add_option("--seed", opts.seed, "RNG seed");
    sub->add_option("--budget", opts.budget, "Epsilon or temperature");
    sub->add_option("--mechanism", opts.mechanism,
                    "word_level, sentence_level_exact or sentence_level_api");
    sub->add_option("--model", opts.model, "Attack or generation model id");
    sub->callback([&opts, sub] { opts.command = sub->get_name(); });
  }
  CLI11_PARSE(app, argc, argv);
  return dprecon::RunCli(opts, std::cout, std::cerr);
}
