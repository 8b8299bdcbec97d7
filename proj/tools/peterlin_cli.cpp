// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver. Talks to the solver through the C interface only.

#include "peterlin/peterlin.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{
  int report(peterlin_status s, const char* context)
  {
    std::fprintf(stderr, "peterlin: %s: %s (%s)\n", context, peterlin_last_error(), peterlin_status_string(s));
    return s == PETERLIN_ERROR_PARSE || s == PETERLIN_ERROR_VALIDATION ? 2 : 1;
  }

  void log_line(const char* message, void*) { std::fprintf(stderr, "%s\n", message); }

  std::vector<int> split_levels(const std::string& text)
  {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
  }
}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Peterlin viscoelastic flow solver"};
  app.set_version_flag("--version", std::string(peterlin_version()));

  std::string config_path;
  std::optional<std::string> experiment;
  std::optional<int> dim;
  std::optional<std::string> levels;
  std::optional<int> reference;
  std::optional<std::string> out;
  std::optional<int> threads;

  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment, "experiment to run")
      ->check(CLI::IsMember({"paper3d", "paper2d", "equilibrium", "mms"}));
  app.add_option("--dim", dim, "spatial dimension")->check(CLI::IsMember({2, 3}));
  app.add_option("--levels", levels, "comma-separated cells per side, e.g. 2,4,8");
  app.add_option("--reference", reference, "cells per side of the reference run")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "levels run in parallel")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  std::string text;
  if (!config_path.empty())
  {
    std::ifstream is(config_path);
    text.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  }

  peterlin_manifest* manifest = nullptr;
  if (const peterlin_status s = peterlin_manifest_parse(text.c_str(), experiment ? experiment->c_str() : nullptr, &manifest))
    return report(s, config_path.empty() ? "configuration" : config_path.c_str());

  int rc = 0;
  auto check = [&](peterlin_status s, const char* what) {
    if (s != PETERLIN_OK && rc == 0) rc = report(s, what);
  };
  if (dim) check(peterlin_manifest_set_dim(manifest, *dim), "--dim");
  if (levels)
  {
    std::vector<int> lv;
    try
    {
      lv = split_levels(*levels);
    }
    catch (const std::exception&)
    {
      std::fprintf(stderr, "peterlin: --levels: expected integers separated by commas\n");
      peterlin_manifest_destroy(manifest);
      return 2;
    }
    check(peterlin_manifest_set_levels(manifest, lv.data(), lv.size()), "--levels");
  }
  if (reference) check(peterlin_manifest_set_reference(manifest, *reference), "--reference");
  if (out) check(peterlin_manifest_set_output_dir(manifest, out->c_str()), "--out");
  if (threads) check(peterlin_manifest_set_threads(manifest, *threads), "--threads");
  if (rc == 0) check(peterlin_manifest_validate(manifest), "manifest");
  if (rc == 0) check(peterlin_experiment_run(manifest, log_line, nullptr), "experiment");
  peterlin_manifest_destroy(manifest);
  return rc;
}
